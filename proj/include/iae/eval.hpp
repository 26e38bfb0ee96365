#pragma once

#include "iae/nn.hpp"

#include <array>
#include <string>
#include <vector>

namespace iae::eval {

struct GridTriangulation {
  int k = 0;  // k x k points
  std::vector<double> points;               // (k*k) x 2 row-major
  std::vector<std::array<int, 2>> edges;    // undirected, deduplicated
  std::vector<std::array<int, 3>> triangles;
};

// Regular k x k grid over the bbox, each cell split along one fixed
// diagonal. Edge set = horizontal + vertical + diagonal edges.
GridTriangulation build_grid(const std::array<double, 2>& lo,
                             const std::array<double, 2>& hi, int k);

struct IsometryReport {
  std::vector<double> ratios;  // mean-normalized edge-length ratios l_ij
  double mean = 0.0;           // 1 after normalization
  double std_dev = 0.0;
  std::vector<std::array<int, 2>> edges;  // parallel to ratios
};

// l_ij = ||f(z_i) - f(z_j)|| / ||z_i - z_j|| per edge, rescaled so the mean
// ratio is 1; reports the standard deviation of the normalized ratios.
IsometryReport edge_ratio_std(const nn::MlpParams& decoder, const GridTriangulation& grid);

struct JacobianSample {
  std::vector<double> singular_values;  // of A = df(z), descending
  double ata_dev = 0.0;   // ||A^T A - I||_F
  double bbt_dev = 0.0;   // ||B B^T - I||_F
  double b_at_dev = 0.0;  // ||B - A^T||_F / ||A||_F
};

struct JacobianReport {
  std::vector<JacobianSample> samples;
  double median_singular = 0.0;
  double median_ata_dev = 0.0;
  double median_bbt_dev = 0.0;
  double median_b_at_dev = 0.0;
};

// Per latent sample z: A = df(z), B = dg(f(z)); SVD of A and the deviation
// norms of the first-order isometry/pseudo-inverse conditions.
JacobianReport jacobian_diagnostics(const nn::MlpParams& encoder,
                                    const nn::MlpParams& decoder,
                                    const std::vector<double>& z_samples, int m);

// Axis-aligned bbox of the latent codes, shrunk 5% per side; degenerate
// boxes are eps-inflated.
void grid_bbox_from_codes(const std::vector<double>& codes, int n,
                          std::array<double, 2>& lo, std::array<double, 2>& hi);

void save_isometry_report_csv(const IsometryReport& rep, const std::string& path);
void save_jacobian_report_csv(const JacobianReport& rep, const std::string& path);

double median(std::vector<double> v);

} // namespace iae::eval
