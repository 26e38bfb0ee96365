#include "iae/eval.hpp"

#include "iae/data.hpp"
#include "iae/tape.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace iae::eval {

GridTriangulation build_grid(const std::array<double, 2>& lo,
                             const std::array<double, 2>& hi, int k) {
  if (k < 2) throw std::invalid_argument("build_grid: k must be >= 2");
  if (!(hi[0] > lo[0]) || !(hi[1] > lo[1]))
    throw std::invalid_argument("build_grid: degenerate bbox");
  GridTriangulation g;
  g.k = k;
  g.points.resize(std::size_t(k) * k * 2);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const std::size_t idx = (std::size_t(i) * k + j) * 2;
      g.points[idx + 0] = lo[0] + (hi[0] - lo[0]) * double(j) / (k - 1);
      g.points[idx + 1] = lo[1] + (hi[1] - lo[1]) * double(i) / (k - 1);
    }
  auto id = [k](int i, int j) { return i * k + j; };
  for (int i = 0; i + 1 < k; ++i)
    for (int j = 0; j + 1 < k; ++j) {
      // cell split along the (i,j)-(i+1,j+1) diagonal
      g.triangles.push_back({id(i, j), id(i, j + 1), id(i + 1, j + 1)});
      g.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i + 1, j)});
    }
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (j + 1 < k) g.edges.push_back({id(i, j), id(i, j + 1)});
      if (i + 1 < k) g.edges.push_back({id(i, j), id(i + 1, j)});
      if (i + 1 < k && j + 1 < k) g.edges.push_back({id(i, j), id(i + 1, j + 1)});
    }
  return g;
}

IsometryReport edge_ratio_std(const nn::MlpParams& decoder, const GridTriangulation& grid) {
  if (decoder.input_dim() != 2)
    throw std::invalid_argument("edge_ratio_std: decoder latent dim must be 2");
  const int m = grid.k * grid.k;
  const int D = decoder.output_dim();
  std::vector<double> img = nn::forward_eval(decoder, grid.points, m);

  IsometryReport rep;
  rep.edges = grid.edges;
  rep.ratios.reserve(grid.edges.size());
  for (const auto& e : grid.edges) {
    double num = 0.0, den = 0.0;
    for (int c = 0; c < D; ++c) {
      const double d = img[std::size_t(e[0]) * D + c] - img[std::size_t(e[1]) * D + c];
      num += d * d;
    }
    for (int c = 0; c < 2; ++c) {
      const double d = grid.points[std::size_t(e[0]) * 2 + c] -
                       grid.points[std::size_t(e[1]) * 2 + c];
      den += d * d;
    }
    if (den == 0.0) throw std::logic_error("edge_ratio_std: zero-length grid edge");
    rep.ratios.push_back(std::sqrt(num / den));
  }

  double mean = 0.0;
  for (double r : rep.ratios) mean += r;
  mean /= double(rep.ratios.size());
  if (mean > 0.0)
    for (double& r : rep.ratios) r /= mean;
  rep.mean = 1.0;

  double var = 0.0;
  for (double r : rep.ratios) var += (r - 1.0) * (r - 1.0);
  rep.std_dev = std::sqrt(var / double(rep.ratios.size()));
  return rep;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

JacobianReport jacobian_diagnostics(const nn::MlpParams& encoder,
                                    const nn::MlpParams& decoder,
                                    const std::vector<double>& z_samples, int m) {
  const int d = decoder.input_dim();
  const int D = decoder.output_dim();
  JacobianReport rep;
  std::vector<double> all_singulars, ata_devs, bbt_devs, b_at_devs;

  for (int s = 0; s < m; ++s) {
    std::vector<double> z(z_samples.begin() + std::size_t(s) * d,
                          z_samples.begin() + std::size_t(s + 1) * d);
    std::vector<double> fz = nn::forward_eval(decoder, z, 1);

    ad::Tape t0;
    nn::MlpLeaves dec_leaves = nn::make_leaves(t0, decoder);
    nn::MlpLeaves enc_leaves = nn::make_leaves(t0, encoder);
    auto a_flat = ad::explicit_jacobian(t0, nn::as_fn(dec_leaves), z, d);
    auto b_flat = ad::explicit_jacobian(t0, nn::as_fn(enc_leaves), fz, D);

    Eigen::MatrixXd A = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                 Eigen::RowMajor>>(a_flat.data(), D, d);
    Eigen::MatrixXd B = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                 Eigen::RowMajor>>(b_flat.data(), d, D);

    JacobianSample js;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    for (int i = 0; i < svd.singularValues().size(); ++i) {
      js.singular_values.push_back(svd.singularValues()(i));
      all_singulars.push_back(svd.singularValues()(i));
    }
    js.ata_dev = (A.transpose() * A - Eigen::MatrixXd::Identity(d, d)).norm();
    js.bbt_dev = (B * B.transpose() - Eigen::MatrixXd::Identity(d, d)).norm();
    const double a_norm = A.norm();
    js.b_at_dev = a_norm > 0 ? (B - A.transpose()).norm() / a_norm : 0.0;
    ata_devs.push_back(js.ata_dev);
    bbt_devs.push_back(js.bbt_dev);
    b_at_devs.push_back(js.b_at_dev);
    rep.samples.push_back(std::move(js));
  }

  rep.median_singular = median(all_singulars);
  rep.median_ata_dev = median(ata_devs);
  rep.median_bbt_dev = median(bbt_devs);
  rep.median_b_at_dev = median(b_at_devs);
  return rep;
}

void grid_bbox_from_codes(const std::vector<double>& codes, int n,
                          std::array<double, 2>& lo, std::array<double, 2>& hi) {
  if (n < 1) throw std::invalid_argument("grid_bbox_from_codes: no codes");
  lo = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  hi = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 2; ++j) {
      lo[j] = std::min(lo[j], codes[std::size_t(i) * 2 + j]);
      hi[j] = std::max(hi[j], codes[std::size_t(i) * 2 + j]);
    }
  for (int j = 0; j < 2; ++j) {
    double span = hi[j] - lo[j];
    if (span < 1e-6) {
      lo[j] -= 0.5e-6;
      hi[j] += 0.5e-6;
      span = hi[j] - lo[j];
    }
    lo[j] += 0.05 * span;
    hi[j] -= 0.05 * span;
  }
}

void save_isometry_report_csv(const IsometryReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << "edge_i,edge_j,ratio\n";
  char buf[40];
  for (std::size_t i = 0; i < rep.ratios.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", rep.ratios[i]);
    out << rep.edges[i][0] << ',' << rep.edges[i][1] << ',' << buf << '\n';
  }
}

void save_jacobian_report_csv(const JacobianReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << "sample,sigma_max,sigma_min,ata_dev,bbt_dev,b_at_dev\n";
  char buf[160];
  for (std::size_t i = 0; i < rep.samples.size(); ++i) {
    const auto& s = rep.samples[i];
    const double smax = s.singular_values.empty() ? 0 : s.singular_values.front();
    const double smin = s.singular_values.empty() ? 0 : s.singular_values.back();
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g", i, smax, smin,
                  s.ata_dev, s.bbt_dev, s.b_at_dev);
    out << buf << '\n';
  }
}

} // namespace iae::eval
