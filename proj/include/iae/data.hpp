#pragma once

#include "iae/rng.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace iae::data {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Dataset {
  std::vector<double> points;  // n x dim row-major
  int n = 0;
  int dim = 0;
  std::string name;
  std::string generator_params;  // provenance, free-form "key=value;..."
  // Ground-truth parameterization when generated (n x intrinsic_dim).
  std::vector<double> intrinsic_coords;
  int intrinsic_dim = 0;

  double diameter() const;  // max pairwise distance, exact O(n^2)
};

// (t cos t, h, t sin t), t ~ U[1.5pi, 4.5pi], h ~ U[0, 10].
// Intrinsic coords (arclength s(t), h), an exact isometric chart.
// area_uniform: draw t with density proportional to speed, so the surface
// is sampled area-uniformly instead of parameter-uniformly.
Dataset gen_swiss_roll(int n, Rng& rng, bool area_uniform = false);

// (sin t, h, sign(t)(cos t - 1)), t ~ U[-1.5pi, 1.5pi], h ~ U[0, 2].
// Unit speed in t, so (t, h) is an exact isometric chart.
Dataset gen_s_shape(int n, Rng& rng);

// Unit-sphere cap: polar angle area-uniform on [0, 2pi/3], azimuth uniform.
// No exact planar isometric chart; intrinsic coords left empty.
Dataset gen_open_sphere(int n, Rng& rng);

Dataset generate(const std::string& name, int n, std::uint64_t seed,
                 bool area_uniform = false);

// Arc length of the swiss-roll spine: integral of sqrt(1 + tau^2) from t0.
double swiss_roll_arclength(double t0, double t);

// Uniform rescale so the longest bounding-box side becomes 1. One common
// factor for every coordinate (and the intrinsic chart), so isometric
// structure is preserved up to global scale. Returns the factor applied.
double scale_to_unit_box(Dataset& ds);

// CSV, one point per row, 17 significant digits, no locale dependence.
void save_csv(const std::vector<double>& matrix, int n, int dim,
              const std::string& path, bool header = false,
              const std::vector<std::string>& column_names = {});
std::vector<double> load_csv(const std::string& path, int* n, int* dim,
                             bool header = false);

Dataset load_dataset_csv(const std::string& path, bool header = false);
void save_dataset_csv(const Dataset& ds, const std::string& path, bool header = false);

} // namespace iae::data
