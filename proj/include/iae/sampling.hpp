#pragma once

#include "iae/rng.hpp"

#include <stdexcept>
#include <vector>

namespace iae::sampling {

// Uniform draws on the unit (d-1)-sphere: gaussian vectors normalized to
// unit norm. Returns m rows of d, row-major.
std::vector<double> sample_sphere(Rng& rng, int d, int m);

enum class LatentMode { UniformBox, GaussianFit };

// Latent prior for the isometry loss, fit to the encoder's codes.
struct LatentSampler {
  LatentMode mode = LatentMode::UniformBox;
  int dim = 0;
  // UniformBox
  std::vector<double> lo, hi;
  // GaussianFit: mean + lower-triangular Cholesky factor of the covariance
  std::vector<double> mean;
  std::vector<double> chol;  // d x d row-major, lower triangular
};

// Fits from n x d latent codes. Degenerate (zero-variance) coordinates get
// their range/variance inflated by eps so sampling stays well defined.
LatentSampler fit_latent_sampler(const std::vector<double>& codes, int n, int d,
                                 LatentMode mode, double eps = 1e-6);

// m iid draws, row-major m x d.
std::vector<double> sample_latent(const LatentSampler& s, Rng& rng, int m);

} // namespace iae::sampling
