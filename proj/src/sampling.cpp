#include "iae/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace iae::sampling {

std::vector<double> sample_sphere(Rng& rng, int d, int m) {
  if (d < 1 || m < 1) throw std::invalid_argument("sample_sphere: d and m must be >= 1");
  std::vector<double> out(std::size_t(m) * d);
  for (int i = 0; i < m; ++i) {
    double* row = out.data() + std::size_t(i) * d;
    double norm2;
    do {
      norm2 = 0.0;
      for (int j = 0; j < d; ++j) {
        row[j] = rng.normal();
        norm2 += row[j] * row[j];
      }
    } while (norm2 == 0.0);
    const double inv = 1.0 / std::sqrt(norm2);
    for (int j = 0; j < d; ++j) row[j] *= inv;
  }
  return out;
}

LatentSampler fit_latent_sampler(const std::vector<double>& codes, int n, int d,
                                 LatentMode mode, double eps) {
  if (n < 2) throw std::invalid_argument("fit_latent_sampler: need at least 2 codes");
  if (codes.size() != std::size_t(n) * d)
    throw std::invalid_argument("fit_latent_sampler: codes size mismatch");
  LatentSampler s;
  s.mode = mode;
  s.dim = d;
  if (mode == LatentMode::UniformBox) {
    s.lo.assign(d, std::numeric_limits<double>::infinity());
    s.hi.assign(d, -std::numeric_limits<double>::infinity());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) {
        const double v = codes[std::size_t(i) * d + j];
        s.lo[j] = std::min(s.lo[j], v);
        s.hi[j] = std::max(s.hi[j], v);
      }
    for (int j = 0; j < d; ++j)
      if (s.hi[j] - s.lo[j] < eps) {
        s.lo[j] -= 0.5 * eps;
        s.hi[j] += 0.5 * eps;
      }
  } else {
    s.mean.assign(d, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) s.mean[j] += codes[std::size_t(i) * d + j];
    for (double& v : s.mean) v /= n;
    // sample covariance (unbiased), variance floor eps on the diagonal
    std::vector<double> cov(std::size_t(d) * d, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j)
        for (int l = 0; l <= j; ++l)
          cov[std::size_t(j) * d + l] += (codes[std::size_t(i) * d + j] - s.mean[j]) *
                                         (codes[std::size_t(i) * d + l] - s.mean[l]);
    for (int j = 0; j < d; ++j)
      for (int l = 0; l <= j; ++l) {
        cov[std::size_t(j) * d + l] /= (n - 1);
        cov[std::size_t(l) * d + j] = cov[std::size_t(j) * d + l];
      }
    for (int j = 0; j < d; ++j)
      cov[std::size_t(j) * d + j] = std::max(cov[std::size_t(j) * d + j], eps);
    // Cholesky with a diagonal bump if the matrix is not strictly PD
    s.chol.assign(std::size_t(d) * d, 0.0);
    for (int j = 0; j < d; ++j) {
      for (int l = 0; l <= j; ++l) {
        double sum = cov[std::size_t(j) * d + l];
        for (int t = 0; t < l; ++t)
          sum -= s.chol[std::size_t(j) * d + t] * s.chol[std::size_t(l) * d + t];
        if (l == j)
          s.chol[std::size_t(j) * d + j] = std::sqrt(std::max(sum, eps * eps));
        else
          s.chol[std::size_t(j) * d + l] = sum / s.chol[std::size_t(l) * d + l];
      }
    }
  }
  return s;
}

std::vector<double> sample_latent(const LatentSampler& s, Rng& rng, int m) {
  if (s.dim < 1) throw std::invalid_argument("sample_latent: sampler not fitted");
  const int d = s.dim;
  std::vector<double> out(std::size_t(m) * d);
  if (s.mode == LatentMode::UniformBox) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < d; ++j)
        out[std::size_t(i) * d + j] = rng.uniform(s.lo[j], s.hi[j]);
  } else {
    std::vector<double> z(d);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < d; ++j) z[j] = rng.normal();
      for (int j = 0; j < d; ++j) {
        double v = s.mean[j];
        for (int l = 0; l <= j; ++l) v += s.chol[std::size_t(j) * d + l] * z[l];
        out[std::size_t(i) * d + j] = v;
      }
    }
  }
  return out;
}

} // namespace iae::sampling
