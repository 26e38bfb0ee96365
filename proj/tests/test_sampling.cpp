#include "iae/sampling.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace iae;

TEST_CASE("sphere samples have unit norm and zero mean") {
  Rng rng(1, Stream::Sphere);
  const int d = 3, m = 20000;
  auto u = sampling::sample_sphere(rng, d, m);
  REQUIRE(u.size() == std::size_t(d) * m);

  std::vector<double> mean(d, 0.0);
  std::vector<double> second(d, 0.0);
  for (int i = 0; i < m; ++i) {
    double n2 = 0.0;
    for (int j = 0; j < d; ++j) {
      const double v = u[std::size_t(i) * d + j];
      n2 += v * v;
      mean[j] += v;
      second[j] += v * v;
    }
    CHECK(std::sqrt(n2) == doctest::Approx(1.0).epsilon(1e-10));
  }
  for (int j = 0; j < d; ++j) {
    CHECK(std::abs(mean[j] / m) < 0.02);  // se ~ 0.004
    // isotropy: E[u_j^2] = 1/d
    CHECK(second[j] / m == doctest::Approx(1.0 / d).epsilon(0.05));
  }
}

TEST_CASE("uniform box fit brackets the codes and samples stay inside") {
  Rng rng(2, Stream::Latent);
  const int n = 500, d = 2;
  std::vector<double> codes(std::size_t(n) * d);
  for (int i = 0; i < n; ++i) {
    codes[std::size_t(i) * d + 0] = rng.uniform(-3.0, 5.0);
    codes[std::size_t(i) * d + 1] = rng.uniform(10.0, 11.0);
  }
  auto s = sampling::fit_latent_sampler(codes, n, d, sampling::LatentMode::UniformBox);
  CHECK(s.lo[0] >= -3.0 - 1e-9);
  CHECK(s.hi[0] <= 5.0 + 1e-9);
  CHECK(s.lo[1] >= 10.0 - 1e-9);
  CHECK(s.hi[1] <= 11.0 + 1e-9);

  auto z = sampling::sample_latent(s, rng, 1000);
  for (int i = 0; i < 1000; ++i)
    for (int j = 0; j < d; ++j) {
      CHECK(z[std::size_t(i) * d + j] >= s.lo[j]);
      CHECK(z[std::size_t(i) * d + j] <= s.hi[j]);
    }
}

TEST_CASE("degenerate coordinate gets inflated instead of collapsing") {
  const int n = 10, d = 2;
  std::vector<double> codes(std::size_t(n) * d);
  for (int i = 0; i < n; ++i) {
    codes[std::size_t(i) * d + 0] = 7.0;  // constant
    codes[std::size_t(i) * d + 1] = double(i);
  }
  auto s = sampling::fit_latent_sampler(codes, n, d, sampling::LatentMode::UniformBox);
  CHECK(s.hi[0] > s.lo[0]);
  Rng rng(3, Stream::Latent);
  auto z = sampling::sample_latent(s, rng, 10);
  for (double v : z) CHECK(std::isfinite(v));

  auto g = sampling::fit_latent_sampler(codes, n, d, sampling::LatentMode::GaussianFit);
  auto zg = sampling::sample_latent(g, rng, 10);
  for (double v : zg) CHECK(std::isfinite(v));
}

TEST_CASE("gaussian fit recovers mean and covariance of gaussian codes") {
  Rng rng(4, Stream::Latent);
  const int n = 40000, d = 2;
  // codes ~ N(mu, Sigma) with Sigma = L L^T, L = [[2,0],[1,0.5]]
  const double mu0 = 1.0, mu1 = -2.0;
  std::vector<double> codes(std::size_t(n) * d);
  for (int i = 0; i < n; ++i) {
    const double g0 = rng.normal(), g1 = rng.normal();
    codes[std::size_t(i) * d + 0] = mu0 + 2.0 * g0;
    codes[std::size_t(i) * d + 1] = mu1 + 1.0 * g0 + 0.5 * g1;
  }
  auto s = sampling::fit_latent_sampler(codes, n, d, sampling::LatentMode::GaussianFit);
  CHECK(s.mean[0] == doctest::Approx(mu0).epsilon(0.03));
  CHECK(s.mean[1] == doctest::Approx(mu1).epsilon(0.03));
  // chol is lower-triangular with positive diagonal, so it should match L
  CHECK(s.chol[0] == doctest::Approx(2.0).epsilon(0.03));
  CHECK(s.chol[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.chol[2] == doctest::Approx(1.0).epsilon(0.05));
  CHECK(s.chol[3] == doctest::Approx(0.5).epsilon(0.05));

  // samples drawn from the fit reproduce the fitted moments
  auto z = sampling::sample_latent(s, rng, 40000);
  double m0 = 0.0, m1 = 0.0, c00 = 0.0, c01 = 0.0, c11 = 0.0;
  for (int i = 0; i < 40000; ++i) {
    m0 += z[std::size_t(i) * 2];
    m1 += z[std::size_t(i) * 2 + 1];
  }
  m0 /= 40000;
  m1 /= 40000;
  for (int i = 0; i < 40000; ++i) {
    const double a = z[std::size_t(i) * 2] - m0;
    const double b = z[std::size_t(i) * 2 + 1] - m1;
    c00 += a * a;
    c01 += a * b;
    c11 += b * b;
  }
  CHECK(m0 == doctest::Approx(mu0).epsilon(0.05));
  CHECK(c00 / 40000 == doctest::Approx(4.0).epsilon(0.05));
  CHECK(c01 / 40000 == doctest::Approx(2.0).epsilon(0.05));
  CHECK(c11 / 40000 == doctest::Approx(1.25).epsilon(0.05));
}
