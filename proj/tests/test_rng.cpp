#include "iae/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace iae;

TEST_CASE("same seed and stream reproduce the sequence") {
  Rng a(123, Stream::Sphere), b(123, Stream::Sphere);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
  Rng c(123, Stream::Sphere), d(123, Stream::Sphere);
  for (int i = 0; i < 100; ++i) CHECK(c.normal() == d.normal());
}

TEST_CASE("streams are independent") {
  Rng a(123, Stream::Sphere), b(123, Stream::Latent), c(124, Stream::Sphere);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 64; ++i) {
    const auto x = a.next_u64();
    same_ab += x == b.next_u64();
    same_ac += x == c.next_u64();
  }
  CHECK(same_ab == 0);
  CHECK(same_ac == 0);
}

TEST_CASE("uniform range and first moments") {
  Rng rng(5, Stream::Diagnostics);
  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sumsq += u * u;
  }
  // mean 1/2 (se ~ 0.0009), second moment 1/3
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sumsq / n == doctest::Approx(1.0 / 3.0).epsilon(0.02));

  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(-2.0, 3.0);
    CHECK(u >= -2.0);
    CHECK(u < 3.0);
  }
}

TEST_CASE("normal moments") {
  Rng rng(5, Stream::Noise);
  const int n = 100000;
  double m1 = 0.0, m2 = 0.0, m4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    m1 += x;
    m2 += x * x;
    m4 += x * x * x * x;
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  CHECK(std::abs(m1) < 0.02);                       // se ~ 0.003
  CHECK(m2 == doctest::Approx(1.0).epsilon(0.03));  // se ~ 0.0045
  CHECK(m4 == doctest::Approx(3.0).epsilon(0.1));   // kurtosis check, se ~ 0.03
}

TEST_CASE("below is bounded and roughly uniform") {
  Rng rng(9, Stream::Shuffle);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = rng.below(7);
    REQUIRE(v < 7);
    ++counts[v];
  }
  for (int c : counts) {
    CHECK(c > 9000);  // expected 10000, sd ~ 97
    CHECK(c < 11000);
  }
  CHECK(rng.below(1) == 0);
}
