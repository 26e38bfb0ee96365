// Serial vs OpenMP kernel comparison: timings plus a bit-identity check.
#include "iae/kernels.hpp"
#include "iae/rng.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <vector>

using clk = std::chrono::steady_clock;

namespace {

double time_ms(const std::function<void()>& f, int reps) {
  f();  // warm-up
  const auto t0 = clk::now();
  for (int i = 0; i < reps; ++i) f();
  const auto t1 = clk::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

} // namespace

int main() {
  iae::Rng rng(42, iae::Stream::Diagnostics);
  const std::size_t sizes[][3] = {{64, 64, 64},   {256, 256, 256},
                                  {1000, 3, 256}, {512, 512, 512}};

  std::printf("%-18s %12s %12s %8s %s\n", "gemm n,k,m", "serial ms", "omp ms",
              "speedup", "bit-identical");
  for (const auto& s : sizes) {
    const std::size_t n = s[0], k = s[1], m = s[2];
    std::vector<double> a(n * k), b(k * m), c1(n * m), c2(n * m);
    for (double& v : a) v = rng.normal();
    for (double& v : b) v = rng.normal();

    const int reps = n * k * m > (std::size_t(1) << 24) ? 3 : 20;
    const double ts = time_ms(
        [&] { iae::kernels::serial::gemm(c1.data(), a.data(), false, b.data(), false,
                                         n, k, m, false); },
        reps);
    const double tp = time_ms(
        [&] { iae::kernels::omp::gemm(c2.data(), a.data(), false, b.data(), false,
                                      n, k, m, false); },
        reps);
    const bool same = std::memcmp(c1.data(), c2.data(), c1.size() * sizeof(double)) == 0;
    std::printf("%4zu,%4zu,%4zu %12.3f %12.3f %7.2fx %s\n", n, k, m, ts, tp, ts / tp,
                same ? "yes" : "NO");
    if (!same) return 1;
  }

  const std::size_t len = 1 << 20;
  std::vector<double> x(len), y1(len), y2(len);
  for (double& v : x) v = rng.normal();
  const double ts = time_ms(
      [&] { iae::kernels::serial::softplus(y1.data(), x.data(), 100.0, len); }, 20);
  const double tp = time_ms(
      [&] { iae::kernels::omp::softplus(y2.data(), x.data(), 100.0, len); }, 20);
  const bool same = std::memcmp(y1.data(), y2.data(), len * sizeof(double)) == 0;
  std::printf("softplus 1M        %12.3f %12.3f %7.2fx %s\n", ts, tp, ts / tp,
              same ? "yes" : "NO");
  return same ? 0 : 1;
}
