#pragma once

#include <cstdint>
#include <random>

namespace iae {

// Named per-purpose RNG streams; toggling one consumer never perturbs the
// draws of another.
enum class Stream : std::uint64_t {
  Init = 0,
  Sphere = 1,
  Latent = 2,
  Shuffle = 3,
  Noise = 4,
  Diagnostics = 5,
};

// mt19937_64 seeded through splitmix64 of (seed, stream). Distributions are
// hand-rolled so sequences are identical across standard libraries.
class Rng {
 public:
  Rng(std::uint64_t seed, Stream stream)
      : Rng(seed, static_cast<std::uint64_t>(stream)) {}
  Rng(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double uniform();
  double uniform(double lo, double hi);
  // standard normal via Box-Muller, one cached value
  double normal();

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

} // namespace iae
