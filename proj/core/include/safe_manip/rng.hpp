#pragma once

#include <cmath>
#include <cstdint>

namespace safe_manip {

// Deterministic RNG with implementation-defined-free distributions. All
// randomness in the project flows through this type so that a seed pins the
// byte-exact behavior of training, evaluation, and tests on any toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // Warm up so that small seeds do not produce correlated first draws.
    next_u64();
    next_u64();
  }

  // splitmix64 step.
  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [lo, hi] inclusive. Modulo bias is < 2^-32 for the
  // ranges used here (all far below 2^32).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  bool coin() { return (next_u64() & 1ULL) != 0; }

  // Standard normal via Box-Muller; caches the second deviate.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Derives an independent stream for a sub-task. Streams derived with
  // distinct keys are uncorrelated regardless of draw order in the parent.
  static Rng derive(std::uint64_t seed, std::uint64_t key) {
    Rng mix(seed ^ (0x632be59bd9b4e019ULL * (key + 1)));
    return mix;
  }

  // Hashes up to three words into one sub-seed; used to give every episode,
  // iteration, and subsystem its own stream independent of draw order.
  static std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    auto sm = [](std::uint64_t z) {
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      return z ^ (z >> 31);
    };
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    h = sm(h ^ (a + 0x9e3779b97f4a7c15ULL));
    h = sm(h ^ (b * 0xc2b2ae3d27d4eb4fULL + 0x165667b19e3779f9ULL));
    h = sm(h ^ (c * 0x85ebca6bc2b2ae35ULL + 0x27d4eb2f165667c5ULL));
    return h;
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace safe_manip
