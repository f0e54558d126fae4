#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace redistrict {

/// SplitMix64 finalizer; used to derive independent substream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seeded random stream. All draws are computed from raw 64-bit engine
/// output so sequences are identical across standard library vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

  /// Deterministic child stream keyed by (seed, a, b).
  static Rng substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return Rng(mix_seed(mix_seed(seed ^ mix_seed(a + 1)) ^ mix_seed(b + 0x51ed27)));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, n). n must be positive.
  std::uint64_t index(std::uint64_t n) {
    // Lemire-style rejection on the top bits keeps the draw unbiased.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Two-sided geometric draw: P(k) proportional to alpha^|k|, alpha in [0, 1).
  std::int64_t two_sided_geometric(double alpha) {
    if (alpha <= 0.0) return 0;
    return geometric(alpha) - geometric(alpha);
  }

 private:
  // Number of failures before the first success when P(failure) = alpha.
  std::int64_t geometric(double alpha) {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return static_cast<std::int64_t>(std::floor(std::log(u) / std::log(alpha)));
  }

  std::mt19937_64 engine_;
};

}  // namespace redistrict
