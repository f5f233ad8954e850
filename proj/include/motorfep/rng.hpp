#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace motorfep {

/// Independent random streams derived from one experiment seed.
///
/// Each consumer draws from its own stream so that, e.g., changing the number
/// of search episodes never shifts the reservoir weights.
enum class Stream : std::uint64_t {
  weights = 1,      ///< reservoir W_r and W_o
  signals = 2,      ///< initial activation signals x_k ~ N(0, 1)
  search = 3,       ///< primitive index sampling and perturbations
  environment = 4,  ///< reserved; the drawing environment is deterministic
  kohonen = 5,      ///< initial Kohonen filters
  dataset = 6,      ///< synthetic handwriting corpus
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seedable generator with platform-independent output.
///
/// std::mt19937_64 has a bit-exact sequence mandated by the standard, but the
/// standard distributions do not, so uniform and normal variates are derived
/// here by hand (53-bit mantissa fill and Box-Muller).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}
  Rng(std::uint64_t seed, Stream stream)
      : engine_(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)))) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), n > 0. Rejection sampling, no modulo bias.
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace motorfep
