#ifndef MISSPEC_RNG_HPP
#define MISSPEC_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>

namespace misspec {

/// SplitMix64 finalizer (Steele, Lea and Flood, 2014).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// Derives an independent stream key from a parent key and an index.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
  return parent ^ splitmix64_mix(index * kGoldenGamma + 0x632BE59BD9B4E019ULL);
}

/// Counter-based SplitMix64: the i-th draw of a stream is
/// mix(key + (i + 1) * golden_gamma), so any draw is addressable without
/// stepping through its predecessors. Streams for rows, trees and
/// replications are keyed with derive_seed.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key, std::uint64_t counter = 0)
      : key_(splitmix64_mix(key)), counter_(counter) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    ++counter_;
    return splitmix64_mix(key_ + counter_ * kGoldenGamma);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  /// Standard normal by the Marsaglia polar method. The spare deviate is
  /// kept so pairs are not wasted.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  /// Uniform integer in [0, n) by Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const __uint128_t m = static_cast<__uint128_t>((*this)()) * n;
      if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
    }
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace misspec

#endif  // MISSPEC_RNG_HPP
