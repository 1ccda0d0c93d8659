#pragma once

// Seeded random number generation with distributions implemented here
// rather than taken from <random>: the standard distributions are
// implementation-defined, and experiment reports must agree bitwise across
// standard libraries. The engine itself (mt19937_64) is fully specified.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "ksrobust/error.hpp"

namespace ksrobust {

/// SplitMix64 finalizer. Used for every seed derivation in the project.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of trial `index` under base seed `base`. Pure function, so serial and
/// parallel schedules see the same per-trial streams.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(splitmix64(base) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Independent child stream; advances this generator by one draw.
  Rng split() { return Rng(next_u64()); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1].
  double uniform_open_zero() { return 1.0 - uniform(); }

  /// Unbiased integer in [0, bound).
  std::uint64_t uniform_int(std::uint64_t bound) {
    require(bound > 0, "uniform_int bound must be positive");
    const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via the Marsaglia polar method.
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

  /// Poisson(lambda). Knuth's product method on chunks of rate <= 16 so the
  /// exponential never underflows.
  std::uint64_t poisson(double lambda) {
    require(lambda >= 0.0, "poisson rate must be nonnegative");
    std::uint64_t total = 0;
    while (lambda > 0.0) {
      const double chunk = std::min(lambda, 16.0);
      lambda -= chunk;
      const double limit = std::exp(-chunk);
      double product = uniform_open_zero();
      while (product > limit) {
        ++total;
        product *= uniform_open_zero();
      }
    }
    return total;
  }

  /// Number of failures before the first success of a Bernoulli(p) sequence.
  std::uint64_t geometric(double p) {
    require(p > 0.0 && p <= 1.0, "geometric parameter must be in (0, 1]");
    if (p == 1.0) return 0;
    const double g = std::floor(std::log(uniform_open_zero()) / std::log1p(-p));
    return g > 9.0e18 ? std::uint64_t{9000000000000000000ULL}
                      : static_cast<std::uint64_t>(g);
  }

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = uniform_int(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  /// `count` distinct values from [0, population), in random order.
  std::vector<std::uint32_t> sample_without_replacement(std::uint32_t population,
                                                        std::uint32_t count) {
    require(count <= population, "sample size exceeds population");
    std::vector<std::uint32_t> pool(population);
    std::iota(pool.begin(), pool.end(), 0u);
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::uint32_t j =
          i + static_cast<std::uint32_t>(uniform_int(population - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ksrobust
