#pragma once

// Seedable random source with platform-stable output.
//
// std::mt19937_64 is bit-exact by the standard, but the std::*_distribution
// adaptors are implementation-defined. All draws here go through explicit
// transforms so a given seed yields the same stream with any standard library:
//   uniform01  = (next() >> 11) * 2^-53
//   categorical = first index whose cumulative weight exceeds uniform01 * total

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace vqaud {

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Draws an index with probability proportional to weights (non-negative).
  std::size_t categorical(std::span<const double> cumulative) {
    if (cumulative.empty() || !(cumulative.back() > 0.0)) {
      throw std::invalid_argument("categorical: empty or zero-mass distribution");
    }
    const double u = uniform01() * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    return static_cast<std::size_t>(it - cumulative.begin());
  }

  static std::vector<double> cumulative_sum(std::span<const double> weights) {
    std::vector<double> cdf(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] < 0.0) throw std::invalid_argument("categorical: negative weight");
      acc += weights[i];
      cdf[i] = acc;
    }
    return cdf;
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace vqaud
