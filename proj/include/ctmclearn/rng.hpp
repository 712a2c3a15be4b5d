#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "ctmclearn/errors.hpp"
#include "ctmclearn/types.hpp"

namespace ctmclearn {

// mt19937_64 with hand-rolled inverse-CDF transforms. The raw engine output
// is fully specified by the standard and the transforms below avoid
// std::*_distribution, whose draw counts are implementation-defined; the same
// seed therefore yields the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(raw() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Exponential with the given rate (mean 1/rate).
  double exponential(double rate) {
    if (!(rate > 0.0)) throw NonPositiveRate("exponential rate must be > 0");
    return -std::log1p(-uniform()) / rate;
  }

  // Geometric on {1, 2, ...} with Pr[X > t] = (1-p)^t.
  long geometric(double p) {
    if (!(p > 0.0 && p < 1.0))
      throw ConfigError("geometric parameter must lie in (0, 1)");
    const double u = uniform();
    return 1 + static_cast<long>(std::floor(std::log1p(-u) / std::log1p(-p)));
  }

  // Index draw from a probability vector (assumed to sum to ~1).
  int categorical(const Vector& weights) {
    const double u = uniform();
    double cum = 0.0;
    for (Index i = 0; i < weights.size(); ++i) {
      cum += weights(i);
      if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size() - 1);
  }

  // Statistically independent child stream; deterministic in (seed, stream).
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ctmclearn
