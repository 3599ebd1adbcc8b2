#pragma once

// Seeded generators for random test inputs.

#include <cmath>
#include <random>
#include <vector>

#include "warprig/warp_core.hpp"

namespace testing_support {

// Fourier profiles with at most 8 modes, amplitudes decaying like 1/k^2 and
// a mean large enough that f >= 0.1 everywhere.
class ProfileGenerator {
 public:
  explicit ProfileGenerator(unsigned seed) : rng_(seed) {}

  warprig::WarpProfile next() {
    std::uniform_int_distribution<int> modes(1, 8);
    std::uniform_real_distribution<double> amp(-0.5, 0.5), lift(0.0, 1.5);
    const int k = modes(rng_);
    std::vector<double> c(k), s(k);
    double bound = 0.0;
    for (int i = 0; i < k; ++i) {
      const double decay = 1.0 / ((i + 1.0) * (i + 1.0));
      c[i] = amp(rng_) * decay;
      s[i] = amp(rng_) * decay;
      bound += std::abs(c[i]) + std::abs(s[i]);
    }
    return warprig::WarpProfile(0.1 + bound + lift(rng_), c, s);
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

 private:
  std::mt19937 rng_;
};

}  // namespace testing_support
