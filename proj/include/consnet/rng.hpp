// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "consnet/tensor.hpp"

namespace consnet {

/// Seeded generator with hand-rolled transforms so that every draw is a pure
/// function of the seed and the call sequence.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  real uniform() {
    return static_cast<real>(next_u64() >> 11) * real(1.0 / 9007199254740992.0);
  }

  real uniform(real lo, real hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (one value per call).
  real normal() {
    real u1 = uniform();
    real u2 = uniform();
    while (u1 <= real(1e-300)) u1 = uniform();
    return std::sqrt(real(-2) * std::log(u1)) *
           std::cos(real(2) * real(3.14159265358979323846) * u2);
  }

  /// Uniform integer in [0, n).
  int uniform_int(int n) {
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      std::swap(v[i], v[uniform_int(i + 1)]);
    }
  }

  std::vector<real> unit_vector(int dim) {
    std::vector<real> v(dim);
    real norm = 0;
    do {
      norm = 0;
      for (auto& x : v) {
        x = normal();
        norm += x * x;
      }
    } while (norm < real(1e-12));
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    return v;
  }

private:
  std::mt19937_64 gen_;
};

}  // namespace consnet
