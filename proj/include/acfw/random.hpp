#pragma once

#include <acfw/types.hpp>

#include <cmath>
#include <cstdint>
#include <random>

namespace acfw {

// Seeded generators with fully specified arithmetic so that traces replay
// bit-identically across standard libraries. std::normal_distribution is
// implementation-defined, hence the explicit Box-Muller below.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1).
  scalar_t uniform() {
    return static_cast<scalar_t>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  scalar_t uniform(scalar_t lo, scalar_t hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // Rejection sampling keeps the distribution exact for any n.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal via Box-Muller.
  scalar_t normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    scalar_t u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const scalar_t u2 = uniform();
    const scalar_t r = std::sqrt(-2.0 * std::log(u1));
    const scalar_t theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  vector_t normal_vector(index_t n) {
    vector_t v(n);
    for (index_t i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  matrix_t normal_matrix(index_t rows, index_t cols) {
    matrix_t m(rows, cols);
    // Column-major fill order, fixed for reproducibility.
    for (index_t j = 0; j < cols; ++j)
      for (index_t i = 0; i < rows; ++i) m(i, j) = normal();
    return m;
  }

  /// Uniform point on the unit sphere in dimension n.
  vector_t unit_vector(index_t n) {
    vector_t v = normal_vector(n);
    const scalar_t norm = v.norm();
    if (norm == 0.0) {
      v.setZero();
      v[0] = 1.0;
      return v;
    }
    return v / norm;
  }

  /// Random point in the unit simplex (uniform via exponential spacings).
  vector_t simplex_point(index_t n) {
    vector_t w(n);
    for (index_t i = 0; i < n; ++i) {
      scalar_t u;
      do {
        u = uniform();
      } while (u <= 0.0);
      w[i] = -std::log(u);
    }
    return w / w.sum();
  }

 private:
  std::mt19937_64 engine_;
  scalar_t spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace acfw
