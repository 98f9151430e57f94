#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>

namespace rgap {

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
///
/// Nodes are the roots of P_n, found by Newton iteration from the Chebyshev-like
/// initial guesses cos(pi (i + 3/4) / (n + 1/2)).
template <typename Scalar, std::size_t n>
struct GaussLegendre {
  std::array<Scalar, n> nodes{};
  std::array<Scalar, n> weights{};

  GaussLegendre() {
    const Scalar pi = std::numbers::pi_v<Scalar>;
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
      Scalar x = std::cos(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
      Scalar dp = 0;
      for (int it = 0; it < 100; ++it) {
        Scalar p0 = 1;
        Scalar p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
          const Scalar pk = ((2 * Scalar(k) - 1) * x * p1 - (Scalar(k) - 1) * p0) / Scalar(k);
          p0 = p1;
          p1 = pk;
        }
        dp = Scalar(n) * (x * p1 - p0) / (x * x - 1);
        const Scalar dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) <= 4 * std::numeric_limits<Scalar>::epsilon()) break;
      }
      // one more derivative evaluation at the converged node
      Scalar p0 = 1;
      Scalar p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const Scalar pk = ((2 * Scalar(k) - 1) * x * p1 - (Scalar(k) - 1) * p0) / Scalar(k);
        p0 = p1;
        p1 = pk;
      }
      dp = Scalar(n) * (x * p1 - p0) / (x * x - 1);
      const Scalar w = 2 / ((1 - x * x) * dp * dp);
      nodes[i] = -x;
      nodes[n - 1 - i] = x;
      weights[i] = w;
      weights[n - 1 - i] = w;
    }
  }

  /// Integral of f over [a, b].
  template <typename F>
  Scalar integrate(F&& f, Scalar a, Scalar b) const {
    const Scalar mid = (a + b) / 2;
    const Scalar half = (b - a) / 2;
    Scalar sum = 0;
    for (std::size_t i = 0; i < n; ++i) sum += weights[i] * f(mid + half * nodes[i]);
    return sum * half;
  }
};

}  // namespace rgap
