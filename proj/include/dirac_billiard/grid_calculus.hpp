#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <type_traits>
#include <vector>

#include "errors.hpp"

// Discrete calculus on uniform grids: quadrature, difference operators and
// cumulative integrals. All routines take the grid spacing h explicitly.

namespace dirac_billiard::grid_calculus {

/// Composite Simpson rule; an odd number of intervals ends with a 3/8 panel.
template <class T>
T simpson(std::span<const T> v, double h) {
  const std::size_t n = v.size();
  if (n < 3) throw DomainError("simpson: need at least 3 samples");
  const std::size_t intervals = n - 1;
  const std::size_t simpson_end = (intervals % 2 == 0) ? n - 1 : n - 4;
  T acc{};
  for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) {
    acc += (v[i] + 4.0 * v[i + 1] + v[i + 2]) * (h / 3.0);
  }
  if (intervals % 2 == 1) {
    const std::size_t i = n - 4;
    acc += (v[i] + 3.0 * v[i + 1] + 3.0 * v[i + 2] + v[i + 3]) * (3.0 * h / 8.0);
  }
  return acc;
}

/// Fourth-order first derivative: five-point centered stencil in the
/// interior, five-point one-sided stencils on the two outermost nodes.
template <class T>
std::vector<T> derivative4(std::span<const T> v, double h) {
  const std::size_t n = v.size();
  if (n < 5) throw DomainError("derivative4: need at least 5 samples");
  std::vector<T> d(n);
  const double s = 1.0 / (12.0 * h);
  d[0] = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) * s;
  d[1] = (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) * s;
  for (std::size_t j = 2; j + 2 < n; ++j) {
    d[j] = (v[j - 2] - 8.0 * v[j - 1] + 8.0 * v[j + 1] - v[j + 2]) * s;
  }
  const std::size_t m = n - 1;
  d[m] = (25.0 * v[m] - 48.0 * v[m - 1] + 36.0 * v[m - 2] - 16.0 * v[m - 3] + 3.0 * v[m - 4]) * s;
  d[m - 1] = (3.0 * v[m] + 10.0 * v[m - 1] - 18.0 * v[m - 2] + 6.0 * v[m - 3] - v[m - 4]) * s;
  return d;
}

/// Diagonal-norm summation-by-parts first derivative, fourth order in the
/// interior and second order on the four boundary rows:
///   H D + (H D)^T = diag(-1, 0, ..., 0, 1),
///   H = h diag(17/48, 59/48, 43/48, 49/48, 1, ..., 1, 49/48, 43/48, 59/48, 17/48).
class SbpDerivative {
 public:
  static constexpr std::size_t kMinPoints = 8;

  static constexpr std::array<std::array<double, 6>, 4> kBoundary{{
      {-24.0 / 17.0, 59.0 / 34.0, -4.0 / 17.0, -3.0 / 34.0, 0.0, 0.0},
      {-0.5, 0.0, 0.5, 0.0, 0.0, 0.0},
      {4.0 / 43.0, -59.0 / 86.0, 0.0, 59.0 / 86.0, -4.0 / 43.0, 0.0},
      {3.0 / 98.0, 0.0, -59.0 / 98.0, 0.0, 32.0 / 49.0, -4.0 / 49.0},
  }};
  static constexpr std::array<double, 4> kNormWeights{17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0,
                                                      49.0 / 48.0};

  template <class T>
  static void apply(std::span<const T> v, std::span<T> out, double h) {
    const std::size_t n = v.size();
    if (n < kMinPoints || out.size() != n) {
      throw DomainError("SbpDerivative: need at least 8 grid points");
    }
    const double inv_h = 1.0 / h;
    for (std::size_t i = 0; i < 4; ++i) {
      T lo{};
      T hi{};
      for (std::size_t j = 0; j < 6; ++j) {
        lo += kBoundary[i][j] * v[j];
        hi -= kBoundary[i][j] * v[n - 1 - j];
      }
      out[i] = lo * inv_h;
      out[n - 1 - i] = hi * inv_h;
    }
    constexpr double c1 = 2.0 / 3.0;
    constexpr double c2 = 1.0 / 12.0;
    for (std::size_t i = 4; i + 4 < n; ++i) {
      out[i] = (c1 * (v[i + 1] - v[i - 1]) - c2 * (v[i + 2] - v[i - 2])) * inv_h;
    }
  }

  /// Diagonal of H / h.
  static std::vector<double> norm_weights(std::size_t n) {
    std::vector<double> w(n, 1.0);
    for (std::size_t i = 0; i < 4 && i < n; ++i) {
      w[i] = kNormWeights[i];
      w[n - 1 - i] = kNormWeights[i];
    }
    return w;
  }
};

/// Running integral c[j] = integral_0^{y_j} v dy from samples, using the
/// cubic through four neighbouring nodes on every interval (fourth order).
template <class T>
std::vector<T> cumulative_integral4(std::span<const T> v, double h) {
  const std::size_t n = v.size();
  if (n < 4) throw DomainError("cumulative_integral4: need at least 4 samples");
  std::vector<T> c(n);
  c[0] = T{};
  const double w = h / 24.0;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    T piece;
    if (j == 0) {
      piece = (9.0 * v[0] + 19.0 * v[1] - 5.0 * v[2] + v[3]) * w;
    } else if (j + 2 == n) {
      piece = (9.0 * v[j + 1] + 19.0 * v[j] - 5.0 * v[j - 1] + v[j - 2]) * w;
    } else {
      piece = (-v[j - 1] + 13.0 * v[j] + 13.0 * v[j + 1] - v[j + 2]) * w;
    }
    c[j + 1] = c[j] + piece;
  }
  return c;
}

}  // namespace dirac_billiard::grid_calculus
