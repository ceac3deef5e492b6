#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>

#include "boundary_law.hpp"
#include "errors.hpp"

// Exact modes of the massless Dirac particle in a box whose right wall moves
// as L(t) = a t + b.
//
// Working equations on y = x/L(t) with the separation psi = exp(-i lambda tau) (f, g):
//
//    g' + i a y f' = lambda f
//   -f' + i a y g' = lambda g
//
// with f(0) = f(1) = 0. The regular solutions are built from the unimodular
// powers u = (1 - a y)^(-i lambda/a) and v = (1 + a y)^(-i lambda/a):
//
//   f = M (u - v),   g = -i M (u + v).

namespace dirac_billiard {

/// Analytic eigenmode of the linearly moving box. n ranges over nonzero
/// integers; negative n gives the negative-energy branch.
struct Mode1D {
  int n = 1;
  double rate = 0.0;    // a
  double offset = 1.0;  // b = L(0)
  double lambda = 0.0;
  double norm_const = 0.0;  // M
};

/// Box eigenmode at rest: A (sin k x, -cos k x), energy +k.
struct StaticMode {
  int n = 1;
  double length = 1.0;
  double wavenumber = 0.0;
  double energy = 0.0;
  double amplitude = 0.0;
};

namespace detail {

inline void check_rate(double a, const char* who) {
  if (!(std::abs(a) < 1.0) || a == 0.0) {
    throw DomainError(std::string(who) + ": wall rate must satisfy 0 < |a| < 1");
  }
}

/// (1 + s y)^(-i lambda / a) via the real logarithm; the base is positive.
inline Complex unimodular_power(double lambda, double a, double sy) {
  return std::exp(Complex(0.0, -lambda / a * std::log1p(sy)));
}

}  // namespace detail

/// lambda_n = 2 pi n a / ln((1+a)/(1-a)) = pi n a / artanh(a).
inline double eigenvalue_1d(int n, double a) {
  detail::check_rate(a, "eigenvalue_1d");
  if (n == 0) throw DomainError("eigenvalue_1d: n must be nonzero");
  return kPi * static_cast<double>(n) * a / std::atanh(a);
}

/// ((1-a)/2)^(-i lambda/a) - ((1+a)/2)^(-i lambda/a); vanishes on the spectrum
/// and at the trivial point lambda = 0.
inline Complex quantization_residual_1d(double lambda, double a) {
  detail::check_rate(a, "quantization_residual_1d");
  const double k = -lambda / a;
  return std::exp(Complex(0.0, k * std::log((1.0 - a) / 2.0))) -
         std::exp(Complex(0.0, k * std::log((1.0 + a) / 2.0)));
}

/// Mode with M fixed so that b * integral_0^1 (|f|^2 + |g|^2) dy = 1. Since
/// |f|^2 + |g|^2 = 4 M^2 identically, M = 1 / (2 sqrt(b)).
inline Mode1D make_mode_1d(int n, double a, double b = 1.0) {
  if (!(b > 0.0)) throw DomainError("make_mode_1d: initial length b must be positive");
  return Mode1D{n, a, b, eigenvalue_1d(n, a), 0.5 / std::sqrt(b)};
}

inline Spinor2 eigenmode_1d(const Mode1D& mode, double y) {
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("eigenmode_1d: y must lie in [0, 1]");
  const Complex u = detail::unimodular_power(mode.lambda, mode.rate, -mode.rate * y);
  const Complex v = detail::unimodular_power(mode.lambda, mode.rate, mode.rate * y);
  const double M = mode.norm_const;
  return {M * (u - v), Complex(0.0, -M) * (u + v)};
}

/// Max-norm over interior nodes of the separated-system residual, using
/// second-order centered differences.
inline double system_residual_1d(double lambda, double a, std::span<const Complex> f,
                                 std::span<const Complex> g, double h) {
  if (f.size() < 3 || f.size() != g.size()) {
    throw DomainError("system_residual_1d: need matching profiles with >= 3 points");
  }
  const Complex iay_unit(0.0, a);
  double worst = 0.0;
  for (std::size_t j = 1; j + 1 < f.size(); ++j) {
    const double y = static_cast<double>(j) * h;
    const Complex df = (f[j + 1] - f[j - 1]) / (2.0 * h);
    const Complex dg = (g[j + 1] - g[j - 1]) / (2.0 * h);
    const Complex r1 = dg + iay_unit * y * df - lambda * f[j];
    const Complex r2 = -df + iay_unit * y * dg - lambda * g[j];
    worst = std::max({worst, std::abs(r1), std::abs(r2)});
  }
  return worst;
}

/// tau(t) for the linear wall of a mode.
inline double mode_rescaled_time(const Mode1D& mode, double t) {
  return std::log1p(mode.rate * t / mode.offset) / mode.rate;
}

/// Psi(t, x) = exp(-i lambda tau(t)) (f, g)(x / (a t + b)).
inline Spinor2 mode_solution_1d(const Mode1D& mode, double t, double x) {
  const double L = mode.rate * t + mode.offset;
  if (!(L > 0.0)) throw DomainError("mode_solution_1d: wall has collapsed (a t + b <= 0)");
  const double slack = 1e-14 * L;
  if (!(x >= -slack && x <= L + slack)) {
    throw DomainError("mode_solution_1d: x outside the box [0, L(t)]");
  }
  const double y = std::clamp(x / L, 0.0, 1.0);
  const Complex phase = std::exp(Complex(0.0, -mode.lambda * mode_rescaled_time(mode, t)));
  const Spinor2 s = eigenmode_1d(mode, y);
  return {phase * s.c1, phase * s.c2};
}

inline StaticMode make_static_mode(int n, double L) {
  if (n < 1) throw DomainError("make_static_mode: n must be a positive integer");
  if (!(L > 0.0)) throw DomainError("make_static_mode: length must be positive");
  const double k = kPi * static_cast<double>(n) / L;
  return StaticMode{n, L, k, k, 1.0 / std::sqrt(L)};
}

inline Spinor2 static_mode_eval(const StaticMode& sm, double x) {
  if (!(x >= 0.0 && x <= sm.length)) {
    throw DomainError("static_mode_eval: x outside [0, L]");
  }
  return {Complex(sm.amplitude * std::sin(sm.wavenumber * x), 0.0),
          Complex(-sm.amplitude * std::cos(sm.wavenumber * x), 0.0)};
}

}  // namespace dirac_billiard
