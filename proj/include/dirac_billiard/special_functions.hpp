#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "errors.hpp"

namespace dirac_billiard {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Gauss hypergeometric series
// ---------------------------------------------------------------------------

/// Parameters of 2F1(alpha, beta; gamma; z) restricted to real |z| < 1.
struct HypParams {
  Complex alpha;
  Complex beta;
  Complex gamma;
  double z = 0.0;
};

struct SeriesResult {
  Complex value;
  double error = 0.0;  // tail bound plus accumulated rounding
  std::size_t terms = 0;
};

inline constexpr double kHypTolFloor = 1e-15;
inline constexpr std::size_t kHypMaxTerms = 1'000'000;

namespace detail {

inline bool is_nonpositive_integer(Complex c) {
  if (c.imag() != 0.0) return false;
  const double r = c.real();
  return r <= 0.0 && r == std::floor(r);
}

}  // namespace detail

/// Plain power series of 2F1 inside the unit disk.
///
/// Summation stops once two successive terms are both below
/// `tol * |partial sum|`. The term recurrence multiplies (alpha+k)(beta+k)
/// as a single symmetric product, so swapping alpha and beta gives a
/// bit-identical result.
inline SeriesResult hyp2f1(const HypParams& p, double tol = kHypTolFloor) {
  if (!(tol >= kHypTolFloor)) {
    throw DomainError("hyp2f1: tolerance must be >= 1e-15");
  }
  if (detail::is_nonpositive_integer(p.gamma)) {
    throw DomainError("hyp2f1: gamma is a nonpositive integer (pole)");
  }
  if (!(std::abs(p.z) < 1.0)) {
    throw DomainError("hyp2f1: series requires |z| < 1");
  }

  SeriesResult out;
  Complex term{1.0, 0.0};
  Complex sum{1.0, 0.0};
  double abs_sum_of_terms = 1.0;
  int small_in_a_row = 0;
  double last_ratio = std::abs(p.z);

  for (std::size_t k = 0; k < kHypMaxTerms; ++k) {
    const double kk = static_cast<double>(k);
    const Complex num = (p.alpha + kk) * (p.beta + kk);
    const Complex den = (p.gamma + kk) * (kk + 1.0);
    const Complex next = term * (num / den) * p.z;
    if (std::abs(term) > 0.0) last_ratio = std::abs(next) / std::abs(term);
    term = next;
    sum += term;
    abs_sum_of_terms += std::abs(term);
    if (!std::isfinite(sum.real()) || !std::isfinite(sum.imag())) {
      throw NumericalFailure("hyp2f1: series overflow");
    }
    if (std::abs(term) <= tol * std::abs(sum)) {
      if (++small_in_a_row == 2) {
        out.terms = k + 2;
        const double r = std::min(std::max(last_ratio, std::abs(p.z)), 0.999);
        out.value = sum;
        out.error = std::abs(term) * r / (1.0 - r) +
                    4.0 * std::numeric_limits<double>::epsilon() * abs_sum_of_terms;
        return out;
      }
    } else {
      small_in_a_row = 0;
    }
  }
  throw NumericalFailure("hyp2f1: no convergence within 1e6 terms");
}

/// Closed form of F(alpha, alpha + 1/2; 3/2; z^2):
///   [(1+z)^(1-2alpha) - (1-z)^(1-2alpha)] / (2 z (1 - 2alpha)).
/// alpha = 1/2 falls back to the limit artanh(z)/z, z = 0 to 1.
inline Complex hyp2f1_halfgamma_oracle(Complex alpha, double z) {
  if (!(std::abs(z) < 1.0)) {
    throw DomainError("hyp2f1_halfgamma_oracle: requires |z| < 1");
  }
  if (z == 0.0) return {1.0, 0.0};
  const Complex e = 1.0 - 2.0 * alpha;
  if (e == Complex{0.0, 0.0}) return {std::atanh(z) / z, 0.0};
  const Complex up = std::exp(e * std::log1p(z));
  const Complex dn = std::exp(e * std::log1p(-z));
  return (up - dn) / (2.0 * z * e);
}

// ---------------------------------------------------------------------------
// Quadrature and scalar root finding
// ---------------------------------------------------------------------------

struct QuadratureResult {
  Complex value;
  double error = 0.0;
};

/// Adaptive 15-point Gauss-Kronrod with recursive bisection. If that does not
/// converge (typically an integrable endpoint singularity s^p, p > -1) the
/// real and imaginary parts are redone with tanh-sinh, which clusters nodes
/// at the endpoints without ever sampling them.
template <class Fn>
QuadratureResult integrate_adaptive(Fn&& fn, double lo, double hi, double tol,
                                    unsigned max_depth = 15) {
  using boost::math::quadrature::gauss_kronrod;
  auto wrapped = [&fn](double s) -> Complex { return Complex(fn(s)); };
  if (lo == hi) return {};
  auto converged = [tol](Complex v, double err, double l1) {
    return std::isfinite(v.real()) && std::isfinite(v.imag()) &&
           err <= tol * std::max(l1, std::abs(v)) * 10.0;
  };
  double err = 0.0;
  double l1 = 0.0;
  const Complex value =
      gauss_kronrod<double, 15>::integrate(wrapped, lo, hi, max_depth, tol, &err, &l1);
  if (converged(value, err, l1)) return {value, err};

  boost::math::quadrature::tanh_sinh<double> ts;
  double err_re = 0.0, err_im = 0.0, l1_re = 0.0, l1_im = 0.0;
  Complex ts_value(std::numeric_limits<double>::quiet_NaN(), 0.0);
  try {
    ts_value = {
        ts.integrate([&wrapped](double s) { return wrapped(s).real(); }, lo, hi, tol, &err_re, &l1_re),
        ts.integrate([&wrapped](double s) { return wrapped(s).imag(); }, lo, hi, tol, &err_im, &l1_im)};
  } catch (const std::exception&) {
    // Boost reports non-finite samples by throwing; fall through to the error below.
  }
  const double ts_err = std::hypot(err_re, err_im);
  if (!converged(ts_value, ts_err, std::hypot(l1_re, l1_im))) {
    throw NumericalFailure("integrate_adaptive: no convergence on [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "], error estimate " +
                           std::to_string(std::min(err, ts_err)));
  }
  return {ts_value, ts_err};
}

/// Bracketing root finder (TOMS 748, a Brent-family method). Shrinks the
/// bracket until its width is <= tol and returns the midpoint.
template <class Fn>
double find_root_bracketed(Fn&& fn, double lo, double hi, double tol) {
  if (lo > hi) std::swap(lo, hi);
  const double flo = fn(lo);
  const double fhi = fn(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (!(flo * fhi < 0.0)) {
    throw BracketError("find_root_bracketed: no sign change on [" +
                       std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  std::uintmax_t max_iter = 500;
  auto done = [tol](double x0, double x1) { return std::abs(x1 - x0) <= tol; };
  const auto [a, b] = boost::math::tools::toms748_solve(
      [&fn](double x) { return fn(x); }, lo, hi, flo, fhi, done, max_iter);
  if (!(std::abs(b - a) <= tol)) {
    throw NumericalFailure("find_root_bracketed: bracket did not shrink to tolerance");
  }
  return 0.5 * (a + b);
}

struct MinimumResult {
  double x = 0.0;
  double value = 0.0;
};

/// Golden-section search for a minimum of a unimodal function on [lo, hi].
/// Unlike parabolic minimisers it keeps shrinking past sqrt(eps) on
/// V-shaped minima such as |f(x)| at a simple real root of f.
template <class Fn>
MinimumResult minimize_golden(Fn&& fn, double lo, double hi, double xtol) {
  constexpr double kInvPhi = 0.6180339887498948482;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = fn(c);
  double fd = fn(d);
  for (int it = 0; it < 400 && (b - a) > xtol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = fn(d);
    }
  }
  return fc <= fd ? MinimumResult{c, fc} : MinimumResult{d, fd};
}

}  // namespace dirac_billiard
