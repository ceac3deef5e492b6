#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "analytic_box.hpp"
#include "boundary_law.hpp"
#include "errors.hpp"
#include "grid_calculus.hpp"
#include "special_functions.hpp"

// Circular billiard with radius r0(t) = a t + b, angular number k.
//
// After y = r/r0, P = exp(-i lambda tau) f, Q = exp(-i lambda tau) g, the
// radial system is the first-order pair
//
//   lambda f = i a y f' + g' - (k/y) g
//   lambda g = i a y g' - f' - (k/y) f
//
// solved for the derivatives:
//
//   (1 - a^2 y^2) f' = i a lambda y f + (i a k - lambda) g - (k/y) f
//   g' = lambda f + (k/y) g - i a y f'
//
// Regular solutions behave as f ~ y^s near y = 0 with s = k+1 (k >= 0) or
// s = -k (k <= -1). Eigenvalues are the real lambda with f(1) = 0.

namespace dirac_billiard {

struct DiskMode {
  int k = 0;
  int n = 1;
  double rate = 0.0;
  double offset = 1.0;
  double lambda = 0.0;
  int frobenius_exp = 1;
  double norm_const = 1.0;  // N
  bool numerically_defined = false;  // k <= -1: no closed form to compare against
};

struct RadialProfile {
  Grid grid{3};
  std::vector<Complex> f;
  std::vector<Complex> g;
  double lambda = 0.0;
  int k = 0;
  double rate = 0.0;
};

struct ShootingOptions {
  double rel_tol = 1e-12;  // per-step local error, relative to |(f, g)|
  double y_start = 1e-6;   // Frobenius seed point (clipped to h/10 on coarse grids)
};

inline int frobenius_exponent(int k) { return k >= 0 ? k + 1 : -k; }

/// (f', g') of the separated radial system at y > 0.
inline Spinor2 radial_rhs(int k, double lambda, double a, double y, Spinor2 s) {
  if (!(y > 0.0)) throw DomainError("radial_rhs: y must be positive (use the Frobenius seed at 0)");
  const double den = 1.0 - a * a * y * y;
  if (!(den > 0.0)) throw SingularPoint("radial_rhs: a^2 y^2 >= 1");
  const double kk = static_cast<double>(k);
  const Complex i{0.0, 1.0};
  const Complex fp =
      (i * (a * lambda * y) * s.c1 + Complex(-lambda, a * kk) * s.c2 - (kk / y) * s.c1) / den;
  const Complex gp = lambda * s.c1 + (kk / y) * s.c2 - i * (a * y) * fp;
  return {fp, gp};
}

namespace detail {

/// Leading Frobenius terms at small y.
///   k >= 0: f = y^(k+1),  g = (2k+1) / (i a k - lambda) y^k
///   k <= -1: f = y^(-k),  g = (lambda + i a k) / (1 - 2k) y^(1-k)
inline Spinor2 frobenius_seed(int k, double lambda, double a, double y) {
  const double kk = static_cast<double>(k);
  if (k >= 0) {
    const Complex den(-lambda, a * kk);
    if (den == Complex{0.0, 0.0}) {
      throw DomainError("radial seed: lambda = 0 is excluded for k = 0");
    }
    return {Complex(std::pow(y, kk + 1.0), 0.0), (2.0 * kk + 1.0) / den * std::pow(y, kk)};
  }
  return {Complex(std::pow(y, -kk), 0.0),
          Complex(lambda, a * kk) / (1.0 - 2.0 * kk) * std::pow(y, 1.0 - kk)};
}

inline Spinor2 axpy(Spinor2 s, double h, Spinor2 d) { return {s.c1 + h * d.c1, s.c2 + h * d.c2}; }

inline Spinor2 rk4_step(int k, double lambda, double a, double y, Spinor2 s, double h) {
  const Spinor2 k1 = radial_rhs(k, lambda, a, y, s);
  const Spinor2 k2 = radial_rhs(k, lambda, a, y + 0.5 * h, axpy(s, 0.5 * h, k1));
  const Spinor2 k3 = radial_rhs(k, lambda, a, y + 0.5 * h, axpy(s, 0.5 * h, k2));
  const Spinor2 k4 = radial_rhs(k, lambda, a, y + h, axpy(s, h, k3));
  return {s.c1 + h / 6.0 * (k1.c1 + 2.0 * k2.c1 + 2.0 * k3.c1 + k4.c1),
          s.c2 + h / 6.0 * (k1.c2 + 2.0 * k2.c2 + 2.0 * k3.c2 + k4.c2)};
}

inline double magnitude(Spinor2 s) { return std::max(std::abs(s.c1), std::abs(s.c2)); }

/// Classic RK4 with step-doubling error control from y_from to y_to.
/// `h_try` carries the step size between calls; `max_f` accumulates max |f|.
class RadialIntegrator {
 public:
  RadialIntegrator(int k, double lambda, double a, double rel_tol)
      : k_(k), lambda_(lambda), a_(a), tol_(rel_tol) {}

  Spinor2 advance(Spinor2 s, double y_from, double y_to, double& h_try, double& max_f) const {
    double y = y_from;
    double h = std::min(h_try, y_to - y_from);
    int guard = 0;
    while (y < y_to) {
      if (++guard > 5'000'000) throw NumericalFailure("radial_shoot: step budget exhausted");
      const bool last = (y + h >= y_to);
      if (last) h = y_to - y;
      const Spinor2 full = rk4_step(k_, lambda_, a_, y, s, h);
      const Spinor2 half = rk4_step(k_, lambda_, a_, y, s, 0.5 * h);
      const Spinor2 two = rk4_step(k_, lambda_, a_, y + 0.5 * h, half, 0.5 * h);
      const double err = magnitude({two.c1 - full.c1, two.c2 - full.c2}) / 15.0;
      const double scale = std::max(magnitude(two), std::numeric_limits<double>::min());
      if (!std::isfinite(err) || !std::isfinite(scale)) {
        throw NumericalFailure("radial_shoot: overflow at y = " + std::to_string(y));
      }
      const double ratio = err / (tol_ * scale);
      if (ratio <= 1.0) {
        y = last ? y_to : y + h;
        s = two;
        max_f = std::max(max_f, std::abs(s.c1));
        const double grow = ratio > 0.0 ? 0.9 * std::pow(ratio, -0.2) : 4.0;
        h_try = h * std::clamp(grow, 0.2, 4.0);
        h = h_try;
      } else {
        h *= std::clamp(0.9 * std::pow(ratio, -0.2), 0.1, 0.9);
        if (h < 1e-16 * std::max(1.0, y)) {
          throw NumericalFailure("radial_shoot: step size underflow at y = " + std::to_string(y));
        }
      }
    }
    return s;
  }

 private:
  int k_;
  double lambda_;
  double a_;
  double tol_;
};

inline void check_shoot_args(double a, double lambda) {
  if (!(std::abs(a) < 1.0)) throw DomainError("radial_shoot: requires |a| < 1");
  if (!std::isfinite(lambda)) throw DomainError("radial_shoot: lambda must be finite");
}

/// f, g in the limit y -> 0 of the seeded solution.
inline Spinor2 origin_value(int k, double lambda, double a) {
  if (k == 0) return {0.0, frobenius_seed(0, lambda, a, 1.0).c2};
  return {0.0, 0.0};
}

}  // namespace detail

/// Integrates the seeded regular solution across the grid.
inline RadialProfile radial_shoot(int k, double lambda, double a, const Grid& grid,
                                  const ShootingOptions& opts = {}) {
  detail::check_shoot_args(a, lambda);
  RadialProfile out;
  out.grid = grid;
  out.lambda = lambda;
  out.k = k;
  out.rate = a;
  out.f.resize(grid.size());
  out.g.resize(grid.size());

  const Spinor2 at0 = detail::origin_value(k, lambda, a);
  out.f[0] = at0.c1;
  out.g[0] = at0.c2;

  const double y0 = std::min(opts.y_start, grid.spacing() / 10.0);
  Spinor2 s = detail::frobenius_seed(k, lambda, a, y0);
  const detail::RadialIntegrator integ(k, lambda, a, opts.rel_tol);
  double h_try = y0;
  double max_f = std::abs(s.c1);
  double y = y0;
  for (std::size_t j = 1; j < grid.size(); ++j) {
    s = integ.advance(s, y, grid[j], h_try, max_f);
    y = grid[j];
    out.f[j] = s.c1;
    out.g[j] = s.c2;
  }
  return out;
}

/// Seeded solution at a single point y in [0, 1].
inline Spinor2 radial_value_at(int k, double lambda, double a, double y,
                               const ShootingOptions& opts = {}) {
  detail::check_shoot_args(a, lambda);
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("radial_value_at: y must lie in [0, 1]");
  if (y == 0.0) return detail::origin_value(k, lambda, a);
  if (y <= opts.y_start) return detail::frobenius_seed(k, lambda, a, y);
  const detail::RadialIntegrator integ(k, lambda, a, opts.rel_tol);
  double h_try = opts.y_start;
  double max_f = 0.0;
  return integ.advance(detail::frobenius_seed(k, lambda, a, opts.y_start), opts.y_start, y,
                       h_try, max_f);
}

/// |f(1)| / max |f| along the shooting path; zero on the spectrum.
inline double wall_mismatch(int k, double lambda, double a, const ShootingOptions& opts = {}) {
  detail::check_shoot_args(a, lambda);
  const detail::RadialIntegrator integ(k, lambda, a, opts.rel_tol);
  Spinor2 s = detail::frobenius_seed(k, lambda, a, opts.y_start);
  double h_try = opts.y_start;
  double max_f = std::abs(s.c1);
  s = integ.advance(s, opts.y_start, 1.0, h_try, max_f);
  return std::abs(s.c1) / max_f;
}

// ---------------------------------------------------------------------------
// Spectrum
// ---------------------------------------------------------------------------

inline constexpr double kMaxDiskRate = 0.95;
inline constexpr double kRootAcceptance = 1e-8;

struct ScanOptions {
  double lambda_min = 0.05;
  double step = 0.1;
  double scan_tol = 1e-9;    // shooting tolerance while scanning
  double refine_tol = 1e-13; // shooting tolerance while refining a minimum
  double lambda_max = 0.0;   // 0: pi * (n_max + |k| + 2)
};

struct DiskSpectrum {
  std::vector<double> eigenvalues;
  std::vector<double> residuals;  // wall mismatch at each accepted root
  std::vector<std::pair<double, double>> rejected;  // (lambda, mismatch) of minima above threshold
};

/// Scans real lambda for minima of the wall mismatch, refines each by
/// golden-section search and keeps the ones below kRootAcceptance.
inline DiskSpectrum disk_spectrum(int k, double a, int n_max, const ScanOptions& opts = {}) {
  if (!(std::abs(a) <= kMaxDiskRate)) throw DomainError("disk_eigenvalues: requires |a| <= 0.95");
  if (n_max < 1) throw DomainError("disk_eigenvalues: n_max must be >= 1");

  const double lambda_max =
      opts.lambda_max > 0.0 ? opts.lambda_max : kPi * (n_max + std::abs(k) + 2);
  const ShootingOptions coarse{opts.scan_tol, 1e-6};
  const ShootingOptions fine{opts.refine_tol, 1e-6};
  auto coarse_merit = [&](double lam) { return wall_mismatch(k, lam, a, coarse); };
  auto fine_merit = [&](double lam) { return wall_mismatch(k, lam, a, fine); };

  DiskSpectrum out;
  double l0 = opts.lambda_min;
  double l1 = l0 + opts.step;
  double m0 = coarse_merit(l0);
  double m1 = coarse_merit(l1);
  while (static_cast<int>(out.eigenvalues.size()) < n_max && l1 + opts.step <= lambda_max) {
    const double l2 = l1 + opts.step;
    const double m2 = coarse_merit(l2);
    if (m1 <= m0 && m1 < m2) {
      const MinimumResult best = minimize_golden(fine_merit, l0, l2, 1e-14 * l1);
      if (best.value <= kRootAcceptance) {
        out.eigenvalues.push_back(best.x);
        out.residuals.push_back(best.value);
      } else {
        out.rejected.emplace_back(best.x, best.value);
      }
    }
    l0 = l1;
    m0 = m1;
    l1 = l2;
    m1 = m2;
  }
  return out;
}

inline std::vector<double> disk_eigenvalues(int k, double a, int n_max,
                                            const ScanOptions& opts = {}) {
  DiskSpectrum spec = disk_spectrum(k, a, n_max, opts);
  if (static_cast<int>(spec.eigenvalues.size()) < n_max) {
    std::string msg = "found " + std::to_string(spec.eigenvalues.size()) + " of " +
                      std::to_string(n_max) + " eigenvalues for k = " + std::to_string(k) +
                      ", a = " + detail::fmt_double(a) + "; roots:";
    for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i) {
      msg += " " + detail::fmt_double(spec.eigenvalues[i]) + " (residual " +
             detail::fmt_double(spec.residuals[i]) + ")";
    }
    msg += "; rejected minima:";
    for (const auto& [lam, res] : spec.rejected) {
      msg += " " + detail::fmt_double(lam) + " (residual " + detail::fmt_double(res) + ")";
    }
    throw IncompleteSpectrum(msg);
  }
  return spec.eigenvalues;
}

/// lambda_n = 2 pi n a / ln((1+a)/(1-a)) for k = 0.
inline double disk_eigenvalue_k0_closed(int n, double a) {
  if (a == 0.0) {
    throw DomainError("disk_eigenvalue_k0_closed: a = 0 is the static disk (use the shooting spectrum)");
  }
  if (n < 1) throw DomainError("disk_eigenvalue_k0_closed: n must be positive");
  return eigenvalue_1d(n, a);
}

/// F(alpha, alpha + 1/2; gamma; a^2) with alpha = |k+1/2|/2 + i lambda/(2a) + 1/4,
/// gamma = |k+1/2| + 1.
inline Complex hypergeometric_condition(int k, double lambda, double a) {
  if (a == 0.0 || !(std::abs(a) < 1.0)) {
    throw DomainError("hypergeometric_condition: requires 0 < |a| < 1");
  }
  const double half = std::abs(static_cast<double>(k) + 0.5);
  const Complex alpha(half / 2.0 + 0.25, lambda / (2.0 * a));
  const HypParams p{alpha, alpha + 0.5, Complex(half + 1.0, 0.0), a * a};
  return hyp2f1(p, 1e-15).value;
}

/// g from f through the integral form
///   g(y) = (lambda + i a (1-k)) y^k int_0^y s^(-k) f(s) ds - i a y f(y) + D y^k,
/// with D fitted to `g_reference` at y = 1/2 (nearest node). Throws
/// InconsistentFormula if the result departs from `g_reference` by more
/// than 1e-6 of its max norm anywhere on the grid.
inline std::vector<Complex> radial_second_component(int k, double lambda, double a,
                                                    const Grid& grid,
                                                    std::span<const Complex> f,
                                                    std::span<const Complex> g_reference) {
  const std::size_t n = grid.size();
  if (f.size() != n || g_reference.size() != n) {
    throw DomainError("radial_second_component: profile size does not match the grid");
  }
  const double kk = static_cast<double>(k);
  std::vector<Complex> integrand(n);
  for (std::size_t j = 1; j < n; ++j) integrand[j] = std::pow(grid[j], -kk) * f[j];
  integrand[0] = 0.0;  // s^(-k) f(s) -> 0 for the regular solution
  const std::vector<Complex> cumulative =
      grid_calculus::cumulative_integral4<Complex>(integrand, grid.spacing());

  const Complex prefactor(lambda, a * (1.0 - kk));
  auto particular = [&](std::size_t j) -> Complex {
    const double y = grid[j];
    if (j == 0) return 0.0;
    return prefactor * std::pow(y, kk) * cumulative[j] - Complex(0.0, a * y) * f[j];
  };

  const std::size_t jc = (n - 1) / 2;
  const double yc = grid[jc];
  const Complex D = (g_reference[jc] - particular(jc)) / std::pow(yc, kk);

  std::vector<Complex> g(n);
  double worst = 0.0;
  double scale = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == 0) {
      g[j] = (k == 0) ? D : Complex{0.0, 0.0};
    } else {
      g[j] = particular(j) + D * std::pow(grid[j], kk);
    }
    worst = std::max(worst, std::abs(g[j] - g_reference[j]));
    scale = std::max(scale, std::abs(g_reference[j]));
  }
  if (worst > 1e-6 * std::max(scale, 1e-300)) {
    throw InconsistentFormula("radial_second_component: integral form departs from the shooting "
                              "profile by " + detail::fmt_double(worst) + " (scale " +
                              detail::fmt_double(scale) + ")");
  }
  return g;
}

// ---------------------------------------------------------------------------
// Modes and full solutions
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDiskNormPoints = 2049;

/// Profile on `grid`, scaled by the mode's normalization constant.
inline RadialProfile disk_mode_profile(const DiskMode& mode, const Grid& grid) {
  RadialProfile p = radial_shoot(mode.k, mode.lambda, mode.rate, grid, {1e-13, 1e-6});
  for (auto& v : p.f) v *= mode.norm_const;
  for (auto& v : p.g) v *= mode.norm_const;
  return p;
}

/// n-th eigenmode (n >= 1) with N chosen so that b * int_0^1 (|f|^2 + |g|^2) dy = 1.
inline DiskMode make_disk_mode(int k, int n, double a, double b = 1.0) {
  if (!(b > 0.0)) throw DomainError("make_disk_mode: initial radius b must be positive");
  if (n < 1) throw DomainError("make_disk_mode: n must be >= 1");
  const std::vector<double> lams = disk_eigenvalues(k, a, n);
  DiskMode mode{k, n, a, b, lams.back(), frobenius_exponent(k), 1.0, k <= -1};
  const Grid grid(kDiskNormPoints);
  const RadialProfile p = radial_shoot(k, mode.lambda, a, grid, {1e-13, 1e-6});
  std::vector<double> density(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) density[j] = std::norm(p.f[j]) + std::norm(p.g[j]);
  const double mass = b * grid_calculus::simpson<double>(density, grid.spacing());
  mode.norm_const = 1.0 / std::sqrt(mass);
  return mode;
}

inline double disk_rescaled_time(const DiskMode& mode, double t) {
  if (mode.rate == 0.0) return t / mode.offset;
  return std::log1p(mode.rate * t / mode.offset) / mode.rate;
}

/// (P, Q)(t, r) = N exp(-i lambda tau(t)) (f, g)(r / r0(t)).
inline Spinor2 mode_solution_disk(const DiskMode& mode, double t, double r) {
  const double r0 = mode.rate * t + mode.offset;
  if (!(r0 > 0.0)) throw DomainError("mode_solution_disk: radius has collapsed");
  if (!(r >= 0.0 && r <= r0 * (1.0 + 1e-14))) {
    throw DomainError("mode_solution_disk: r outside the disk [0, r0(t)]");
  }
  const double y = std::min(r / r0, 1.0);
  const Spinor2 s = radial_value_at(mode.k, mode.lambda, mode.rate, y, {1e-13, 1e-6});
  const Complex phase =
      mode.norm_const * std::exp(Complex(0.0, -mode.lambda * disk_rescaled_time(mode, t)));
  return {phase * s.c1, phase * s.c2};
}

}  // namespace dirac_billiard
