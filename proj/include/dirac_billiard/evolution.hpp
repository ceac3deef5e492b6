#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "analytic_box.hpp"
#include "boundary_law.hpp"
#include "disk_radial.hpp"
#include "errors.hpp"
#include "grid_calculus.hpp"

// Method-of-lines propagation on the fixed domain y in [0, 1]. In physical
// time t, with L = L(t) and Ldot = dL/dt:
//
//   d/dt psi1 = (Ldot/L) y d_y psi1 - (i/L) (d_y psi2 - (k/y) psi2)
//   d/dt psi2 = (Ldot/L) y d_y psi2 + (i/L) (d_y psi1 + (k/y) psi1)
//
// (k = 0 for the box). d_y is the SBP 4-2 operator, time stepping is RK4,
// and psi1 is pinned to zero at the walls after every stage.

namespace dirac_billiard {

struct Box1D {
  friend bool operator==(const Box1D&, const Box1D&) = default;
};
struct DiskRadial {
  int k = 0;
  friend bool operator==(const DiskRadial&, const DiskRadial&) = default;
};
using Geometry = std::variant<Box1D, DiskRadial>;

inline int angular_number(const Geometry& g) {
  if (const auto* d = std::get_if<DiskRadial>(&g)) return d->k;
  return 0;
}

struct FieldState {
  double t = 0.0;
  Grid grid{3};
  std::vector<Complex> psi1;
  std::vector<Complex> psi2;
  BoundaryLaw law{StaticWall{1.0}};
  Geometry geometry = Box1D{};
};

struct AutoStep {
  double cfl = 0.5;
};

enum class Scheme { RK4Central };
enum class TimeDirection { Forward, Backward };

struct EvolutionConfig {
  std::variant<double, AutoStep> dt = AutoStep{};
  double t_end = 1.0;  // duration, > 0
  std::size_t record_every = 1;
  Scheme scheme = Scheme::RK4Central;
  TimeDirection direction = TimeDirection::Forward;
};

struct ObservableSample {
  double t = 0.0;
  double L = 0.0;
  double norm = 0.0;
  double energy = 0.0;
};

struct ObservableSeries {
  std::vector<ObservableSample> samples;
};

struct EvolutionResult {
  FieldState final_state;
  std::vector<FieldState> trajectory;
};

/// Courant number above which an explicit step is rejected. The SBP 4-2
/// operator has spectral radius below 2/h, so this keeps RK4 inside its
/// imaginary-axis stability interval (2.83).
inline constexpr double kMaxCourant = 1.0;
inline constexpr double kMaxAutoCfl = 0.5;

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

namespace detail {

/// Quadrature matched to the propagator: the SBP norm H (trapezoid with
/// Gregory-type end corrections, fourth order) on grids that support it,
/// composite Simpson on smaller ones. H has no odd/even weight pattern, so
/// grid-scale components of the field do not alias into the integral.
inline double grid_integral(std::span<const double> v, double h) {
  if (v.size() < grid_calculus::SbpDerivative::kMinPoints) {
    return grid_calculus::simpson<double>(v, h);
  }
  const std::vector<double> w = grid_calculus::SbpDerivative::norm_weights(v.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) acc += w[j] * v[j];
  return acc * h;
}

inline std::vector<Complex> grid_derivative(std::span<const Complex> v, double h) {
  if (v.size() < grid_calculus::SbpDerivative::kMinPoints) {
    return grid_calculus::derivative4<Complex>(v, h);
  }
  std::vector<Complex> d(v.size());
  grid_calculus::SbpDerivative::apply<Complex>(v, d, h);
  return d;
}

}  // namespace detail

/// L(t) * int_0^1 (|psi1|^2 + |psi2|^2) dy.
inline double norm(const FieldState& s) {
  const std::size_t n = s.grid.size();
  std::vector<double> density(n);
  for (std::size_t j = 0; j < n; ++j) density[j] = std::norm(s.psi1[j]) + std::norm(s.psi2[j]);
  return boundary_position(s.law, s.t) * detail::grid_integral(density, s.grid.spacing());
}

/// <H> / norm with H (psi1, psi2) = (d_x psi2 - (k/x) psi2, -d_x psi1 - (k/x) psi1).
/// Uses the propagator's own difference operator, so for a static wall the
/// value is conserved by the semi-discrete dynamics.
inline double energy(const FieldState& s) {
  const double nrm = norm(s);
  if (!(nrm > 0.0)) throw DomainError("energy: state has zero norm");
  const std::size_t n = s.grid.size();
  const double h = s.grid.spacing();
  const std::vector<Complex> d1 = detail::grid_derivative(s.psi1, h);
  const std::vector<Complex> d2 = detail::grid_derivative(s.psi2, h);
  const double k = static_cast<double>(angular_number(s.geometry));
  std::vector<double> integrand(n);
  for (std::size_t j = 0; j < n; ++j) {
    double v = (std::conj(s.psi1[j]) * d2[j] - std::conj(s.psi2[j]) * d1[j]).real();
    if (k != 0.0 && j > 0) v -= 2.0 * k / s.grid[j] * (std::conj(s.psi1[j]) * s.psi2[j]).real();
    integrand[j] = v;
  }
  // d_x = L^-1 d_y and dx = L dy cancel in the numerator.
  return detail::grid_integral(integrand, h) / nrm;
}

/// Physical L2 distance sqrt(L int |a - b|^2 dy) between states on the same grid.
inline double l2_distance(const FieldState& a, const FieldState& b) {
  if (!(a.grid == b.grid)) throw DomainError("l2_distance: grids differ");
  const std::size_t n = a.grid.size();
  std::vector<double> density(n);
  for (std::size_t j = 0; j < n; ++j) {
    density[j] = std::norm(a.psi1[j] - b.psi1[j]) + std::norm(a.psi2[j] - b.psi2[j]);
  }
  return std::sqrt(boundary_position(a.law, a.t) *
                   detail::grid_integral(density, a.grid.spacing()));
}

// ---------------------------------------------------------------------------
// Initial states
// ---------------------------------------------------------------------------

inline FieldState static_mode_state(const StaticMode& sm, const Grid& grid, BoundaryLaw law,
                                    double t = 0.0) {
  FieldState s{t, grid, std::vector<Complex>(grid.size()), std::vector<Complex>(grid.size()),
               std::move(law), Box1D{}};
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const Spinor2 v = static_mode_eval(sm, grid[j] * sm.length);
    s.psi1[j] = v.c1;
    s.psi2[j] = v.c2;
  }
  s.psi1.front() = 0.0;
  s.psi1.back() = 0.0;
  return s;
}

inline BoundaryLaw linear_law(double a, double b, double horizon) {
  return BoundaryLaw(LinearWall{a, b}, horizon);
}

/// Exact moving-box mode sampled on `grid` at time t.
inline FieldState exact_mode_state_1d(const Mode1D& mode, double t, const Grid& grid,
                                      double horizon = std::numeric_limits<double>::infinity()) {
  FieldState s{t, grid, std::vector<Complex>(grid.size()), std::vector<Complex>(grid.size()),
               linear_law(mode.rate, mode.offset, horizon), Box1D{}};
  const double phase_arg = -mode.lambda * mode_rescaled_time(mode, t);
  const Complex phase = std::exp(Complex(0.0, phase_arg));
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const Spinor2 v = eigenmode_1d(mode, grid[j]);
    s.psi1[j] = phase * v.c1;
    s.psi2[j] = phase * v.c2;
  }
  return s;
}

/// Exact disk mode (shooting profile times the closed-form phase) at time t.
inline FieldState exact_mode_state_disk(const DiskMode& mode, double t, const Grid& grid,
                                        double horizon = std::numeric_limits<double>::infinity()) {
  FieldState s{t, grid, {}, {}, linear_law(mode.rate, mode.offset, horizon), DiskRadial{mode.k}};
  const RadialProfile p = disk_mode_profile(mode, grid);
  const Complex phase = std::exp(Complex(0.0, -mode.lambda * disk_rescaled_time(mode, t)));
  s.psi1.resize(grid.size());
  s.psi2.resize(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    s.psi1[j] = phase * p.f[j];
    s.psi2[j] = phase * p.g[j];
  }
  return s;
}

// ---------------------------------------------------------------------------
// Propagator
// ---------------------------------------------------------------------------

namespace detail {

class MethodOfLines {
 public:
  MethodOfLines(const Grid& grid, const BoundaryLaw& law, int k)
      : grid_(grid), law_(law), k_(k), y_(grid.points()), d1_(grid.size()), d2_(grid.size()) {}

  void pin(std::vector<Complex>& p1, std::vector<Complex>& p2) const {
    p1.back() = 0.0;
    p1.front() = 0.0;
    if (k_ != 0) p2.front() = 0.0;
  }

  void rhs(double t, const std::vector<Complex>& p1, const std::vector<Complex>& p2,
           std::vector<Complex>& out1, std::vector<Complex>& out2) {
    const double L = boundary_position(law_, t);
    const double Ld = boundary_velocity(law_, t);
    const double h = grid_.spacing();
    grid_calculus::SbpDerivative::apply<Complex>(p1, d1_, h);
    grid_calculus::SbpDerivative::apply<Complex>(p2, d2_, h);
    const double adv = Ld / L;
    const Complex i_over_L(0.0, 1.0 / L);
    const double kk = static_cast<double>(k_);
    const std::size_t n = grid_.size();
    for (std::size_t j = 0; j < n; ++j) {
      Complex q_term = d2_[j];
      Complex p_term = d1_[j];
      if (k_ != 0 && j > 0) {
        q_term -= kk / y_[j] * p2[j];
        p_term += kk / y_[j] * p1[j];
      }
      out1[j] = adv * y_[j] * d1_[j] - i_over_L * q_term;
      out2[j] = adv * y_[j] * d2_[j] + i_over_L * p_term;
    }
    out1.front() = 0.0;
    out1.back() = 0.0;
    if (k_ != 0) out2.front() = 0.0;
  }

  /// Courant number of a step of size |dt| at time t.
  double courant(double t, double dt) const {
    const double L = boundary_position(law_, t);
    const double Ld = boundary_velocity(law_, t);
    return std::abs(dt) * (1.0 + std::abs(Ld) + std::abs(static_cast<double>(k_))) /
           (grid_.spacing() * L);
  }

 private:
  const Grid& grid_;
  const BoundaryLaw& law_;
  int k_;
  std::vector<double> y_;
  std::vector<Complex> d1_;
  std::vector<Complex> d2_;
};

inline bool all_finite(const std::vector<Complex>& v) {
  return std::all_of(v.begin(), v.end(), [](const Complex& c) {
    return std::isfinite(c.real()) && std::isfinite(c.imag());
  });
}

}  // namespace detail

using StateObserver = std::function<void(const FieldState&)>;

/// Propagates `initial` over cfg.t_end, calling `observe` on the initial
/// state, after every cfg.record_every steps, and on the final state.
inline FieldState evolve_observed(const FieldState& initial, const EvolutionConfig& cfg,
                                  const StateObserver& observe) {
  const std::size_t n = initial.grid.size();
  if (n < grid_calculus::SbpDerivative::kMinPoints) {
    throw DomainError("evolve: grid needs at least 8 points");
  }
  if (initial.psi1.size() != n || initial.psi2.size() != n) {
    throw DomainError("evolve: state size does not match its grid");
  }
  if (!(cfg.t_end > 0.0)) throw DomainError("evolve: t_end must be positive");
  if (cfg.record_every < 1) throw DomainError("evolve: record_every must be >= 1");
  if (const auto* a = std::get_if<AutoStep>(&cfg.dt); a && !(a->cfl > 0.0 && a->cfl <= kMaxAutoCfl)) {
    throw DomainError("evolve: Courant factor must lie in (0, 0.5]");
  }
  if (const auto* d = std::get_if<double>(&cfg.dt); d && !(*d > 0.0)) {
    throw DomainError("evolve: dt must be positive");
  }

  const int k = angular_number(initial.geometry);
  double scale = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    scale = std::max({scale, std::abs(initial.psi1[j]), std::abs(initial.psi2[j])});
  }
  const double bc_tol = 1e-10 * std::max(scale, 1.0);
  if (std::abs(initial.psi1.front()) > bc_tol || std::abs(initial.psi1.back()) > bc_tol ||
      (k != 0 && std::abs(initial.psi2.front()) > bc_tol)) {
    throw DomainError("evolve: initial state violates its boundary conditions");
  }

  const double sign = cfg.direction == TimeDirection::Forward ? 1.0 : -1.0;
  const double t_start = initial.t;
  const double t_stop = t_start + sign * cfg.t_end;
  (void)boundary_position(initial.law, t_stop);

  FieldState state = initial;
  detail::MethodOfLines mol(state.grid, state.law, k);
  mol.pin(state.psi1, state.psi2);
  if (observe) observe(state);

  std::vector<Complex> k1a(n), k1b(n), k2a(n), k2b(n), k3a(n), k3b(n), k4a(n), k4b(n);
  std::vector<Complex> ta(n), tb(n);

  std::size_t step = 0;
  const double h = state.grid.spacing();
  const double t_tol = 1e-12 * std::max(1.0, std::abs(t_stop));
  while (sign * (t_stop - state.t) > t_tol) {
    double dt;
    if (const auto* a = std::get_if<AutoStep>(&cfg.dt)) {
      const double L = boundary_position(state.law, state.t);
      const double Ld = boundary_velocity(state.law, state.t);
      dt = a->cfl * h * L / (1.0 + std::abs(Ld) + std::abs(static_cast<double>(k)));
    } else {
      dt = std::get<double>(cfg.dt);
    }
    dt = std::min(dt, std::abs(t_stop - state.t)) * sign;
    if (std::abs(sign * (t_stop - state.t) - std::abs(dt)) <= t_tol) dt = t_stop - state.t;

    const double c_now = mol.courant(state.t, dt);
    if (c_now > kMaxCourant) {
      throw StabilityError("evolve: Courant number " + detail::fmt_double(c_now) +
                           " exceeds " + detail::fmt_double(kMaxCourant) + " at t = " +
                           detail::fmt_double(state.t));
    }

    const double t0 = state.t;
    auto stage = [&](double frac, const std::vector<Complex>& da, const std::vector<Complex>& db) {
      for (std::size_t j = 0; j < n; ++j) {
        ta[j] = state.psi1[j] + frac * dt * da[j];
        tb[j] = state.psi2[j] + frac * dt * db[j];
      }
      mol.pin(ta, tb);
    };
    mol.rhs(t0, state.psi1, state.psi2, k1a, k1b);
    stage(0.5, k1a, k1b);
    mol.rhs(t0 + 0.5 * dt, ta, tb, k2a, k2b);
    stage(0.5, k2a, k2b);
    mol.rhs(t0 + 0.5 * dt, ta, tb, k3a, k3b);
    stage(1.0, k3a, k3b);
    mol.rhs(t0 + dt, ta, tb, k4a, k4b);
    for (std::size_t j = 0; j < n; ++j) {
      state.psi1[j] += dt / 6.0 * (k1a[j] + 2.0 * k2a[j] + 2.0 * k3a[j] + k4a[j]);
      state.psi2[j] += dt / 6.0 * (k1b[j] + 2.0 * k2b[j] + 2.0 * k3b[j] + k4b[j]);
    }
    mol.pin(state.psi1, state.psi2);
    state.t = (std::abs(t_stop - (t0 + dt)) <= t_tol) ? t_stop : t0 + dt;
    ++step;

    if (!detail::all_finite(state.psi1) || !detail::all_finite(state.psi2)) {
      throw NumericalFailure("evolve: non-finite field at t = " + detail::fmt_double(state.t));
    }
    const bool done = sign * (t_stop - state.t) <= t_tol;
    if (observe && (step % cfg.record_every == 0 || done)) observe(state);
  }
  return state;
}

inline EvolutionResult evolve(const FieldState& initial, const EvolutionConfig& cfg) {
  EvolutionResult out;
  out.final_state =
      evolve_observed(initial, cfg, [&out](const FieldState& s) { out.trajectory.push_back(s); });
  return out;
}

/// Starts from the static box mode n0 at L(0) and records (t, L, norm, energy).
inline ObservableSeries run_fermi(int n0, const BoundaryLaw& law, std::size_t n_points,
                                  const EvolutionConfig& cfg) {
  if (!std::holds_alternative<BreathingWall>(law.motion())) {
    throw DomainError("run_fermi: the drive must be a breathing wall");
  }
  const Grid grid(n_points);
  const double L0 = boundary_position(law, 0.0);
  const FieldState initial = static_mode_state(make_static_mode(n0, L0), grid, law);
  ObservableSeries series;
  evolve_observed(initial, cfg, [&series](const FieldState& s) {
    series.samples.push_back({s.t, boundary_position(s.law, s.t), norm(s), energy(s)});
  });
  return series;
}

}  // namespace dirac_billiard
