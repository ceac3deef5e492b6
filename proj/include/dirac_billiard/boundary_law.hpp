#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "special_functions.hpp"

// Natural units (hbar = c = 1) throughout. Wall speeds are fractions of c.

namespace dirac_billiard {

inline constexpr double kPi = std::numbers::pi;

/// Two-component spinor value; (psi1, psi2) in the box, (P, Q) on the disk.
struct Spinor2 {
  Complex c1;
  Complex c2;
};

/// Uniform samples of the rescaled coordinate y in [0, 1], endpoints included.
class Grid {
 public:
  explicit Grid(std::size_t n_points) : n_(n_points) {
    if (n_points < 3) throw DomainError("Grid: need at least 3 points");
    h_ = 1.0 / static_cast<double>(n_ - 1);
  }

  std::size_t size() const noexcept { return n_; }
  double spacing() const noexcept { return h_; }
  double operator[](std::size_t i) const noexcept {
    return i + 1 == n_ ? 1.0 : static_cast<double>(i) * h_;
  }
  std::vector<double> points() const {
    std::vector<double> y(n_);
    for (std::size_t i = 0; i < n_; ++i) y[i] = (*this)[i];
    return y;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t n_;
  double h_;
};

/// tau(t) = integral_0^t ds / L(s).
struct TransformedTime {
  double tau = 0.0;
};

// ---------------------------------------------------------------------------
// Wall trajectories
// ---------------------------------------------------------------------------

struct StaticWall {
  double length = 1.0;
};

/// L(t) = rate * t + offset.
struct LinearWall {
  double rate = 0.0;
  double offset = 1.0;
};

/// L(t) = mean * (1 + amplitude * sin(frequency * t)).
struct BreathingWall {
  double mean = 1.0;
  double amplitude = 0.0;
  double frequency = 0.0;
};

/// Piecewise-linear interpolation through (times[i], lengths[i]).
struct TabulatedWall {
  std::vector<double> times;
  std::vector<double> lengths;
};

using WallMotion = std::variant<StaticWall, LinearWall, BreathingWall, TabulatedWall>;

/// A wall law validated over the horizon [0, horizon]: the wall stays at a
/// positive position and moves slower than light throughout.
class BoundaryLaw {
 public:
  explicit BoundaryLaw(WallMotion motion,
                       double horizon = std::numeric_limits<double>::infinity())
      : motion_(std::move(motion)), horizon_(horizon) {
    validate();
  }

  const WallMotion& motion() const noexcept { return motion_; }
  double horizon() const noexcept { return horizon_; }

  /// For a contracting linear wall, the time at which L reaches zero.
  std::optional<double> collapse_time() const {
    if (const auto* lin = std::get_if<LinearWall>(&motion_); lin && lin->rate < 0.0) {
      return -lin->offset / lin->rate;
    }
    return std::nullopt;
  }

  bool is_linear() const noexcept { return std::holds_alternative<LinearWall>(motion_); }

 private:
  void validate();

  WallMotion motion_;
  double horizon_;
};

namespace detail {

inline std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline void check_time(const BoundaryLaw& law, double t) {
  const double slack = 1e-12 * std::max(1.0, std::isfinite(law.horizon()) ? law.horizon() : 1.0);
  if (!(t >= -slack) || !(t <= law.horizon() + slack)) {
    throw OutOfRange("time " + fmt_double(t) + " outside horizon [0, " +
                     fmt_double(law.horizon()) + "]");
  }
}

/// Index of the tabulated segment containing t (clamped to the table).
inline std::size_t segment_of(const TabulatedWall& tab, double t) {
  const auto it = std::upper_bound(tab.times.begin(), tab.times.end(), t);
  const auto idx = static_cast<std::size_t>(std::distance(tab.times.begin(), it));
  return std::clamp<std::size_t>(idx == 0 ? 0 : idx - 1, 0, tab.times.size() - 2);
}

inline double tabulated_position(const TabulatedWall& tab, double t) {
  if (t < tab.times.front() || t > tab.times.back()) {
    throw OutOfRange("time " + fmt_double(t) + " outside tabulated range [" +
                     fmt_double(tab.times.front()) + ", " + fmt_double(tab.times.back()) + "]");
  }
  const std::size_t i = segment_of(tab, t);
  const double w = (t - tab.times[i]) / (tab.times[i + 1] - tab.times[i]);
  return (1.0 - w) * tab.lengths[i] + w * tab.lengths[i + 1];
}

inline double raw_position(const WallMotion& m, double t) {
  return std::visit(
      [t](const auto& w) -> double {
        using W = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<W, StaticWall>) {
          return w.length;
        } else if constexpr (std::is_same_v<W, LinearWall>) {
          return w.rate * t + w.offset;
        } else if constexpr (std::is_same_v<W, BreathingWall>) {
          return w.mean * (1.0 + w.amplitude * std::sin(w.frequency * t));
        } else {
          return tabulated_position(w, t);
        }
      },
      m);
}

inline double raw_velocity(const WallMotion& m, double t) {
  return std::visit(
      [t](const auto& w) -> double {
        using W = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<W, StaticWall>) {
          return 0.0;
        } else if constexpr (std::is_same_v<W, LinearWall>) {
          return w.rate;
        } else if constexpr (std::is_same_v<W, BreathingWall>) {
          return w.mean * w.amplitude * w.frequency * std::cos(w.frequency * t);
        } else {
          // Centered difference of the interpolant over the local spacing,
          // one-sided at the ends of the table.
          const std::size_t i = segment_of(w, t);
          const double dt = w.times[i + 1] - w.times[i];
          const double lo = std::max(w.times.front(), t - dt);
          const double hi = std::min(w.times.back(), t + dt);
          return (tabulated_position(w, hi) - tabulated_position(w, lo)) / (hi - lo);
        }
      },
      m);
}

}  // namespace detail

inline void BoundaryLaw::validate() {
  if (!(horizon_ >= 0.0)) throw InvalidLaw("horizon must be nonnegative");
  std::visit(
      [this](const auto& w) {
        using W = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<W, StaticWall>) {
          if (!(w.length > 0.0)) throw InvalidLaw("static length must be positive");
        } else if constexpr (std::is_same_v<W, LinearWall>) {
          if (!(w.offset > 0.0)) throw InvalidLaw("linear offset b must be positive");
          if (!(std::abs(w.rate) < 1.0)) {
            throw SuperluminalWall("linear rate |a| must be < 1, got " + detail::fmt_double(w.rate));
          }
          if (w.rate < 0.0) {
            const double collapse = -w.offset / w.rate;
            if (!(horizon_ < collapse)) {
              throw InvalidLaw("contracting wall collapses at t = " + detail::fmt_double(collapse) +
                               "; horizon " + detail::fmt_double(horizon_) + " reaches it");
            }
          }
        } else if constexpr (std::is_same_v<W, BreathingWall>) {
          if (!(w.mean > 0.0)) throw InvalidLaw("breathing mean length must be positive");
          if (!(std::abs(w.amplitude) < 1.0)) {
            throw InvalidLaw("breathing amplitude must satisfy |eps| < 1");
          }
          if (!(w.frequency >= 0.0)) throw InvalidLaw("breathing frequency must be nonnegative");
          if (!(w.mean * std::abs(w.amplitude) * w.frequency < 1.0)) {
            throw SuperluminalWall("breathing wall peak speed L0*|eps|*omega must be < 1");
          }
        } else {
          if (w.times.size() < 2 || w.times.size() != w.lengths.size()) {
            throw InvalidLaw("tabulated law needs >= 2 (t, L) samples");
          }
          for (std::size_t i = 0; i + 1 < w.times.size(); ++i) {
            if (!(w.times[i + 1] > w.times[i])) {
              throw InvalidLaw("tabulated times must be strictly increasing");
            }
            const double slope =
                (w.lengths[i + 1] - w.lengths[i]) / (w.times[i + 1] - w.times[i]);
            if (!(std::abs(slope) < 1.0)) {
              throw SuperluminalWall("tabulated segment " + std::to_string(i) +
                                     " moves faster than light");
            }
          }
          for (double L : w.lengths) {
            if (!(L > 0.0)) throw InvalidLaw("tabulated lengths must be positive");
          }
          if (w.times.front() > 0.0) throw OutOfRange("tabulated law must cover t = 0");
          if (!std::isfinite(horizon_)) horizon_ = w.times.back();
          if (horizon_ > w.times.back()) {
            throw OutOfRange("horizon exceeds the tabulated range");
          }
        }
      },
      motion_);
}

/// L(t), or r0(t) for the disk.
inline double boundary_position(const BoundaryLaw& law, double t) {
  detail::check_time(law, t);
  const double L = detail::raw_position(law.motion(), t);
  if (!(L > 0.0)) {
    std::string msg = "wall position " + detail::fmt_double(L) + " at t = " + detail::fmt_double(t);
    if (auto tc = law.collapse_time()) msg += " (collapse at t = " + detail::fmt_double(*tc) + ")";
    throw InvalidLaw(msg);
  }
  return L;
}

/// dL/dt.
inline double boundary_velocity(const BoundaryLaw& law, double t) {
  detail::check_time(law, t);
  const double v = detail::raw_velocity(law.motion(), t);
  if (!(std::abs(v) < 1.0)) {
    throw SuperluminalWall("wall speed " + detail::fmt_double(v) + " at t = " + detail::fmt_double(t));
  }
  return v;
}

inline constexpr double kRescaledTimeTol = 1e-12;

/// tau(t) by adaptive quadrature of 1/L(s), for any law. Tabulated laws are
/// integrated segment by segment so the kinks sit on subinterval ends;
/// periodic laws are split per period.
inline TransformedTime rescaled_time_quadrature(const BoundaryLaw& law, double t) {
  detail::check_time(law, t);
  if (t == 0.0) return {};
  auto inv_len = [&law](double s) { return 1.0 / detail::raw_position(law.motion(), s); };

  std::vector<double> cuts{0.0};
  if (const auto* tab = std::get_if<TabulatedWall>(&law.motion())) {
    for (double tk : tab->times) {
      if (tk > 0.0 && tk < t) cuts.push_back(tk);
    }
  } else if (const auto* br = std::get_if<BreathingWall>(&law.motion());
             br && br->frequency > 0.0) {
    const double period = 2.0 * kPi / br->frequency;
    for (double s = period; s < t; s += period) cuts.push_back(s);
  }
  cuts.push_back(t);

  // Pieces no wider than half the wall length at their left end: with
  // |Ldot| < 1, 1/L then varies by less than a factor 2 on each. Near a
  // collapsing wall 1/L carries rounding noise ~eps/L, so each piece gets
  // its tolerance relative to the accumulated tau rather than to itself.
  double tau = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double lo = cuts[i];
    while (lo < cuts[i + 1]) {
      const double L_lo = detail::raw_position(law.motion(), lo);
      const double hi = (lo + 0.5 * L_lo >= cuts[i + 1]) ? cuts[i + 1] : lo + 0.5 * L_lo;
      const double piece_guess = (hi - lo) / L_lo;
      const double tol = kRescaledTimeTol * std::max(1.0, (tau + piece_guess) / piece_guess);
      tau += integrate_adaptive(inv_len, lo, hi, tol).value.real();
      lo = hi;
    }
  }
  return {tau};
}

/// tau(t); closed form (1/a) ln((at+b)/b) for linear walls, quadrature otherwise.
inline TransformedTime rescaled_time(const BoundaryLaw& law, double t) {
  detail::check_time(law, t);
  if (const auto* lin = std::get_if<LinearWall>(&law.motion())) {
    (void)boundary_position(law, t);
    if (lin->rate == 0.0) return {t / lin->offset};
    return {std::log1p(lin->rate * t / lin->offset) / lin->rate};
  }
  if (const auto* st = std::get_if<StaticWall>(&law.motion())) return {t / st->length};
  return rescaled_time_quadrature(law, t);
}

}  // namespace dirac_billiard
