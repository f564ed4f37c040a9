#pragma once

// Direct semi-classical problem for a well-plus-barrier potential: turning
// points, Bohr-Sommerfeld levels, Gamow widths, transmission and the
// generalized quantization correction phi(a).

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qss/error.hpp"
#include "qss/model.hpp"
#include "qss/numerics.hpp"
#include "qss/special.hpp"

namespace qss {

/// A potential with one well followed by one barrier inside [x_lo, x_hi].
///
/// The extrema are located once at construction: the evaluator is sampled
/// on `scan_points` (or a uniform scan when none are given), the first local
/// minimum and the following local maximum are picked, and each is refined
/// by golden-section search between its neighbouring samples. `breakpoints`
/// marks positions where V is not smooth; integrals split there.
class PotentialFunction {
 public:
  using Fn = std::function<double(double)>;

  PotentialFunction(Fn v, double x_lo, double x_hi, std::vector<double> scan_points = {},
                    std::vector<double> breakpoints = {})
      : v_(std::move(v)), x_lo_(x_lo), x_hi_(x_hi), breaks_(std::move(breakpoints)) {
    if (!(x_lo < x_hi)) throw DomainError("potential search window requires x_lo < x_hi");
    std::sort(breaks_.begin(), breaks_.end());
    if (scan_points.empty()) {
      constexpr int n = 4097;
      scan_points.resize(n);
      for (int i = 0; i < n; ++i) scan_points[i] = x_lo + (x_hi - x_lo) * i / (n - 1);
    }
    std::sort(scan_points.begin(), scan_points.end());
    scan_points.erase(std::unique(scan_points.begin(), scan_points.end()), scan_points.end());
    scan_ = std::move(scan_points);
    locate_extrema();
  }

  double operator()(double x) const { return v_(x); }
  double x_lo() const { return x_lo_; }
  double x_hi() const { return x_hi_; }
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double e_min() const { return e_min_; }
  double e_max() const { return e_max_; }
  std::span<const double> breakpoints() const { return breaks_; }
  std::span<const double> scan_points() const { return scan_; }

 private:
  void locate_extrema() {
    const std::size_t n = scan_.size();
    if (n < 3) throw DomainError("potential scan needs at least three points");
    std::vector<double> vals(n);
    for (std::size_t i = 0; i < n; ++i) vals[i] = v_(scan_[i]);
    std::size_t i_min = n;
    for (std::size_t i = 1; i + 1 < n; ++i)
      if (vals[i] <= vals[i - 1] && vals[i] < vals[i + 1]) {
        i_min = i;
        break;
      }
    if (i_min == n) throw DomainError("potential has no interior well minimum in the search window");
    std::size_t i_max = n;
    for (std::size_t i = i_min + 1; i + 1 < n; ++i)
      if (vals[i] >= vals[i - 1] && vals[i] > vals[i + 1]) {
        i_max = i;
        break;
      }
    if (i_max == n) throw DomainError("potential has no barrier maximum to the right of the well");
    x_min_ = golden_section_minimize(v_, scan_[i_min - 1], scan_[i_min + 1]);
    x_max_ = golden_section_minimize([this](double x) { return -v_(x); }, scan_[i_max - 1], scan_[i_max + 1]);
    // Keep the sampled extremum if refinement landed on a worse value (kinked minima).
    if (vals[i_min] < v_(x_min_)) x_min_ = scan_[i_min];
    if (vals[i_max] > v_(x_max_)) x_max_ = scan_[i_max];
    e_min_ = v_(x_min_);
    e_max_ = v_(x_max_);
  }

  Fn v_;
  double x_lo_, x_hi_;
  std::vector<double> breaks_;
  std::vector<double> scan_;
  double x_min_ = 0, x_max_ = 0, e_min_ = 0, e_max_ = 0;
};

/// Harmonic well V = (a^2/4) x^2 joined C1 at x = junction to an inverted
/// parabola of the same curvature. The well is exactly harmonic for
/// E <= a^2 junction^2 / 4; the barrier top sits at twice that energy.
inline PotentialFunction harmonic_barrier_demo(double a = 1.0, double junction = 6.0) {
  if (!(a > 0.0) || !(junction > 0.0)) throw DomainError("demo potential needs a > 0 and junction > 0");
  const double k = 0.25 * a * a;
  const double top_x = 2.0 * junction;
  const double top = 2.0 * k * junction * junction;
  auto v = [=](double x) { return x <= junction ? k * x * x : top - k * (x - top_x) * (x - top_x); };
  const double reach = std::sqrt(top / k);
  const double lo = -1.05 * reach, hi = top_x + 1.05 * reach;
  return PotentialFunction(v, lo, hi, {}, {junction});
}

struct TurningPoints {
  double x0, x1, x2;
  double energy;
};

namespace detail {

// Root of V(x) = E on the monotone stretch [lo, hi] of the potential. The
// scan points narrow the bracket before Brent refines it.
inline double branch_root(const PotentialFunction& v, double e, double lo, double hi, const Tolerances& tol) {
  auto f = [&](double x) { return v(x) - e; };
  auto scan = v.scan_points();
  auto first = std::upper_bound(scan.begin(), scan.end(), lo);
  auto last = std::lower_bound(scan.begin(), scan.end(), hi);
  double a = lo, fa = f(lo);
  if (fa == 0.0) return lo;
  for (auto it = first; it != last; ++it) {
    const double fb = f(*it);
    if (fb == 0.0) return *it;
    if ((fa > 0.0) != (fb > 0.0)) return find_root(f, a, *it, tol);
    a = *it;
    fa = fb;
  }
  return find_root(f, a, hi, tol);
}

inline void check_energy(const PotentialFunction& v, double e) {
  if (!std::isfinite(e)) throw DomainError("turning points: non-finite energy");
  if (e < v.e_min())
    throw DomainError("turning points: E = " + std::to_string(e) + " below the well minimum " +
                      std::to_string(v.e_min()));
  if (e > v.e_max())
    throw DomainError("turning points: E = " + std::to_string(e) + " above the barrier maximum " +
                      std::to_string(v.e_max()));
}

inline double left_turning_point(const PotentialFunction& v, double e, const Tolerances& tol) {
  if (e == v.e_min()) return v.x_min();
  if (v(v.x_lo()) < e) throw DomainError("turning points: left wall of the search window lies below E");
  return branch_root(v, e, v.x_lo(), v.x_min(), tol);
}

inline double middle_turning_point(const PotentialFunction& v, double e, const Tolerances& tol) {
  if (e == v.e_min()) return v.x_min();
  if (e == v.e_max()) return v.x_max();
  return branch_root(v, e, v.x_min(), v.x_max(), tol);
}

inline double right_turning_point(const PotentialFunction& v, double e, const Tolerances& tol) {
  if (e == v.e_max()) return v.x_max();
  if (v(v.x_hi()) > e) throw DomainError("turning points: barrier tail does not fall below E inside the window");
  return branch_root(v, e, v.x_max(), v.x_hi(), tol);
}

// E - V(x) on the well (x0, x1). Next to a turning point the difference
// cancels to rounding noise, so below a small threshold it is replaced by
// the local linear model through a point a short distance inside.
class WellGap {
 public:
  WellGap(const PotentialFunction& v, double e, double x0, double x1) : v_(v), e_(e) {
    const double scale = std::max({std::abs(e), std::abs(v.e_min()), std::abs(v.e_max() - v.e_min())});
    floor_ = 1e-8 * scale;
    auto br = v.breakpoints();
    double d0 = 1e-6 * (x1 - x0), d1 = d0;
    auto it = std::upper_bound(br.begin(), br.end(), x0);
    if (it != br.end() && *it < x1) d0 = std::min(d0, 0.5 * (*it - x0));
    auto jt = std::lower_bound(br.begin(), br.end(), x1);
    if (jt != br.begin() && *(jt - 1) > x0) d1 = std::min(d1, 0.5 * (x1 - *(jt - 1)));
    s0_ = std::max(e - v(x0 + d0), 0.0) / d0;
    s1_ = std::max(e - v(x1 - d1), 0.0) / d1;
  }

  // from_x0, to_x1: exact distances to the turning points.
  double operator()(double x, double from_x0, double to_x1) const {
    const double g = e_ - v_(x);
    if (g >= floor_) return g;
    return from_x0 < to_x1 ? s0_ * from_x0 : s1_ * to_x1;
  }

 private:
  const PotentialFunction& v_;
  double e_;
  double floor_ = 0.0, s0_ = 0.0, s1_ = 0.0;
};

}  // namespace detail

/// The three solutions x0 <= x1 <= x2 of V(x) = E for E in [E_min, E_max].
inline TurningPoints turning_points(const PotentialFunction& v, double e, const Tolerances& tol = {}) {
  detail::check_energy(v, e);
  return {detail::left_turning_point(v, e, tol), detail::middle_turning_point(v, e, tol),
          detail::right_turning_point(v, e, tol), e};
}

/// Integral of sqrt(E - V) over the classically allowed well (x0, x1).
inline double well_action(const PotentialFunction& v, double e, const Tolerances& tol = {}) {
  detail::check_energy(v, e);
  const double x0 = detail::left_turning_point(v, e, tol), x1 = detail::middle_turning_point(v, e, tol);
  if (x1 <= x0) return 0.0;
  auto f = [&](double x) { return std::sqrt(std::max(e - v(x), 0.0)); };
  return integrate_singular_pieces(f, x0, x1, v.breakpoints(), tol);
}

/// Integral of sqrt(V - E) under the barrier (x1, x2); pi times the barrier parameter a.
inline double barrier_action(const PotentialFunction& v, double e, const Tolerances& tol = {}) {
  detail::check_energy(v, e);
  const double x1 = detail::middle_turning_point(v, e, tol), x2 = detail::right_turning_point(v, e, tol);
  if (x2 <= x1) return 0.0;
  auto f = [&](double x) { return std::sqrt(std::max(v(x) - e, 0.0)); };
  return integrate_singular_pieces(f, x1, x2, v.breakpoints(), tol);
}

/// Integral of 1/sqrt(E - V) over the well, twice dS/dE of the well action.
inline double well_period(const PotentialFunction& v, double e, const Tolerances& tol = {}) {
  detail::check_energy(v, e);
  const double x0 = detail::left_turning_point(v, e, tol), x1 = detail::middle_turning_point(v, e, tol);
  if (x1 <= x0) throw DomainError("well period undefined at the well minimum");
  const detail::WellGap gap(v, e, x0, x1);
  auto f = [&](double x, double from_x0, double to_x1) {
    const double g = gap(x, from_x0, to_x1);
    return g > 0.0 ? 1.0 / std::sqrt(g) : 0.0;
  };
  return integrate_pieces_with_ends(f, x0, x1, v.breakpoints(), tol);
}

/// Real level E_0n solving well_action(E) = pi (n + 1/2).
inline double bs_level(const PotentialFunction& v, int n, const Tolerances& tol = {}) {
  if (n < 0) throw DomainError("level index must be non-negative");
  const double target = std::numbers::pi * (n + 0.5);
  const double top_action = well_action(v, v.e_max(), tol);
  if (top_action < target)
    throw LevelNotFound("level " + std::to_string(n) + " lies above the barrier top (action at E_max = " +
                            std::to_string(top_action) + ", needed " + std::to_string(target) + ")",
                        top_action);
  return find_root([&](double e) { return well_action(v, e, tol) - target; }, v.e_min(), v.e_max(), tol);
}

/// Gamow imaginary part E1 = -exp(-2 * barrier_action) / (2 * well_period).
inline double gamow_imag(const PotentialFunction& v, double e0, const Tolerances& tol = {}) {
  if (!(e0 > v.e_min() && e0 < v.e_max())) throw DomainError("Gamow width needs E_min < E < E_max");
  return -std::exp(-2.0 * barrier_action(v, e0, tol)) / (2.0 * well_period(v, e0, tol));
}

/// Semi-classical barrier transmission exp(-2 * barrier_action); 1 at the barrier top.
inline double transmission_forward(const PotentialFunction& v, double e, const Tolerances& tol = {}) {
  return std::exp(-2.0 * barrier_action(v, e, tol));
}

/// Gamma-function correction of the generalized quantization rule,
///   phi(a) = a(1 - ln a) + ln(Gamma(1/2 + i a) / (Gamma(1/2 - i a)(1 + e^{-2 pi a}))) / (2i),
/// with the continuous branch of log Gamma; a(1 - ln a) is taken as 0 at a = 0.
inline std::complex<double> phi_of_a(double a) {
  if (!(a >= 0.0)) throw DomainError("phi(a) requires a >= 0");
  const double lead = a == 0.0 ? 0.0 : a * (1.0 - std::log(a));
  const std::complex<double> z(0.5, a);
  const std::complex<double> log_ratio =
      log_gamma(z) - log_gamma(std::conj(z)) - std::log1p(std::exp(-2.0 * std::numbers::pi * a));
  return lead + log_ratio / std::complex<double>(0.0, 2.0);
}

/// Residual of the generalized rule linearized in Im E:
///   S(Re E) + (i/2) Im E * P(Re E) - pi (n + 1/2) + phi(a)/2,  a = barrier_action / pi.
inline std::complex<double> generalized_bs_residual(const PotentialFunction& v, std::complex<double> e, int n,
                                                    bool include_phi = true, const Tolerances& tol = {}) {
  const double e0 = e.real();
  std::complex<double> r = well_action(v, e0, tol) - std::numbers::pi * (n + 0.5);
  if (e.imag() != 0.0) r += std::complex<double>(0.0, 0.5 * e.imag() * well_period(v, e0, tol));
  if (include_phi) r += 0.5 * phi_of_a(barrier_action(v, e0, tol) / std::numbers::pi);
  return r;
}

struct ForwardSpectrum {
  DiscreteSpectrum spectrum;
  int truncated = 0;  ///< requested levels that fell above the barrier top
};

/// Levels n = 0..n_max (stopping at the barrier top) with Gamow widths.
inline ForwardSpectrum forward_spectrum(const PotentialFunction& v, int n_max, const Tolerances& tol = {}) {
  if (n_max < 0) throw DomainError("n_max must be non-negative");
  std::vector<ComplexLevel> levels;
  int n = 0;
  for (; n <= n_max; ++n) {
    double e0;
    try {
      e0 = bs_level(v, n, tol);
    } catch (const LevelNotFound&) {
      break;
    }
    if (!(e0 < v.e_max())) break;
    levels.push_back({n, e0, gamow_imag(v, e0, tol)});
  }
  return {DiscreteSpectrum(std::move(levels)), n_max + 1 - n};
}

}  // namespace qss
