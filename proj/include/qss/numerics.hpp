#pragma once

// Numerical kernels shared by every stage: adaptive Gauss-Kronrod quadrature,
// inverse-square-root endpoint integrators, Brent root bracketing,
// golden-section search and inversion of monotone samples.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qss/error.hpp"

namespace qss {

/// Accuracy controls shared across modules.
struct Tolerances {
  double rel = 1e-10;      ///< relative quadrature target
  double abs = 1e-14;      ///< absolute quadrature floor
  int max_depth = 40;      ///< maximum bisection depth of a single panel
  std::size_t max_panels = 1u << 16;
  double root_rel = 1e-12;  ///< root bracket target, relative to the initial bracket width
};

/// Energies are in units with hbar = 2m = 1.
struct EnergyInterval {
  double e_min;
  double e_max;

  EnergyInterval(double lo, double hi) : e_min(lo), e_max(hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
      throw DomainError("EnergyInterval requires finite e_min < e_max");
  }
  double width() const { return e_max - e_min; }
  bool contains(double e) const { return e >= e_min && e <= e_max; }
};

/// Real samples on a strictly increasing grid, evaluated by linear interpolation.
class SampledFunction {
 public:
  SampledFunction() = default;
  SampledFunction(std::vector<double> grid, std::vector<double> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (grid_.size() != values_.size()) throw DomainError("SampledFunction: grid/values length mismatch");
    if (grid_.size() < 2) throw DomainError("SampledFunction: need at least two samples");
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      if (!std::isfinite(grid_[i]) || !std::isfinite(values_[i]))
        throw DomainError("SampledFunction: non-finite sample at index " + std::to_string(i));
      if (i > 0 && !(grid_[i] > grid_[i - 1]))
        throw NotMonotoneError("SampledFunction: grid not strictly increasing at index " + std::to_string(i), i);
    }
  }

  std::span<const double> grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return grid_.size(); }
  double front() const { return grid_.front(); }
  double back() const { return grid_.back(); }

  double operator()(double x) const {
    if (!(x >= grid_.front() && x <= grid_.back()))
      throw DomainError("SampledFunction: " + std::to_string(x) + " outside [" + std::to_string(grid_.front()) +
                        ", " + std::to_string(grid_.back()) + "]");
    auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
    std::size_t hi = static_cast<std::size_t>(it - grid_.begin());
    if (hi >= grid_.size()) return values_.back();
    std::size_t lo = hi - 1;
    double w = (x - grid_[lo]) / (grid_[hi] - grid_[lo]);
    return values_[lo] + w * (values_[hi] - values_[lo]);
  }

 private:
  std::vector<double> grid_;
  std::vector<double> values_;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod abscissae and weights.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  int depth;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gauss_kronrod15(F& f, double a, double b, int depth) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double res_g = fc * kWg[3];
  double res_k = fc * kWgk[7];
  double res_abs = std::abs(res_k);
  std::array<double, 7> f1{}, f2{};
  for (int j = 0; j < 3; ++j) {
    const int jt = 2 * j + 1;
    const double dx = half * kXgk[jt];
    f1[jt] = f(center - dx);
    f2[jt] = f(center + dx);
    res_g += kWg[j] * (f1[jt] + f2[jt]);
    res_k += kWgk[jt] * (f1[jt] + f2[jt]);
    res_abs += kWgk[jt] * (std::abs(f1[jt]) + std::abs(f2[jt]));
  }
  for (int j = 0; j < 4; ++j) {
    const int jt = 2 * j;
    const double dx = half * kXgk[jt];
    f1[jt] = f(center - dx);
    f2[jt] = f(center + dx);
    res_k += kWgk[jt] * (f1[jt] + f2[jt]);
    res_abs += kWgk[jt] * (std::abs(f1[jt]) + std::abs(f2[jt]));
  }
  const double mean = 0.5 * res_k;
  double res_asc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) res_asc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

  const double value = res_k * half;
  res_abs *= std::abs(half);
  res_asc *= std::abs(half);
  double err = std::abs((res_k - res_g) * half);
  if (res_asc != 0.0 && err != 0.0) err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
  if (res_abs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * res_abs, err);
  if (!std::isfinite(value)) err = std::numeric_limits<double>::infinity();
  return {a, b, value, err, depth};
}

}  // namespace detail

/// Globally adaptive 15-point Gauss-Kronrod quadrature of f over [a, b].
/// Throws ConvergenceError carrying the best estimate when the panel budget
/// or the depth limit is exhausted before reaching max(abs, rel * |I|).
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, const Tolerances& tol = {}) {
  if (a == b) return {};
  if (b < a) {
    auto r = integrate_adaptive(f, b, a, tol);
    r.value = -r.value;
    return r;
  }
  std::size_t evals = 15;
  std::priority_queue<detail::Panel> open;
  open.push(detail::gauss_kronrod15(f, a, b, 0));
  double total = open.top().value;
  double total_err = open.top().error;
  std::size_t panels = 1;

  while (!open.empty()) {
    const double target = std::max(tol.abs, tol.rel * std::abs(total));
    if (total_err <= target) break;
    if (!std::isfinite(total)) break;
    detail::Panel worst = open.top();
    if (worst.depth >= tol.max_depth) {
      open.pop();
      continue;
    }
    if (panels >= tol.max_panels) break;
    open.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    detail::Panel left = detail::gauss_kronrod15(f, worst.a, mid, worst.depth + 1);
    detail::Panel right = detail::gauss_kronrod15(f, mid, worst.b, worst.depth + 1);
    evals += 30;
    ++panels;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    open.push(left);
    open.push(right);
  }

  // Panels frozen at max depth stay in the running total and its error.
  const double value = total;
  const double target = std::max(tol.abs, tol.rel * std::abs(value));
  if (!std::isfinite(value) || total_err > target)
    throw ConvergenceError("adaptive quadrature did not converge on [" + std::to_string(a) + ", " +
                               std::to_string(b) + "]",
                           value, total_err);
  return {value, total_err, evals};
}

namespace detail {

// Maps [a, m] with E = a + t^2 and [m, b] with E = b - t^2, m the midpoint.
// Any inverse-square-root endpoint behaviour at a or b becomes a bounded
// integrand in t.
template <class F>
double integrate_sqrt_ends(F& f, double a, double b, const Tolerances& tol) {
  if (a == b) return 0.0;
  if (!(a < b)) throw DomainError("singular integral requires a < b");
  const double h = std::sqrt(0.5 * (b - a));
  auto g = [&](double t) {
    const double t2 = t * t;
    return 2.0 * t * (f(a + t2) + f(b - t2));
  };
  return integrate_adaptive(g, 0.0, h, tol).value;
}

}  // namespace detail

/// Integral of f over [a, b] where f may diverge like 1/sqrt(E - a) at the lower end.
template <class F>
double integrate_singular_lower(F&& f, double a, double b, const Tolerances& tol = {}) {
  return detail::integrate_sqrt_ends(f, a, b, tol);
}

/// Integral of f over [a, b] where f may diverge like 1/sqrt(b - E) at the upper end.
template <class F>
double integrate_singular_upper(F&& f, double a, double b, const Tolerances& tol = {}) {
  return detail::integrate_sqrt_ends(f, a, b, tol);
}

/// Splits [a, b] at the interior breakpoints and integrates each piece with the
/// square-root endpoint substitution. Breakpoints are where the integrand has
/// kinks or square-root cusps (interpolation knots, potential samples).
template <class F>
double integrate_singular_pieces(F&& f, double a, double b, std::span<const double> breaks,
                                 const Tolerances& tol = {}) {
  if (a == b) return 0.0;
  if (!(a < b)) throw DomainError("singular integral requires a < b");
  auto first = std::upper_bound(breaks.begin(), breaks.end(), a);
  auto last = std::lower_bound(breaks.begin(), breaks.end(), b);
  double lo = a, sum = 0.0;
  for (auto it = first; it != last; ++it) {
    sum += detail::integrate_sqrt_ends(f, lo, *it, tol);
    lo = *it;
  }
  sum += detail::integrate_sqrt_ends(f, lo, b, tol);
  return sum;
}

/// Integral over [a, b] of f(x, from_a, to_b), split at the breakpoints, each
/// piece with the square-root substitution at both of its ends. from_a = x - a
/// and to_b = b - x are carried through the substitution, so they stay exact
/// where the rounded x would cancel against a or b.
template <class F>
double integrate_pieces_with_ends(F&& f, double a, double b, std::span<const double> breaks = {},
                                  const Tolerances& tol = {}) {
  if (a == b) return 0.0;
  if (!(a < b)) throw DomainError("singular integral requires a < b");
  auto piece = [&](double lo, double hi) {
    const double lo_a = lo - a, hi_a = hi - a, b_lo = b - lo, b_hi = b - hi;
    const double h = std::sqrt(0.5 * (hi - lo));
    auto k = [&](double t) {
      const double t2 = t * t;
      return 2.0 * t * (f(lo + t2, lo_a + t2, b_lo - t2) + f(hi - t2, hi_a - t2, b_hi + t2));
    };
    return integrate_adaptive(k, 0.0, h, tol).value;
  };
  auto first = std::upper_bound(breaks.begin(), breaks.end(), a);
  auto last = std::lower_bound(breaks.begin(), breaks.end(), b);
  double lo = a, sum = 0.0;
  for (auto it = first; it != last; ++it) {
    sum += piece(lo, *it);
    lo = *it;
  }
  return sum + piece(lo, b);
}

enum class AbelEnd { lower, upper };

/// Integral of g(E) / sqrt(E - a) (lower) or g(E) / sqrt(b - E) (upper) over
/// [a, b]. g may itself have square-root cusps at a, b and the breakpoints.
template <class G>
double integrate_abel(G&& g, double a, double b, AbelEnd end, std::span<const double> breaks = {},
                      const Tolerances& tol = {}) {
  if (end == AbelEnd::lower)
    return integrate_pieces_with_ends([&](double e, double from_a, double) { return g(e) / std::sqrt(from_a); }, a,
                                      b, breaks, tol);
  return integrate_pieces_with_ends([&](double e, double, double to_b) { return g(e) / std::sqrt(to_b); }, a, b,
                                    breaks, tol);
}

/// Brent's method on a bracketing interval. Returns x with f(x) == 0 or a
/// bracket narrower than tol.root_rel * (hi - lo).
template <class F>
double find_root(F&& f, double lo, double hi, const Tolerances& tol = {}) {
  if (lo > hi) std::swap(lo, hi);
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (!std::isfinite(fa) || !std::isfinite(fb) || (fa > 0.0) == (fb > 0.0))
    throw BracketError("find_root: no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]", lo,
                       hi, fa, fb);
  const double xtol = tol.root_rel * (hi - lo);
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 0; iter < 200; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * xtol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
  }
  return b;
}

/// Golden-section search for a minimum of a unimodal f on [lo, hi].
template <class F>
double golden_section_minimize(F&& f, double lo, double hi, double xtol = 1e-13) {
  constexpr double inv_phi = 0.6180339887498948482;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  const double stop = xtol * std::max(1.0, std::abs(hi - lo));
  while (b - a > stop) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

/// Index of the first sample breaking strict monotonicity (direction taken
/// from the first pair), or size() when the samples are strictly monotone.
inline std::size_t first_monotonicity_violation(std::span<const double> v) {
  if (v.size() < 2) return v.size();
  if (v[1] == v[0]) return 1;
  const bool up = v[1] > v[0];
  for (std::size_t i = 1; i < v.size(); ++i) {
    const bool ok = up ? v[i] > v[i - 1] : v[i] < v[i - 1];
    if (!ok) return i;
  }
  return v.size();
}

/// Swaps the roles of grid and values. Decreasing values are reversed so the
/// new grid increases; inverting twice restores the input exactly.
inline SampledFunction invert_monotone(const SampledFunction& f) {
  auto v = f.values();
  auto g = f.grid();
  const std::size_t bad = first_monotonicity_violation(v);
  if (bad != v.size())
    throw NotMonotoneError("invert_monotone: values not strictly monotone at index " + std::to_string(bad), bad);
  std::vector<double> grid(v.begin(), v.end());
  std::vector<double> vals(g.begin(), g.end());
  if (v[1] < v[0]) {
    std::reverse(grid.begin(), grid.end());
    std::reverse(vals.begin(), vals.end());
  }
  return SampledFunction(std::move(grid), std::move(vals));
}

/// Energy grid on the open interval (lo, hi): geometric clustering toward both
/// endpoints (offsets from 1e-6 to 2% of the width), uniform in between.
inline std::vector<double> clustered_grid(double lo, double hi, std::size_t n) {
  if (n < 8) throw DomainError("clustered_grid needs at least 8 points");
  if (!(lo < hi)) throw DomainError("clustered_grid requires lo < hi");
  const std::size_t n_geo = n / 8;
  const std::size_t n_mid = n - 2 * n_geo;
  constexpr double u_first = 1e-6, u_edge = 0.02;
  std::vector<double> u;
  u.reserve(n);
  const double ratio = std::pow(u_edge / u_first, 1.0 / static_cast<double>(n_geo));
  for (std::size_t i = 0; i < n_geo; ++i) u.push_back(u_first * std::pow(ratio, static_cast<double>(i)));
  for (std::size_t i = 0; i < n_mid; ++i)
    u.push_back(u_edge + (1.0 - 2.0 * u_edge) * static_cast<double>(i) / static_cast<double>(n_mid - 1));
  for (std::size_t i = n_geo; i-- > 0;) u.push_back(1.0 - u_first * std::pow(ratio, static_cast<double>(i)));
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = lo + (hi - lo) * u[i];
  return grid;
}

}  // namespace qss
