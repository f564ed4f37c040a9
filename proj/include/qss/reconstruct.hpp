#pragma once

// Potentials from reconstructed widths: turning-point maps (chi family or a
// user-supplied turning point), their monotonicity checks, and branch-wise
// inversion to V(x).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qss/error.hpp"
#include "qss/forward.hpp"
#include "qss/inverse.hpp"
#include "qss/numerics.hpp"

namespace qss {

enum class TurningPoint { x0, x1, x2 };

inline const char* turning_point_name(TurningPoint t) {
  switch (t) {
    case TurningPoint::x0: return "x0";
    case TurningPoint::x1: return "x1";
    case TurningPoint::x2: return "x2";
  }
  return "?";
}

/// The three turning-point functions sampled on the widths grid, plus
/// continuous versions for the E_min / E_max limits and their slopes.
struct TurningPointMap {
  using Fn = std::function<double(double)>;
  SampledFunction x0, x1, x2;
  Fn f0, f1, f2;     ///< continuous x_i(E)
  Fn df0, df1, df2;  ///< dx_i/dE
  std::optional<double> chi;              ///< empty for a custom map
  std::optional<TurningPoint> provided;   ///< which function a custom map was given
  double e_min = 0.0, e_max = 0.0;

  const Fn& slope(TurningPoint t) const { return t == TurningPoint::x0 ? df0 : t == TurningPoint::x1 ? df1 : df2; }
  const SampledFunction& samples(TurningPoint t) const {
    return t == TurningPoint::x0 ? x0 : t == TurningPoint::x1 ? x1 : x2;
  }
};

namespace detail {

inline std::vector<double> grid_of(const WidthFunctions& w) {
  auto g = w.L1.grid();
  return {g.begin(), g.end()};
}

}  // namespace detail

/// x0 = -chi L1, x1 = (1 - chi) L1, x2 = L2 + (1 - chi) L1.
inline TurningPointMap chi_turning_points(const WidthFunctions& w, double chi) {
  if (!(chi >= 0.0 && chi <= 1.0)) throw DomainError("chi must lie in [0, 1]");
  TurningPointMap m;
  m.chi = chi;
  m.e_min = w.e_min;
  m.e_max = w.e_max;
  const WellWidth l1 = w.well;
  const BarrierWidth l2 = w.barrier;
  const double em = w.e_max, emin = w.e_min;
  const double k = 1.0 - chi;
  // L2(E_max) = 0 exactly; below E_min the well has zero width.
  auto L1 = [l1, emin](double e) { return e > emin ? l1(e) : 0.0; };
  m.f0 = [L1, chi](double e) { return -chi * L1(e); };
  m.f1 = [L1, k](double e) { return k * L1(e); };
  m.f2 = [L1, l2, k, em](double e) { return (e < em ? l2(e) : 0.0) + k * L1(e); };
  m.df0 = [l1, chi](double e) { return -chi * l1.slope(e); };
  m.df1 = [l1, k](double e) { return k * l1.slope(e); };
  m.df2 = [l1, l2, k](double e) { return l2.slope(e) + k * l1.slope(e); };

  // Grid samples come from the stored widths so the identities hold exactly.
  const auto grid = detail::grid_of(w);
  const auto L1v = w.L1.values(), L2v = w.L2.values();
  std::vector<double> v0(grid.size()), v1(grid.size()), v2(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    v0[i] = -chi * L1v[i];
    v1[i] = k * L1v[i];
    v2[i] = L2v[i] + v1[i];
  }
  m.x0 = SampledFunction(grid, std::move(v0));
  m.x1 = SampledFunction(grid, std::move(v1));
  m.x2 = SampledFunction(grid, std::move(v2));
  return m;
}

/// Map from one supplied turning-point function; the other two follow from
/// x1 - x0 = L1 and x2 - x1 = L2. Without a derivative the slope is taken by
/// central differences. The supplied function must have the right direction:
/// x0 non-increasing, x1 non-decreasing, x2 non-increasing.
inline TurningPointMap custom_turning_points(const WidthFunctions& w, TurningPoint which,
                                             std::function<double(double)> x,
                                             std::function<double(double)> dx = {}) {
  if (!x) throw DomainError("custom_turning_points: no function supplied");
  const double emin = w.e_min, em = w.e_max;
  if (!dx) {
    const double h = 1e-6 * (em - emin);
    dx = [x, h, emin, em](double e) {
      const double lo = std::max(emin, e - h), hi = std::min(em, e + h);
      return (x(hi) - x(lo)) / (hi - lo);
    };
  }
  const auto grid = detail::grid_of(w);
  std::vector<double> given(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) given[i] = x(grid[i]);
  for (std::size_t i = 1; i < given.size(); ++i) {
    const double step = given[i] - given[i - 1];
    const bool ok = which == TurningPoint::x1 ? step >= 0.0 : step <= 0.0;
    if (!ok)
      throw NotMonotoneError(std::string("custom_turning_points: supplied ") + turning_point_name(which) + " is " +
                                 (which == TurningPoint::x1 ? "decreasing" : "increasing") + " at E = " +
                                 std::to_string(grid[i]),
                             i);
  }

  const WellWidth l1 = w.well;
  const BarrierWidth l2 = w.barrier;
  auto L1 = [l1, emin](double e) { return e > emin ? l1(e) : 0.0; };
  auto L2 = [l2, em](double e) { return e < em ? l2(e) : 0.0; };
  auto dL1 = [l1](double e) { return l1.slope(e); };
  auto dL2 = [l2](double e) { return l2.slope(e); };

  TurningPointMap m;
  m.provided = which;
  m.e_min = emin;
  m.e_max = em;
  switch (which) {
    case TurningPoint::x0:
      m.f0 = x;
      m.f1 = [x, L1](double e) { return x(e) + L1(e); };
      m.f2 = [x, L1, L2](double e) { return x(e) + L1(e) + L2(e); };
      m.df0 = dx;
      m.df1 = [dx, dL1](double e) { return dx(e) + dL1(e); };
      m.df2 = [dx, dL1, dL2](double e) { return dx(e) + dL1(e) + dL2(e); };
      break;
    case TurningPoint::x1:
      m.f0 = [x, L1](double e) { return x(e) - L1(e); };
      m.f1 = x;
      m.f2 = [x, L2](double e) { return x(e) + L2(e); };
      m.df0 = [dx, dL1](double e) { return dx(e) - dL1(e); };
      m.df1 = dx;
      m.df2 = [dx, dL2](double e) { return dx(e) + dL2(e); };
      break;
    case TurningPoint::x2:
      m.f0 = [x, L1, L2](double e) { return x(e) - L2(e) - L1(e); };
      m.f1 = [x, L2](double e) { return x(e) - L2(e); };
      m.f2 = x;
      m.df0 = [dx, dL1, dL2](double e) { return dx(e) - dL2(e) - dL1(e); };
      m.df1 = [dx, dL2](double e) { return dx(e) - dL2(e); };
      m.df2 = dx;
      break;
  }

  const auto L1v = w.L1.values(), L2v = w.L2.values();
  std::vector<double> v0(grid.size()), v1(grid.size()), v2(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    switch (which) {
      case TurningPoint::x0: v0[i] = given[i]; v1[i] = v0[i] + L1v[i]; v2[i] = v1[i] + L2v[i]; break;
      case TurningPoint::x1: v1[i] = given[i]; v0[i] = v1[i] - L1v[i]; v2[i] = v1[i] + L2v[i]; break;
      case TurningPoint::x2: v2[i] = given[i]; v1[i] = v2[i] - L2v[i]; v0[i] = v1[i] - L1v[i]; break;
    }
  }
  m.x0 = SampledFunction(grid, std::move(v0));
  m.x1 = SampledFunction(grid, std::move(v1));
  m.x2 = SampledFunction(grid, std::move(v2));
  return m;
}

/// Energies on (e_min, e_max) with E - e_min ~ s^2 and e_max - E ~ (1 - s)^2
/// for uniform s, so square-root branches get evenly spaced positions.
inline std::vector<double> potential_grid(double e_min, double e_max, std::size_t n) {
  if (n < 2) throw DomainError("potential_grid needs at least two points");
  if (!(e_min < e_max)) throw DomainError("potential_grid requires e_min < e_max");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(i + 1) / static_cast<double>(n + 1);
    const double u = std::sin(0.5 * std::numbers::pi * s);
    g[i] = e_min + (e_max - e_min) * u * u;
  }
  return g;
}

/// The same map sampled on another grid through its continuous functions.
inline TurningPointMap resample(const TurningPointMap& m, const std::vector<double>& grid) {
  TurningPointMap r = m;
  std::vector<double> v0(grid.size()), v1(grid.size()), v2(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > m.e_min && grid[i] < m.e_max)) throw DomainError("resample: grid must lie inside (E_min, E_max)");
    v0[i] = m.f0(grid[i]);
    v1[i] = m.f1(grid[i]);
    v2[i] = m.f2(grid[i]);
  }
  r.x0 = SampledFunction(grid, std::move(v0));
  r.x1 = SampledFunction(grid, std::move(v1));
  r.x2 = SampledFunction(grid, std::move(v2));
  return r;
}

struct TurningPointVerdict {
  bool valid = true;
  std::optional<double> e_c;                 ///< first energy where a slope changes sign
  std::optional<TurningPoint> violated;      ///< which function loses its monotonicity
  std::string message;
};

/// Direction checks at every grid energy: dx0/dE <= 0, dx1/dE >= 0 and
/// dx2/dE < 0. The sign change closest to E_min among the violating
/// functions is refined by root finding on the continuous slope.
inline TurningPointVerdict validate_turning_points(const TurningPointMap& m, const Tolerances& tol = {}) {
  const auto grid = m.x0.grid();
  if (grid.size() < 64) throw DomainError("validate_turning_points needs a grid of at least 64 energies");
  TurningPointVerdict v;
  std::optional<double> best;
  for (TurningPoint t : {TurningPoint::x0, TurningPoint::x1, TurningPoint::x2}) {
    const auto& d = m.slope(t);
    auto bad = [&](double s) {
      switch (t) {
        case TurningPoint::x0: return s > 0.0;
        case TurningPoint::x1: return s < 0.0;
        case TurningPoint::x2: return !(s < 0.0);
      }
      return false;
    };
    std::vector<double> s(grid.size());
    bool any_bad = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      s[i] = d(grid[i]);
      if (bad(s[i])) any_bad = true;
    }
    if (!any_bad) continue;
    v.valid = false;
    std::optional<double> flip;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (bad(s[i]) == bad(s[i - 1])) continue;
      if (s[i] == 0.0) {
        flip = grid[i];
      } else if (s[i - 1] == 0.0) {
        flip = grid[i - 1];
      } else {
        try {
          flip = find_root(d, grid[i - 1], grid[i], tol);
        } catch (const BracketError&) {
          flip = grid[i];
        }
      }
      break;
    }
    const double where = flip.value_or(grid.front());
    if (!best || where < *best) {
      best = where;
      v.violated = t;
      v.e_c = flip;
    }
  }
  if (v.valid) {
    v.message = "valid: turning points strictly monotone on (E_min, E_max)";
  } else {
    v.message = std::string("invalid: ") + turning_point_name(*v.violated) + "(E) loses monotonicity";
    if (v.e_c) v.message += " at E_c = " + std::to_string(*v.e_c);
    else v.message += " on the whole grid";
  }
  return v;
}

/// One monotone piece of V(x). A wall is a vertical segment at x_lo == x_hi
/// spanning [e_min, e_max]; it carries no samples and is skipped by evaluation.
struct PotentialBranch {
  double x_lo = 0.0, x_hi = 0.0;
  std::optional<SampledFunction> v;  ///< empty for walls
  bool wall = false;
};

class PiecewisePotential {
 public:
  PiecewisePotential(std::vector<PotentialBranch> branches, double e_min, double e_max)
      : branches_(std::move(branches)), e_min_(e_min), e_max_(e_max) {
    if (branches_.empty()) throw DomainError("potential needs at least one branch");
  }

  const std::vector<PotentialBranch>& branches() const { return branches_; }
  double e_min() const { return e_min_; }
  double e_max() const { return e_max_; }
  double x_lo() const { return branches_.front().x_lo; }
  double x_hi() const { return branches_.back().x_hi; }

  /// Linear interpolation within the first non-wall branch covering x.
  double operator()(double x) const {
    for (const auto& b : branches_)
      if (!b.wall && x >= b.x_lo && x <= b.x_hi) return (*b.v)(x);
    throw DomainError("potential evaluated outside its reconstructed range at x = " + std::to_string(x));
  }

  /// (x, V) pairs left to right; walls contribute both of their end heights.
  std::vector<std::pair<double, double>> samples() const {
    std::vector<std::pair<double, double>> out;
    auto push = [&](double x, double v) {
      if (out.empty() || out.back().first != x || out.back().second != v) out.emplace_back(x, v);
    };
    for (std::size_t i = 0; i < branches_.size(); ++i) {
      const auto& b = branches_[i];
      if (b.wall) {
        // Start from the height nearest the previous point so the polyline stays connected.
        const bool from_top = out.empty() || std::abs(out.back().second - e_max_) < std::abs(out.back().second - e_min_);
        push(b.x_lo, from_top ? e_max_ : e_min_);
        push(b.x_lo, from_top ? e_min_ : e_max_);
        continue;
      }
      const auto g = b.v->grid();
      const auto v = b.v->values();
      for (std::size_t k = 0; k < g.size(); ++k) push(g[k], v[k]);
    }
    return out;
  }

 private:
  std::vector<PotentialBranch> branches_;
  double e_min_, e_max_;
};

inline double eval_potential(const PiecewisePotential& p, double x) { return p(x); }

namespace detail {

// Limit of x(E) at E_min from x = p + c sqrt(E - E_min) through the two
// lowest samples.
inline double sqrt_limit(const SampledFunction& f, double e_min) {
  const double ea = f.grid()[0], eb = f.grid()[1];
  const double ra = std::sqrt(ea - e_min), rb = std::sqrt(eb - e_min);
  const double c = (f.values()[1] - f.values()[0]) / (rb - ra);
  return f.values()[0] - c * ra;
}

inline bool is_constant(std::span<const double> v) {
  const double lo = *std::min_element(v.begin(), v.end()), hi = *std::max_element(v.begin(), v.end());
  return hi - lo <= 1e-14 * std::max(1.0, std::abs(hi));
}

}  // namespace detail

/// Inverts the three turning-point branches into V(x): left well wall from
/// x0, right well wall and inner barrier side from x1, outer barrier side from
/// x2. The well minimum and the barrier top are added as the E_min and E_max
/// limits of the branches. A constant x0 or x1 becomes a vertical wall.
///
/// With well_only the x2 branch is not used: the potential ends in a
/// vertical drop at the barrier top. Such a potential reproduces the real
/// parts of the levels but carries no barrier, which is the only thing left
/// when x2(E) overhangs.
inline PiecewisePotential build_potential(const TurningPointMap& m, const Tolerances& tol = {}, bool well_only = false) {
  const auto verdict = validate_turning_points(m, tol);
  if (!verdict.valid && !(well_only && verdict.violated == TurningPoint::x2))
    throw NotMonotoneError("build_potential: " + verdict.message, 0);
  const double emin = m.e_min, emax = m.e_max;

  const bool wall0 = detail::is_constant(m.x0.values());
  const bool wall1 = detail::is_constant(m.x1.values());
  if (!well_only && detail::is_constant(m.x2.values()))
    throw NotMonotoneError("build_potential: x2(E) is constant and cannot be inverted", 0);

  // Well bottom: average of the x0 and x1 limits (they coincide when L1 -> 0).
  double x_bottom;
  if (wall0) x_bottom = m.x0.values()[0];
  else if (wall1) x_bottom = m.x1.values()[0];
  else x_bottom = 0.5 * (detail::sqrt_limit(m.x0, emin) + detail::sqrt_limit(m.x1, emin));
  const double x_top = wall1 ? m.x1.values()[0] : m.f1(emax);

  auto energies = [&](const SampledFunction& f) {
    auto g = f.grid();
    std::vector<double> e;
    e.reserve(g.size() + 2);
    e.push_back(emin);
    e.insert(e.end(), g.begin(), g.end());
    e.push_back(emax);
    return e;
  };
  auto branch = [&](const SampledFunction& f, double x_at_min, double x_at_max) {
    auto e = energies(f);
    std::vector<double> x;
    x.reserve(e.size());
    x.push_back(x_at_min);
    auto v = f.values();
    x.insert(x.end(), v.begin(), v.end());
    x.push_back(x_at_max);
    // Drop limit points that are missing (divergent widths) or would break
    // strict monotonicity (extrapolation noise).
    if (!std::isfinite(x[0]) || !((x[1] - x[0]) * (x[2] - x[1]) > 0.0)) {
      e.erase(e.begin());
      x.erase(x.begin());
    }
    const std::size_t n = x.size();
    if (!std::isfinite(x[n - 1]) || !((x[n - 1] - x[n - 2]) * (x[n - 2] - x[n - 3]) > 0.0)) {
      e.pop_back();
      x.pop_back();
    }
    SampledFunction inv = invert_monotone(SampledFunction(std::move(e), std::move(x)));
    PotentialBranch b;
    b.x_lo = inv.front();
    b.x_hi = inv.back();
    b.v = std::move(inv);
    return b;
  };
  auto wall = [](double x) {
    PotentialBranch b;
    b.x_lo = b.x_hi = x;
    b.wall = true;
    return b;
  };

  std::vector<PotentialBranch> out;
  out.push_back(wall0 ? wall(x_bottom) : branch(m.x0, x_bottom, m.f0(emax)));
  if (wall1) out.push_back(wall(x_top));
  else out.push_back(branch(m.x1, x_bottom, x_top));
  if (well_only) {
    out.push_back(wall(x_top));
    return PiecewisePotential(std::move(out), emin, emax);
  }
  // L2 may diverge at E_min (families I and II): the outer wall then ends at the lowest sample.
  double x2_bottom = std::numeric_limits<double>::quiet_NaN();
  try {
    x2_bottom = m.f2(emin);
  } catch (const Error&) {
  }
  out.push_back(branch(m.x2, x2_bottom, x_top));
  return PiecewisePotential(std::move(out), emin, emax);
}

/// Adapter for the forward solver. A leading wall is modelled by V = E_max on
/// a sliver to its left so the left turning point sits on the wall.
inline PotentialFunction as_potential_function(const PiecewisePotential& p) {
  std::vector<double> pts;
  for (const auto& b : p.branches()) {
    if (b.wall) {
      pts.push_back(b.x_lo);
      continue;
    }
    auto g = b.v->grid();
    pts.insert(pts.end(), g.begin(), g.end());
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  double lo = p.x_lo();
  double hi = p.x_hi();
  auto pot = std::make_shared<PiecewisePotential>(p);
  PotentialFunction::Fn f = [pot](double x) { return (*pot)(x); };
  if (p.branches().front().wall) {
    const double sliver = 1e-9 * (hi - lo);
    const double wall_x = lo, top = p.e_max();
    lo -= sliver;
    pts.insert(pts.begin(), lo);
    f = [pot, wall_x, top](double x) { return x < wall_x ? top : (*pot)(x); };
  }
  if (p.branches().size() > 1 && p.branches().back().wall) {
    // A trailing wall drops to E_min on a sliver to its right.
    const double sliver = 1e-9 * (hi - lo);
    const double wall_x = hi, bottom = p.e_min();
    hi += sliver;
    pts.push_back(hi);
    f = [f, wall_x, bottom](double x) { return x > wall_x ? bottom : f(x); };
  }
  std::vector<double> breaks = pts;
  return PotentialFunction(std::move(f), lo, hi, std::move(pts), std::move(breaks));
}

/// Potential from an ordered (x, V) polyline such as a written potential
/// file. Two consecutive points with the same x form a vertical wall: V takes
/// the left value at the wall position and the right value just after it. A
/// leading wall continues at its top height on a sliver to the left.
inline PotentialFunction potential_from_samples(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 3) throw DomainError("potential needs at least three samples");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!std::isfinite(pts[i].first) || !std::isfinite(pts[i].second))
      throw DomainError("potential sample " + std::to_string(i + 1) + " is not finite");
    if (i > 0 && pts[i].first < pts[i - 1].first)
      throw NotMonotoneError("potential positions must be non-decreasing (sample " + std::to_string(i + 1) + ")", i);
  }
  auto p = std::make_shared<std::vector<std::pair<double, double>>>(pts);
  double lo = pts.front().first;
  const double hi = pts.back().first;
  const bool leading_wall = pts[1].first == pts[0].first;
  const double top = std::max(pts[0].second, pts[1].second);
  const double wall_x = lo;
  if (leading_wall) lo -= 1e-9 * (hi - lo);
  PotentialFunction::Fn f = [p, leading_wall, wall_x, top](double x) {
    const auto& v = *p;
    if (leading_wall && x < wall_x) return top;
    // Last point with position <= x, then the next point strictly to the right.
    auto it = std::upper_bound(v.begin(), v.end(), x, [](double a, const auto& q) { return a < q.first; });
    if (it == v.begin()) throw DomainError("potential evaluated left of its samples");
    if (it == v.end()) {
      if (x == v.back().first) return v.back().second;
      throw DomainError("potential evaluated right of its samples");
    }
    auto left = std::prev(it);
    // Walls: at the wall position take the value arriving from the left.
    auto first_at = left;
    while (first_at != v.begin() && std::prev(first_at)->first == left->first) --first_at;
    if (x == left->first) return (first_at == v.begin() && leading_wall) ? left->second : first_at->second;
    const double w = (x - left->first) / (it->first - left->first);
    return left->second + w * (it->second - left->second);
  };
  std::vector<double> xs;
  for (const auto& q : pts) xs.push_back(q.first);
  if (leading_wall) xs.insert(xs.begin(), lo);
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<double> breaks = xs;
  return PotentialFunction(std::move(f), lo, hi, std::move(xs), std::move(breaks));
}

}  // namespace qss
