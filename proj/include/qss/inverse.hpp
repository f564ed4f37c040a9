#pragma once

// Inverse pipeline: from a continuous spectrum model to the well width L1(E),
// the transmission T(E), the barrier top E_max and the barrier width L2(E).
//
//   L1(E) = d/dE 2 Int_{E_min}^{E} (n(E') + 1/2) / sqrt(E - E') dE'
//   P(E)  = Int_{E_min}^{E} L1'(E') / sqrt(E - E') dE'         (well period)
//   T(E)  = -2 E1(E) P(E)
//   L2(E) = (1/pi) Int_E^{E_max} (d ln T / dE') / sqrt(E' - E) dE'

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qss/error.hpp"
#include "qss/interpolation.hpp"
#include "qss/model.hpp"
#include "qss/numerics.hpp"

namespace qss {

/// Continuous well width L1(E) = regular(E) + 2 beta / sqrt(E - E_min), where
/// beta = n(E_min) + 1/2 vanishes when E_min solves n(E_min) = -1/2.
struct WellWidth {
  using Fn = std::function<double(double)>;
  Fn regular;        ///< 2 Int n'(E') / sqrt(E - E') dE'
  Fn regular_slope;  ///< d(regular)/dE
  double e_min = 0.0;
  double beta = 0.0;

  double operator()(double e) const { return regular(e) + 2.0 * beta / std::sqrt(e - e_min); }
  double slope(double e) const { return regular_slope(e) - beta / ((e - e_min) * std::sqrt(e - e_min)); }
};

/// Continuous barrier width L2(E) with its slope.
struct BarrierWidth {
  using Fn = std::function<double(double)>;
  Fn value;
  Fn slope;
  double e_max = 0.0;

  double operator()(double e) const { return value(e); }
};

struct TransmissionCurve {
  using Fn = std::function<double(double)>;
  Fn log_T;
  Fn dlogT_dE;
  Fn d2logT_dE2;
  double e_max = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> grid;          ///< energies where the period was sampled
  std::vector<double> log_T_samples;
  std::vector<double> breakpoints;   ///< kinks of dlogT_dE inherited from the model

  double T(double e) const { return std::exp(log_T(e)); }
};

struct WidthFunctions {
  SampledFunction L1;
  SampledFunction L2;
  double e_min = 0.0;
  double e_max = 0.0;
  WellWidth well;
  BarrierWidth barrier;
};

/// Root of n(E) + 1/2 = 0 searched from the lowest data energy down to the
/// model's admissible lower bound.
inline double estimate_emin(const SpectrumModel& m, const Tolerances& tol = {}) {
  auto f = [&](double e) { return m.n_of_E(e) + 0.5; };
  const double lo = m.admissible.e_min, hi = m.domain.e_min;
  const double f_hi = f(hi);
  if (f_hi <= 0.0) {
    // The lowest data level counts as n <= -1/2: search upward inside the data.
    if (f(m.domain.e_max) < 0.0)
      throw DomainError("estimate_emin: n(E) + 1/2 has no root in the admissible window; provide E_min explicitly");
    return find_root(f, hi, m.domain.e_max, tol);
  }
  if (f(lo) > 0.0)
    throw DomainError("estimate_emin: n(E) + 1/2 stays positive down to the extrapolation limit " +
                      std::to_string(lo) + "; provide E_min explicitly");
  return find_root(f, lo, hi, tol);
}

/// Continuous L1(E) for the given E_min.
inline WellWidth well_width(const SpectrumModel& m, double e_min, const Tolerances& tol = {}) {
  WellWidth w;
  w.e_min = e_min;
  w.beta = m.n_of_E(e_min) + 0.5;
  const SpectrumModel::Fn dn = m.dn_dE, d2n = m.d2n_dE2;
  auto knots = std::make_shared<std::vector<double>>(m.breakpoints);
  w.regular = [=](double e) {
    if (!(e > e_min)) return 0.0;
    return 2.0 * integrate_abel(dn, e_min, e, AbelEnd::upper, *knots, tol);
  };
  w.regular_slope = [=](double e) {
    if (!(e > e_min)) throw DomainError("L1 slope requires E > E_min");
    const double curv = integrate_abel(d2n, e_min, e, AbelEnd::upper, *knots, tol);
    return 2.0 * dn(e_min) / std::sqrt(e - e_min) + 2.0 * curv;
  };
  return w;
}

/// L1 sampled on the grid. Throws InvalidSpectrum when the width is not
/// positive and strictly increasing.
inline SampledFunction reconstruct_L1(const SpectrumModel& m, double e_min, std::span<const double> grid,
                                      const Tolerances& tol = {}) {
  const WellWidth w = well_width(m, e_min, tol);
  std::vector<double> g(grid.begin(), grid.end()), v(grid.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(g[i] > e_min)) throw DomainError("reconstruct_L1: grid must lie above E_min");
    v[i] = w(g[i]);
    if (!(v[i] > 0.0))
      throw InvalidSpectrum("well width L1 is not positive at E = " + std::to_string(g[i]));
    if (i > 0 && !(v[i] > v[i - 1]))
      throw InvalidSpectrum("well width L1 is not increasing near E = " + std::to_string(g[i]));
  }
  return SampledFunction(std::move(g), std::move(v));
}

/// Int_{E_min}^{E} L1'(E') / sqrt(E - E') dE', the well-period integral
/// expressed through the width alone. The 1/sqrt boundary part of L1 has a
/// constant Abel transform and contributes nothing.
inline double well_period_from_width(const WellWidth& w, double e, std::span<const double> breakpoints = {},
                                     const Tolerances& tol = {}) {
  if (!(e > w.e_min)) throw DomainError("well period requires E > E_min");
  return integrate_abel(w.regular_slope, w.e_min, e, AbelEnd::upper, breakpoints, tol);
}

/// T(E) = -2 E1(E) P(E), stored as ln T. Values use the period by direct
/// quadrature. Derivatives use d ln(-E1)/dE from the model and the Abel
/// identity P(E) = 2 pi n'(E), so d ln P/dE = n''/n' needs no differencing of
/// quadrature output.
inline TransmissionCurve transmission_from_spectrum(const SpectrumModel& m, const WellWidth& w,
                                                    std::span<const double> grid, const Tolerances& tol = {}) {
  if (grid.size() < 2) throw DomainError("transmission grid needs at least two energies");
  TransmissionCurve t;
  t.breakpoints = m.breakpoints;
  t.grid.assign(grid.begin(), grid.end());
  auto knots = std::make_shared<std::vector<double>>(m.breakpoints);
  auto period = [w, knots, tol](double e) { return well_period_from_width(w, e, *knots, tol); };

  t.log_T_samples.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double p = period(grid[i]);
    if (!(p > 0.0) || !std::isfinite(p))
      throw InvalidSpectrum("well period is not positive at E = " + std::to_string(grid[i]));
    t.log_T_samples[i] = std::numbers::ln2 + m.log_width(grid[i]) + std::log(p);
  }
  const SpectrumModel::Fn lw = m.log_width, dlw = m.dlog_width_dE, d2lw = m.d2log_width_dE2;
  const SpectrumModel::Fn dn = m.dn_dE, d2n = m.d2n_dE2;
  SpectrumModel::Fn d3n = m.d3n_dE3;
  if (!d3n) {
    const double h = 1e-5 * m.domain.width();
    d3n = [d2n, h](double e) { return (d2n(e + h) - d2n(e - h)) / (2.0 * h); };
  }
  t.log_T = [lw, period](double e) { return std::numbers::ln2 + lw(e) + std::log(period(e)); };
  t.dlogT_dE = [dlw, dn, d2n](double e) { return dlw(e) + d2n(e) / dn(e); };
  t.d2logT_dE2 = [d2lw, dn, d2n, d3n](double e) {
    const double q = d2n(e) / dn(e);
    return d2lw(e) + d3n(e) / dn(e) - q * q;
  };
  return t;
}

/// Root of ln T(E) = 0, bracketed by the first sign change of the grid samples.
inline double estimate_emax(const TransmissionCurve& t, const Tolerances& tol = {}) {
  const auto& g = t.grid;
  const auto& s = t.log_T_samples;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == 0.0) return g[i];
    if (s[i] > 0.0) {
      if (i == 0)
        throw DomainError("estimate_emax: T(E) >= 1 already at the lowest energy; provide E_max explicitly");
      return find_root(t.log_T, g[i - 1], g[i], tol);
    }
  }
  throw DomainError("estimate_emax: T(E) never reaches 1 within the admissible window; provide E_max explicitly");
}

namespace detail {

// Geometric offsets above lo reaching hi, for bracketing the T(E) = 1 crossing.
inline std::vector<double> scan_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  const double span = hi - lo;
  for (std::size_t i = 0; i < n; ++i)
    g[i] = lo + span * std::pow(10.0, -9.0 + 9.0 * static_cast<double>(i) / static_cast<double>(n - 1));
  return g;
}

}  // namespace detail

/// E_max of a model: T(E) scanned from E_min up to the admissible limit.
inline double estimate_emax(const SpectrumModel& m, const WellWidth& w, std::size_t scan = 256,
                            const Tolerances& tol = {}) {
  if (scan < 4) throw DomainError("estimate_emax: scan needs at least four energies");
  if (!(m.admissible.e_max > w.e_min)) throw DomainError("estimate_emax: E_min lies above the admissible window");
  const auto g = detail::scan_grid(w.e_min, m.admissible.e_max, scan);
  return estimate_emax(transmission_from_spectrum(m, w, g, tol), tol);
}

/// Continuous L2(E) and its slope for a transmission curve with known E_max.
inline BarrierWidth barrier_width(const TransmissionCurve& t, const Tolerances& tol = {}) {
  if (!std::isfinite(t.e_max)) throw DomainError("barrier width needs E_max");
  BarrierWidth b;
  b.e_max = t.e_max;
  auto knots = std::make_shared<std::vector<double>>(t.breakpoints);
  const double em = t.e_max;
  const TransmissionCurve::Fn g = t.dlogT_dE, dg = t.d2logT_dE2;
  b.value = [=](double e) {
    if (e > em) throw DomainError("barrier width requires E <= E_max");
    if (e == em) return 0.0;
    return integrate_abel(g, e, em, AbelEnd::lower, *knots, tol) / std::numbers::pi;
  };
  b.slope = [=](double e) {
    if (!(e < em)) throw DomainError("barrier width slope requires E < E_max");
    const double curv = integrate_abel(dg, e, em, AbelEnd::lower, *knots, tol);
    return (curv - g(em) / std::sqrt(em - e)) / std::numbers::pi;
  };
  return b;
}

struct L2Reconstruction {
  SampledFunction L2;
  std::optional<EnergyInterval> increasing_on;  ///< first grid run where dL2/dE >= 0
};

/// L2 sampled on the grid, with the location of any stretch where it grows
/// (which would make the barrier's outer wall overhang).
inline L2Reconstruction reconstruct_L2(const TransmissionCurve& t, std::span<const double> grid,
                                       const Tolerances& tol = {}) {
  const BarrierWidth b = barrier_width(t, tol);
  std::vector<double> g(grid.begin(), grid.end()), v(grid.size());
  std::optional<std::size_t> run_first, run_last;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] > t.e_max) throw DomainError("reconstruct_L2: grid extends above E_max");
    v[i] = b(g[i]);
    if (g[i] < t.e_max && !run_last) {
      const bool rising = b.slope(g[i]) >= 0.0;
      if (rising && !run_first) run_first = i;
      if (!rising && run_first) run_last = i - 1;
    }
  }
  L2Reconstruction r{SampledFunction(std::move(g), std::move(v)), std::nullopt};
  if (run_first) {
    std::size_t last = run_last.value_or(r.L2.size() - 1);
    if (r.L2.grid()[last] >= t.e_max && last > *run_first) --last;
    double lo = r.L2.grid()[*run_first], hi = r.L2.grid()[last];
    // Ends refined to the sign change of the slope between grid neighbours.
    auto refine = [&](double x0, double x1, double fallback) {
      try {
        return find_root(b.slope, x0, x1, tol);
      } catch (const BracketError&) {
        return fallback;
      }
    };
    if (*run_first > 0) lo = refine(r.L2.grid()[*run_first - 1], lo, lo);
    if (run_last && last == *run_last && last + 1 < r.L2.size() && r.L2.grid()[last + 1] < t.e_max)
      hi = refine(hi, r.L2.grid()[last + 1], hi);
    r.increasing_on = EnergyInterval(lo, hi > lo ? hi : std::nextafter(lo, t.e_max));
  }
  return r;
}

struct InversionOptions {
  std::optional<double> e_min;  ///< overrides estimate_emin
  std::optional<double> e_max;  ///< overrides estimate_emax
  std::size_t grid_size = 512;
  std::size_t scan_size = 256;
  Tolerances tol{};
};

enum class InversionStatus { valid, invalid, failed };

inline const char* status_name(InversionStatus s) {
  switch (s) {
    case InversionStatus::valid: return "valid";
    case InversionStatus::invalid: return "invalid";
    case InversionStatus::failed: return "failed";
  }
  return "?";
}

struct InversionDiagnostics {
  InversionStatus status = InversionStatus::valid;
  std::string failed_stage;
  std::optional<double> e_min, e_max, n_at_emax;
  std::optional<bool> n_increasing, T_increasing, L1_increasing, L2_decreasing;
  std::optional<EnergyInterval> L2_increasing_on;
  double emin_extrapolation = 0.0;  ///< distance of E_min below the data range
  double emax_extrapolation = 0.0;  ///< distance of E_max above the data range
  double data_span = 0.0;
  std::vector<std::string> messages;
};

struct InversionResult {
  std::vector<double> grid;
  std::optional<WellWidth> well;
  std::optional<TransmissionCurve> transmission;
  std::optional<WidthFunctions> widths;
  InversionDiagnostics diagnostics;
};

namespace detail {
inline std::string stage_message(const std::string& stage, const std::string& what) {
  if (what.rfind(stage + ":", 0) == 0) return what;
  return stage + ": " + what;
}
}  // namespace detail

/// Full pipeline E_min -> L1 -> T -> E_max -> L2 with validity diagnostics.
/// Stops at the first failing stage, keeping whatever was computed before it.
inline InversionResult invert_spectrum(const SpectrumModel& m, const InversionOptions& opt = {}) {
  InversionResult r;
  auto& d = r.diagnostics;
  d.data_span = m.domain.width();
  std::string stage;
  try {
    stage = "estimate_emin";
    const double e_min = opt.e_min ? *opt.e_min : estimate_emin(m, opt.tol);
    d.e_min = e_min;
    d.emin_extrapolation = std::max(0.0, m.domain.e_min - e_min);
    if (opt.e_min && std::abs(m.n_of_E(e_min) + 0.5) > 1e-9)
      d.messages.push_back("E_min override leaves n(E_min) + 1/2 = " + std::to_string(m.n_of_E(e_min) + 0.5) +
                           "; L1 keeps the boundary term");

    stage = "reconstruct_L1";
    r.well = well_width(m, e_min, opt.tol);

    stage = "estimate_emax";
    double e_max;
    if (opt.e_max) {
      e_max = *opt.e_max;
      if (!(e_max > e_min)) throw DomainError("E_max override must exceed E_min");
    } else {
      e_max = estimate_emax(m, *r.well, opt.scan_size, opt.tol);
    }
    d.e_max = e_max;
    d.n_at_emax = m.n_of_E(e_max);
    d.emax_extrapolation = std::max(0.0, e_max - m.domain.e_max);

    r.grid = clustered_grid(e_min, e_max, opt.grid_size);
    const auto& grid = r.grid;

    stage = "reconstruct_L1";
    SampledFunction l1 = reconstruct_L1(m, e_min, grid, opt.tol);

    stage = "transmission_from_spectrum";
    std::vector<double> t_grid = grid;
    t_grid.push_back(e_max);
    r.transmission = transmission_from_spectrum(m, *r.well, t_grid, opt.tol);
    r.transmission->e_max = e_max;

    stage = "reconstruct_L2";
    auto l2 = reconstruct_L2(*r.transmission, grid, opt.tol);
    d.L2_increasing_on = l2.increasing_on;
    r.widths = WidthFunctions{std::move(l1), std::move(l2.L2), e_min, e_max, *r.well,
                              barrier_width(*r.transmission, opt.tol)};
  } catch (const InvalidSpectrum& e) {
    d.status = InversionStatus::invalid;
    d.failed_stage = stage;
    d.messages.push_back(detail::stage_message(stage, e.what()));
  } catch (const Error& e) {
    d.status = InversionStatus::failed;
    d.failed_stage = stage;
    d.messages.push_back(detail::stage_message(stage, e.what()));
  }

  // Monotonicity verdicts on whatever grid is available.
  if (!r.grid.empty()) {
    bool n_up = true, t_up = true, l1_up = true;
    for (double e : r.grid) {
      if (!(m.dn_dE(e) > 0.0)) n_up = false;
      if (r.transmission && !(r.transmission->dlogT_dE(e) > 0.0)) t_up = false;
      if (r.well && !(r.well->slope(e) > 0.0)) l1_up = false;
    }
    d.n_increasing = n_up;
    if (r.transmission) d.T_increasing = t_up;
    if (r.well) d.L1_increasing = l1_up;
    if (r.widths) d.L2_decreasing = !d.L2_increasing_on.has_value();
    if (!n_up) d.messages.push_back("n(E) is not strictly increasing on (E_min, E_max)");
    if (r.transmission && !t_up) d.messages.push_back("T(E) is not strictly increasing on (E_min, E_max)");
    if (r.well && !l1_up) d.messages.push_back("L1(E) is not strictly increasing on (E_min, E_max)");
    if (d.L2_increasing_on)
      d.messages.push_back("L2(E) increases on [" + std::to_string(d.L2_increasing_on->e_min) + ", " +
                           std::to_string(d.L2_increasing_on->e_max) +
                           "]: no valid potential in this class has this spectrum");
    if (d.status == InversionStatus::valid && (!n_up || (r.transmission && !t_up) || (r.well && !l1_up) ||
                                               d.L2_increasing_on))
      d.status = InversionStatus::invalid;
  }
  if (d.n_at_emax && *d.n_at_emax < 0.5)
    d.messages.push_back("n(E_max) = " + std::to_string(*d.n_at_emax) + ": fewer than one trapped state");
  if (!m.analytic && d.data_span > 0.0) {
    if (d.emin_extrapolation > 0.5 * d.data_span)
      d.messages.push_back("E_min lies more than 50% of the data span below the lowest level");
    if (d.emax_extrapolation > 0.5 * d.data_span)
      d.messages.push_back("E_max lies more than 50% of the data span above the highest level");
  }
  return r;
}

}  // namespace qss
