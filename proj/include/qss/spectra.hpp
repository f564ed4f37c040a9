#pragma once

// The four analytic quasi-stationary spectrum families and their closed-form
// inverse results (transmission, barrier width, barrier top, validity).
//
//   I   E_n = a(n+1/2) - i b exp(-c/(n+1/2))
//   II  E_n = a(n+1/2) - i b exp(-c/sqrt(n+1/2))
//   III E_n = a(n+1/2) - i exp(-[N - b(n+1/2)])
//   IV  E_n = a(n+1/2) - i exp(-[N - b(n+1/2)^2])

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "qss/error.hpp"
#include "qss/model.hpp"
#include "qss/numerics.hpp"

namespace qss {

enum class Family { I, II, III, IV };

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::I: return "I";
    case Family::II: return "II";
    case Family::III: return "III";
    case Family::IV: return "IV";
  }
  return "?";
}

inline Family parse_family(std::string_view s) {
  if (s == "I" || s == "1") return Family::I;
  if (s == "II" || s == "2") return Family::II;
  if (s == "III" || s == "3") return Family::III;
  if (s == "IV" || s == "4") return Family::IV;
  throw InvalidParameters("unknown spectrum family '" + std::string(s) + "' (expected I, II, III or IV)");
}

/// Validated parameters of an analytic family. Families I and II use (a, b, c),
/// families III and IV use (a, b, N) with b the slope of the exponent.
class AnalyticSpectrumParams {
 public:
  AnalyticSpectrumParams(Family family, double a, double b, double third) : family_(family), a_(a), b_(b) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(third))
      throw InvalidParameters("spectrum parameters must be finite");
    if (!(a > 0.0)) throw InvalidParameters("parameter a must be positive");
    if (family == Family::I || family == Family::II) {
      c_ = third;
      if (!(b > 0.0)) throw InvalidParameters("parameter b must be positive");
      if (!(c_ > 0.0)) throw InvalidParameters("parameter c must be positive");
      if (!(a < 4.0 * std::numbers::pi * b))
        throw InvalidParameters("barrier top does not exist: requires a < 4*pi*b (E_max > E_min)");
    } else {
      n_ = third;
      if (!(b >= 0.0)) throw InvalidParameters("parameter b must be non-negative");
      if (b > 0.0 && !(n_ + std::log(a / (4.0 * std::numbers::pi)) > 0.0))
        throw InvalidParameters("barrier top must lie above E_min: requires N + ln(a/(4*pi)) > 0");
    }
  }

  static AnalyticSpectrumParams family_i(double a, double b, double c) { return {Family::I, a, b, c}; }
  static AnalyticSpectrumParams family_ii(double a, double b, double c) { return {Family::II, a, b, c}; }
  static AnalyticSpectrumParams family_iii(double a, double b, double N) { return {Family::III, a, b, N}; }
  static AnalyticSpectrumParams family_iv(double a, double b, double N) { return {Family::IV, a, b, N}; }

  Family family() const { return family_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }
  double N() const { return n_; }

 private:
  Family family_;
  double a_, b_;
  double c_ = 0.0;
  double n_ = 0.0;
};

/// ln(-Im E) as a function of the continuous real energy, n + 1/2 = E/a.
inline double analytic_log_width(const AnalyticSpectrumParams& p, double e) {
  const double a = p.a(), b = p.b();
  switch (p.family()) {
    case Family::I: return std::log(b) - a * p.c() / e;
    case Family::II: return std::log(b) - p.c() * std::sqrt(a) / std::sqrt(e);
    case Family::III: return -p.N() + b * e / a;
    case Family::IV: return -p.N() + b * (e / a) * (e / a);
  }
  return 0.0;
}

inline ComplexLevel eval_level(const AnalyticSpectrumParams& p, int n) {
  if (n < 0) throw DomainError("level index must be non-negative");
  const double half = n + 0.5;
  double e1 = 0.0;
  switch (p.family()) {
    case Family::I: e1 = -p.b() * std::exp(-p.c() / half); break;
    case Family::II: e1 = -p.b() * std::exp(-p.c() / std::sqrt(half)); break;
    case Family::III: e1 = -std::exp(-(p.N() - p.b() * half)); break;
    case Family::IV: e1 = -std::exp(-(p.N() - p.b() * half * half)); break;
  }
  return {n, p.a() * half, e1};
}

inline DiscreteSpectrum analytic_levels(const AnalyticSpectrumParams& p, int n_first, int n_last) {
  std::vector<ComplexLevel> levels;
  for (int n = n_first; n <= n_last; ++n) levels.push_back(eval_level(p, n));
  return DiscreteSpectrum(std::move(levels));
}

inline double oracle_transmission(const AnalyticSpectrumParams& p, double e) {
  if (!(e > 0.0)) throw DomainError("transmission oracle requires E > 0");
  constexpr double four_pi = 4.0 * std::numbers::pi;
  const double a = p.a(), b = p.b();
  switch (p.family()) {
    case Family::I: return four_pi * b / a * std::exp(-a * p.c() / e);
    case Family::II: return four_pi * b / a * std::exp(-p.c() * std::sqrt(a) / std::sqrt(e));
    case Family::III: return four_pi / a * std::exp(-p.N() + b / a * e);
    case Family::IV: return four_pi / a * std::exp(-(p.N() - b / (a * a) * e * e));
  }
  return 0.0;
}

inline double oracle_emax(const AnalyticSpectrumParams& p) {
  constexpr double four_pi = 4.0 * std::numbers::pi;
  const double a = p.a(), b = p.b();
  switch (p.family()) {
    case Family::I: return a * p.c() / std::log(four_pi * b / a);
    case Family::II: {
      const double l = std::log(four_pi * b / a);
      return a * p.c() * p.c() / (l * l);
    }
    case Family::III:
      if (!(b > 0.0)) throw InvalidParameters("family III with b = 0 has no barrier top");
      return a / b * (p.N() + std::log(a / four_pi));
    case Family::IV:
      if (!(b > 0.0)) throw InvalidParameters("family IV with b = 0 has no barrier top");
      return std::sqrt(a * a / b * (p.N() + std::log(a / four_pi)));
  }
  return 0.0;
}

/// Closed-form barrier width x2(E) - x1(E) for 0 < E <= E_max.
inline double oracle_L2(const AnalyticSpectrumParams& p, double e) {
  const double em = oracle_emax(p);
  if (!(e > 0.0) || e > em) throw DomainError("barrier width oracle requires 0 < E <= E_max");
  const double a = p.a(), b = p.b();
  const double gap = em - e;
  switch (p.family()) {
    case Family::I:
      return a * p.c() / (std::numbers::pi * em * std::pow(e, 1.5)) *
             (std::sqrt(gap) * std::sqrt(e) + em * std::atan(std::sqrt(gap / e)));
    case Family::II: return p.c() * std::sqrt(a) / std::numbers::pi * std::sqrt(1.0 - e / em) / e;
    case Family::III: return 2.0 * b / (std::numbers::pi * a) * std::sqrt(gap);
    case Family::IV: return 4.0 / (3.0 * std::numbers::pi) * b / (a * a) * std::sqrt(gap) * (em + 2.0 * e);
  }
  return 0.0;
}

/// Energy where dx2/dE changes sign for family III under the chi
/// parameterization; empty for chi = 1 (no overhanging cliff).
inline std::optional<double> oracle_critical_energy(const AnalyticSpectrumParams& p, double chi) {
  if (p.family() != Family::III) throw InvalidParameters("critical energy closed form exists for family III only");
  if (chi < 0.0 || chi > 1.0) throw DomainError("chi must lie in [0, 1]");
  if (chi == 1.0) return std::nullopt;
  const double r = p.b() / (2.0 * std::numbers::pi * (1.0 - chi));
  return oracle_emax(p) / (1.0 + r * r);
}

struct OracleReport {
  std::optional<double> e_max;
  std::optional<double> n_at_emax;  ///< approximate number of trapped states minus 1/2
  std::optional<double> e_c;
  bool valid = true;
  std::string verdict;
};

inline OracleReport oracle_diagnostics(const AnalyticSpectrumParams& p, std::optional<double> chi = std::nullopt) {
  OracleReport r;
  try {
    r.e_max = oracle_emax(p);
  } catch (const InvalidParameters& e) {
    r.valid = false;
    r.verdict = std::string("invalid: ") + e.what();
    return r;
  }
  r.n_at_emax = *r.e_max / p.a() - 0.5;
  const double em = *r.e_max;

  switch (p.family()) {
    case Family::II:
      r.verdict = "valid: dL2/dE < 0 on (E_min, E_max) for every a > 0";
      break;
    case Family::IV:
      r.valid = false;
      r.verdict = "invalid: dL2/dE > 0 on (E_min, E_max/2)";
      return r;
    case Family::III:
      if (chi) {
        r.e_c = oracle_critical_energy(p, *chi);
        if (r.e_c) {
          r.valid = false;
          r.verdict = "invalid: x2(E) overhangs below E_c";
          return r;
        }
        r.verdict = "valid: chi = 1 keeps x2(E) strictly decreasing";
        return r;
      }
      r.verdict = "valid widths; only chi = 1 avoids overhanging cliffs";
      return r;
    case Family::I:
      r.verdict = "valid: L2 decreasing";
      break;
  }

  // Families I and II: the x2 monotonicity condition is checked on a dense grid.
  if (chi) {
    const double one_minus = 1.0 - *chi;
    auto x2 = [&](double e) { return oracle_L2(p, e) + one_minus * 4.0 / p.a() * std::sqrt(e); };
    constexpr int n = 400;
    double prev = x2(em * 1e-4);
    for (int i = 1; i <= n; ++i) {
      const double e = em * (1e-4 + (1.0 - 1e-4) * i / n);
      const double cur = x2(e);
      if (!(cur < prev)) {
        r.valid = false;
        r.e_c = e;
        r.verdict = "invalid: x2(E) not strictly decreasing";
        return r;
      }
      prev = cur;
    }
  }
  return r;
}

/// Continuous model of an analytic family, usable by the inverse pipeline.
inline SpectrumModel analytic_model(const AnalyticSpectrumParams& p) {
  const double a = p.a(), b = p.b();
  SpectrumModel m;
  m.n_of_E = [a](double e) { return e / a - 0.5; };
  m.dn_dE = [a](double) { return 1.0 / a; };
  m.d2n_dE2 = [](double) { return 0.0; };
  m.d3n_dE3 = [](double) { return 0.0; };
  m.log_width = [p](double e) { return analytic_log_width(p, e); };
  switch (p.family()) {
    case Family::I: {
      const double k = a * p.c();
      m.dlog_width_dE = [k](double e) { return k / (e * e); };
      m.d2log_width_dE2 = [k](double e) { return -2.0 * k / (e * e * e); };
      break;
    }
    case Family::II: {
      const double k = p.c() * std::sqrt(a);
      m.dlog_width_dE = [k](double e) { return 0.5 * k / (e * std::sqrt(e)); };
      m.d2log_width_dE2 = [k](double e) { return -0.75 * k / (e * e * std::sqrt(e)); };
      break;
    }
    case Family::III:
      m.dlog_width_dE = [a, b](double) { return b / a; };
      m.d2log_width_dE2 = [](double) { return 0.0; };
      break;
    case Family::IV:
      m.dlog_width_dE = [a, b](double e) { return 2.0 * b * e / (a * a); };
      m.d2log_width_dE2 = [a, b](double) { return 2.0 * b / (a * a); };
      break;
  }
  const double hi = a * 1.0e4;
  m.domain = EnergyInterval(0.5 * a, hi);
  m.admissible = EnergyInterval(0.0, hi);
  m.analytic = true;
  m.source = "analytic family " + std::string(family_name(p.family()));
  return m;
}

}  // namespace qss
