#pragma once

// Reference values computed independently of the library: closed forms
// written out again here, brute-force sums and plain Simpson rules.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

inline double T_I(double a, double b, double c, double e) { return 4 * pi * b / a * std::exp(-a * c / e); }
inline double T_II(double a, double b, double c, double e) {
  return 4 * pi * b / a * std::exp(-c * std::sqrt(a / e));
}
inline double T_III(double a, double b, double N, double e) { return 4 * pi / a * std::exp(-N + b * e / a); }
inline double T_IV(double a, double b, double N, double e) {
  return 4 * pi / a * std::exp(-N + b * e * e / (a * a));
}

inline double emax_I(double a, double b, double c) { return a * c / std::log(4 * pi * b / a); }
inline double emax_II(double a, double b, double c) {
  const double l = std::log(4 * pi * b / a);
  return a * c * c / (l * l);
}
inline double emax_III(double a, double b, double N) { return a / b * (N + std::log(a / (4 * pi))); }
inline double emax_IV(double a, double b, double N) { return std::sqrt(a * a / b * (N + std::log(a / (4 * pi)))); }

/// Closed form of the family I barrier width.
inline double L2_I(double a, double b, double c, double e) {
  const double em = emax_I(a, b, c);
  return a * c / (pi * em * std::pow(e, 1.5)) * (std::sqrt(em - e) * std::sqrt(e) + em * std::atan(std::sqrt((em - e) / e)));
}
inline double L2_II(double a, double b, double c, double e) {
  return c * std::sqrt(a) / pi * std::sqrt(1 - e / emax_II(a, b, c)) / e;
}
inline double L2_III(double a, double b, double N, double e) {
  return 2 * b / (pi * a) * std::sqrt(emax_III(a, b, N) - e);
}
inline double L2_IV(double a, double b, double N, double e) {
  const double em = emax_IV(a, b, N);
  return 4 / (3 * pi) * b / (a * a) * std::sqrt(em - e) * (em + 2 * e);
}

/// Composite Simpson on [lo, hi] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double lo, double hi, int n = 20000) {
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3;
}

/// L2(E) = (1/pi) Int_E^Em (ln T)'(E') / sqrt(E' - E) dE' with E' = E + (Em - E) s^2,
/// which leaves a smooth integrand 2 sqrt(Em - E) (ln T)'(E + (Em - E) s^2) on [0, 1].
inline double L2_numeric(const std::function<double(double)>& dlogT, double e, double em) {
  const double g = em - e;
  return 2 * std::sqrt(g) / pi * simpson([&](double s) { return dlogT(e + g * s * s); }, 0.0, 1.0);
}

/// Midpoint sum with `panels` panels of the symmetric square-root substitution
/// 2t (f(a + t^2) + f(b - t^2)) over t in [0, sqrt((b - a) / 2)].
inline double brute_force_substituted(const std::function<double(double)>& f, double a, double b,
                                      long panels = 1000000) {
  const double h = std::sqrt(0.5 * (b - a));
  const double dt = h / panels;
  long double s = 0.0L;
  for (long i = 0; i < panels; ++i) {
    const double t = (i + 0.5) * dt;
    s += 2.0 * t * (f(a + t * t) + f(b - t * t));
  }
  return static_cast<double>(s * dt);
}

/// Well period of a well with width L1 = (4/a) sqrt(E): 2 pi / a.
inline double harmonic_period(double a) { return 2 * pi / a; }

}  // namespace oracle
