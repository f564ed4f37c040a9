#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace qss {

/// Complex log-Gamma for Re z >= 1/2 (Lanczos, g = 7, nine terms).
/// The branch is continuous along vertical lines, so Im log_gamma(1/2 + i a)
/// is the continuous argument of Gamma(1/2 + i a).
inline std::complex<double> log_gamma(std::complex<double> z) {
  static constexpr std::array<double, 9> p = {
      0.99999999999980993,  676.5203681218851,       -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,     12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6,   1.5056327351493116e-7};
  constexpr double g = 7.0;
  z -= 1.0;
  std::complex<double> series = p[0];
  for (int i = 1; i < 9; ++i) series += p[i] / (z + static_cast<double>(i));
  const std::complex<double> t = z + g + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(series);
}

}  // namespace qss
