#pragma once

// Spectrum data types shared by the forward solver, the file ingest and the
// inverse pipeline.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qss/error.hpp"
#include "qss/numerics.hpp"

namespace qss {

/// One quasi-stationary level E_n = e0 + i e1.
struct ComplexLevel {
  int n = 0;
  double e0 = 0.0;
  double e1 = 0.0;  ///< imaginary part, negative for decaying states
};

/// Ordered complex levels with consecutive indices.
///
/// Construction enforces the hard requirements (indices step by one, real
/// parts strictly increasing, imaginary parts negative). Growth of |e1| with n
/// is a softer physical expectation reported by warnings().
class DiscreteSpectrum {
 public:
  DiscreteSpectrum() = default;
  explicit DiscreteSpectrum(std::vector<ComplexLevel> levels) : levels_(std::move(levels)) {
    for (std::size_t i = 0; i < levels_.size(); ++i) {
      const auto& l = levels_[i];
      const long row = static_cast<long>(i) + 1;
      if (!std::isfinite(l.e0) || !std::isfinite(l.e1)) throw InvalidSpectrum("non-finite level", row);
      if (l.n < 0) throw InvalidSpectrum("negative level index", row);
      if (!(l.e1 < 0.0)) throw InvalidSpectrum("imaginary part must be negative", row);
      if (i > 0) {
        if (l.n != levels_[i - 1].n + 1) throw InvalidSpectrum("level indices must increase by one", row);
        if (!(l.e0 > levels_[i - 1].e0)) throw InvalidSpectrum("real parts must be strictly increasing", row);
      }
    }
  }

  const std::vector<ComplexLevel>& levels() const { return levels_; }
  std::size_t size() const { return levels_.size(); }
  bool empty() const { return levels_.empty(); }
  const ComplexLevel& operator[](std::size_t i) const { return levels_[i]; }

  std::vector<std::string> warnings() const {
    std::vector<std::string> out;
    for (std::size_t i = 1; i < levels_.size(); ++i)
      if (!(std::abs(levels_[i].e1) > std::abs(levels_[i - 1].e1)))
        out.push_back("|Im E| does not grow between levels " + std::to_string(levels_[i - 1].n) + " and " +
                      std::to_string(levels_[i].n) + " (row " + std::to_string(i + 1) + ")");
    return out;
  }

  friend bool operator==(const DiscreteSpectrum& a, const DiscreteSpectrum& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].n != b[i].n || a[i].e0 != b[i].e0 || a[i].e1 != b[i].e1) return false;
    return true;
  }

 private:
  std::vector<ComplexLevel> levels_;
};

/// Continuous description of a spectrum: the level counting function n(E)
/// from the real parts, and the decay width as log_width(E) = ln(-E1(E)).
///
/// The width is carried in log form because Gamow widths span many orders
/// of magnitude. `domain` is where the functions are supported by data,
/// `admissible` is how far they may be evaluated (extrapolation budget).
struct SpectrumModel {
  using Fn = std::function<double(double)>;

  Fn n_of_E, dn_dE, d2n_dE2;
  Fn d3n_dE3;  ///< optional; finite differences of d2n_dE2 when empty
  Fn log_width, dlog_width_dE, d2log_width_dE2;
  EnergyInterval domain{0.0, 1.0};
  EnergyInterval admissible{0.0, 1.0};
  std::vector<double> breakpoints;  ///< interpolation knots (derivative kinks), sorted
  bool analytic = false;            ///< closed-form model: continuation is exact
  std::string source;
  std::vector<std::string> warnings;

  double e1_of_E(double e) const { return -std::exp(log_width(e)); }
};

}  // namespace qss
