#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qss/error.hpp"

namespace qss {

/// Piecewise cubic Hermite interpolant on strictly increasing knots.
/// Outside the knot range it continues linearly with the end slope.
class PiecewiseCubic {
 public:
  PiecewiseCubic() = default;
  PiecewiseCubic(std::vector<double> x, std::vector<double> y, std::vector<double> slope, bool linear = false)
      : x_(std::move(x)), y_(std::move(y)), s_(std::move(slope)), linear_(linear) {
    if (x_.size() < 2 || y_.size() != x_.size() || s_.size() != x_.size())
      throw DomainError("PiecewiseCubic: need >= 2 knots with matching values and slopes");
    for (std::size_t i = 1; i < x_.size(); ++i)
      if (!(x_[i] > x_[i - 1]))
        throw NotMonotoneError("PiecewiseCubic: knots not strictly increasing at index " + std::to_string(i), i);
  }

  std::span<const double> knots() const { return x_; }
  std::span<const double> knot_values() const { return y_; }
  double lo() const { return x_.front(); }
  double hi() const { return x_.back(); }

  double operator()(double x) const { return eval(x, 0); }
  double derivative(double x) const { return eval(x, 1); }
  double second_derivative(double x) const { return eval(x, 2); }
  double third_derivative(double x) const { return eval(x, 3); }

 private:
  double eval(double x, int order) const {
    if (x <= x_.front() || x >= x_.back()) {
      const bool left = x <= x_.front();
      const std::size_t end = left ? 0 : x_.size() - 1;
      // Inside the closed range at the very endpoint the segment formula is exact.
      if (x == x_[end]) return segment(left ? 0 : x_.size() - 2, x, order);
      const double slope = end_slope(left);
      if (order == 0) return y_[end] + slope * (x - x_[end]);
      return order == 1 ? slope : 0.0;
    }
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    return segment(static_cast<std::size_t>(it - x_.begin()) - 1, x, order);
  }

  double end_slope(bool left) const {
    if (linear_) {
      const std::size_t i = left ? 0 : x_.size() - 2;
      return (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    }
    return left ? s_.front() : s_.back();
  }

  double segment(std::size_t i, double x, int order) const {
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double y0 = y_[i], y1 = y_[i + 1];
    if (linear_) {
      if (order == 0) return y0 + t * (y1 - y0);
      return order == 1 ? (y1 - y0) / h : 0.0;
    }
    const double m0 = s_[i] * h, m1 = s_[i + 1] * h;
    switch (order) {
      case 0: {
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1;
      }
      case 1: {
        const double t2 = t * t;
        return ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * m1) /
               h;
      }
      case 2:
        return ((12 * t - 6) * y0 + (6 * t - 4) * m0 + (-12 * t + 6) * y1 + (6 * t - 2) * m1) / (h * h);
      default:
        return (12 * y0 + 6 * m0 - 12 * y1 + 6 * m1) / (h * h * h);
    }
  }

  std::vector<double> x_, y_, s_;
  bool linear_ = false;
};

inline PiecewiseCubic piecewise_linear(std::vector<double> x, std::vector<double> y) {
  std::vector<double> s(x.size(), 0.0);
  return PiecewiseCubic(std::move(x), std::move(y), std::move(s), true);
}

/// Fritsch-Carlson monotone (shape-preserving) cubic, the PCHIP slope rule:
/// weighted harmonic mean of adjacent secants, zero at local extrema, and
/// three-point end slopes clipped for monotonicity.
inline PiecewiseCubic monotone_cubic(std::vector<double> x, std::vector<double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw DomainError("monotone_cubic: need >= 2 points");
  if (n == 2) return piecewise_linear(std::move(x), std::move(y));
  std::vector<double> h(n - 1), d(n - 1), s(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    if (!(h[i] > 0.0)) throw NotMonotoneError("monotone_cubic: knots not strictly increasing", i + 1);
    d[i] = (y[i + 1] - y[i]) / h[i];
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] * d[i] <= 0.0) continue;
    const double w1 = 2 * h[i] + h[i - 1], w2 = h[i] + 2 * h[i - 1];
    s[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
  }
  auto end = [](double h0, double h1, double d0, double d1) {
    double m = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if ((m > 0) != (d0 > 0) || d0 == 0.0) return 0.0;
    if ((d0 > 0) != (d1 > 0) && std::abs(m) > std::abs(3 * d0)) return 3 * d0;
    return m;
  };
  s[0] = end(h[0], h[1], d[0], d[1]);
  s[n - 1] = end(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
  return PiecewiseCubic(std::move(x), std::move(y), std::move(s));
}

/// C2 cubic spline. End slopes come from the quadratic through the three
/// outermost points, so the result reproduces quadratics exactly.
inline PiecewiseCubic cubic_spline(std::vector<double> x, std::vector<double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw DomainError("cubic_spline: need >= 2 points");
  if (n == 2) return piecewise_linear(std::move(x), std::move(y));
  std::vector<double> h(n - 1), d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    if (!(h[i] > 0.0)) throw NotMonotoneError("cubic_spline: knots not strictly increasing", i + 1);
    d[i] = (y[i + 1] - y[i]) / h[i];
  }
  std::vector<double> s(n);
  s[0] = d[0] - h[0] * (d[1] - d[0]) / (h[0] + h[1]);
  s[n - 1] = d[n - 2] + h[n - 2] * (d[n - 2] - d[n - 3]) / (h[n - 2] + h[n - 3]);
  if (n > 3) {
    // Tridiagonal system for interior slopes (Thomas algorithm).
    const std::size_t m = n - 2;
    std::vector<double> sub(m), diag(m), sup(m), rhs(m);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = k + 1;
      sub[k] = h[i];
      diag[k] = 2.0 * (h[i - 1] + h[i]);
      sup[k] = h[i - 1];
      rhs[k] = 3.0 * (h[i] * d[i - 1] + h[i - 1] * d[i]);
    }
    rhs[0] -= sub[0] * s[0];
    rhs[m - 1] -= sup[m - 1] * s[n - 1];
    for (std::size_t k = 1; k < m; ++k) {
      const double w = sub[k] / diag[k - 1];
      diag[k] -= w * sup[k - 1];
      rhs[k] -= w * rhs[k - 1];
    }
    s[m] = rhs[m - 1] / diag[m - 1];
    for (std::size_t k = m - 1; k-- > 0;) s[k + 1] = (rhs[k] - sup[k] * s[k + 2]) / diag[k];
  } else {
    s[1] = (h[1] * d[0] + h[0] * d[1]) / (h[0] + h[1]);
  }
  return PiecewiseCubic(std::move(x), std::move(y), std::move(s));
}

}  // namespace qss
