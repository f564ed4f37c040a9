#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qss/interpolation.hpp"
#include "qss/numerics.hpp"
#include "qss/spectra.hpp"

using namespace qss;
constexpr double pi = std::numbers::pi;

TEST(SingularQuadrature, LowerInverseSqrt) {
  EXPECT_NEAR(integrate_singular_lower([](double e) { return 1.0 / std::sqrt(e); }, 0.0, 1.0), 2.0, 1e-12);
}

TEST(SingularQuadrature, LowerArcsine) {
  auto f = [](double e) { return 1.0 / std::sqrt(e * (1.0 - e)); };
  const double v = integrate_singular_lower(f, 0.0, 1.0);
  EXPECT_NEAR(v, pi, 1e-12);
  EXPECT_NEAR(v, oracle::brute_force_substituted(f, 0.0, 1.0), 1e-8 * pi);
}

TEST(SingularQuadrature, LowerSqrtIntegrand) {
  EXPECT_NEAR(integrate_singular_lower([](double e) { return e / std::sqrt(e); }, 0.0, 1.0), 2.0 / 3.0, 1e-12);
}

TEST(SingularQuadrature, UpperInverseSqrt) {
  EXPECT_NEAR(integrate_singular_upper([](double e) { return 1.0 / std::sqrt(1.0 - e); }, 0.0, 1.0), 2.0, 1e-12);
}

TEST(SingularQuadrature, UpperArcsine) {
  EXPECT_NEAR(integrate_singular_upper([](double e) { return 1.0 / std::sqrt(e * (1.0 - e)); }, 0.0, 1.0), pi,
              1e-12);
}

TEST(SingularQuadrature, UpperConstantFromCancellingRoots) {
  auto f = [](double e) { return std::sqrt(1.0 - e) / std::sqrt(1.0 - e); };
  // The quotient is 0/0 exactly at e = 1; only interior nodes are evaluated.
  EXPECT_NEAR(integrate_singular_upper(f, 0.0, 1.0), 1.0, 1e-12);
}

TEST(SingularQuadrature, AgreesWithBruteForceOnShiftedInterval) {
  auto f = [](double e) { return std::cos(e) / std::sqrt(e - 0.5) + std::exp(e) / std::sqrt(2.0 - e); };
  const double v = integrate_singular_lower(f, 0.5, 2.0);
  EXPECT_NEAR(v, oracle::brute_force_substituted(f, 0.5, 2.0), 1e-8 * std::abs(v));
}

TEST(SingularQuadrature, Linearity) {
  auto f = [](double e) { return 1.0 / std::sqrt(e); };
  auto g = [](double e) { return std::exp(-e) / std::sqrt(1.0 - e); };
  const double alpha = 2.5, beta = -0.75;
  const double lhs = integrate_singular_lower([&](double e) { return alpha * f(e) + beta * g(e); }, 0.0, 1.0);
  const double rhs = alpha * integrate_singular_lower(f, 0.0, 1.0) + beta * integrate_singular_lower(g, 0.0, 1.0);
  EXPECT_NEAR(lhs, rhs, 1e-10 * std::abs(rhs));
  const double lhs_u = integrate_singular_upper([&](double e) { return alpha * f(e) + beta * g(e); }, 0.0, 1.0);
  const double rhs_u = alpha * integrate_singular_upper(f, 0.0, 1.0) + beta * integrate_singular_upper(g, 0.0, 1.0);
  EXPECT_NEAR(lhs_u, rhs_u, 1e-10 * std::abs(rhs_u));
}

TEST(SingularQuadrature, PiecesSplitAtKinks) {
  const std::vector<double> breaks{0.3, 0.7};
  auto f = [](double e) { return std::abs(e - 0.3) / std::sqrt(e); };
  const double exact = [] {
    // Int_0^1 |e - 0.3| e^{-1/2}: split at 0.3.
    auto F = [](double e) { return 2.0 / 3.0 * std::pow(e, 1.5) - 0.6 * std::sqrt(e); };
    return -(F(0.3) - F(0.0)) + (F(1.0) - F(0.3));
  }();
  EXPECT_NEAR(integrate_singular_pieces(f, 0.0, 1.0, breaks), exact, 1e-12);
}

TEST(SingularQuadrature, AbelKernelsKeepExactDistances) {
  // Int_a^b dE / sqrt(b - E) with b - a tiny relative to |b|.
  const double a = 1e6, b = 1e6 + 1e-6;
  const double v = integrate_abel([](double) { return 1.0; }, a, b, AbelEnd::upper);
  EXPECT_NEAR(v, 2.0 * std::sqrt(b - a), 1e-10 * std::sqrt(b - a));
  const double w = integrate_abel([](double) { return 1.0; }, a, b, AbelEnd::lower);
  EXPECT_NEAR(w, 2.0 * std::sqrt(b - a), 1e-10 * std::sqrt(b - a));
}

TEST(AdaptiveQuadrature, SmoothIntegral) {
  const auto r = integrate_adaptive([](double x) { return std::sin(x); }, 0.0, pi);
  EXPECT_NEAR(r.value, 2.0, 1e-13);
  EXPECT_LE(r.error, 1e-9);
}

TEST(AdaptiveQuadrature, NonConvergenceCarriesBestEstimate) {
  Tolerances tol;
  tol.max_depth = 2;
  try {
    integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, tol);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_TRUE(std::isfinite(e.estimate));
    EXPECT_GT(e.achieved, 0.0);
    EXPECT_NEAR(e.estimate, 2.0, 0.5);
  }
}

TEST(RootFinder, Linear) { EXPECT_NEAR(find_root([](double x) { return x - 0.5; }, 0.0, 1.0), 0.5, 1e-14); }

TEST(RootFinder, SquareRootOfTwo) {
  EXPECT_NEAR(find_root([](double x) { return x * x - 2.0; }, 1.0, 2.0), std::sqrt(2.0), 1e-12);
}

TEST(RootFinder, FamilyOneTransmissionReachesOne) {
  auto f = [](double e) { return oracle::T_I(1, 1, 1, e) - 1.0; };
  const double root = find_root(f, 0.01, 10.0);
  EXPECT_NEAR(root, 1.0 / std::log(4.0 * pi), 1e-11);
}

TEST(RootFinder, ResultMeetsResidualOrBracket) {
  auto f = [](double x) { return std::tanh(50.0 * (x - 0.3)); };
  const double x = find_root(f, 0.0, 1.0);
  EXPECT_TRUE(std::abs(f(x)) <= 1e-10 || std::abs(x - 0.3) <= 1e-12);
}

TEST(RootFinder, NoSignChangeThrows) {
  EXPECT_THROW(find_root([](double x) { return x * x + 1.0; }, -1.0, 1.0), BracketError);
}

TEST(InvertMonotone, SwapsGridAndValues) {
  const auto inv = invert_monotone(SampledFunction({0, 1, 2}, {0, 2, 4}));
  EXPECT_EQ(std::vector<double>(inv.grid().begin(), inv.grid().end()), (std::vector<double>{0, 2, 4}));
  EXPECT_EQ(std::vector<double>(inv.values().begin(), inv.values().end()), (std::vector<double>{0, 1, 2}));
}

TEST(InvertMonotone, SqrtTurningPointGivesParabola) {
  std::vector<double> e, x;
  for (int i = 0; i <= 400; ++i) {
    e.push_back(4.0 * i / 400.0);
    x.push_back(2.0 * std::sqrt(e.back()));
  }
  const auto v = invert_monotone(SampledFunction(e, x));
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(v.values()[i], v.grid()[i] * v.grid()[i] / 4.0, 1e-12);
}

TEST(InvertMonotone, ReportsFirstViolation) {
  try {
    invert_monotone(SampledFunction({0, 1, 2}, {0, 2, 1}));
    FAIL() << "expected NotMonotoneError";
  } catch (const NotMonotoneError& e) {
    EXPECT_EQ(e.index, 2u);
  }
}

TEST(InvertMonotone, Involution) {
  const SampledFunction f({0.0, 0.5, 1.5, 3.0}, {9.0, 4.0, 1.0, -2.0});
  const auto twice = invert_monotone(invert_monotone(f));
  ASSERT_EQ(twice.size(), f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    EXPECT_EQ(twice.grid()[i], f.grid()[i]);
    EXPECT_EQ(twice.values()[i], f.values()[i]);
  }
}

TEST(SampledFunction, RejectsUnsortedGridAndOutOfRange) {
  EXPECT_THROW(SampledFunction({0, 2, 1}, {0, 1, 2}), NotMonotoneError);
  const SampledFunction f({0, 1}, {0, 2});
  EXPECT_DOUBLE_EQ(f(0.25), 0.5);
  EXPECT_THROW(f(1.5), DomainError);
}

TEST(ClusteredGrid, OpenIntervalAndClustering) {
  const auto g = clustered_grid(0.0, 1.0, 512);
  ASSERT_EQ(g.size(), 512u);
  EXPECT_GT(g.front(), 0.0);
  EXPECT_LT(g.back(), 1.0);
  EXPECT_LT(g.front(), 1e-5);
  EXPECT_GT(g.back(), 1.0 - 1e-5);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
}

TEST(Interpolation, MonotoneCubicStaysMonotone) {
  const std::vector<double> x{0, 1, 2, 3, 4, 5}, y{0, 0.1, 0.2, 5, 5.1, 9};
  const auto p = monotone_cubic(x, y);
  double prev = p(0.0);
  for (int i = 1; i <= 5000; ++i) {
    const double v = p(5.0 * i / 5000.0);
    EXPECT_GE(v, prev);
    prev = v;
  }
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(p(x[i]), y[i]);
}

TEST(Interpolation, MonotoneCubicExactOnLinearData) {
  const auto p = monotone_cubic({0.5, 1.5, 2.5, 3.5}, {0, 1, 2, 3});
  for (double e : {0.0, 0.7, 1.9, 3.4, 5.0}) {
    EXPECT_NEAR(p(e), e - 0.5, 1e-14);
    EXPECT_NEAR(p.derivative(e), 1.0, 1e-14);
    EXPECT_NEAR(p.second_derivative(e), 0.0, 1e-14);
  }
}

TEST(Interpolation, CubicSplineReproducesQuadratic) {
  std::vector<double> x, y;
  for (int i = 0; i < 9; ++i) {
    x.push_back(0.3 * i + 0.01 * i * i);
    y.push_back(2.0 * x.back() * x.back() - x.back() + 1.0);
  }
  const auto s = cubic_spline(x, y);
  for (double e : {0.05, 0.8, 1.7, 2.9}) {
    EXPECT_NEAR(s(e), 2 * e * e - e + 1, 1e-12);
    EXPECT_NEAR(s.derivative(e), 4 * e - 1, 1e-11);
    EXPECT_NEAR(s.second_derivative(e), 4.0, 1e-9);
    EXPECT_NEAR(s.third_derivative(e), 0.0, 1e-7);
  }
}
