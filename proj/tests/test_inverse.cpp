#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qss/forward.hpp"
#include "qss/ingest.hpp"
#include "qss/inverse.hpp"
#include "qss/spectra.hpp"

using namespace qss;
constexpr double pi = std::numbers::pi;

namespace {

SpectrumModel polynomial_model(double c1, double c2, double shift = 0.0) {
  // n(E) = c1 (E - shift) + c2 (E - shift)^2 - 1/2, with a linear log width.
  SpectrumModel m;
  m.n_of_E = [=](double e) { return c1 * (e - shift) + c2 * (e - shift) * (e - shift) - 0.5; };
  m.dn_dE = [=](double e) { return c1 + 2 * c2 * (e - shift); };
  m.d2n_dE2 = [=](double) { return 2 * c2; };
  m.d3n_dE3 = [](double) { return 0.0; };
  m.log_width = [](double e) { return -8.0 + e; };
  m.dlog_width_dE = [](double) { return 1.0; };
  m.d2log_width_dE2 = [](double) { return 0.0; };
  m.domain = EnergyInterval(shift + 0.5, shift + 20.0);
  m.admissible = EnergyInterval(shift - 5.0, shift + 40.0);
  m.analytic = true;
  return m;
}

std::vector<double> fractions_of(double em, double lo = 0.05, double hi = 0.95, int n = 50) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(em * (lo + (hi - lo) * i / (n - 1)));
  return g;
}

}  // namespace

TEST(EstimateEmin, FamilyOneIsZero) {
  const auto m = analytic_model(AnalyticSpectrumParams::family_i(1, 1, 1));
  EXPECT_NEAR(estimate_emin(m), 0.0, 1e-12);
}

TEST(EstimateEmin, SquareRootCounting) {
  SpectrumModel m = polynomial_model(1, 0);
  m.n_of_E = [](double e) { return std::copysign(std::sqrt(std::abs(e)), e) - 0.5; };
  m.dn_dE = [](double e) { return 0.5 / std::sqrt(std::abs(e)); };
  EXPECT_NEAR(estimate_emin(m), 0.0, 1e-10);
}

TEST(EstimateEmin, ShiftInvariance) {
  const auto m = polynomial_model(1.0, 0.0, 2.0);
  EXPECT_NEAR(estimate_emin(m), 2.0, 1e-12);
}

TEST(ReconstructL1, FamilyOneSquareRoot) {
  for (double a : {1.0, 2.0, 5.0}) {
    const auto m = analytic_model(AnalyticSpectrumParams::family_i(a, 1, 1));
    const auto grid = fractions_of(10.0);
    const auto l1 = reconstruct_L1(m, 0.0, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
      EXPECT_NEAR(l1.values()[i], 4 / a * std::sqrt(grid[i]), 1e-12 * 4 / a * std::sqrt(grid[i]));
  }
}

TEST(ReconstructL1, FamilyTwoSharesTheWell) {
  const auto m1 = analytic_model(AnalyticSpectrumParams::family_i(1, 1, 1));
  const auto m2 = analytic_model(AnalyticSpectrumParams::family_ii(1, 1, 1));
  const auto grid = fractions_of(5.0);
  const auto a = reconstruct_L1(m1, 0.0, grid), b = reconstruct_L1(m2, 0.0, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_DOUBLE_EQ(a.values()[i], b.values()[i]);
}

TEST(ReconstructL1, VanishesAtTheBottom) {
  const auto w = well_width(analytic_model(AnalyticSpectrumParams::family_i(1, 1, 1)), 0.0);
  EXPECT_LT(w(1e-12), 1e-5);
  EXPECT_NEAR(w(1e-12), 4e-6, 1e-12);
}

TEST(ReconstructL1, DifferentiatedAbelOfPolynomial) {
  // n + 1/2 = 0.7 E + 0.3 E^2: I(E) = 2 (0.7 (4/3) E^{3/2} + 0.3 (16/15) E^{5/2}), L1 = I'.
  const auto m = polynomial_model(0.7, 0.3);
  const auto grid = fractions_of(20.0);
  const auto l1 = reconstruct_L1(m, 0.0, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double e = grid[i];
    const double want = 2 * (0.7 * 2 * std::sqrt(e) + 0.3 * (8.0 / 3.0) * std::pow(e, 1.5));
    EXPECT_NEAR(l1.values()[i], want, 1e-8 * want);
    // Numerical d/dE of the inclusion integral itself, E' = E (1 - s^2).
    auto inclusion = [&](double x) {
      return 2 * oracle::simpson([&](double s) { return 2 * std::sqrt(x) * (m.n_of_E(x * (1 - s * s)) + 0.5); }, 0.0, 1.0, 2000);
    };
    const double h = 1e-4 * e;
    EXPECT_NEAR(l1.values()[i], (inclusion(e + h) - inclusion(e - h)) / (2 * h), 1e-6 * want);
  }
}

TEST(ReconstructL1, BoundaryTermForOverriddenEmin) {
  const auto m = analytic_model(AnalyticSpectrumParams::family_i(1, 1, 1));
  const auto w = well_width(m, -0.5);  // n(-0.5) + 1/2 = -0.5
  EXPECT_NEAR(w.beta, -0.5, 1e-15);
  EXPECT_NEAR(w(1.0), 4 * std::sqrt(1.5) + 2 * (-0.5) / std::sqrt(1.5), 1e-10);
}

TEST(WellPeriod, FromWidthIsTwoPiOverA) {
  for (double a : {1.0, 3.0}) {
    const auto w = well_width(analytic_model(AnalyticSpectrumParams::family_i(a, 1, 1)), 0.0);
    for (int i = 1; i <= 20; ++i) EXPECT_NEAR(well_period_from_width(w, 0.37 * i), oracle::harmonic_period(a), 1e-8);
  }
}

TEST(Transmission, MatchesClosedForms) {
  const auto p1 = AnalyticSpectrumParams::family_i(1, 1, 1);
  const auto p2 = AnalyticSpectrumParams::family_ii(2, 1, 3);
  const auto m1 = analytic_model(p1), m2 = analytic_model(p2);
  const auto g1 = fractions_of(oracle::emax_I(1, 1, 1)), g2 = fractions_of(oracle::emax_II(2, 1, 3));
  const auto t1 = transmission_from_spectrum(m1, well_width(m1, 0.0), g1);
  const auto t2 = transmission_from_spectrum(m2, well_width(m2, 0.0), g2);
  for (double e : g1) EXPECT_NEAR(t1.T(e), oracle::T_I(1, 1, 1, e), 1e-10 * oracle::T_I(1, 1, 1, e));
  for (double e : g2) EXPECT_NEAR(t2.T(e), oracle::T_II(2, 1, 3, e), 1e-10 * oracle::T_II(2, 1, 3, e));
}

TEST(Transmission, LinearInTheWidth) {
  auto m = analytic_model(AnalyticSpectrumParams::family_iii(1, 1, 4));
  const auto w = well_width(m, 0.0);
  const auto grid = fractions_of(1.4);
  const auto t = transmission_from_spectrum(m, w, grid);
  auto half = m;
  const auto lw = m.log_width;
  half.log_width = [lw](double e) { return lw(e) + std::log(0.5); };
  const auto th = transmission_from_spectrum(half, w, grid);
  for (double e : grid) EXPECT_NEAR(th.T(e), 0.5 * t.T(e), 1e-14 * t.T(e));
}

TEST(EstimateEmax, ClosedForms) {
  struct Case {
    AnalyticSpectrumParams p;
    double want;
  };
  const Case cases[] = {
      {AnalyticSpectrumParams::family_i(1, 1, 1), oracle::emax_I(1, 1, 1)},
      {AnalyticSpectrumParams::family_ii(1, 1, 1), oracle::emax_II(1, 1, 1)},
      {AnalyticSpectrumParams::family_iii(1, 1, 4), oracle::emax_III(1, 1, 4)},
  };
  for (const auto& c : cases) {
    const auto m = analytic_model(c.p);
    EXPECT_NEAR(estimate_emax(m, well_width(m, 0.0)), c.want, 1e-10 * c.want);
  }
  EXPECT_NEAR(oracle::emax_I(1, 1, 1), 0.395097, 1e-6);
  EXPECT_NEAR(oracle::emax_III(1, 1, 4), 1.46897, 1e-5);
}

TEST(EstimateEmax, NoCrossingAsksForOverride) {
  auto m = polynomial_model(1, 0);
  m.log_width = [](double) { return -200.0; };
  m.dlog_width_dE = [](double) { return 0.0; };
  EXPECT_THROW(estimate_emax(m, well_width(m, 0.0)), DomainError);
}

TEST(ReconstructL2, FamilyOneClosedForm) {
  const auto m = analytic_model(AnalyticSpectrumParams::family_i(1, 1, 1));
  const double em = oracle::emax_I(1, 1, 1);
  const auto grid = fractions_of(em);
  std::vector<double> tg = grid;
  tg.push_back(em);
  auto t = transmission_from_spectrum(m, well_width(m, 0.0), tg);
  t.e_max = em;
  const auto r = reconstruct_L2(t, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double want = oracle::L2_I(1, 1, 1, grid[i]);
    EXPECT_NEAR(r.L2.values()[i], want, 1e-8 * want);
  }
  EXPECT_FALSE(r.increasing_on.has_value());
}

TEST(ReconstructL2, FamilyThreeSquareRootAndZeroAtTop) {
  const auto m = analytic_model(AnalyticSpectrumParams::family_iii(1, 1, 4));
  const double em = oracle::emax_III(1, 1, 4);
  const auto grid = fractions_of(em, 0.01, 1.0, 60);
  auto t = transmission_from_spectrum(m, well_width(m, 0.0), grid);
  t.e_max = em;
  const auto r = reconstruct_L2(t, grid);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double want = oracle::L2_III(1, 1, 4, grid[i]);
    EXPECT_NEAR(r.L2.values()[i], want, 1e-8 * want);
  }
  EXPECT_NEAR(r.L2.values().back(), 0.0, 1e-12);
}

TEST(InvertSpectrum, FamilyOneDiagnostics) {
  const auto r = invert_spectrum(analytic_model(AnalyticSpectrumParams::family_i(1, 1, 1)));
  ASSERT_EQ(r.diagnostics.status, InversionStatus::valid);
  ASSERT_TRUE(r.widths);
  EXPECT_NEAR(*r.diagnostics.n_at_emax, -0.105, 5e-4);
  EXPECT_NEAR(*r.diagnostics.e_max, oracle::emax_I(1, 1, 1), 1e-10);
  const auto g = r.widths->L1.grid();
  for (std::size_t i = 0; i < g.size(); i += 7) {
    EXPECT_NEAR(r.widths->L1.values()[i], 4 * std::sqrt(g[i]), 1e-10 * 4 * std::sqrt(g[i]));
    if (g[i] < 0.999 * *r.diagnostics.e_max) {
      const double want = oracle::L2_I(1, 1, 1, g[i]);
      EXPECT_NEAR(r.widths->L2.values()[i], want, 1e-6 * want);
    }
  }
  for (double v : r.widths->L2.values()) EXPECT_GE(v, 0.0);
  bool warned = false;
  for (const auto& m : r.diagnostics.messages) warned |= m.find("fewer than one trapped state") != std::string::npos;
  EXPECT_TRUE(warned);
}

TEST(InvertSpectrum, FamilyTwoValid) {
  for (double a : {0.5, 1.0, 3.0}) {
    const auto r = invert_spectrum(analytic_model(AnalyticSpectrumParams::family_ii(a, 1, 2)));
    EXPECT_EQ(r.diagnostics.status, InversionStatus::valid) << a;
    EXPECT_EQ(r.diagnostics.L2_decreasing, true);
  }
}

TEST(InvertSpectrum, FamilyFourRejected) {
  const auto r = invert_spectrum(analytic_model(AnalyticSpectrumParams::family_iv(1, 1, 5)));
  EXPECT_EQ(r.diagnostics.status, InversionStatus::invalid);
  ASSERT_TRUE(r.diagnostics.L2_increasing_on);
  const double em = oracle::emax_IV(1, 1, 5);
  EXPECT_GT(r.diagnostics.L2_increasing_on->e_min, 0.0);
  EXPECT_LE(r.diagnostics.L2_increasing_on->e_max, 0.5 * em * (1 + 1e-9));
  EXPECT_NEAR(r.diagnostics.L2_increasing_on->e_max, 0.5 * em, 1e-6);
  bool cited = false;
  for (const auto& m : r.diagnostics.messages) cited |= m.find("no valid potential in this class") != std::string::npos;
  EXPECT_TRUE(cited);
}

TEST(InvertSpectrum, ZeroWidthBottomsOutAsFailure) {
  auto m = polynomial_model(1, 0);
  m.log_width = [](double) { return -300.0; };
  m.dlog_width_dE = [](double) { return 0.0; };
  const auto r = invert_spectrum(m);
  EXPECT_EQ(r.diagnostics.status, InversionStatus::failed);
  EXPECT_EQ(r.diagnostics.failed_stage, "estimate_emax");
  InversionOptions opt;
  opt.e_max = 10.0;
  EXPECT_NE(invert_spectrum(m, opt).diagnostics.failed_stage, "estimate_emax");
}

TEST(AbelRoundTrip, HarmonicWellFromItsOwnLevels) {
  const auto v = harmonic_barrier_demo(1.0, 6.0);
  const auto fs = forward_spectrum(v, 30);
  ASSERT_GE(fs.spectrum.size(), 12u);
  const auto model = fit_continuum(fs.spectrum);
  InversionOptions opt;
  opt.e_min = v.e_min();
  opt.e_max = v.e_max();
  const auto r = invert_spectrum(model, opt);
  ASSERT_TRUE(r.well);
  const double span = v.e_max() - v.e_min();
  for (int i = 0; i <= 40; ++i) {
    const double e = v.e_min() + span * (0.1 + 0.8 * i / 40.0);
    if (e > fs.spectrum.levels().back().e0) break;
    const auto tp = turning_points(v, e);
    EXPECT_NEAR((*r.well)(e), tp.x1 - tp.x0, 1e-3 * (tp.x1 - tp.x0)) << "E=" << e;
  }
}
