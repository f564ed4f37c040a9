#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qss/forward.hpp"
#include "qss/inverse.hpp"
#include "qss/reconstruct.hpp"
#include "qss/spectra.hpp"

using namespace qss;
constexpr double pi = std::numbers::pi;

namespace {

WidthFunctions widths_of(const AnalyticSpectrumParams& p, std::size_t grid = 512) {
  InversionOptions opt;
  opt.grid_size = grid;
  auto r = invert_spectrum(analytic_model(p), opt);
  if (!r.widths) throw std::runtime_error("inversion produced no widths");
  return *r.widths;
}

// Many trapped states and a thin-enough barrier for the symmetric well to be valid.
const WidthFunctions& family_one() {
  static const WidthFunctions w = widths_of(AnalyticSpectrumParams::family_i(1, 1e4, 160));
  return w;
}

const WidthFunctions& family_three() {
  static const WidthFunctions w = widths_of(AnalyticSpectrumParams::family_iii(1, 1, 10));
  return w;
}

PotentialFunction well_of(const WidthFunctions& w, double chi, std::size_t samples = 16384) {
  const auto m = resample(chi_turning_points(w, chi), potential_grid(w.e_min, w.e_max, samples));
  return as_potential_function(build_potential(m, {}, true));
}

}  // namespace

TEST(ChiMap, WidthIdentities) {
  for (const WidthFunctions* w : {&family_one(), &family_three()})
    for (double chi : {0.0, 0.3, 0.5, 1.0}) {
      const auto m = chi_turning_points(*w, chi);
      for (std::size_t i = 0; i < m.x0.size(); ++i) {
        EXPECT_NEAR(m.x1.values()[i] - m.x0.values()[i], w->L1.values()[i], 1e-10);
        EXPECT_NEAR(m.x2.values()[i] - m.x1.values()[i], w->L2.values()[i], 1e-10);
      }
    }
}

TEST(ChiMap, EndpointChoicesPinOneWall) {
  const auto m1 = chi_turning_points(family_three(), 1.0);
  for (double v : m1.x1.values()) EXPECT_EQ(v, 0.0);
  const auto m0 = chi_turning_points(family_three(), 0.0);
  for (double v : m0.x0.values()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(chi_turning_points(family_three(), 1.5), DomainError);
}

TEST(CustomMap, SuppliedX0ReproducesChiMap) {
  const auto& w = family_one();
  const double chi = 0.3;
  const WellWidth l1 = w.well;
  const auto c = custom_turning_points(
      w, TurningPoint::x0, [=](double e) { return -chi * l1(e); }, [=](double e) { return -chi * l1.slope(e); });
  const auto m = chi_turning_points(w, chi);
  for (std::size_t i = 0; i < m.x0.size(); ++i) {
    EXPECT_NEAR(c.x0.values()[i], m.x0.values()[i], 1e-10);
    EXPECT_NEAR(c.x1.values()[i], m.x1.values()[i], 1e-10);
    EXPECT_NEAR(c.x2.values()[i], m.x2.values()[i], 1e-10);
  }
  EXPECT_EQ(validate_turning_points(c).valid, validate_turning_points(m).valid);
}

TEST(CustomMap, ConstantOuterWallIsRejected) {
  const auto c = custom_turning_points(family_three(), TurningPoint::x2, [](double) { return 30.0; });
  const auto v = validate_turning_points(c);
  EXPECT_FALSE(v.valid);
  EXPECT_EQ(v.violated, TurningPoint::x2);
  EXPECT_THROW(build_potential(c), NotMonotoneError);
}

TEST(CustomMap, WrongDirectionIsRejected) {
  EXPECT_THROW(custom_turning_points(family_three(), TurningPoint::x1, [](double e) { return -e; }), NotMonotoneError);
  EXPECT_THROW(custom_turning_points(family_three(), TurningPoint::x0, [](double e) { return e; }), NotMonotoneError);
}

TEST(Validate, FamilyThreeCriticalEnergy) {
  // x2' = -(b / (pi a)) / sqrt(Em - E) + (1 - chi) (2 / a) / sqrt(E) vanishes at
  // E_c = 4 (1 - chi)^2 Em / (4 (1 - chi)^2 + b^2 / pi^2).
  const double em = oracle::emax_III(1, 1, 10);
  for (double chi : {0.25, 0.5, 0.75}) {
    const double k = 4 * (1 - chi) * (1 - chi);
    const double want = k * em / (k + 1 / (pi * pi));
    const auto v = validate_turning_points(chi_turning_points(family_three(), chi));
    EXPECT_FALSE(v.valid);
    EXPECT_EQ(v.violated, TurningPoint::x2);
    ASSERT_TRUE(v.e_c);
    EXPECT_NEAR(*v.e_c, want, 1e-6 * want) << "chi=" << chi;
  }
  EXPECT_NEAR(*validate_turning_points(chi_turning_points(family_three(), 0.5)).e_c, 6.781832, 1e-6);
  EXPECT_TRUE(validate_turning_points(chi_turning_points(family_three(), 1.0)).valid);
}

TEST(Validate, NeedsAFineEnoughGrid) {
  const auto m = chi_turning_points(family_one(), 0.5);
  EXPECT_THROW(validate_turning_points(resample(m, potential_grid(m.e_min, m.e_max, 32))), DomainError);
}

TEST(BuildPotential, SymmetricHarmonicWell) {
  const auto& w = family_one();
  const auto m = chi_turning_points(w, 0.5);
  ASSERT_TRUE(validate_turning_points(m).valid);
  const auto v = build_potential(m);
  EXPECT_NEAR(eval_potential(v, 2.0), 1.0, 1e-4);
  const auto pts = v.samples();
  const double edge = 2 * std::sqrt(w.e_max);
  int checked = 0;
  for (const auto& [x, e] : pts)
    if (std::abs(x) < edge) {
      EXPECT_NEAR(e, x * x / 4, 1e-4) << "x=" << x;
      ++checked;
    }
  EXPECT_GT(checked, 500);
}

TEST(BuildPotential, ChiOneGivesLeadingWall) {
  const auto m = chi_turning_points(family_three(), 1.0);
  const auto v = build_potential(m);
  ASSERT_GE(v.branches().size(), 3u);
  EXPECT_TRUE(v.branches()[1].wall);
  EXPECT_DOUBLE_EQ(v.branches()[1].x_lo, 0.0);
  EXPECT_LT(v.x_lo(), 0.0);
}

TEST(BuildPotential, RejectsOverhang) {
  EXPECT_THROW(build_potential(chi_turning_points(family_three(), 0.5)), NotMonotoneError);
  EXPECT_NO_THROW(build_potential(chi_turning_points(family_three(), 0.5), {}, true));
}

TEST(Invariance, WellPeriodAcrossChi) {
  // Polyline potentials: the absolute period error shrinks like h^1.5, the spread across chi is far smaller.
  const auto ref = well_of(family_one(), 0.5);
  for (double chi : {0.1, 0.9}) {
    const auto v = well_of(family_one(), chi);
    for (double e : {1.0, 4.0, 9.0}) {
      EXPECT_NEAR(well_period(v, e), well_period(ref, e), 1e-6) << chi;
      EXPECT_NEAR(well_period(v, e), oracle::harmonic_period(1), 1e-5) << chi;
    }
  }
}

TEST(Invariance, BohrSommerfeldLevelsAcrossChi) {
  const auto a = well_of(family_one(), 0.1), b = well_of(family_one(), 0.9);
  for (int n : {0, 3, 8}) {
    EXPECT_NEAR(bs_level(a, n), bs_level(b, n), 1e-6);
    EXPECT_NEAR(bs_level(a, n), n + 0.5, 1e-5);
  }
}

TEST(Resample, StaysInsideTheOpenInterval) {
  const auto m = chi_turning_points(family_one(), 0.5);
  EXPECT_THROW(resample(m, {m.e_min, 0.5 * m.e_max}), DomainError);
  const auto g = potential_grid(m.e_min, m.e_max, 100);
  EXPECT_GT(g.front(), m.e_min);
  EXPECT_LT(g.back(), m.e_max);
}
