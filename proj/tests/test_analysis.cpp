#include <gtest/gtest.h>

#include "anisolap/analysis.hpp"
#include "oracles.hpp"

using namespace anisolap;

namespace {

constexpr double pi = 3.14159265358979323846;

}  // namespace

TEST(Slope, ExactPowerLaw) {
  std::vector<double> x{1, 2, 4, 8}, y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 1.7));
  EXPECT_NEAR(loglog_slope(x, y), 1.7, 1e-13);
  EXPECT_THROW(loglog_slope({1.0}, {1.0}), std::invalid_argument);
}

TEST(Coercivity, IsotropicMeasureHasRatioOne) {
  auto r = coercivity_ratio(isotropic_measure(2), 1.3, 0.5, {1e-2, 1e2, 9, 12, 1});
  EXPECT_TRUE(r.coercive);
  EXPECT_NEAR(r.ratio_infimum, 1.0, 1e-9);
}

TEST(Coercivity, OneDimensionOnlySeesTheSymmetrizedMeasure) {
  // -Re psi depends on m(+1) + m(-1) = 1, so any unit-mass 1D measure matches the reference.
  auto m = make_atomic_measure(1, {{{1, 0, 0}, 0.9}, {{-1, 0, 0}, 0.1}});
  auto r = coercivity_ratio(m, 0.7, 0.2);
  EXPECT_NEAR(r.ratio_infimum, 1.0, 1e-12);
}

TEST(Coercivity, AxisAtomsAreBoundedBelow) {
  // Axis atoms span the plane, so the ratio stays positive, but it dips below the isotropic value.
  auto m = make_atomic_measure(2, {{{1, 0, 0}, 0.25}, {{-1, 0, 0}, 0.25}, {{0, 1, 0}, 0.25}, {{0, -1, 0}, 0.25}});
  auto r = coercivity_ratio(m, 1.5, 0.5, {1e-2, 1e2, 21, 24, 2});
  EXPECT_TRUE(r.coercive);
  EXPECT_GT(r.ratio_infimum, 0.5);
  EXPECT_LT(r.ratio_infimum, 1.0);
  // The reported minimum must be reproducible from its own wavevector.
  const double again = coercivity_numerator(m, 1.5, 0.5, r.argmin) / isotropic_reference_symbol(1.5, 0.5, r.argmin, 2);
  EXPECT_NEAR(again, r.ratio_infimum, 1e-12);
}

TEST(Coercivity, LineMeasureIsDegenerate) {
  auto m = make_atomic_measure(2, {{{1, 0, 0}, 0.5}, {{-1, 0, 0}, 0.5}});
  auto r = coercivity_ratio(m, 1.2, 0.3, {1e-2, 1e2, 9, 12, 1});
  EXPECT_FALSE(r.coercive);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_NEAR(std::abs((*r.witness)[0]), 0.0, 1e-12);
  EXPECT_LE(r.witness_numerator, 1e-10);
  EXPECT_GT(r.witness_denominator, 0.0);
  EXPECT_EQ(r.verdict(), "degenerate-direction-found");
}

TEST(Coercivity, AsymptoticSlopes) {
  // Tempered symbols grow like |k|^2 near zero and |k|^beta at infinity.
  auto m = half_plane_measure(2.0 / (3.0 * pi), 1.0 / (3.0 * pi));
  auto s = coercivity_slopes(m, 1.3, 0.5, direction_2d(0.4));
  EXPECT_NEAR(s.numerator_small, 2.0, 1e-2);
  EXPECT_NEAR(s.denominator_small, 2.0, 1e-2);
  EXPECT_NEAR(s.numerator_large, 1.3, 1e-2);
  EXPECT_NEAR(s.denominator_large, 1.3, 1e-2);
}

TEST(Coercivity, RejectsBadProbes) {
  EXPECT_THROW(coercivity_ratio(isotropic_measure(2), 1.3, 0.5, {1.0, 0.5, 9, 12, 1}), std::invalid_argument);
}

TEST(Parseval, CompactBumpOneDimension) {
  auto q = compact_bump(1, {0, 0, 0}, 1.0);
  auto r = parseval_bilinear_check(q, isotropic_measure(1), 0.5, 1.0);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.relative_deviation, 1e-5);
  EXPECT_GT(r.bilinear, 0.0);
  EXPECT_THROW(parseval_bilinear_check(q, make_atomic_measure(1, {{{1, 0, 0}, 1.0}}), 0.5, 1.0),
               std::invalid_argument);
}

TEST(Counterexample, AgainstBoostAndLimit) {
  const double beta = 0.5, lambda = 1.0;
  for (double R : {1.0, 3.0}) {
    auto k = [&](double s) {
      return s < 1e-100 ? 0.0 : 2.0 * std::min(s, 2 * R - s) * std::pow(s, -1.0 - beta) * std::exp(-lambda * s);
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    const double want = ts.integrate(k, 0.0, R) + ts.integrate(k, R, 2 * R);
    EXPECT_NEAR(counterexample_value(beta, lambda, R) / want, 1.0, 1e-10) << R;
  }
  auto r = counterexample_1d();
  EXPECT_TRUE(r.positive);
  EXPECT_TRUE(r.monotone);
  EXPECT_TRUE(r.inequality_fails());
  EXPECT_NEAR(r.limit, 2.0 * std::sqrt(pi), 1e-14);
  EXPECT_NEAR(r.values.back(), r.limit, 1e-9);
  EXPECT_TRUE(std::isinf(counterexample_1d(0.5, 0.0, {1, 2}).limit));
  EXPECT_THROW(counterexample_value(1.5, 1.0, 1.0), std::invalid_argument);
}

TEST(Mass, ConservedAndCorrupted) {
  SpectralGrid g(2, 16.0, 64);
  auto p0 = gaussian_density(g, {0, 0, 0}, 1.0);
  auto psi = make_tempered_symbol(half_plane_measure(2.0 / (3.0 * pi), 1.0 / (3.0 * pi)), 1.3, 0.5);
  auto ok = mass_conservation_check(psi, p0, {0.25, 0.5, 1.0});
  EXPECT_TRUE(ok.pass);
  EXPECT_LT(ok.max_drift, 1e-12);
  auto bad = mass_conservation_check(corrupted_symbol(psi, 0.3), p0, {0.25, 0.5, 1.0});
  EXPECT_FALSE(bad.pass);
  EXPECT_NEAR(bad.decay_rate, 0.3, 1e-10);
}

TEST(Scaling, SecondOrderConvergence) {
  auto r = scaling_limit_check({0.4, 0.2, 0.1, 0.05}, 0.5, 2, {{1, 0, 0}, {0.6, 0.8, 0}, {0, 2, 0}});
  EXPECT_TRUE(r.pass);
  for (double q : r.ratios_iso) EXPECT_NEAR(q, 4.0, 0.4);
  EXPECT_NEAR(r.rungs[0].zeta_iso, 2 * 0.5 / 0.16, 1e-12);
  EXPECT_NEAR(r.rungs[0].zeta_axes, 2 * 2 * 0.5 / 0.16, 1e-12);
  EXPECT_THROW(scaling_limit_check({0.1, 0.2}, 0.5, 2, {{1, 0, 0}}), std::invalid_argument);
}

TEST(Scaling, DensitiesMergeAsSigmaShrinks) {
  SpectralGrid g(2, 12.0, 64);
  auto d = scaling_density_ladder({0.8, 0.4, 0.2}, 0.5, 1.0, gaussian_density(g, {0, 0, 0}, 0.5));
  EXPECT_GT(d[0], d[1]);
  EXPECT_GT(d[1], d[2]);
}

TEST(Equivalence, OneSidedOneDimension) {
  auto m = make_atomic_measure(1, {{{1, 0, 0}, 1.0}});
  auto prof = StabilityProfile::constant(m, 0.5, 1.0);
  SpectralGrid g(1, 256.0, 8192);
  auto r = equivalence_check(OperatorCase::caseI, gaussian_bump(1, {0, 0, 0}, 1.0), m, prof, g,
                             lattice_points(1, -2.0, 2.0, 0.5));
  EXPECT_TRUE(r.pass) << r.relative_l2;
  EXPECT_EQ(r.points.size(), 9u);
  EXPECT_THROW(equivalence_check(OperatorCase::caseI, gaussian_bump(1, {0, 0, 0}, 1.0), m, prof, g, {{0.01, 0, 0}}),
               std::invalid_argument);
}

TEST(Lattice, Counts) {
  EXPECT_EQ(lattice_points(2, -1.0, 1.0, 0.5).size(), 25u);
  EXPECT_EQ(lattice_points(3, 0.0, 1.0, 1.0).size(), 8u);
}

TEST(Subordination, MeanOfInverseStable) {
  auto r = inverse_subordinator_mean(0.8, 2.0, 20000, 5);
  EXPECT_TRUE(r.pass) << r.mean << " vs " << r.expected << " se " << r.std_error;
  EXPECT_NEAR(r.expected, std::pow(2.0, 0.8) / std::tgamma(1.8), 1e-14);
}
