#include <gtest/gtest.h>

#include <random>

#include "anisolap/symbols.hpp"
#include "oracles.hpp"

using namespace anisolap;

namespace {

constexpr double pi = 3.14159265358979323846;

DirectionalMeasure fig1_measure() { return half_plane_measure(2.0 / (3.0 * pi), 1.0 / (3.0 * pi)); }

cd direct_term(double beta, double lambda, double u) {
  return std::pow(cd(lambda, -u), beta) - std::pow(lambda, beta);
}

}  // namespace

TEST(TemperedTerm, MatchesPrincipalPower) {
  for (double beta : {0.3, 0.7, 1.2, 1.5, 1.9})
    for (double lambda : {0.0, 0.01, 1.0, 3.0})
      for (double u : {-7.0, -0.3, 0.05, 1.0, 40.0}) {
        cd a = tempered_term(beta, lambda, u), b = direct_term(beta, lambda, u);
        EXPECT_NEAR(std::abs(a - b), 0.0, 1e-12 * std::max(1.0, std::abs(b))) << beta << " " << lambda << " " << u;
      }
}

TEST(TemperedTerm, SmallArgumentAvoidsCancellation) {
  // (lambda - iu)^beta - lambda^beta ~ -i beta lambda^{beta-1} u for tiny u.
  const double beta = 1.5, lambda = 2.0, u = 1e-9;
  cd v = tempered_term(beta, lambda, u);
  EXPECT_NEAR(v.imag() / (-beta * std::pow(lambda, beta - 1.0) * u), 1.0, 1e-8);
  EXPECT_NEAR(v.real() / (-0.5 * beta * (beta - 1.0) * std::pow(lambda, beta - 2.0) * u * u), 1.0, 1e-6);
}

TEST(TemperedDirection, RadialIntegralIdentity) {
  // int r^{-1-beta} e^{-lambda r}(1 - cos ur) dr = |Gamma(-beta)| (-Re psi_dir(u)), both sides of beta = 1.
  for (double beta : {0.4, 0.8, 1.3, 1.7})
    for (double lambda : {0.2, 1.0})
      for (double u : {0.5, 3.0, 11.0}) {
        const double num = oracle::radial_one_minus_cos(beta, lambda, u);
        const double lib = -std::abs(std::tgamma(-beta)) * tempered_direction(beta, lambda, u).real();
        EXPECT_NEAR(lib / num, 1.0, 1e-8) << beta << " " << lambda << " " << u;
      }
}

TEST(TemperedSymbol, RealPartNonpositiveImagOdd) {
  auto m = fig1_measure();
  for (double beta : {0.6, 1.3, 1.8})
    for (double lambda : {0.0, 0.5}) {
      Vec k{0.7, -1.9, 0.0};
      cd a = tempered_symbol(m, beta, lambda, k), b = tempered_symbol(m, beta, lambda, -k);
      EXPECT_LE(a.real(), 0.0);
      EXPECT_NEAR(a.real(), b.real(), 1e-12);
      EXPECT_NEAR(a.imag(), -b.imag(), 1e-12);
    }
}

TEST(TemperedSymbol, SymmetricMeasureIsReal) {
  auto m = isotropic_measure(2);
  cd v = tempered_symbol(m, 1.4, 0.3, {1.2, 0.4, 0.0});
  EXPECT_NEAR(v.imag(), 0.0, 1e-12);
  EXPECT_LT(v.real(), 0.0);
}

TEST(TemperedSymbol, AtomsAreExactSums) {
  auto m = make_atomic_measure(2, {{{1, 0, 0}, 0.25}, {{0, 1, 0}, 0.75}});
  Vec k{2.0, -0.5, 0.0};
  cd want = 0.25 * -direct_term(0.8, 0.4, 2.0) + 0.75 * -direct_term(0.8, 0.4, -0.5);
  EXPECT_NEAR(std::abs(tempered_symbol(m, 0.8, 0.4, k) - want), 0.0, 1e-13);
}

TEST(TemperedSymbol, BandsAgainstBoostQuadrature) {
  auto m = fig1_measure();
  const double beta = 1.3, lambda = 0.01;
  Vec k{0.4, 2.5, 0.0};
  auto re = [&](double t) { return direct_term(beta, lambda, k[0] * std::cos(t) + k[1] * std::sin(t)).real(); };
  auto im = [&](double t) { return direct_term(beta, lambda, k[0] * std::cos(t) + k[1] * std::sin(t)).imag(); };
  cd want = (2.0 / (3.0 * pi)) * cd(oracle::integrate(re, 0, pi), oracle::integrate(im, 0, pi)) +
            (1.0 / (3.0 * pi)) * cd(oracle::integrate(re, pi, 2 * pi), oracle::integrate(im, pi, 2 * pi));
  cd got = tempered_symbol(m, beta, lambda, k);
  EXPECT_NEAR(std::abs(got - want) / std::abs(want), 0.0, 1e-9);
}

TEST(Beta1, IsotropicConstant) {
  // (1/omega_n) pi^{(n+1)/2} / Gamma((n+1)/2): pi/2 for n = 1, 1 for n = 2, pi/4 for n = 3.
  const double want[] = {0.0, pi / 2.0, 1.0, pi / 4.0};
  for (int n : {1, 2, 3}) {
    auto m = isotropic_measure(n);
    Vec k{1.7, n > 1 ? -0.6 : 0.0, n > 2 ? 0.9 : 0.0};
    cd v = beta1_symbol(m, 0.0, k);
    EXPECT_NEAR(v.real() / (-want[n] * norm(k)), 1.0, 1e-8) << "n=" << n;
    EXPECT_NEAR(beta1_isotropic_constant(n), want[n], 1e-14);
  }
}

TEST(Beta1, LimitOfRescaledTemperedSymbol) {
  // |Gamma(-beta)| psi_beta -> psi_1 as beta -> 1 for symmetric measures.
  auto m = isotropic_measure(2);
  Vec k{1.1, 0.9, 0.0};
  for (double lambda : {0.0, 0.5}) {
    const double b1 = beta1_symbol(m, lambda, k).real();
    for (double beta : {0.999, 1.001}) {
      const double v = std::abs(std::tgamma(-beta)) * tempered_symbol(m, beta, lambda, k).real();
      EXPECT_NEAR(v / b1, 1.0, 1e-2) << lambda << " " << beta;
    }
  }
}

TEST(Beta2, ReducesToQuadratic) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::pair<Vec, double>> atoms;
    for (int i = 0; i < 4; ++i) atoms.push_back({{U(rng) - 0.5, U(rng) - 0.5, 0.0}, U(rng)});
    auto m = make_atomic_measure(2, atoms);
    const double lambda = U(rng);
    Vec k{3 * U(rng), -2 * U(rng), 0.0};
    cd want = 0.0;
    for (const auto& a : m.atoms()) {
      const double u = dot(k, a.direction.coords());
      want += a.weight * (std::pow(cd(lambda, -u), 2.0) - lambda * lambda);
    }
    EXPECT_NEAR(std::abs(beta2_symbol(m, lambda, k) - want), 0.0, 1e-12);
  }
}

TEST(Gaussian, ClosedForms) {
  Vec k{0.8, -1.3, 0.0};
  EXPECT_NEAR(gaussian_symbol(GaussianVariant::iso, 0.7, 2, k).real(), std::exp(-0.5 * 0.49 * dot(k, k)) - 1.0, 1e-15);
  const double axes = 0.5 * (std::exp(-0.5 * 0.49 * 0.64) - 1.0) + 0.5 * (std::exp(-0.5 * 0.49 * 1.69) - 1.0);
  EXPECT_NEAR(gaussian_symbol(GaussianVariant::axes, 0.7, 2, k).real(), axes, 1e-15);
}

TEST(Gaussian, RadialTransformAgainstBoost) {
  for (double s : {0.5, 1.0, 2.0})
    for (double u : {-3.0, 0.2, 1.5}) {
      auto re = [&](double r) { return (std::cos(u * r) - 1.0) * r * std::exp(-r * r / (2 * s * s)); };
      auto im = [&](double r) { return std::sin(u * r) * r * std::exp(-r * r / (2 * s * s)); };
      cd want(oracle::integrate(re, 0, 12 * s), oracle::integrate(im, 0, 12 * s));
      EXPECT_NEAR(std::abs(gaussian_radial_transform(u, s) - want), 0.0, 1e-12);
    }
}

TEST(Gaussian, AnisoWithIsotropicMeasureIsRotationInvariant) {
  auto spec = GaussianAnisoSpec::uniform_sigma(isotropic_measure(2), 1.0);
  cd a = gaussian_aniso_symbol(spec, {1.0, 0.0, 0.0});
  cd b = gaussian_aniso_symbol(spec, {0.6, 0.8, 0.0});
  EXPECT_NEAR(std::abs(a - b), 0.0, 1e-11);
  // Rayleigh radius with uniform direction is N(0, I): Phi - 1 = e^{-|k|^2/2} - 1.
  EXPECT_NEAR(a.real(), std::exp(-0.5) - 1.0, 1e-11);
}

TEST(Truncated, AgainstOouraQuadrature) {
  for (double beta : {0.6, 1.4})
    for (double lambda : {0.0, 0.3})
      for (double u : {0.7, -2.0, 9.0}) {
        const double r0 = 0.5;
        cd want = oracle::truncated_radial(beta, lambda, r0, u);
        cd got = truncated_radial_transform(beta, lambda, r0, u);
        EXPECT_NEAR(std::abs(got - want) / std::abs(want), 0.0, 1e-8) << beta << " " << lambda << " " << u;
      }
}

TEST(GeneratorSymbol, SignGuardAndScaling) {
  GeneratorSymbol bad(SymbolKind::custom, 1, [](const Vec&) { return cd(0.5, 0.0); }, "bad");
  EXPECT_THROW(bad({1.0, 0.0, 0.0}), std::domain_error);
  auto heat = make_heat_symbol(2, 0.5);
  EXPECT_NEAR(heat({1.0, 2.0, 0.0}).real(), -0.5 * 5.0, 1e-14);
  EXPECT_NEAR(heat.scaled(3.0)({1.0, 2.0, 0.0}).real(), -7.5, 1e-14);
  EXPECT_THROW(heat.scaled(-1.0), std::invalid_argument);
}

TEST(GeneralProfile, ConstantProfileMatchesTempered) {
  auto m = fig1_measure();
  auto prof = StabilityProfile::constant(m, 1.3, 0.2);
  Vec k{-0.4, 1.1, 0.0};
  EXPECT_NEAR(std::abs(general_profile_symbol(m, prof, k) - tempered_symbol(m, 1.3, 0.2, k)), 0.0, 1e-10);
}

TEST(GeneralProfile, MixedBetaStaysDissipative) {
  auto m = half_plane_measure(0.6 / pi, 0.4 / pi);
  StabilityProfile prof(m, {}, {{1.8, 0.0}, {1.4, 0.0}});
  auto psi = make_general_symbol(m, prof);
  for (double a = 0.0; a < 2 * pi; a += 0.4) EXPECT_LE(psi(3.0 * direction_2d(a)).real(), 0.0);
}

TEST(Validation, RejectsOutOfRange) {
  auto m = fig1_measure();
  EXPECT_THROW(tempered_symbol(m, 2.5, 0.0, {1, 0, 0}), std::invalid_argument);
  EXPECT_THROW(tempered_symbol(m, 1.5, -0.1, {1, 0, 0}), std::invalid_argument);
  EXPECT_THROW(make_tempered_symbol(m, 0.0, 0.0), std::invalid_argument);
}
