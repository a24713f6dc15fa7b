#include <gtest/gtest.h>

#include <cstdlib>

#include "anisolap/sampler.hpp"
#include "oracles.hpp"

using namespace anisolap;

namespace {

constexpr double pi = 3.14159265358979323846;

// Binomial proportion check at four standard errors.
void expect_fraction(double hits, double n, double p, const char* what) {
  const double se = std::sqrt(p * (1 - p) / n);
  EXPECT_NEAR(hits / n, p, 4.0 * se) << what;
}

}  // namespace

TEST(Rng, StreamsAreDeterministicAndDistinct) {
  Rng a = stream_rng(42, 3), b = stream_rng(42, 3), c = stream_rng(42, 4);
  EXPECT_EQ(a(), b());
  EXPECT_NE(stream_rng(42, 3)(), c());
}

TEST(Jumps, GaussianAxesMovesOneCoordinate) {
  Rng rng(1);
  JumpSpec s = GaussianAxesJump{3, 1.0};
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 30000; ++i) {
    Vec y = sample_jump(s, rng);
    int nz = 0;
    for (int d = 0; d < 3; ++d)
      if (y[d] != 0.0) {
        ++nz;
        ++counts[d];
      }
    ASSERT_EQ(nz, 1);
  }
  for (int d = 0; d < 3; ++d) expect_fraction(counts[d], 30000, 1.0 / 3.0, "axis share");
}

TEST(Jumps, GaussianIsoSecondMoment) {
  Rng rng(2);
  JumpSpec s = GaussianIsoJump{2, 0.5};
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    Vec y = sample_jump(s, rng);
    sum += dot(y, y);
  }
  // |Y|^2 / sigma^2 ~ chi^2_2: mean 2 sigma^2, sd 2 sigma^2.
  EXPECT_NEAR(sum / n, 0.5, 4.0 * 0.5 / std::sqrt(double(n)));
}

TEST(Jumps, StableRadiusTail) {
  Rng rng(3);
  const double beta = 1.3, r0 = 1.0;
  JumpSpec s = make_stable_jump(isotropic_measure(2), beta, r0);
  const int n = 200000;
  int above = 0;
  for (int i = 0; i < n; ++i) above += norm(sample_jump(s, rng)) > 5.0;
  expect_fraction(above, n, std::pow(5.0, -beta), "P(r > 5)");
}

TEST(Jumps, TemperedRadiusTail) {
  Rng rng(4);
  const double beta = 0.7, r0 = 0.5, lambda = 0.8;
  JumpSpec s = make_stable_jump(isotropic_measure(2), beta, r0, lambda);
  auto g = [&](double r) { return std::pow(r, -1.0 - beta) * std::exp(-lambda * r); };
  const double p = oracle::tail(g, 2.0) / oracle::tail(g, r0);
  const int n = 200000;
  int above = 0;
  for (int i = 0; i < n; ++i) above += norm(sample_jump(s, rng)) > 2.0;
  expect_fraction(above, n, p, "P(r > 2)");
}

TEST(Jumps, HalfPlaneDirectionShare) {
  Rng rng(5);
  JumpSpec s = make_stable_jump(half_plane_measure(2.0 / (3.0 * pi), 1.0 / (3.0 * pi)), 1.3, 1.0);
  const int n = 100000;
  int up = 0;
  for (int i = 0; i < n; ++i) up += sample_jump(s, rng)[1] > 0.0;
  expect_fraction(up, n, 2.0 / 3.0, "upper half-plane");
}

TEST(Jumps, CharacteristicFunctionOfStableJump) {
  auto m = make_atomic_measure(1, {{{1, 0, 0}, 0.7}, {{-1, 0, 0}, 0.3}});
  JumpSpec s = make_stable_jump(m, 1.5, 0.5, 0.2);
  const int n = 100000;
  for (double k : {0.3, 1.0, 4.0}) {
    Rng r = stream_rng(6, static_cast<std::uint64_t>(k * 10));
    cd acc = 0.0;
    for (int i = 0; i < n; ++i) acc += std::polar(1.0, k * sample_jump(s, r)[0]);
    EXPECT_LE(std::abs(acc / double(n) - jump_cf(s, {k, 0, 0})), 5.0 / std::sqrt(double(n))) << k;
  }
}

TEST(Jumps, ValidationErrors) {
  EXPECT_THROW(validate(JumpSpec(GaussianIsoJump{2, -1.0})), std::invalid_argument);
  EXPECT_THROW(make_stable_jump(isotropic_measure(2), 2.5, 1.0), std::invalid_argument);
  EXPECT_THROW(make_stable_jump(isotropic_measure(2), 1.5, 0.0), std::invalid_argument);
}

TEST(CompoundPoisson, EventCountIsPoisson) {
  const double zeta = 3.0, T = 2.0;
  auto e = simulate_ensemble(GaussianIsoJump{1, 1.0}, zeta, T, 20000, 9);
  double mean = 0.0;
  for (const auto& p : e.paths) {
    mean += p.times.size() - 1.0;
    EXPECT_DOUBLE_EQ(p.times.front(), 0.0);
    EXPECT_DOUBLE_EQ(p.horizon, T);
  }
  mean /= e.paths.size();
  EXPECT_NEAR(mean, zeta * T, 4.0 * std::sqrt(zeta * T / e.paths.size()));
}

TEST(CompoundPoisson, EndpointsMatchTrajectories) {
  JumpSpec s = GaussianAxesJump{2, 1.0};
  auto e = simulate_ensemble(s, 1.0, 1.0, 500, 77);
  auto ends = simulate_endpoints(s, 1.0, 1.0, 500, 77);
  auto from_paths = endpoints_at(e, 1.0);
  for (std::size_t i = 0; i < ends.size(); ++i) {
    EXPECT_DOUBLE_EQ(ends[i][0], from_paths[i][0]);
    EXPECT_DOUBLE_EQ(ends[i][1], from_paths[i][1]);
  }
}

TEST(CompoundPoisson, ThreadCountDoesNotChangeResults) {
  JumpSpec s = GaussianIsoJump{2, 1.0};
  setenv("ANISOLAP_THREADS", "1", 1);
  auto a = simulate_endpoints(s, 2.0, 1.0, 2000, 5);
  setenv("ANISOLAP_THREADS", "4", 1);
  auto b = simulate_endpoints(s, 2.0, 1.0, 2000, 5);
  unsetenv("ANISOLAP_THREADS");
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i], b[i]);
}

TEST(CompoundPoisson, MsdOfGaussianWalk) {
  // E|X_t|^2 = zeta t n sigma^2.
  auto e = simulate_ensemble(GaussianIsoJump{2, 0.5}, 2.0, 1.0, 40000, 21);
  auto msd = ensemble_msd(e, 1.0);
  EXPECT_FALSE(msd.heavy_tail_warning);
  EXPECT_NEAR(msd.value, 2.0 * 2 * 0.25, 4.0 * msd.std_error);
  auto heavy = simulate_ensemble(make_stable_jump(isotropic_measure(2), 1.3, 1.0), 1.0, 1.0, 10, 1);
  EXPECT_TRUE(ensemble_msd(heavy, 1.0).heavy_tail_warning);
}

TEST(LevyRate, ClosedFormWithoutTempering) {
  const double beta = 1.3, r0 = 0.4;
  EXPECT_NEAR(levy_rate(beta, 0.0, r0), std::pow(r0, -beta) / beta / std::abs(std::tgamma(-beta)), 1e-13);
}

TEST(Subordinator, OneSidedStableLaplaceTransform) {
  Rng rng(8);
  const double alpha = 0.6;
  const int n = 200000;
  for (double s : {0.5, 2.0}) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += std::exp(-s * sample_one_sided_stable(alpha, rng));
    EXPECT_NEAR(acc / n, std::exp(-std::pow(s, alpha)), 4.0 * 0.5 / std::sqrt(double(n)));
  }
}

TEST(Subordinator, InverseMeanMatchesClosedForm) {
  const double alpha = 0.7, t = 1.0;
  const int n = 20000;
  std::vector<double> e(n);
  parallel_for(n, [&](std::size_t i) {
    Rng r = stream_rng(31, i);
    e[i] = sample_inverse_subordinator(alpha, t, r);
  });
  double mean = 0.0, m2 = 0.0;
  for (double v : e) mean += v;
  mean /= n;
  for (double v : e) m2 += (v - mean) * (v - mean);
  const double se = std::sqrt(m2 / (n - 1.0) / n);
  EXPECT_NEAR(mean, std::pow(t, alpha) / std::tgamma(1.0 + alpha), 3.0 * se);
}

TEST(Subordinator, PathIsMonotone) {
  Rng rng(12);
  auto e = sample_inverse_subordinator_path(0.5, {0.1, 0.5, 1.0, 2.0}, rng);
  for (std::size_t i = 1; i < e.size(); ++i) EXPECT_GE(e[i], e[i - 1]);
  EXPECT_THROW(sample_inverse_subordinator_path(0.5, {1.0, 0.5}, rng), std::invalid_argument);
  EXPECT_THROW(sample_inverse_subordinator(1.0, 1.0, rng), std::invalid_argument);
}
