#include <gtest/gtest.h>

#include "anisolap/multistate.hpp"

using namespace anisolap;

namespace {

StateModel swap_chain(double z0, double z1) {
  StateModel m;
  m.M = Eigen::MatrixXd{{0.0, 1.0}, {1.0, 0.0}};
  m.init = {1.0, 0.0};
  m.waiting = {WaitingLaw::exponential(z0), WaitingLaw::exponential(z1)};
  m.jumps = {GaussianIsoJump{1, 1.0}, make_stable_jump(make_atomic_measure(1, {{{1, 0, 0}, 0.7}, {{-1, 0, 0}, 0.3}}), 1.5, 0.5)};
  return m;
}

StateModel single_state(double zeta) {
  StateModel m;
  m.M = Eigen::MatrixXd::Ones(1, 1);
  m.init = {1.0};
  m.waiting = {WaitingLaw::exponential(zeta)};
  m.jumps = {GaussianIsoJump{2, 0.7}};
  return m;
}

}  // namespace

TEST(Model, Validation) {
  auto m = swap_chain(1.0, 2.0);
  EXPECT_NO_THROW(m.validate());
  auto bad = m;
  bad.M(0, 0) = 0.5;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = m;
  bad.init = {0.6, 0.6};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = m;
  bad.jumps[1] = GaussianIsoJump{2, 1.0};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = m;
  bad.waiting[0] = WaitingLaw::power_law(1.5);
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Oracle, DecoupledStatesAreCompoundPoisson) {
  // With M = I each state is an independent compound Poisson process.
  StateModel m;
  m.M = Eigen::MatrixXd::Identity(2, 2);
  m.init = {0.4, 0.6};
  m.waiting = {WaitingLaw::exponential(1.5), WaitingLaw::exponential(0.5)};
  m.jumps = {GaussianIsoJump{1, 1.0}, GaussianIsoJump{1, 2.0}};
  const double k = 0.8, t = 1.3;
  auto g = multistate_oracle(m, {k, 0, 0}, t);
  EXPECT_NEAR(std::abs(g(0) - 0.4 * std::exp(1.5 * t * (std::exp(-0.5 * k * k) - 1.0))), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(g(1) - 0.6 * std::exp(0.5 * t * (std::exp(-2.0 * k * k) - 1.0))), 0.0, 1e-13);
}

TEST(Oracle, OccupationOfTheSwapChain) {
  // At k = 0 the state probabilities follow the two-state Markov chain.
  const double a = 1.0, b = 2.0, t = 0.9;
  auto g = multistate_oracle(swap_chain(a, b), {0, 0, 0}, t);
  const double p0 = b / (a + b) + (1.0 - b / (a + b)) * std::exp(-(a + b) * t);
  EXPECT_NEAR(g(0).real(), p0, 1e-13);
  EXPECT_NEAR(g(1).real(), 1.0 - p0, 1e-13);
}

TEST(Montroll, SingleStateClosedForm) {
  auto m = single_state(2.0);
  Vec k{0.5, -1.0, 0.0};
  const cd s(0.7, 0.3);
  auto r = montroll_transform(m, k, s);
  EXPECT_FALSE(r.asymptotic);
  EXPECT_NEAR(std::abs(r.value(0) - 1.0 / (s + 2.0 * (1.0 - jump_cf(m.jumps[0], k)))), 0.0, 1e-14);
}

TEST(Montroll, LaplaceTransformOfTheGenerator) {
  // For exponential waiting the transform equals (s - B)^{-1} |init>, B = M^T Lambda Z - Z.
  auto m = swap_chain(1.0, 2.0);
  Vec k{1.3, 0, 0};
  const cd s(0.4, -0.2);
  Eigen::MatrixXcd B(2, 2);
  const cd l0 = jump_cf(m.jumps[0], k), l1 = jump_cf(m.jumps[1], k);
  B << -1.0, l1 * 2.0, l0 * 1.0, -2.0;
  Eigen::VectorXcd init(2);
  init << 1.0, 0.0;
  Eigen::VectorXcd want = (s * Eigen::MatrixXcd::Identity(2, 2) - B).inverse() * init;
  auto got = montroll_transform(m, k, s).value;
  EXPECT_LT((got - want).norm(), 1e-13);
  // k = 0: total probability transforms to 1/s.
  EXPECT_NEAR(std::abs(montroll_transform(m, {0, 0, 0}, s).value.sum() - 1.0 / s), 0.0, 1e-13);
  EXPECT_THROW(montroll_transform(m, k, cd(-0.1, 0.0)), std::invalid_argument);
}

TEST(Montroll, PowerLawIsFlaggedAsymptotic) {
  auto m = single_state(1.0);
  m.waiting[0] = WaitingLaw::power_law(0.6);
  EXPECT_TRUE(montroll_transform(m, {0.1, 0, 0}, cd(0.01, 0.0)).asymptotic);
  EXPECT_THROW(validate_multistate(m, {{0.1, 0, 0}}, 1.0, 100, 1), std::invalid_argument);
  EXPECT_THROW(multistate_oracle(m, {0.1, 0, 0}, 1.0), std::invalid_argument);
}

TEST(Waiting, ParetoSurvival) {
  auto w = WaitingLaw::power_law(0.6, 0.5);
  Rng rng(4);
  const int n = 100000;
  int above = 0;
  for (int i = 0; i < n; ++i) {
    const double x = w.sample(rng);
    ASSERT_GE(x, 0.5);
    above += x > 2.0;
  }
  const double p = std::pow(4.0, -0.6);
  EXPECT_NEAR(above / double(n), p, 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST(Simulation, SwapChainAlternatesAndMatchesOracle) {
  auto m = swap_chain(1.0, 2.0);
  auto r = validate_multistate(m, {{0.0, 0, 0}, {0.5, 0, 0}, {2.0, 0, 0}}, 1.0, 40000, 11);
  EXPECT_TRUE(r.pass) << r.max_deviation << " > " << r.tolerance;
  auto e = simulate_multistate_ensemble(m, 1.0, 500, 3);
  auto c = transition_counts(e, 2);
  EXPECT_EQ(c(0, 0), 0.0);
  EXPECT_EQ(c(1, 1), 0.0);
  EXPECT_GT(c(0, 1), 0.0);
  for (const auto& p : e.paths) EXPECT_EQ(p.states.front(), 0);
}

TEST(Simulation, Deterministic) {
  auto m = swap_chain(1.0, 2.0);
  auto a = simulate_multistate_ensemble(m, 2.0, 50, 8), b = simulate_multistate_ensemble(m, 2.0, 50, 8);
  for (std::size_t i = 0; i < a.paths.size(); ++i) {
    ASSERT_EQ(a.paths[i].times, b.paths[i].times);
    ASSERT_EQ(a.paths[i].states, b.paths[i].states);
  }
}

TEST(Functional, ConstantIntegrandGivesTheHorizon) {
  FunctionalSpec one{[](const Vec&) { return 1.0; }, "one"};
  auto e = simulate_multistate_ensemble(swap_chain(1.0, 2.0), 1.7, 200, 5, {0, 0, 0}, &one);
  for (const auto& p : e.paths) ASSERT_NEAR(p.final_functional, 1.7, 1e-12);
  auto cf = empirical_functional_cf(e, 0.9);
  EXPECT_NEAR(std::abs(cf.value - std::polar(1.0, 0.9 * 1.7)), 0.0, 1e-12);
}

TEST(Functional, HalfLineOccupationOfSymmetricWalk) {
  // Symmetric jumps from the origin with H(0) = 1/2: E A = t/2.
  FunctionalSpec half{[](const Vec& x) { return x[0] > 0.0 ? 1.0 : (x[0] == 0.0 ? 0.5 : 0.0); }, "H"};
  auto m = single_state(3.0);
  m.jumps = {GaussianIsoJump{1, 1.0}};
  auto e = simulate_multistate_ensemble(m, 2.0, 40000, 13, {0, 0, 0}, &half);
  auto s = functional_mean(e);
  EXPECT_NEAR(s.value, 1.0, 4.0 * s.std_error);
}

TEST(Functional, IntervalsOfAStoredPath) {
  Trajectory tr;
  tr.dimension = 1;
  tr.horizon = 3.0;
  tr.times = {0.0, 1.0, 2.5};
  tr.positions = {{0, 0, 0}, {2, 0, 0}, {-1, 0, 0}};
  tr.states = {0, 0, 0};
  auto U = [](const Vec& x) { return x[0]; };
  EXPECT_DOUBLE_EQ(functional_over(tr, U, 0.0, 3.0), 0.0 + 2.0 * 1.5 - 0.5);
  EXPECT_DOUBLE_EQ(functional_over(tr, U, 0.5, 2.0), 2.0);
  EXPECT_THROW(functional_over(tr, U, 1.0, 4.0), std::invalid_argument);
}
