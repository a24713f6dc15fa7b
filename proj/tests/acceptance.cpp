// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "anisolap/anisolap.hpp"
#include "oracles.hpp"

using namespace anisolap;

namespace {

constexpr double pi = 3.14159265358979323846;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

json load_config(const std::string& name) { return load_json_file(std::string(ANISOLAP_CONFIG_DIR) + "/" + name); }

DirectionalMeasure fig1_measure() { return half_plane_measure(2.0 / (3.0 * pi), 1.0 / (3.0 * pi)); }

// ---- 1 -------------------------------------------------------------------

Outcome equivalence() {
  const json c = load_config("theorem1_check.json");
  Outcome o{true, ""};
  for (const auto& s : c.at("scenarios")) {
    auto m = measure_from_json(s.at("measure"));
    auto prof = profile_from_json(s.at("profile"), m);
    const auto oc = s.at("case") == "caseII" ? OperatorCase::caseII : OperatorCase::caseI;
    auto field = field_from_json(s.at("field"), m.dimension());
    auto g = grid_from_json(s.at("grid"));
    const auto& p = s.at("points");
    auto pts = lattice_points(m.dimension(), p.at("lo"), p.at("hi"), p.at("step"));
    auto r = equivalence_check(oc, field, m, prof, g, pts);
    const bool ok = r.pass && r.seconds <= 120.0;
    o.pass = o.pass && ok;
    o.detail += fmt(" %s=%.2e(%.0fs)", s.at("name").get<std::string>().c_str(), r.relative_l2, r.seconds);
  }
  o.detail = "rel L2 <= 1e-3, <= 120 s each:" + o.detail;
  return o;
}

// ---- 2 -------------------------------------------------------------------

Outcome radial_identity() {
  // int r^{-1-b} e^{-lr} (1 - cos ur) dr = Gamma(-b) (l^b - (l^2+u^2)^{b/2} cos(b eta)), eta = atan(u/l).
  double worst = 0.0, worst_lib = 0.0;
  int count = 0;
  for (double beta : {0.3, 0.7, 1.2, 1.6, 1.9})
    for (auto [lambda, u] : {std::pair{0.1, 0.5}, {0.5, 2.0}, {1.0, 7.0}, {2.0, 20.0}}) {
      const double eta = std::atan2(u, lambda);
      const double closed =
          std::tgamma(-beta) * (std::pow(lambda, beta) - std::pow(lambda * lambda + u * u, 0.5 * beta) * std::cos(beta * eta));
      const double num = oracle::radial_one_minus_cos(beta, lambda, u);
      const double lib = -std::abs(std::tgamma(-beta)) * tempered_direction(beta, lambda, u).real();
      worst = std::max(worst, std::abs(num / closed - 1.0));
      worst_lib = std::max(worst_lib, std::abs(lib / closed - 1.0));
      ++count;
    }
  return {count == 20 && worst <= 1e-6 && worst_lib <= 1e-6,
          fmt("%d points, max rel dev quadrature %.1e, library %.1e (tol 1e-6)", count, worst, worst_lib)};
}

// ---- 3 -------------------------------------------------------------------

Outcome beta1_constant() {
  double worst = 0.0;
  for (int n : {1, 2}) {
    const double want = pi / 2.0 * (n == 1 ? 1.0 : 2.0 / pi);  // pi^{(n+1)/2} / Gamma((n+1)/2) / omega_n
    const double closed = std::pow(pi, 0.5 * (n + 1)) / std::tgamma(0.5 * (n + 1)) / sphere_area(n);
    worst = std::max(worst, std::abs(closed / want - 1.0));
    auto m = isotropic_measure(n);
    for (double k : {0.3, 1.0, 4.5, 20.0}) {
      Vec kv = n == 1 ? Vec{k, 0, 0} : k * direction_2d(0.37);
      const double v = -beta1_symbol(m, 0.0, kv).real();
      worst = std::max(worst, std::abs(v / (closed * k) - 1.0));
    }
  }
  return {worst <= 1e-8, fmt("max rel dev %.1e over n = 1, 2 (tol 1e-8)", worst)};
}

// ---- 4 -------------------------------------------------------------------

Outcome beta2_reduction() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::pair<Vec, double>> atoms;
    for (int i = 0; i < 5; ++i) atoms.push_back({{U(rng) - 0.5, U(rng) - 0.5, U(rng) - 0.5}, U(rng)});
    auto m = make_atomic_measure(3, atoms);
    const double lambda = 2 * U(rng);
    Vec k{4 * U(rng) - 2, 4 * U(rng) - 2, 4 * U(rng) - 2};
    cd want = 0.0;
    for (const auto& a : m.atoms()) {
      const double u = dot(k, a.direction.coords());
      want += a.weight * (std::pow(cd(lambda, -u), 2.0) - lambda * lambda);
    }
    worst = std::max(worst, std::abs(beta2_symbol(m, lambda, k) - want) / std::max(1.0, std::abs(want)));
  }
  // A band measure against Boost quadrature over the circle.
  auto hp = fig1_measure();
  const double lambda = 0.5;
  Vec k{0.8, -1.7, 0.0};
  auto integrand = [&](double t, bool imag) {
    cd v = std::pow(cd(lambda, -dot(k, direction_2d(t))), 2.0) - lambda * lambda;
    return imag ? v.imag() : v.real();
  };
  cd band_want = 0.0;
  for (const auto& b : hp.bands())
    band_want += b.density * cd(oracle::integrate([&](double t) { return integrand(t, false); }, b.theta_lo, b.theta_hi),
                                oracle::integrate([&](double t) { return integrand(t, true); }, b.theta_lo, b.theta_hi));
  worst = std::max(worst, std::abs(beta2_symbol(hp, lambda, k) - band_want) / std::abs(band_want));

  // First-order convergence of the tempered symbol as beta -> 2.
  std::vector<double> eps{1e-2, 1e-3, 1e-4}, err;
  for (double e : eps) err.push_back(std::abs(tempered_symbol(hp, 2.0 - e, lambda, k) - beta2_symbol(hp, lambda, k)));
  const double slope = loglog_slope(eps, err);
  return {worst <= 1e-12 && std::abs(slope - 1.0) <= 0.05,
          fmt("max rel dev %.1e (tol 1e-12); |psi(2-eps) - psi_2| slope in eps %.3f (expect 1)", worst, slope)};
}

// ---- 5 -------------------------------------------------------------------

Outcome ecf_match() {
  const std::size_t n = 100000;
  const double tol = 5.0 / std::sqrt(double(n));
  const std::vector<Vec> probes{{0.5, 0, 0}, {0, 1, 0}, {1, 1, 0}, {2, -0.5, 0}, {3, 0, 0}};
  double worst = 0.0;
  for (JumpSpec s : {JumpSpec(GaussianIsoJump{2, 1.0}), JumpSpec(GaussianAxesJump{2, 1.0})}) {
    auto ends = simulate_endpoints(s, 1.0, 1.0, n, 99);
    for (const auto& k : probes) {
      cd acc = 0.0;
      for (const auto& x : ends) acc += std::polar(1.0, dot(k, x));
      const cd exact = std::exp(jump_cf(s, k) - 1.0);
      worst = std::max(worst, std::abs(acc / double(n) - exact));
    }
  }
  return {worst <= tol, fmt("max |ECF - exact| %.2e over 2 cases x 5 probes (tol %.2e)", worst, tol)};
}

// ---- 6 -------------------------------------------------------------------

Outcome mc_vs_spectral() {
  // Fine spectral solution from a point mass, averaged onto the histogram's unit cells.
  SpectralGrid fine(2, 16.0, 256), coarse(2, 16.0, 32);
  auto psi = make_gaussian_symbol(GaussianVariant::iso, 2, 1.0, 1.0);
  auto spectral = aggregate_cells(evolve_spectral(point_mass(fine), psi, 1.0), 8);
  auto ends = simulate_endpoints(GaussianIsoJump{2, 1.0}, 1.0, 1.0, 1000000, 6);
  auto hist = density_from_samples(ends, coarse);
  const double l1 = compare_densities(hist.density, spectral).l1;
  return {l1 <= 0.01, fmt("L1 = %.4f with 1e6 paths on unit cells (tol 0.01)", l1)};
}

// ---- 7 -------------------------------------------------------------------

Outcome coercivity() {
  Outcome o{true, ""};
  // Degenerate: supports that do not span the space.
  struct Deg {
    const char* name;
    DirectionalMeasure m;
  };
  std::vector<Deg> degenerate{
      {"line2d", make_atomic_measure(2, {{{1, 0, 0}, 0.5}, {{-1, 0, 0}, 0.5}})},
      {"atom2d", make_atomic_measure(2, {{{0.6, 0.8, 0}, 1.0}})},
      {"plane3d", make_atomic_measure(3, {{{1, 0, 0}, 0.4}, {{0, 1, 0}, 0.3}, {{-1, -1, 0}, 0.3}})},
  };
  for (const auto& d : degenerate) {
    auto r = coercivity_ratio(d.m, 1.5, 0.5, {1e-2, 1e2, 9, 12, 1});
    const bool ok = !r.coercive && r.witness && r.witness_numerator <= 1e-10;
    o.pass = o.pass && ok;
    o.detail += fmt(" %s:witness num %.1e", d.name, std::abs(r.witness_numerator));
  }
  // Nondegenerate: fine-grid floors computed independently beforehand.
  struct Nondeg {
    const char* name;
    DirectionalMeasure m;
    double beta, lambda, floor;
  };
  std::vector<Nondeg> good{
      {"axes", make_atomic_measure(2, {{{1, 0, 0}, 0.5}, {{0, 1, 0}, 0.5}}), 1.5, 0.5, 0.8988441854957543},
      {"three", make_atomic_measure(2, {{{1, 0, 0}, 0.5}, {{0, 1, 0}, 0.3}, {{-1, -1, 0}, 0.2}}), 1.2, 0.2,
       0.7171574997038868},
  };
  for (const auto& g : good) {
    auto r = coercivity_ratio(g.m, g.beta, g.lambda);
    auto s = coercivity_slopes(g.m, g.beta, g.lambda, direction_2d(0.3));
    const bool ok = r.coercive && r.ratio_infimum >= g.floor * (1.0 - 1e-6) &&
                    std::abs(s.numerator_small / 2.0 - 1.0) <= 0.05 && std::abs(s.denominator_small / 2.0 - 1.0) <= 0.05 &&
                    std::abs(s.numerator_large / g.beta - 1.0) <= 0.05 &&
                    std::abs(s.denominator_large / g.beta - 1.0) <= 0.05;
    o.pass = o.pass && ok;
    o.detail += fmt(" %s:inf %.6f floor %.6f slopes %.3f/%.3f %.3f/%.3f", g.name, r.ratio_infimum, g.floor,
                    s.numerator_small, s.denominator_small, s.numerator_large, s.denominator_large);
  }
  return o;
}

// ---- 8 -------------------------------------------------------------------

Outcome parseval() {
  Outcome o{true, ""};
  struct Case {
    const char* name;
    ScalarField q;
    DirectionalMeasure m;
    double beta, lambda;
    SpectralGrid grid;
  };
  std::vector<Case> cases{
      {"1d_b0.5_l1", compact_bump(1, {0, 0, 0}, 1.0), isotropic_measure(1), 0.5, 1.0, SpectralGrid(1, 64.0, 4096)},
      {"1d_b1.5_l0", compact_bump(1, {0, 0, 0}, 1.0), isotropic_measure(1), 1.5, 0.0, SpectralGrid(1, 64.0, 4096)},
      {"2d_axes_b1.3_l0.5", compact_bump(2, {0, 0, 0}, 1.0),
       make_atomic_measure(2, {{{1, 0, 0}, 0.25}, {{-1, 0, 0}, 0.25}, {{0, 1, 0}, 0.25}, {{0, -1, 0}, 0.25}}), 1.3, 0.5,
       SpectralGrid(2, 16.0, 256)},
  };
  for (const auto& c : cases) {
    ParsevalOptions po;
    po.grid = c.grid;
    auto r = parseval_bilinear_check(c.q, c.m, c.beta, c.lambda, po);
    o.pass = o.pass && r.pass;
    o.detail += fmt(" %s:%.1e", c.name, r.relative_deviation);
  }
  o.detail = "relative deviation (tol 1e-2):" + o.detail;
  return o;
}

// ---- 9 -------------------------------------------------------------------

Outcome counterexample() {
  auto r = counterexample_1d();
  std::ostringstream v;
  for (double x : r.values) v << fmt(" %.4f", x);
  return {r.positive && r.monotone && r.seminorm_q == 0.0,
          "values" + v.str() + fmt(" (limit %.4f), seminorm product %.1f", r.limit, r.seminorm_q * r.seminorm_p)};
}

// ---- 10 ------------------------------------------------------------------

Outcome mass_battery() {
  SpectralGrid g(2, 16.0, 64);
  auto p0 = gaussian_density(g, {0, 0, 0}, 1.0);
  auto hp = fig1_measure();
  std::vector<GeneratorSymbol> battery{
      make_heat_symbol(2, 0.5),
      make_gaussian_symbol(GaussianVariant::iso, 2, 1.0, 1.0),
      make_gaussian_symbol(GaussianVariant::axes, 2, 1.0, 1.0),
      make_gaussian_aniso_symbol(GaussianAnisoSpec::uniform_sigma(hp, 1.0)),
      make_tempered_symbol(hp, 0.7, 0.0),
      make_tempered_symbol(hp, 1.3, 0.5),
      make_beta1_symbol(isotropic_measure(2), 0.5),
      make_beta2_symbol(hp, 0.5),
      make_general_symbol(hp, StabilityProfile(hp, {}, {{1.8, 0.0}, {1.4, 0.2}})),
      make_isotropic_reference_symbol(2, 1.3, 0.2),
  };
  EvolveOptions eo;
  eo.enforce_boundary = false;
  double drift = 0.0, defect = 0.0;
  bool ok = true;
  for (const auto& psi : battery) {
    auto r = mass_conservation_check(psi, p0, {0.25, 0.5, 1.0}, eo);
    drift = std::max(drift, r.max_drift);
    defect = std::max(defect, r.semigroup_defect);
    ok = ok && r.pass;
  }
  return {ok, fmt("%zu symbols: max mass drift %.1e (tol 1e-12), semigroup defect %.1e (tol 1e-10)", battery.size(),
                  drift, defect)};
}

// ---- 11 ------------------------------------------------------------------

Outcome multistate() {
  const json c = load_config("swap_chain.json");
  auto model = state_model_from_json(c.at("model"));
  const std::size_t n = 100000;
  std::vector<Vec> ks{{0.0, 0, 0}, {0.5, 0, 0}, {1.0, 0, 0}, {2.0, 0, 0}};
  auto r = validate_multistate(model, ks, 1.0, n, 11);

  double montroll = 0.0;
  for (cd s : {cd(0.5, 0.0), cd(1.0, 1.0), cd(3.0, -2.0)})
    montroll = std::max(montroll, std::abs(montroll_transform(model, {0, 0, 0}, s).value.sum() - 1.0 / s));

  // One state: the oracle is the compound Poisson CF and the ensemble matches the plain sampler.
  StateModel one;
  one.M = Eigen::MatrixXd::Ones(1, 1);
  one.init = {1.0};
  one.waiting = {WaitingLaw::exponential(1.0)};
  one.jumps = {GaussianIsoJump{2, 1.0}};
  auto e = simulate_multistate_ensemble(one, 1.0, n, 12);
  auto ends = simulate_endpoints(one.jumps[0], 1.0, 1.0, n, 13);
  double oracle_dev = 0.0, ecf_dev = 0.0;
  for (Vec k : {Vec{0.5, 0, 0}, Vec{1, 1, 0}, Vec{2, -0.5, 0}}) {
    const cd exact = std::exp(jump_cf(one.jumps[0], k) - 1.0);
    oracle_dev = std::max(oracle_dev, std::abs(multistate_oracle(one, k, 1.0)(0) - exact));
    cd a = 0.0, b = 0.0;
    for (const auto& p : e.paths) a += std::polar(1.0, dot(k, p.position_at(1.0)));
    for (const auto& x : ends) b += std::polar(1.0, dot(k, x));
    ecf_dev = std::max({ecf_dev, std::abs(a / double(n) - exact), std::abs(b / double(n) - exact)});
  }
  const double tol = 5.0 / std::sqrt(double(n));
  return {r.pass && montroll <= 1e-10 && oracle_dev <= 1e-12 && ecf_dev <= tol,
          fmt("swap chain ECF dev %.2e (tol %.2e); Montroll k=0 |sum - 1/s| %.1e; single-state oracle %.1e, ECFs %.2e",
              r.max_deviation, r.tolerance, montroll, oracle_dev, ecf_dev)};
}

// ---- 12 ------------------------------------------------------------------

Outcome feynman_kac() {
  StateModel m;
  m.M = Eigen::MatrixXd{{0.0, 1.0}, {1.0, 0.0}};
  m.init = {1.0, 0.0};
  m.waiting = {WaitingLaw::exponential(1.0), WaitingLaw::exponential(2.0)};
  m.jumps = {GaussianIsoJump{1, 1.0}, make_stable_jump(isotropic_measure(1), 1.5, 0.5)};
  const double t = 1.0;
  FunctionalSpec one{[](const Vec&) { return 1.0; }, "one"};
  auto e1 = simulate_multistate_ensemble(m, t, 20000, 21, {0, 0, 0}, &one);
  double cf_dev = 0.0;
  for (double rho : {0.5, 1.0, 3.0})
    cf_dev = std::max(cf_dev, std::abs(empirical_functional_cf(e1, rho).value - std::polar(1.0, rho * t)));
  // Symmetric jumps from the origin, H(0) = 1/2: E A = t/2.
  FunctionalSpec half{[](const Vec& x) { return x[0] > 0.0 ? 1.0 : (x[0] == 0.0 ? 0.5 : 0.0); }, "half_space"};
  auto e2 = simulate_multistate_ensemble(m, t, 100000, 22, {0, 0, 0}, &half);
  auto s = functional_mean(e2);
  const double z = std::abs(s.value - 0.5 * t) / s.std_error;
  return {cf_dev <= 1e-12 && z <= 3.0,
          fmt("U=1 max |CF - e^{i rho t}| %.1e; occupation mean %.5f vs %.5f (%.2f SE, tol 3)", cf_dev, s.value, 0.5 * t,
              z)};
}

// ---- 13 ------------------------------------------------------------------

Outcome scaling() {
  auto r = scaling_limit_check({0.4, 0.2, 0.1, 0.05}, 1.0, 2, {{1, 0, 0}, {0.6, 0.8, 0}, {0.3, 0.4, 0}, {1.5, -0.5, 0}});
  std::string d = "ratios iso";
  for (double q : r.ratios_iso) d += fmt(" %.3f", q);
  d += ", axes";
  for (double q : r.ratios_axes) d += fmt(" %.3f", q);
  return {r.pass, d + " (expect 4 within 20%)"};
}

// ---- 14 ------------------------------------------------------------------

Outcome subordination() {
  SpectralGrid g(1, 32.0, 1024);
  auto p0 = gaussian_density(g, {0, 0, 0}, 0.25);
  auto psi = make_gaussian_symbol(GaussianVariant::iso, 1, 1.0, 1.0);
  auto frac = evolve_time_fractional(p0, psi, 0.99, 1.0, 4000, 31);
  auto classical = evolve_spectral(p0, psi, 1.0);
  const double l1 = compare_densities(frac.density, classical).l1;
  auto mean = inverse_subordinator_mean(0.7, 1.0, 100000, 32);
  const double z = std::abs(mean.mean - mean.expected) / mean.std_error;
  return {l1 <= 0.05 && mean.pass,
          fmt("alpha=0.99 L1 %.4f (tol 0.05); E(1) mean at alpha=0.7 %.5f vs %.5f (%.2f SE, tol 3)", l1, mean.mean,
              mean.expected, z)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"equivalence", equivalence},       {"radial_identity", radial_identity}, {"beta1_constant", beta1_constant},
      {"beta2_reduction", beta2_reduction}, {"ecf_match", ecf_match},          {"mc_vs_spectral", mc_vs_spectral},
      {"coercivity", coercivity},         {"parseval", parseval},               {"counterexample", counterexample},
      {"mass_semigroup", mass_battery},   {"multistate", multistate},           {"feynman_kac", feynman_kac},
      {"scaling_limit", scaling},         {"subordination", subordination},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("CRITERION %2zu %s %s [%.1fs] %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, sec,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
