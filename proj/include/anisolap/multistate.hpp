#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "anisolap/parallel.hpp"
#include "anisolap/sampler.hpp"

namespace anisolap {

struct WaitingLaw {
  enum class Kind { exponential, power_law };
  Kind kind = Kind::exponential;
  double rate = 1.0;   // exponential
  double alpha = 0.5;  // power law: Pareto survival (t/scale)^{-alpha}
  double scale = 1.0;

  static WaitingLaw exponential(double rate) { return {Kind::exponential, rate, 0.5, 1.0}; }
  static WaitingLaw power_law(double alpha, double scale = 1.0) { return {Kind::power_law, 1.0, alpha, scale}; }

  void validate() const {
    if (kind == Kind::exponential) {
      if (!(rate > 0.0)) throw std::invalid_argument("exponential waiting rate must be positive");
    } else {
      if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("power-law waiting alpha must lie in (0, 1)");
      if (!(scale > 0.0)) throw std::invalid_argument("power-law waiting scale must be positive");
    }
  }
  double sample(Rng& rng) const {
    if (kind == Kind::exponential) return anisolap::exponential(rng, rate);
    return scale * std::pow(uniform_open(rng), -1.0 / alpha);
  }
  // Laplace transform. The power law only has its small-s form 1 - s^alpha.
  cd laplace(cd s) const {
    if (kind == Kind::exponential) return rate / (s + rate);
    return 1.0 - std::pow(s, alpha);
  }
  bool asymptotic_only() const { return kind == Kind::power_law; }
};

struct StateModel {
  Eigen::MatrixXd M;  // M(i, j): probability of switching i -> j after a jump
  std::vector<double> init;
  std::vector<WaitingLaw> waiting;
  std::vector<JumpSpec> jumps;

  int size() const { return static_cast<int>(init.size()); }
  int dimension() const { return jump_dimension(jumps.front()); }

  void validate() const {
    const auto n = init.size();
    if (n == 0) throw std::invalid_argument("state model needs at least one state");
    if (static_cast<std::size_t>(M.rows()) != n || static_cast<std::size_t>(M.cols()) != n)
      throw std::invalid_argument("transition matrix must be N x N");
    if (waiting.size() != n || jumps.size() != n)
      throw std::invalid_argument("need one waiting law and one jump spec per state");
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (!(M(i, j) >= 0.0)) throw std::invalid_argument("transition matrix entries must be nonnegative");
        row += M(i, j);
      }
      if (std::abs(row - 1.0) > 1e-12) throw std::invalid_argument("transition matrix row " + std::to_string(i) + " does not sum to 1");
    }
    double s = 0.0;
    for (double p : init) {
      if (!(p >= 0.0)) throw std::invalid_argument("initial distribution must be nonnegative");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("initial distribution must sum to 1");
    for (const auto& w : waiting) w.validate();
    for (const auto& j : jumps) anisolap::validate(j);
    const int d = jump_dimension(jumps.front());
    for (const auto& j : jumps)
      if (jump_dimension(j) != d) throw std::invalid_argument("all jump specs must share one dimension");
  }
  bool exponential_only() const {
    for (const auto& w : waiting)
      if (w.kind != WaitingLaw::Kind::exponential) return false;
    return true;
  }
};

// A = int_0^t U(X(tau)) d tau.
struct FunctionalSpec {
  std::function<double(const Vec&)> U;
  std::string name = "U";
};

inline int sample_index(const std::vector<double>& p, Rng& rng) {
  double u = uniform_open(rng), acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return static_cast<int>(i);
  }
  // round-off: last state with positive probability
  for (std::size_t i = p.size(); i-- > 0;)
    if (p[i] > 0.0) return static_cast<int>(i);
  return 0;
}

// Wait with the current state's law, jump with the current state's law, then
// switch state by the current row of M.
inline Trajectory simulate_multistate_ctrw(const StateModel& model, double T, const Vec& start, Rng& rng,
                                           const FunctionalSpec* functional = nullptr) {
  if (!(T > 0.0)) throw std::invalid_argument("horizon must be positive");
  const int n = model.size();
  std::vector<std::vector<double>> rows(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) rows[i][j] = model.M(i, j);
  Trajectory tr;
  tr.dimension = model.dimension();
  tr.horizon = T;
  int state = sample_index(model.init, rng);
  double t = 0.0, A = 0.0;
  tr.times.push_back(0.0);
  tr.positions.push_back(start);
  tr.states.push_back(state);
  if (functional) tr.functional.push_back(0.0);
  for (;;) {
    const double w = model.waiting[state].sample(rng);
    const Vec& x = tr.positions.back();
    if (t + w >= T) {
      if (functional) A += functional->U(x) * (T - t);
      break;
    }
    if (functional) A += functional->U(x) * w;
    t += w;
    Vec next = x + sample_jump(model.jumps[state], rng);
    state = sample_index(rows[state], rng);
    tr.times.push_back(t);
    tr.positions.push_back(next);
    tr.states.push_back(state);
    if (functional) tr.functional.push_back(A);
  }
  tr.final_functional = A;
  return tr;
}

// int_a^b U(X(tau)) d tau along a stored path (piecewise constant in time).
inline double functional_over(const Trajectory& tr, const std::function<double(const Vec&)>& U, double a, double b) {
  if (!(a >= 0.0 && b >= a && b <= tr.horizon)) throw std::invalid_argument("functional interval outside the path");
  double A = 0.0;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    double lo = std::max(a, tr.times[i]);
    double hi = std::min(b, i + 1 < tr.times.size() ? tr.times[i + 1] : tr.horizon);
    if (hi > lo) A += U(tr.positions[i]) * (hi - lo);
  }
  return A;
}

struct MultistateEnsemble {
  std::vector<Trajectory> paths;
};

inline MultistateEnsemble simulate_multistate_ensemble(const StateModel& model, double T, std::size_t n_paths,
                                                       std::uint64_t seed, const Vec& start = {0.0, 0.0, 0.0},
                                                       const FunctionalSpec* functional = nullptr) {
  model.validate();
  MultistateEnsemble e{std::vector<Trajectory>(n_paths)};
  parallel_for(n_paths, [&](std::size_t i) {
    Rng rng = stream_rng(seed, i);
    e.paths[i] = simulate_multistate_ctrw(model, T, start, rng, functional);
  });
  return e;
}

// Counts of observed i -> j switches over all recorded events.
inline Eigen::MatrixXd transition_counts(const MultistateEnsemble& e, int n_states) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n_states, n_states);
  for (const auto& p : e.paths)
    for (std::size_t i = 1; i < p.states.size(); ++i) c(p.states[i - 1], p.states[i]) += 1.0;
  return c;
}

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

struct MontrollResult {
  CVector value;               // state-resolved p^(k, s)
  double reciprocal_condition;  // of I - M^T Lambda Phi
  bool asymptotic = false;     // some waiting law only has its small-s form
};

// ((I - Phi(s)) / s) (I - M^T Lambda(k) Phi(s))^{-1} |init>.
inline MontrollResult montroll_transform(const StateModel& model, const Vec& k, cd s) {
  model.validate();
  if (!(s.real() > 0.0)) throw std::invalid_argument("Laplace variable needs Re s > 0");
  const int n = model.size();
  CVector phi(n), lam(n), init(n);
  bool asym = false;
  for (int i = 0; i < n; ++i) {
    phi(i) = model.waiting[i].laplace(s);
    lam(i) = jump_cf(model.jumps[i], k);
    init(i) = model.init[i];
    asym = asym || model.waiting[i].asymptotic_only();
  }
  CMatrix Mt = model.M.transpose().cast<cd>();
  CMatrix B = CMatrix::Identity(n, n) - Mt * lam.asDiagonal() * phi.asDiagonal();
  Eigen::PartialPivLU<CMatrix> lu(B);
  const double rc = lu.rcond();
  if (!(rc > 1e-14))
    throw std::runtime_error("Montroll matrix is singular (reciprocal condition " + std::to_string(rc) + ")");
  CVector q = lu.solve(init);
  CVector g(n);
  for (int i = 0; i < n; ++i) g(i) = (1.0 - phi(i)) / s * q(i);
  return {g, rc, asym};
}

// Fourier-space state-resolved density for exponential waiting:
// dG/dt = (M^T Lambda(k) Z - Z) G, G(0) = |init>.
inline CVector multistate_oracle(const StateModel& model, const Vec& k, double t) {
  model.validate();
  if (!model.exponential_only())
    throw std::invalid_argument("exact multistate oracle needs exponential waiting in every state");
  const int n = model.size();
  CVector lam(n), z(n), init(n);
  for (int i = 0; i < n; ++i) {
    lam(i) = jump_cf(model.jumps[i], k);
    z(i) = model.waiting[i].rate;
    init(i) = model.init[i];
  }
  CMatrix Mt = model.M.transpose().cast<cd>();
  CMatrix B = Mt * lam.asDiagonal() * z.asDiagonal();
  B -= CMatrix(z.asDiagonal());
  CMatrix E = (B * t).exp();
  return E * init;
}

// (1/N) sum_j 1{state_j(t) = i} e^{i k.X_j(t)} per state.
inline std::vector<ComplexStatistic> state_resolved_ecf(const MultistateEnsemble& e, int n_states, const Vec& k,
                                                        double t) {
  if (e.paths.empty()) throw std::invalid_argument("empty ensemble");
  std::vector<cd> s(n_states, 0.0);
  for (const auto& p : e.paths) s[p.state_at(t)] += std::polar(1.0, dot(k, p.position_at(t)));
  const double n = static_cast<double>(e.paths.size());
  std::vector<ComplexStatistic> out;
  for (auto v : s) out.push_back({v / n, 1.0 / std::sqrt(n)});
  return out;
}

struct MultistateProbe {
  Vec k;
  int state;
  cd oracle;
  cd empirical;
  double deviation;
};

struct MultistateReport {
  std::vector<MultistateProbe> probes;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  std::size_t paths = 0;
  bool pass = false;
};

// Ensemble ECF per state against the matrix-exponential oracle, tolerance 5/sqrt(N).
inline MultistateReport validate_multistate(const StateModel& model, const std::vector<Vec>& k_probes, double t,
                                            std::size_t n_paths, std::uint64_t seed) {
  if (!model.exponential_only())
    throw std::invalid_argument("validation refused: power-law waiting only has an asymptotic transform");
  auto e = simulate_multistate_ensemble(model, t, n_paths, seed);
  MultistateReport r;
  r.paths = n_paths;
  r.tolerance = 5.0 / std::sqrt(static_cast<double>(n_paths));
  for (const auto& k : k_probes) {
    CVector g = multistate_oracle(model, k, t);
    auto ecf = state_resolved_ecf(e, model.size(), k, t);
    for (int i = 0; i < model.size(); ++i) {
      double dev = std::abs(g(i) - ecf[i].value);
      r.probes.push_back({k, i, g(i), ecf[i].value, dev});
      r.max_deviation = std::max(r.max_deviation, dev);
    }
  }
  r.pass = r.max_deviation <= r.tolerance;
  return r;
}

// (1/N) sum e^{i rho A_j} over the paths' final functionals.
inline ComplexStatistic empirical_functional_cf(const MultistateEnsemble& e, double rho) {
  if (e.paths.empty()) throw std::invalid_argument("empty ensemble");
  cd s = 0.0;
  for (const auto& p : e.paths) s += std::polar(1.0, rho * p.final_functional);
  const double n = static_cast<double>(e.paths.size());
  return {s / n, 1.0 / std::sqrt(n)};
}

inline Statistic functional_mean(const MultistateEnsemble& e) {
  if (e.paths.empty()) throw std::invalid_argument("empty ensemble");
  const double n = static_cast<double>(e.paths.size());
  double mean = 0.0, m2 = 0.0;
  for (const auto& p : e.paths) mean += p.final_functional;
  mean /= n;
  for (const auto& p : e.paths) m2 += std::pow(p.final_functional - mean, 2);
  return {mean, n > 1 ? std::sqrt(m2 / (n - 1) / n) : 0.0};
}

}  // namespace anisolap
