#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "anisolap/measures.hpp"
#include "anisolap/parallel.hpp"
#include "anisolap/symbols.hpp"

namespace anisolap {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Stream for path `index` under `master`: mt19937_64 seeded with
// splitmix64(splitmix64(master) ^ index). Independent of thread scheduling.
inline Rng stream_rng(std::uint64_t master, std::uint64_t index) {
  return Rng(splitmix64(splitmix64(master) ^ (index * 0xD1B54A32D192ED03ULL + 1)));
}

// Uniform on (0, 1), never 0 or 1.
inline double uniform_open(Rng& rng) {
  for (;;) {
    double u = std::generate_canonical<double, 53>(rng);
    if (u > 0.0 && u < 1.0) return u;
  }
}

inline double standard_normal(Rng& rng) {
  // Box-Muller keeps the stream consumption fixed (two uniforms per call).
  double u1 = uniform_open(rng), u2 = uniform_open(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

inline double exponential(Rng& rng, double rate) { return -std::log(uniform_open(rng)) / rate; }

// ---- jump specifications ---------------------------------------------------

struct GaussianIsoJump {
  int dimension;
  double sigma;
};
struct GaussianAxesJump {
  int dimension;
  double sigma;
};
struct GaussianAnisoJump {
  GaussianAnisoSpec spec;
};
// Power-law radius on [r0, inf) with density prop. to r^{-1-beta} e^{-lambda r}.
struct StableJump {
  std::shared_ptr<const DirectionalMeasure> measure;
  double beta;
  double r0;
  double lambda = 0.0;
  int max_rejections = 1000000;
};

using JumpSpec = std::variant<GaussianIsoJump, GaussianAxesJump, GaussianAnisoJump, StableJump>;

inline StableJump make_stable_jump(const DirectionalMeasure& m, double beta, double r0, double lambda = 0.0) {
  if (!(beta > 0.0 && beta < 2.0)) throw std::invalid_argument("jump beta must lie in (0, 2)");
  if (!(r0 > 0.0)) throw std::invalid_argument("r0 must be positive");
  check_lambda(lambda);
  return StableJump{std::make_shared<const DirectionalMeasure>(m), beta, r0, lambda};
}

inline int jump_dimension(const JumpSpec& spec) {
  return std::visit(
      [](const auto& s) -> int {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianAnisoJump>) return 2;
        else if constexpr (std::is_same_v<T, StableJump>) return s.measure->dimension();
        else return s.dimension;
      },
      spec);
}

inline void validate(const JumpSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianIsoJump> || std::is_same_v<T, GaussianAxesJump>) {
          check_dimension(s.dimension);
          if (!(s.sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
        } else if constexpr (std::is_same_v<T, StableJump>) {
          if (!s.measure) throw std::invalid_argument("stable jump without measure");
          if (!(s.beta > 0.0 && s.beta < 2.0)) throw std::invalid_argument("jump beta must lie in (0, 2)");
          if (!(s.r0 > 0.0)) throw std::invalid_argument("r0 must be positive");
          check_lambda(s.lambda);
        }
      },
      spec);
}

// True when E|Y|^2 is infinite (untempered power law).
inline bool divergent_second_moment(const JumpSpec& spec) {
  const auto* s = std::get_if<StableJump>(&spec);
  return s && s->lambda == 0.0;
}

// ---- directions and jumps ----------------------------------------------

namespace detail {

inline Vec sample_in_band(int dim, const Band& b, Rng& rng) {
  if (dim == 2) return direction_2d(b.theta_lo + (b.theta_hi - b.theta_lo) * uniform_open(rng));
  double p = b.phi_lo + (b.phi_hi - b.phi_lo) * uniform_open(rng);
  double c0 = std::cos(b.theta_lo), c1 = std::cos(b.theta_hi);
  double ct = c0 + (c1 - c0) * uniform_open(rng);
  return direction_3d(std::acos(std::clamp(ct, -1.0, 1.0)), p);
}

// Chooses a component with probability proportional to weights (atoms first, then bands).
inline std::size_t pick(const std::vector<double>& cumulative, Rng& rng) {
  double u = uniform_open(rng) * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(it - cumulative.begin(), cumulative.size() - 1);
}

inline Vec sample_component(const DirectionalMeasure& m, std::size_t c, Rng& rng) {
  if (c < m.atoms().size()) return m.atoms()[c].direction.coords();
  return sample_in_band(m.dimension(), m.bands()[c - m.atoms().size()], rng);
}

inline std::vector<double> cumulative_weights(const DirectionalMeasure& m, const std::vector<double>* scale = nullptr) {
  std::vector<double> cum;
  double s = 0.0;
  std::size_t i = 0;
  for (const auto& a : m.atoms()) {
    s += a.weight * (scale ? (*scale)[i] : 1.0);
    cum.push_back(s);
    ++i;
  }
  for (const auto& b : m.bands()) {
    s += b.mass(m.dimension()) * (scale ? (*scale)[i] : 1.0);
    cum.push_back(s);
    ++i;
  }
  return cum;
}

}  // namespace detail

inline Direction sample_direction(const DirectionalMeasure& m, Rng& rng) {
  auto cum = detail::cumulative_weights(m);
  Vec v = detail::sample_component(m, detail::pick(cum, rng), rng);
  return Direction::normalized(m.dimension(), v);
}

// Accept a power-law proposal r under tempering lambda given uniform u.
inline bool tempered_accept(double r, double u, double lambda) { return lambda == 0.0 || u <= std::exp(-lambda * r); }

// Pareto radius with survival (r/r0)^{-beta}, tempered by rejection.
inline double sample_power_radius(double beta, double r0, double lambda, Rng& rng, int max_rejections = 1000000) {
  for (int it = 0; it < max_rejections; ++it) {
    double r = r0 * std::pow(uniform_open(rng), -1.0 / beta);
    if (lambda == 0.0) return r;
    if (tempered_accept(r, uniform_open(rng), lambda)) return r;
  }
  throw std::runtime_error("tempered jump rejection loop exceeded its iteration cap");
}

inline Vec sample_jump(const JumpSpec& spec, Rng& rng) {
  return std::visit(
      [&](const auto& s) -> Vec {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianIsoJump>) {
          Vec y{0.0, 0.0, 0.0};
          for (int i = 0; i < s.dimension; ++i) y[i] = s.sigma * standard_normal(rng);
          return y;
        } else if constexpr (std::is_same_v<T, GaussianAxesJump>) {
          Vec y{0.0, 0.0, 0.0};
          int axis = std::min(s.dimension - 1, static_cast<int>(uniform_open(rng) * s.dimension));
          y[axis] = s.sigma * standard_normal(rng);
          return y;
        } else if constexpr (std::is_same_v<T, GaussianAnisoJump>) {
          // Direction law m(phi) sigma(phi)^2 / int sigma^2 m, Rayleigh radius.
          const auto& m = *s.spec.measure;
          std::vector<double> s2;
          for (double v : s.spec.atom_sigma) s2.push_back(v * v);
          for (double v : s.spec.band_sigma) s2.push_back(v * v);
          auto cum = detail::cumulative_weights(m, &s2);
          std::size_t c = detail::pick(cum, rng);
          Vec phi = detail::sample_component(m, c, rng);
          double sigma = c < m.atoms().size() ? s.spec.atom_sigma[c] : s.spec.band_sigma[c - m.atoms().size()];
          double r = sigma * std::sqrt(-2.0 * std::log(uniform_open(rng)));
          return r * phi;
        } else {
          Direction d = sample_direction(*s.measure, rng);
          double r = sample_power_radius(s.beta, s.r0, s.lambda, rng, s.max_rejections);
          return r * d.coords();
        }
      },
      spec);
}

// Characteristic function E exp(i k.Y) of one jump.
inline cd jump_cf(const JumpSpec& spec, const Vec& k) {
  return std::visit(
      [&](const auto& s) -> cd {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianIsoJump>) {
          return 1.0 + gaussian_symbol(GaussianVariant::iso, s.sigma, s.dimension, k);
        } else if constexpr (std::is_same_v<T, GaussianAxesJump>) {
          return 1.0 + gaussian_symbol(GaussianVariant::axes, s.sigma, s.dimension, k);
        } else if constexpr (std::is_same_v<T, GaussianAnisoJump>) {
          return 1.0 + gaussian_aniso_symbol(s.spec, k);
        } else {
          const double z = quad::power_exp_tail(-1.0 - s.beta, s.lambda, s.r0);
          cd v = sphere_integrate(
              *s.measure, [&](const Vec& phi) { return truncated_radial_transform(s.beta, s.lambda, s.r0, dot(k, phi)); },
              symbol_sphere_options(k));
          return 1.0 + v / z;
        }
      },
      spec);
}

// Jump rate of the compound Poisson process whose generator is the cutoff
// version of the normalized kernel: (1/|Gamma(-beta)|) int_{r0}^inf r^{-1-beta} e^{-lambda r} dr.
inline double levy_rate(double beta, double lambda, double r0) {
  check_beta(beta);
  return quad::power_exp_tail(-1.0 - beta, lambda, r0) / std::abs(std::tgamma(-beta));
}

// Bound on |psi(k) - zeta (Phi_0(k) - 1)| for a symmetric measure: the jumps
// below r0 that the compound Poisson approximation drops.
inline double cutoff_bias_bound(double beta, double r0, double kmax) {
  return kmax * kmax * std::pow(r0, 2.0 - beta) / (2.0 * (2.0 - beta) * std::abs(std::tgamma(-beta)));
}

// ---- trajectories ---------------------------------------------------------

struct Trajectory {
  int dimension = 1;
  std::vector<double> times;     // event epochs, times[0] = 0
  std::vector<Vec> positions;    // position right after each epoch
  std::vector<int> states;       // optional internal states, same length
  std::vector<double> functional;  // optional accumulated A at each epoch
  double horizon = 0.0;
  double final_functional = 0.0;  // A(horizon) when a functional was tracked

  // Position in effect at time t (right-continuous).
  const Vec& position_at(double t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    return positions[static_cast<std::size_t>(it - times.begin()) - 1];
  }
  int state_at(double t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    return states[static_cast<std::size_t>(it - times.begin()) - 1];
  }
  std::size_t event_count() const { return times.size() - 1; }
};

inline Trajectory simulate_compound_poisson(const JumpSpec& spec, double zeta, double T, const Vec& start, Rng& rng) {
  if (!(zeta > 0.0) || !(T > 0.0)) throw std::invalid_argument("compound Poisson needs zeta > 0 and T > 0");
  validate(spec);
  Trajectory tr;
  tr.dimension = jump_dimension(spec);
  tr.horizon = T;
  tr.times.push_back(0.0);
  tr.positions.push_back(start);
  double t = exponential(rng, zeta);
  while (t < T) {
    tr.positions.push_back(tr.positions.back() + sample_jump(spec, rng));
    tr.times.push_back(t);
    t += exponential(rng, zeta);
  }
  return tr;
}

// Exactly `steps` jumps at unit-rate Poisson epochs (the trajectory figures count steps).
inline Trajectory simulate_jumps(const JumpSpec& spec, std::size_t steps, const Vec& start, Rng& rng) {
  validate(spec);
  Trajectory tr;
  tr.dimension = jump_dimension(spec);
  tr.times.push_back(0.0);
  tr.positions.push_back(start);
  double t = 0.0;
  for (std::size_t i = 0; i < steps; ++i) {
    t += exponential(rng, 1.0);
    tr.times.push_back(t);
    tr.positions.push_back(tr.positions.back() + sample_jump(spec, rng));
  }
  tr.horizon = t;
  return tr;
}

struct Ensemble {
  std::vector<Trajectory> paths;
  JumpSpec spec;
};

inline Ensemble simulate_ensemble(const JumpSpec& spec, double zeta, double T, std::size_t n_paths, std::uint64_t seed,
                                  const Vec& start = {0.0, 0.0, 0.0}) {
  Ensemble e{std::vector<Trajectory>(n_paths), spec};
  parallel_for(n_paths, [&](std::size_t i) {
    Rng rng = stream_rng(seed, i);
    e.paths[i] = simulate_compound_poisson(spec, zeta, T, start, rng);
  });
  return e;
}

// Endpoints only, without storing trajectories.
inline std::vector<Vec> simulate_endpoints(const JumpSpec& spec, double zeta, double T, std::size_t n_paths,
                                           std::uint64_t seed, const Vec& start = {0.0, 0.0, 0.0}) {
  validate(spec);
  std::vector<Vec> out(n_paths);
  parallel_for(n_paths, [&](std::size_t i) {
    Rng rng = stream_rng(seed, i);
    Vec x = start;
    double t = exponential(rng, zeta);
    while (t < T) {
      x = x + sample_jump(spec, rng);
      t += exponential(rng, zeta);
    }
    out[i] = x;
  });
  return out;
}

struct Statistic {
  double value = 0.0;
  double std_error = 0.0;
};
struct ComplexStatistic {
  cd value = 0.0;
  double std_error = 0.0;
};

inline ComplexStatistic empirical_cf(const std::vector<Vec>& endpoints, const Vec& k) {
  if (endpoints.empty()) throw std::invalid_argument("empirical_cf: empty ensemble");
  cd s = 0.0;
  for (const auto& x : endpoints) s += std::polar(1.0, dot(k, x));
  const double n = static_cast<double>(endpoints.size());
  return {s / n, 1.0 / std::sqrt(n)};
}

inline std::vector<Vec> endpoints_at(const Ensemble& e, double t) {
  std::vector<Vec> out;
  out.reserve(e.paths.size());
  for (const auto& p : e.paths) out.push_back(p.position_at(t));
  return out;
}

struct MsdStatistic {
  double value = 0.0;
  double std_error = 0.0;
  bool heavy_tail_warning = false;  // jump law has no second moment
};

inline MsdStatistic ensemble_msd(const Ensemble& e, double t) {
  if (e.paths.empty()) throw std::invalid_argument("ensemble_msd: empty ensemble");
  std::vector<double> sq;
  sq.reserve(e.paths.size());
  for (const auto& p : e.paths) {
    Vec d = p.position_at(t) - p.positions.front();
    sq.push_back(dot(d, d));
  }
  const double n = static_cast<double>(sq.size());
  double mean = 0.0, m2 = 0.0;
  for (double v : sq) mean += v;
  mean /= n;
  for (double v : sq) m2 += (v - mean) * (v - mean);
  double se = n > 1 ? std::sqrt(m2 / (n - 1) / n) : 0.0;
  return {mean, se, divergent_second_moment(e.spec)};
}

// ---- inverse stable subordinator ---------------------------------------

// One-sided alpha-stable variate with Laplace transform exp(-s^alpha)
// (Kanter's representation).
inline double sample_one_sided_stable(double alpha, Rng& rng) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  const double u = kPi * uniform_open(rng);
  const double w = exponential(rng, 1.0);
  const double a = std::sin(alpha * u) / std::pow(std::sin(u), 1.0 / alpha);
  const double b = std::pow(std::sin((1.0 - alpha) * u) / w, (1.0 - alpha) / alpha);
  return a * b;
}

struct SubordinatorOptions {
  double dtau_factor = 1e-3;  // tau step = dtau_factor * t_max^alpha
  std::size_t max_steps = 100000000;
};

// First-passage times E(t) = inf{tau : S(tau) > t} on a tau grid, for an
// increasing list of t, along a single subordinator path.
inline std::vector<double> sample_inverse_subordinator_path(double alpha, const std::vector<double>& ts, Rng& rng,
                                                            const SubordinatorOptions& o = {}) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (ts.empty()) return {};
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (!(ts[i] > 0.0) || (i > 0 && ts[i] < ts[i - 1])) throw std::invalid_argument("times must be positive and sorted");
  const double dtau = o.dtau_factor * std::pow(ts.back(), alpha);
  const double scale = std::pow(dtau, 1.0 / alpha);
  std::vector<double> out;
  double S = 0.0, tau = 0.0;
  std::size_t steps = 0;
  for (double t : ts) {
    while (S <= t) {
      S += scale * sample_one_sided_stable(alpha, rng);
      tau += dtau;
      if (++steps > o.max_steps) throw std::runtime_error("subordinator grid exceeded its step cap");
    }
    out.push_back(tau);
  }
  return out;
}

inline double sample_inverse_subordinator(double alpha, double t, Rng& rng, const SubordinatorOptions& o = {}) {
  return sample_inverse_subordinator_path(alpha, {t}, rng, o).front();
}

}  // namespace anisolap
