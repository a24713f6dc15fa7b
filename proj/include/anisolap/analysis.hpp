#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "anisolap/evolve.hpp"
#include "anisolap/fields.hpp"
#include "anisolap/measures.hpp"
#include "anisolap/parallel.hpp"
#include "anisolap/realspace.hpp"
#include "anisolap/symbols.hpp"

namespace anisolap {

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope fit needs two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---- coercivity ---------------------------------------------------------

struct ProbeSpec {
  double k_min = 1e-3;
  double k_max = 1e3;
  int radial = 61;        // log-spaced magnitudes
  int angular = 72;       // 2D: angles on [0, 2 pi); 3D: azimuths (polar count is half)
  int refinements = 4;    // local zoom levels around the argmin
  std::string describe() const {
    return "|k| log-spaced in [" + std::to_string(k_min) + ", " + std::to_string(k_max) + "] x " +
           std::to_string(radial) + ", " + std::to_string(angular) + " directions, " + std::to_string(refinements) +
           " refinements";
  }
};

struct CoercivityReport {
  double ratio_infimum = std::numeric_limits<double>::infinity();
  Vec argmin{0.0, 0.0, 0.0};
  double numerator_at_min = 0.0, denominator_at_min = 0.0;
  std::string probes;
  bool coercive = true;          // false: a degenerate direction was found
  std::optional<Vec> witness;    // k with vanishing numerator
  double witness_numerator = 0.0, witness_denominator = 0.0;
  std::size_t evaluations = 0;
  std::string verdict() const { return coercive ? "coercive" : "degenerate-direction-found"; }
};

// -Re psi_m(k), the anisotropic side of the coercivity comparison.
inline double coercivity_numerator(const DirectionalMeasure& m, double beta, double lambda, const Vec& k) {
  return -tempered_symbol(m, beta, lambda, k).real();
}

namespace detail {

inline Vec polar_direction(int n, double a, double b) {
  if (n == 1) return {a < kPi ? 1.0 : -1.0, 0.0, 0.0};
  if (n == 2) return direction_2d(a);
  return direction_3d(b, a);
}

}  // namespace detail

// inf_k of -Re psi_m(k) / -Re psi_iso(k) over a log-radial x direction grid,
// plus probes orthogonal to the support and local refinement near the argmin.
inline CoercivityReport coercivity_ratio(const DirectionalMeasure& m, double beta, double lambda,
                                         const ProbeSpec& spec = {}) {
  check_beta(beta);
  check_lambda(lambda);
  if (!(spec.k_min > 0.0 && spec.k_max > spec.k_min) || spec.radial < 2 || spec.angular < 4)
    throw std::invalid_argument("invalid coercivity probe specification");
  const int n = m.dimension();
  CoercivityReport rep;
  rep.probes = spec.describe();

  struct Probe {
    double logk, a, b;  // a: azimuth in [0, 2 pi), b: polar angle (3D)
  };
  auto wavevector = [&](const Probe& p) { return std::exp(p.logk) * detail::polar_direction(n, p.a, p.b); };
  auto evaluate = [&](const std::vector<Probe>& ps) {
    std::vector<double> num(ps.size()), den(ps.size());
    parallel_for(ps.size(), [&](std::size_t i) {
      Vec k = wavevector(ps[i]);
      num[i] = coercivity_numerator(m, beta, lambda, k);
      den[i] = isotropic_reference_symbol(beta, lambda, k, n);
    });
    rep.evaluations += ps.size();
    std::size_t best = 0;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ps.size(); ++i) {
      double r = std::max(0.0, num[i]) / den[i];
      if (r < best_ratio) {
        best_ratio = r;
        best = i;
      }
    }
    if (best_ratio < rep.ratio_infimum) {
      rep.ratio_infimum = best_ratio;
      rep.argmin = wavevector(ps[best]);
      rep.numerator_at_min = num[best];
      rep.denominator_at_min = den[best];
    }
    return std::pair{ps[best], best_ratio};
  };

  const double l0 = std::log(spec.k_min), l1 = std::log(spec.k_max);
  const double dl = (l1 - l0) / (spec.radial - 1);
  const double da = 2.0 * kPi / spec.angular;
  const int polar = std::max(2, spec.angular / 2);
  const double db = kPi / polar;
  std::vector<Probe> grid;
  for (int i = 0; i < spec.radial; ++i) {
    double lk = l0 + i * dl;
    if (n == 1) {
      grid.push_back({lk, 0.0, 0.0});
      grid.push_back({lk, 1.5 * kPi, 0.0});
    } else if (n == 2) {
      for (int j = 0; j < spec.angular; ++j) grid.push_back({lk, j * da, 0.0});
    } else {
      for (int p = 0; p <= polar; ++p)
        for (int j = 0; j < (p == 0 || p == polar ? 1 : spec.angular); ++j) grid.push_back({lk, j * da, p * db});
    }
  }
  Probe best = evaluate(grid).first;

  // Directions orthogonal to the support: the numerator vanishes identically there.
  auto nd = is_nondegenerate(m);
  for (const auto& c : nd.complement) {
    Vec k = c;
    double num = coercivity_numerator(m, beta, lambda, k);
    double den = isotropic_reference_symbol(beta, lambda, k, n);
    ++rep.evaluations;
    if (!rep.witness || num < rep.witness_numerator) {
      rep.witness = k;
      rep.witness_numerator = num;
      rep.witness_denominator = den;
    }
    double r = std::max(0.0, num) / den;
    if (r < rep.ratio_infimum) {
      rep.ratio_infimum = r;
      rep.argmin = k;
      rep.numerator_at_min = num;
      rep.denominator_at_min = den;
    }
  }

  // Zoom on the best grid probe.
  double hl = dl, ha = da, hb = db;
  for (int level = 0; level < spec.refinements && n > 1; ++level) {
    hl *= 0.5;
    ha *= 0.5;
    hb *= 0.5;
    std::vector<Probe> local;
    for (int i = -2; i <= 2; ++i)
      for (int j = -2; j <= 2; ++j) {
        double lk = std::clamp(best.logk + i * hl, l0, l1);
        if (n == 2) {
          local.push_back({lk, best.a + j * ha, 0.0});
        } else {
          for (int p = -2; p <= 2; ++p)
            local.push_back({lk, best.a + j * ha, std::clamp(best.b + p * hb, 0.0, kPi)});
        }
      }
    auto [b, rb] = evaluate(local);
    if (rb <= rep.ratio_infimum) best = b;
  }

  if (rep.witness && rep.witness_numerator <= 1e-10 && rep.witness_denominator > 0.0) rep.coercive = false;
  if (rep.ratio_infimum <= 1e-8 && !rep.witness) {
    rep.witness = rep.argmin;
    rep.witness_numerator = rep.numerator_at_min;
    rep.witness_denominator = rep.denominator_at_min;
  }
  if (rep.ratio_infimum <= 1e-8) rep.coercive = false;
  return rep;
}

struct SlopeReport {
  double numerator_small = 0, denominator_small = 0;  // expected 2
  double numerator_large = 0, denominator_large = 0;  // expected beta
};

// Log-log slopes of numerator and denominator along direction d at small and large |k|.
inline SlopeReport coercivity_slopes(const DirectionalMeasure& m, double beta, double lambda, const Vec& d,
                                     double small_lo = 1e-3, double small_hi = 1e-2, double large_lo = 1e3,
                                     double large_hi = 1e4) {
  auto fit = [&](double lo, double hi, bool numerator) {
    std::vector<double> ks, vs;
    for (int i = 0; i <= 8; ++i) {
      double k = lo * std::pow(hi / lo, i / 8.0);
      Vec kv = k * d;
      ks.push_back(k);
      vs.push_back(numerator ? coercivity_numerator(m, beta, lambda, kv)
                             : isotropic_reference_symbol(beta, lambda, kv, m.dimension()));
    }
    return loglog_slope(ks, vs);
  };
  return {fit(small_lo, small_hi, true), fit(small_lo, small_hi, false), fit(large_lo, large_hi, true),
          fit(large_lo, large_hi, false)};
}

// ---- bilinear form and Parseval ------------------------------------------

struct ParsevalOptions {
  SpectralGrid grid{1, 64.0, 4096};
  BilinearOptions bilinear{};
  double tolerance = 1e-2;
};

struct ParsevalReport {
  double bilinear = 0.0;
  double spectral = 0.0;
  double relative_deviation = 0.0;
  double bilinear_error = 0.0;    // reported quadrature/truncation error of the double integral
  double spectral_tail = 0.0;     // share of the spectral sum from the outer quarter of |k|
  double tolerance = 1e-2;
  bool pass = false;
};

// 2 |Gamma(-beta)| (2 pi)^{-n} sum (-psi(k)) |q^(k)|^2 dk^n on the grid.
inline double spectral_energy(const ScalarField& q, const DirectionalMeasure& m, double beta, double lambda,
                              const SpectralGrid& g, double* tail_share = nullptr) {
  auto qs = sample_on_grid(q, g);
  auto qh = fourier_transform(qs.values, g);
  auto psi = make_tempered_symbol(m, beta, lambda);
  std::vector<double> terms(qh.size());
  const double kmax = kPi / g.h();
  std::vector<char> outer(qh.size(), 0);
  parallel_for(qh.size(), [&](std::size_t i) {
    if (std::norm(qh[i]) == 0.0) return;
    Vec k = g.wavevector(i);
    terms[i] = -psi(k).real() * std::norm(qh[i]);
    outer[i] = norm(k) > 0.75 * kmax;
  });
  double sum = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    sum += terms[i];
    if (outer[i]) tail += terms[i];
  }
  const double dk = kPi / g.L;
  const double c = 2.0 * std::abs(std::tgamma(-beta)) * std::pow(dk / (2.0 * kPi), g.dimension);
  if (tail_share) *tail_share = sum != 0.0 ? tail / sum : 0.0;
  return c * sum;
}

inline ParsevalReport parseval_bilinear_check(const ScalarField& q, const DirectionalMeasure& m, double beta,
                                              double lambda, const ParsevalOptions& o = {}) {
  if (!m.is_symmetric()) throw std::invalid_argument("Parseval check needs a symmetric measure");
  ParsevalReport r;
  r.tolerance = o.tolerance;
  auto bf = bilinear_form(q, q, m, beta, lambda, o.bilinear);
  r.bilinear = bf.value;
  r.bilinear_error = bf.truncation_error;
  r.spectral = spectral_energy(q, m, beta, lambda, o.grid, &r.spectral_tail);
  const double scale = std::max(std::abs(r.bilinear), std::abs(r.spectral));
  r.relative_deviation = scale > 0.0 ? std::abs(r.bilinear - r.spectral) / scale : 0.0;
  r.pass = r.relative_deviation <= o.tolerance;
  return r;
}

// ---- counterexample ------------------------------------------------------

struct CounterexampleReport {
  double beta = 0.5, lambda = 1.0;
  std::vector<double> radii;
  std::vector<double> values;     // 2 int int_{x>y} (p(x)-p(y)) k(x-y) over [-R, R]^2
  double limit = 0.0;             // R -> infinity (finite when lambda > 0)
  double seminorm_q = 0.0;        // symmetric seminorm of q = 1
  double seminorm_p = 0.0;        // symmetric seminorm of p over the largest box
  bool positive = false, monotone = false;
  bool inequality_fails() const { return positive && seminorm_q == 0.0; }
};

// p = -1 on x < 0, 0 on x >= 0; q = 1; m concentrated at +1. On [-R, R]^2 the
// difference p(x) - p(y) (x > y) is 1 exactly when y < 0 <= x, so with s = x - y
// the value is 2 int_0^{2R} min(s, 2R - s) s^{-1-beta} e^{-lambda s} ds.
inline double counterexample_value(double beta, double lambda, double R) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("the counterexample integral needs beta in (0, 1)");
  // int_0^R s^{-beta} e^{-lambda s} ds with s = t^{1/(1-beta)} removes the singularity.
  const double g = 1.0 / (1.0 - beta);
  auto head = [&](double t) { return g * std::exp(-lambda * std::pow(t, g)); };
  double a = quad::adaptive_gk15(head, 0.0, std::pow(R, 1.0 - beta), 1e-14, 1e-13).value;
  auto tail = [&](double s) { return (2.0 * R - s) * std::pow(s, -1.0 - beta) * std::exp(-lambda * s); };
  double b = quad::adaptive_gk15(tail, R, 2.0 * R, 1e-14, 1e-13).value;
  return 2.0 * (a + b);
}

// Symmetric seminorm int int (f(x)-f(y))^2 k(x-y) over [-R, R]^2 of the step p,
// in closed radial form: 2 int_0^{2R} min(s, 2R - s) s^{-1-beta} e^{-lambda s} ds (the same integral).
inline CounterexampleReport counterexample_1d(double beta = 0.5, double lambda = 1.0,
                                              std::vector<double> radii = {1, 2, 5, 10, 20, 50}) {
  CounterexampleReport r;
  r.beta = beta;
  r.lambda = lambda;
  r.radii = radii;
  for (double R : radii) r.values.push_back(counterexample_value(beta, lambda, R));
  r.positive = !r.values.empty();
  r.monotone = true;
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    r.positive = r.positive && r.values[i] > 0.0;
    if (i > 0) r.monotone = r.monotone && r.values[i] > r.values[i - 1];
  }
  r.limit = lambda > 0.0 ? 2.0 * std::tgamma(1.0 - beta) * std::pow(lambda, beta - 1.0)
                         : std::numeric_limits<double>::infinity();
  r.seminorm_q = 0.0;  // q(x) - q(y) = 0 identically
  r.seminorm_p = r.values.empty() ? 0.0 : std::sqrt(r.values.back());
  return r;
}

// ---- mass conservation and semigroup ---------------------------------------

struct MassReport {
  std::vector<double> times;
  std::vector<double> masses;
  double initial_mass = 0.0;
  double max_drift = 0.0;          // max |mass(t) - mass(0)| / |mass(0)|
  double semigroup_defect = 0.0;   // max |p(t2) - evolve(p(t1), t2 - t1)| / max|p0|
  double decay_rate = 0.0;         // -log(mass(t)/mass(0)) / t at the last time
  double mass_tolerance = 1e-12;
  double semigroup_tolerance = 1e-10;
  bool pass = false;
};

inline MassReport mass_conservation_check(const GeneratorSymbol& psi, const DensityField& p0,
                                          const std::vector<double>& times, const EvolveOptions& o = {}) {
  MassReport r;
  r.times = times;
  r.initial_mass = p0.mass();
  double pmax = 0.0;
  for (double v : p0.values) pmax = std::max(pmax, std::abs(v));
  std::vector<DensityField> states;
  for (double t : times) {
    states.push_back(evolve_spectral(p0, psi, t, o));
    r.masses.push_back(states.back().mass());
    r.max_drift = std::max(r.max_drift, std::abs(r.masses.back() - r.initial_mass) / std::abs(r.initial_mass));
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    auto chained = evolve_spectral(states[i - 1], psi, times[i] - times[i - 1], o);
    for (std::size_t j = 0; j < chained.values.size(); ++j)
      r.semigroup_defect = std::max(r.semigroup_defect, std::abs(chained.values[j] - states[i].values[j]) / pmax);
  }
  if (!times.empty() && times.back() > 0.0) r.decay_rate = -std::log(r.masses.back() / r.initial_mass) / times.back();
  r.pass = r.max_drift <= r.mass_tolerance && r.semigroup_defect <= r.semigroup_tolerance;
  return r;
}

// psi(k) - c: violates psi(0) = 0 so the zero mode decays like e^{-ct}.
inline GeneratorSymbol corrupted_symbol(const GeneratorSymbol& psi, double c) {
  GeneratorSymbol base = psi;
  return GeneratorSymbol(SymbolKind::custom, psi.dimension(), [base, c](const Vec& k) { return base(k) - c; },
                         psi.description() + " shifted by " + std::to_string(-c));
}

// ---- scaling limit -------------------------------------------------------

struct ScalingRung {
  double sigma;
  double zeta_iso, zeta_axes;
  double deviation_iso, deviation_axes;
};

struct ScalingReport {
  double K1 = 1.0;
  int dimension = 2;
  std::vector<Vec> probes;
  std::vector<ScalingRung> rungs;
  std::vector<double> ratios_iso, ratios_axes;  // deviation(rung i) / deviation(rung i+1)
  std::vector<double> expected;                 // (sigma_i / sigma_{i+1})^2
  double tolerance = 0.2;
  bool pass = false;
};

// Case 1 keeps zeta sigma^2 / 2 = K1. The per-axis walk picks one of n axes per
// jump, so its matched rate is zeta = 2 n K1 / sigma^2.
inline ScalingReport scaling_limit_check(const std::vector<double>& sigmas, double K1, int n,
                                         const std::vector<Vec>& probes) {
  if (sigmas.size() < 2) throw std::invalid_argument("scaling check needs at least two sigmas");
  for (std::size_t i = 1; i < sigmas.size(); ++i)
    if (!(sigmas[i] < sigmas[i - 1])) throw std::invalid_argument("sigma ladder must decrease");
  ScalingReport r;
  r.K1 = K1;
  r.dimension = n;
  r.probes = probes;
  for (double s : sigmas) {
    ScalingRung g{s, 2.0 * K1 / (s * s), 2.0 * n * K1 / (s * s), 0.0, 0.0};
    for (const auto& k : probes) {
      const double heat = -K1 * dot(k, k);
      g.deviation_iso =
          std::max(g.deviation_iso, std::abs(g.zeta_iso * gaussian_symbol(GaussianVariant::iso, s, n, k) - heat));
      g.deviation_axes =
          std::max(g.deviation_axes, std::abs(g.zeta_axes * gaussian_symbol(GaussianVariant::axes, s, n, k) - heat));
    }
    r.rungs.push_back(g);
  }
  r.pass = true;
  for (std::size_t i = 0; i + 1 < r.rungs.size(); ++i) {
    const double e = std::pow(sigmas[i] / sigmas[i + 1], 2);
    r.expected.push_back(e);
    r.ratios_iso.push_back(r.rungs[i].deviation_iso / r.rungs[i + 1].deviation_iso);
    r.ratios_axes.push_back(r.rungs[i].deviation_axes / r.rungs[i + 1].deviation_axes);
    r.pass = r.pass && std::abs(r.ratios_iso.back() / e - 1.0) <= r.tolerance &&
             std::abs(r.ratios_axes.back() / e - 1.0) <= r.tolerance;
  }
  return r;
}

// L1 distance between Case 1 and Case 2 densities at matched K1 along the sigma ladder.
inline std::vector<double> scaling_density_ladder(const std::vector<double>& sigmas, double K1, double t,
                                                  const DensityField& p0) {
  const int n = p0.grid.dimension;
  std::vector<double> out;
  for (double s : sigmas) {
    auto a = evolve_spectral(p0, make_gaussian_symbol(GaussianVariant::iso, n, s, 2.0 * K1 / (s * s)), t);
    auto b = evolve_spectral(p0, make_gaussian_symbol(GaussianVariant::axes, n, s, 2.0 * n * K1 / (s * s)), t);
    out.push_back(compare_densities(a, b).l1);
  }
  return out;
}

// ---- real-space vs spectral equivalence ----------------------------------

enum class OperatorCase { caseI, caseII, general };

inline const char* to_string(OperatorCase c) {
  switch (c) {
    case OperatorCase::caseI: return "caseI";
    case OperatorCase::caseII: return "caseII";
    case OperatorCase::general: return "general";
  }
  return "?";
}

struct EquivalenceReport {
  std::vector<Vec> points;
  std::vector<double> realspace;
  std::vector<double> spectral;
  double relative_l2 = 0.0;
  double max_abs = 0.0;
  double tail_bound = 0.0;
  double tolerance = 1e-3;
  double seconds = 0.0;
  bool pass = false;
};

inline std::vector<Vec> lattice_points(int n, double lo, double hi, double step) {
  std::vector<double> axis;
  for (int i = 0; lo + i * step <= hi + 1e-12; ++i) axis.push_back(lo + i * step);
  std::vector<Vec> pts;
  std::array<std::size_t, 3> idx{0, 0, 0};
  for (;;) {
    Vec x{0.0, 0.0, 0.0};
    for (int d = 0; d < n; ++d) x[d] = axis[idx[d]];
    pts.push_back(x);
    int d = 0;
    while (d < n && ++idx[d] == axis.size()) idx[d++] = 0;
    if (d == n) break;
  }
  return pts;
}

inline OperatorValue apply_operator(OperatorCase c, const ScalarField& f, const DirectionalMeasure& m,
                                    const StabilityProfile& prof, const Vec& x, const RealspaceOptions& o = {}) {
  if (c == OperatorCase::general) return apply_general(f, m, prof, x, o);
  if (!prof.is_constant()) throw std::invalid_argument("Case I/II need a constant profile");
  const ComponentParams cp = !prof.atoms().empty() ? prof.atoms().front() : prof.bands().front();
  if (c == OperatorCase::caseI) return apply_caseI(f, m, cp.beta, cp.lambda, x, o);
  return apply_caseII(f, m, cp.beta, cp.lambda, x, o);
}

// Real-space quadrature at grid points against the inverse DFT of psi f^.
inline EquivalenceReport equivalence_check(OperatorCase c, const ScalarField& f, const DirectionalMeasure& m,
                                           const StabilityProfile& prof, const SpectralGrid& g,
                                           const std::vector<Vec>& points, const RealspaceOptions& o = {},
                                           double tolerance = 1e-3) {
  const auto t0 = std::chrono::steady_clock::now();
  EquivalenceReport r;
  r.points = points;
  r.tolerance = tolerance;
  std::vector<std::size_t> where;
  for (const auto& x : points) {
    std::array<int, 3> j{0, 0, 0};
    for (int d = 0; d < g.dimension; ++d) {
      double s = (x[d] + g.L) / g.h();
      j[d] = static_cast<int>(std::lround(s));
      if (std::abs(s - j[d]) > 1e-9 || j[d] < 0 || j[d] >= g.N)
        throw std::invalid_argument("evaluation point is not a grid point");
    }
    where.push_back(g.flatten(j));
  }
  const auto psi = prof.is_constant() && c != OperatorCase::general
                       ? make_tempered_symbol(m, (!prof.atoms().empty() ? prof.atoms() : prof.bands()).front().beta,
                                              (!prof.atoms().empty() ? prof.atoms() : prof.bands()).front().lambda)
                       : make_general_symbol(m, prof);
  const auto spec = apply_spectral(sample_on_grid(f, g).values, g, psi);
  r.realspace.resize(points.size());
  std::vector<double> tails(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    auto v = apply_operator(c, f, m, prof, points[i], o);
    r.realspace[i] = v.value;
    tails[i] = v.tail_bound;
  });
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    r.spectral.push_back(spec[where[i]]);
    double e = r.realspace[i] - r.spectral[i];
    num += e * e;
    den += r.spectral[i] * r.spectral[i];
    r.max_abs = std::max(r.max_abs, std::abs(e));
    r.tail_bound = std::max(r.tail_bound, tails[i]);
  }
  r.relative_l2 = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  r.pass = r.relative_l2 <= tolerance;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// ---- subordination -------------------------------------------------------

struct SubordinationMoment {
  double mean = 0.0, std_error = 0.0, expected = 0.0;
  bool pass = false;
};

// Mean of E(t) against t^alpha / Gamma(1 + alpha), tolerance 3 standard errors.
inline SubordinationMoment inverse_subordinator_mean(double alpha, double t, std::size_t n, std::uint64_t seed,
                                                     const SubordinatorOptions& so = {}) {
  std::vector<double> e(n);
  parallel_for(n, [&](std::size_t i) {
    Rng rng = stream_rng(seed, i);
    e[i] = sample_inverse_subordinator(alpha, t, rng, so);
  });
  SubordinationMoment r;
  for (double v : e) r.mean += v;
  r.mean /= static_cast<double>(n);
  double m2 = 0.0;
  for (double v : e) m2 += (v - r.mean) * (v - r.mean);
  r.std_error = std::sqrt(m2 / (n - 1.0) / n);
  r.expected = std::pow(t, alpha) / std::tgamma(1.0 + alpha);
  r.pass = std::abs(r.mean - r.expected) <= 3.0 * r.std_error;
  return r;
}

}  // namespace anisolap
