#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "anisolap/measures.hpp"
#include "anisolap/special.hpp"

namespace anisolap {

using cd = std::complex<double>;

enum class SymbolKind {
  gaussian_iso,
  gaussian_axes,
  gaussian_aniso,
  stable_aniso,
  tempered_aniso,
  beta1_aniso,
  beta2_quadratic,
  general_profile,
  isotropic_reference,
  custom,
};

inline const char* to_string(SymbolKind k) {
  switch (k) {
    case SymbolKind::gaussian_iso: return "gaussian_iso";
    case SymbolKind::gaussian_axes: return "gaussian_axes";
    case SymbolKind::gaussian_aniso: return "gaussian_aniso";
    case SymbolKind::stable_aniso: return "stable_aniso";
    case SymbolKind::tempered_aniso: return "tempered_aniso";
    case SymbolKind::beta1_aniso: return "beta1_aniso";
    case SymbolKind::beta2_quadratic: return "beta2_quadratic";
    case SymbolKind::general_profile: return "general_profile";
    case SymbolKind::isotropic_reference: return "isotropic_reference";
    case SymbolKind::custom: return "custom";
  }
  return "unknown";
}

// Default angular tolerance for symbol quadrature.
inline SphereOptions symbol_sphere_options(const Vec& k) {
  SphereOptions opt;
  opt.abs_tol = 1e-12;
  opt.rel_tol = 1e-13;
  opt.kink_normal = k;
  return opt;
}

// (-1)^ceil(beta) for beta in (0,1) u (1,2].
inline double stable_sign(double beta) { return beta < 1.0 ? -1.0 : 1.0; }

inline void check_beta(double beta) {
  if (!(beta > 0.0 && beta < 2.0) || is_beta_one(beta))
    throw std::invalid_argument("beta must lie in (0,1) u (1,2) and stay 1e-6 away from 1");
}
inline void check_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be >= 0");
}

// (lambda - i u)^beta - lambda^beta on the principal branch, through the polar
// form (lambda^2 + u^2)^{beta/2} exp(-i beta eta), eta = atan2(u, lambda).
inline cd tempered_term(double beta, double lambda, double u) {
  if (u == 0.0) return 0.0;
  const double eta = std::atan2(u, lambda);
  if (lambda == 0.0 || std::abs(u) > 1e8 * lambda) {
    const double r = std::pow(lambda * lambda + u * u, 0.5 * beta);
    return std::polar(r, -beta * eta) - std::pow(lambda, beta);
  }
  // lambda^beta * expm1(z) with z = (beta/2) log1p(u^2/lambda^2) - i beta eta.
  const double a = 0.5 * beta * std::log1p((u / lambda) * (u / lambda));
  const double b = -beta * eta;
  const double s = std::sin(0.5 * b);
  const cd em1(std::expm1(a) * std::cos(b) - 2.0 * s * s, std::exp(a) * std::sin(b));
  return std::pow(lambda, beta) * em1;
}

// Per-direction generator integrand of the tempered kernel.
inline cd tempered_direction(double beta, double lambda, double u) {
  return stable_sign(beta) * tempered_term(beta, lambda, u);
}

// Per-direction beta = 1 integrand (symmetric measures): the negative of
// u atan(u/lambda) - (lambda/2) ln(lambda^2 + u^2) + lambda ln(lambda).
inline double beta1_direction(double lambda, double u) {
  if (u == 0.0) return 0.0;
  if (lambda == 0.0) return -0.5 * kPi * std::abs(u);
  return -(u * std::atan(u / lambda) - 0.5 * lambda * std::log1p((u / lambda) * (u / lambda)));
}

// ---- free-function evaluators -------------------------------------------

inline cd tempered_symbol(const DirectionalMeasure& m, double beta, double lambda, const Vec& k) {
  check_beta(beta);
  check_lambda(lambda);
  return sphere_integrate(m, [&](const Vec& phi) { return tempered_direction(beta, lambda, dot(k, phi)); },
                          symbol_sphere_options(k));
}

inline cd beta1_symbol(const DirectionalMeasure& m, double lambda, const Vec& k) {
  check_lambda(lambda);
  if (!m.is_symmetric()) throw std::invalid_argument("beta = 1 symbol requires a symmetric measure");
  return sphere_integrate(m, [&](const Vec& phi) { return beta1_direction(lambda, dot(k, phi)); },
                          symbol_sphere_options(k));
}

inline cd beta2_symbol(const MomentSummary& mom, double lambda, const Vec& k) {
  check_lambda(lambda);
  const int n = static_cast<int>(mom.b.size());
  double quad_form = 0.0, lin = 0.0;
  for (int i = 0; i < n; ++i) {
    lin += k[i] * mom.b(i);
    for (int j = 0; j < n; ++j) quad_form += k[i] * mom.A(i, j) * k[j];
  }
  return cd(-quad_form, -2.0 * lambda * lin);
}

inline cd beta2_symbol(const DirectionalMeasure& m, double lambda, const Vec& k) {
  return beta2_symbol(moments(m), lambda, k);
}

// Per-component (beta, lambda) with the sign (-1)^ceil(beta) applied per component.
inline cd general_profile_symbol(const DirectionalMeasure& m, const StabilityProfile& prof, const Vec& k) {
  if (prof.has_beta_one()) throw std::invalid_argument("general profile: beta = 1 components are not supported");
  const SphereOptions opt = symbol_sphere_options(k);
  cd sum = 0.0;
  for (std::size_t i = 0; i < m.atoms().size(); ++i) {
    const auto& c = prof.atoms()[i];
    check_beta(c.beta);
    sum += m.atoms()[i].weight * tempered_direction(c.beta, c.lambda, dot(k, m.atoms()[i].direction.coords()));
  }
  for (std::size_t i = 0; i < m.bands().size(); ++i) {
    const auto& c = prof.bands()[i];
    const Band& b = m.bands()[i];
    check_beta(c.beta);
    if (b.density == 0.0) continue;
    sum += b.density * integrate_band(m.dimension(), b,
                                      [&](const Vec& phi) { return tempered_direction(c.beta, c.lambda, dot(k, phi)); },
                                      opt);
  }
  return sum;
}

// Nonnegative isotropic denominator: minus the real part of the tempered
// symbol of the uniform measure on S^{n-1}.
inline double isotropic_reference_symbol(double beta, double lambda, const Vec& k, int n) {
  check_beta(beta);
  check_lambda(lambda);
  check_dimension(n);
  const double kk = norm(k);
  if (kk == 0.0) return 0.0;
  auto f = [&](double u) { return -tempered_direction(beta, lambda, u).real(); };
  if (n == 1) return f(kk);
  if (n == 2) {
    auto g = [&](double t) { return f(kk * std::cos(t)); };
    return 2.0 / kPi * quad::adaptive_gk15(g, 0.0, 0.5 * kPi, 0.0, 1e-14).value;
  }
  auto g = [&](double t) { return f(kk * t); };
  return quad::adaptive_gk15(g, 0.0, 1.0, 0.0, 1e-14).value;
}

// Closed form of the beta = 1, lambda = 0 symbol for the uniform measure: -c_n |k|.
inline double beta1_isotropic_constant(int n) {
  return std::pow(kPi, 0.5 * (n + 1)) / std::tgamma(0.5 * (n + 1)) / sphere_area(n);
}

// ---- Gaussian jumps ---------------------------------------------------------

enum class GaussianVariant { iso, axes, aniso };

// Per-component Gaussian scale for the anisotropic variant.
struct GaussianAnisoSpec {
  std::shared_ptr<const DirectionalMeasure> measure;
  std::vector<double> atom_sigma;
  std::vector<double> band_sigma;

  GaussianAnisoSpec(DirectionalMeasure m, std::vector<double> atoms, std::vector<double> bands)
      : measure(std::make_shared<const DirectionalMeasure>(std::move(m))),
        atom_sigma(std::move(atoms)),
        band_sigma(std::move(bands)) {
    if (measure->dimension() != 2) throw std::invalid_argument("anisotropic Gaussian jumps are defined in 2D");
    if (atom_sigma.size() != measure->atoms().size() || band_sigma.size() != measure->bands().size())
      throw std::invalid_argument("one sigma per atom and per band is required");
    for (const auto* list : {&atom_sigma, &band_sigma})
      for (double s : *list)
        if (!(s > 0.0)) throw std::invalid_argument("sigma must be positive");
  }
  static GaussianAnisoSpec uniform_sigma(DirectionalMeasure m, double sigma) {
    std::vector<double> a(m.atoms().size(), sigma), b(m.bands().size(), sigma);
    return GaussianAnisoSpec(std::move(m), std::move(a), std::move(b));
  }
  // 1 / int sigma(phi)^2 m(dphi): normalizes c_m exp(-r^2 / 2 sigma^2) r dr m dphi.
  double normalization() const {
    double s = 0.0;
    for (std::size_t i = 0; i < atom_sigma.size(); ++i) s += measure->atoms()[i].weight * atom_sigma[i] * atom_sigma[i];
    for (std::size_t i = 0; i < band_sigma.size(); ++i)
      s += measure->bands()[i].mass(2) * band_sigma[i] * band_sigma[i];
    return 1.0 / s;
  }
};

// int_0^inf (e^{iur} - 1) r exp(-r^2 / 2 s^2) dr.
inline cd gaussian_radial_transform(double u, double s) {
  const double w = u * s;
  return s * s * cd(-std::sqrt(2.0) * w * dawson(w / std::sqrt(2.0)),
                    w * std::sqrt(0.5 * kPi) * std::exp(-0.5 * w * w));
}

inline cd gaussian_aniso_symbol(const GaussianAnisoSpec& spec, const Vec& k) {
  const auto& m = *spec.measure;
  cd sum = 0.0;
  for (std::size_t i = 0; i < m.atoms().size(); ++i)
    sum += m.atoms()[i].weight * gaussian_radial_transform(dot(k, m.atoms()[i].direction.coords()), spec.atom_sigma[i]);
  const SphereOptions opt = symbol_sphere_options(k);
  for (std::size_t i = 0; i < m.bands().size(); ++i) {
    const double s = spec.band_sigma[i];
    sum += m.bands()[i].density *
           integrate_band(2, m.bands()[i], [&](const Vec& phi) { return gaussian_radial_transform(dot(k, phi), s); }, opt);
  }
  return spec.normalization() * sum;
}

// Phi_0(k) - 1 for the isotropic (N(0, sigma^2 I)) and per-axis variants.
inline cd gaussian_symbol(GaussianVariant v, double sigma, int n, const Vec& k) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  check_dimension(n);
  if (v == GaussianVariant::iso) return std::expm1(-0.5 * sigma * sigma * dot(k, k));
  if (v == GaussianVariant::axes) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::expm1(-0.5 * sigma * sigma * k[i] * k[i]);
    return s / n;
  }
  throw std::invalid_argument("the anisotropic Gaussian needs a GaussianAnisoSpec");
}

// ---- jumps with an inner cutoff ----------------------------------------

// int_{r0}^inf (e^{iur} - 1) r^{-1-beta} e^{-lambda r} dr for beta in (0,1) u (1,2).
// Uses Gamma(-beta)((lambda - iu)^beta - lambda^beta) minus the (finite-part)
// integral over [0, r0]; the identity continues analytically across beta = 1.
inline cd truncated_radial_transform(double beta, double lambda, double r0, double u) {
  check_beta(beta);
  if (u == 0.0) return 0.0;
  const cd full = std::tgamma(-beta) * tempered_term(beta, lambda, u);
  const cd z(-lambda, u);
  cd head = 0.0;
  if (std::abs(z) * r0 <= 4.0) {
    // sum_{j>=1} (z^j - (-lambda)^j)/j! r0^{j-beta}/(j-beta)
    cd zj = 1.0;
    double lj = 1.0, fact = 1.0;
    for (int j = 1; j < 80; ++j) {
      zj *= z;
      lj *= -lambda;
      fact *= j;
      cd term = (zj - lj) / fact * std::pow(r0, j - beta) / (j - beta);
      head += term;
      if (std::abs(term) < 1e-18 * std::abs(head) && j > 4) break;
    }
    return full - head;
  }
  // Large |z| r0: integrate the regularized head numerically.
  // e^{-lambda r}(e^{iur} - 1 [- iur]) without cancellation near r = 0.
  auto g = [&](double r) -> cd {
    const double x = u * r, s = std::sin(0.5 * x);
    double im = std::sin(x);
    if (beta > 1.0) {
      const double x2 = x * x;
      im = std::abs(x) < 0.1 ? -x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0))) : im - x;
    }
    return cd(-2.0 * s * s, im) * std::exp(-lambda * r) * std::pow(r, -1.0 - beta);
  };
  std::vector<double> br{r0};
  double eps = r0;
  for (int j = 0; j < 14; ++j) {
    eps *= 0.1;
    br.push_back(eps);
  }
  cd num = quad::adaptive_piecewise(g, br, 1e-14, 1e-13).value;
  // Leading-order contribution of [0, eps].
  if (beta < 1.0) num += cd(0.0, u) * std::pow(eps, 1.0 - beta) / (1.0 - beta);
  else num += -0.5 * u * u * std::pow(eps, 2.0 - beta) / (2.0 - beta);
  if (beta > 1.0) {
    // Finite part of iu int_0^{r0} r^{-beta} e^{-lambda r} dr by its series.
    cd fp = 0.0;
    double c = 1.0;
    for (int j = 0; j < 80; ++j) {
      double term = c * std::pow(r0, j + 1.0 - beta) / (j + 1.0 - beta);
      fp += term;
      if (std::abs(term) < 1e-18 * std::abs(fp) && j > 4) break;
      c *= -lambda / (j + 1.0);
    }
    num += cd(0.0, u) * fp;
  }
  return full - num;
}

// ---- type-erased symbol -------------------------------------------------

class GeneratorSymbol {
 public:
  using Eval = std::function<cd(const Vec&)>;

  GeneratorSymbol(SymbolKind kind, int dim, Eval eval, std::string description, bool check_sign = true)
      : kind_(kind), dim_(dim), eval_(std::move(eval)), description_(std::move(description)), check_sign_(check_sign) {
    check_dimension(dim);
  }

  cd operator()(const Vec& k) const {
    cd v = eval_(k);
    if (!quad::all_finite(v)) throw std::domain_error(description_ + ": non-finite symbol value");
    if (check_sign_ && v.real() > 1e-11 + 1e-12 * std::abs(v))
      throw std::domain_error(description_ + ": symbol has positive real part");
    return v;
  }

  SymbolKind kind() const { return kind_; }
  int dimension() const { return dim_; }
  const std::string& description() const { return description_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

  // Rate multiplier: zeta * psi.
  GeneratorSymbol scaled(double zeta) const {
    if (!(zeta >= 0.0)) throw std::invalid_argument("symbol scale must be >= 0");
    GeneratorSymbol out = *this;
    Eval base = eval_;
    out.eval_ = [base, zeta](const Vec& k) { return zeta * base(k); };
    return out;
  }

 private:
  SymbolKind kind_;
  int dim_;
  Eval eval_;
  std::string description_;
  bool check_sign_;
  std::vector<std::string> warnings_;
};

inline GeneratorSymbol make_gaussian_symbol(GaussianVariant v, int n, double sigma, double zeta = 1.0) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  check_dimension(n);
  auto kind = v == GaussianVariant::iso ? SymbolKind::gaussian_iso : SymbolKind::gaussian_axes;
  return GeneratorSymbol(kind, n, [=](const Vec& k) { return zeta * gaussian_symbol(v, sigma, n, k); },
                         to_string(kind));
}

inline GeneratorSymbol make_gaussian_aniso_symbol(const GaussianAnisoSpec& spec, double zeta = 1.0) {
  return GeneratorSymbol(SymbolKind::gaussian_aniso, 2,
                         [=](const Vec& k) { return zeta * gaussian_aniso_symbol(spec, k); }, "gaussian_aniso");
}

inline GeneratorSymbol make_tempered_symbol(const DirectionalMeasure& m, double beta, double lambda) {
  check_beta(beta);
  check_lambda(lambda);
  auto mp = std::make_shared<const DirectionalMeasure>(m);
  auto kind = lambda == 0.0 ? SymbolKind::stable_aniso : SymbolKind::tempered_aniso;
  return GeneratorSymbol(kind, m.dimension(), [=](const Vec& k) { return tempered_symbol(*mp, beta, lambda, k); },
                         to_string(kind));
}

inline GeneratorSymbol make_beta1_symbol(const DirectionalMeasure& m, double lambda) {
  check_lambda(lambda);
  if (!m.is_symmetric()) throw std::invalid_argument("beta = 1 symbol requires a symmetric measure");
  auto mp = std::make_shared<const DirectionalMeasure>(m);
  return GeneratorSymbol(SymbolKind::beta1_aniso, m.dimension(),
                         [=](const Vec& k) { return beta1_symbol(*mp, lambda, k); }, "beta1_aniso");
}

inline GeneratorSymbol make_beta2_symbol(const DirectionalMeasure& m, double lambda) {
  check_lambda(lambda);
  auto mom = std::make_shared<const MomentSummary>(moments(m));
  return GeneratorSymbol(SymbolKind::beta2_quadratic, m.dimension(),
                         [=](const Vec& k) { return beta2_symbol(*mom, lambda, k); }, "beta2_quadratic");
}

inline GeneratorSymbol make_general_symbol(const DirectionalMeasure& m, const StabilityProfile& prof) {
  if (prof.has_beta_one()) throw std::invalid_argument("general profile: beta = 1 components are not supported");
  auto mp = std::make_shared<const DirectionalMeasure>(m);
  auto pp = std::make_shared<const StabilityProfile>(prof);
  GeneratorSymbol s(SymbolKind::general_profile, m.dimension(),
                    [=](const Vec& k) { return general_profile_symbol(*mp, *pp, k); }, "general_profile");
  if (prof.mixed_sign())
    s.add_warning("profile mixes beta < 1 and beta > 1; the sign (-1)^ceil(beta) is applied per component");
  return s;
}

// psi(k) = -ref(k), i.e. the generator of the isotropic comparison operator.
inline GeneratorSymbol make_isotropic_reference_symbol(int n, double beta, double lambda) {
  check_beta(beta);
  check_lambda(lambda);
  return GeneratorSymbol(SymbolKind::isotropic_reference, n,
                         [=](const Vec& k) { return cd(-isotropic_reference_symbol(beta, lambda, k, n), 0.0); },
                         "isotropic_reference");
}

inline GeneratorSymbol make_heat_symbol(int n, double K1) {
  return GeneratorSymbol(SymbolKind::custom, n, [=](const Vec& k) { return cd(-K1 * dot(k, k), 0.0); }, "heat");
}

}  // namespace anisolap
