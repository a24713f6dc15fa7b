#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "anisolap/fields.hpp"
#include "anisolap/measures.hpp"
#include "anisolap/quadrature.hpp"
#include "anisolap/symbols.hpp"

namespace anisolap {

struct RealspaceOptions {
  double inner_cutoff = 1e-4;   // delta: radii below are handled by a Taylor correction
  int geometric_panels = 32;    // graded panels on [delta, length scale]
  double panel_fraction = 0.25; // uniform panel width relative to the length scale
  int panel_order = 8;
  double tail_tolerance = 1e-9;
  double fd_step = 1e-3;        // finite-difference step relative to the length scale
  SphereOptions sphere{1e-10, 1e-10, 4000, std::nullopt};
};

struct OperatorValue {
  double value = 0.0;
  double tail_bound = 0.0;  // bound on the neglected far-field contribution
};

enum class Difference {
  one_sided,             // f(x - r phi) - f(x)
  symmetric,             // (f(x - r phi) + f(x + r phi)) / 2 - f(x)
  gradient_regularized,  // f(x - r phi) - f(x) + r phi . grad f(x)
};

namespace detail {

inline double gamma_abs(double beta) { return std::abs(std::tgamma(-beta)); }

// Per-point radial setup shared by all directions of one component.
struct RadialPlan {
  double beta, lambda;
  Difference mode;
  quad::RadialMesh mesh;
  std::vector<double> kernel;  // r^{-1-beta} e^{-lambda r} times the node weight
  double head1 = 0.0, head2 = 0.0, head3 = 0.0;  // int_0^delta r^{j-1-beta} e^{-lr} for j = 1, 2, 3
  double tail0 = 0.0, tail1 = 0.0;  // int_R^inf r^{-1-beta} e^{-lr}, int_R^inf r^{-beta} e^{-lr}
  double tail_bound = 0.0;
};

inline double choose_radius(const ScalarField& f, const Vec& x, double beta, double lambda, const RealspaceOptions& o,
                            double* bound) {
  if (f.compact()) {
    double R = norm(x - f.center) + f.support_radius;
    R = std::max(R, 2.0 * o.inner_cutoff);
    *bound = f.cutoff * quad::power_exp_tail(-1.0 - beta, lambda, R);
    return R;
  }
  if (lambda == 0.0)
    throw std::invalid_argument("field '" + f.name + "' has no compact support; the untempered far field cannot be truncated");
  double R = 8.0 * f.length_scale;
  for (int it = 0; it < 60; ++it) {
    double b = 2.0 * f.sup_norm * quad::power_exp_tail(-1.0 - beta, lambda, R);
    if (b <= o.tail_tolerance) {
      *bound = b;
      return R;
    }
    R *= 1.5;
  }
  throw std::runtime_error("could not find a truncation radius meeting the tail tolerance");
}

inline RadialPlan make_plan(const ScalarField& f, const Vec& x, double beta, double lambda, Difference mode,
                            const RealspaceOptions& o) {
  RadialPlan p{beta, lambda, mode, {}, {}, 0, 0, 0, 0, 0, 0};
  const double R = choose_radius(f, x, beta, lambda, o, &p.tail_bound);
  const double ell = f.length_scale;
  p.mesh = quad::graded_mesh(o.inner_cutoff, ell, R, o.geometric_panels, o.panel_fraction * ell, o.panel_order);
  p.kernel.resize(p.mesh.nodes.size());
  for (std::size_t i = 0; i < p.kernel.size(); ++i) {
    double r = p.mesh.nodes[i];
    p.kernel[i] = p.mesh.weights[i] * std::pow(r, -1.0 - beta) * std::exp(-lambda * r);
  }
  if (beta < 1.0) p.head1 = quad::power_exp_head(-beta, lambda, o.inner_cutoff);
  p.head2 = quad::power_exp_head(1.0 - beta, lambda, o.inner_cutoff);
  if (mode != Difference::symmetric) p.head3 = quad::power_exp_head(2.0 - beta, lambda, o.inner_cutoff);
  p.tail0 = quad::power_exp_tail(-1.0 - beta, lambda, R);
  if (mode == Difference::gradient_regularized) {
    if (lambda == 0.0 && beta <= 1.0) throw std::domain_error("gradient tail diverges");
    p.tail1 = quad::power_exp_tail(-beta, lambda, R);
  }
  if (mode == Difference::one_sided && beta > 1.0)
    throw std::domain_error("one-sided differences need beta < 1");
  return p;
}

// int_0^inf r^{-1-beta} e^{-lambda r} g(r) dr along phi, with g chosen by the plan's mode.
inline double radial_integral(const ScalarField& f, const Vec& x, const Vec& phi, double fx, const Vec& grad,
                              const RadialPlan& p, const RealspaceOptions& o) {
  const double dphi = dot(phi, grad);
  // Second directional derivative by central differences.
  const double h = o.fd_step * f.length_scale;
  const double d2 = (f.value(x + h * phi) - 2.0 * fx + f.value(x - h * phi)) / (h * h);
  double sum = 0.5 * d2 * p.head2;
  if (p.mode == Difference::one_sided) sum += -dphi * p.head1;
  if (p.mode != Difference::symmetric) {
    // Odd differences keep an r^3 term; symmetric ones cancel it.
    const double d3 = (f.value(x + 2.0 * h * phi) - 2.0 * f.value(x + h * phi) + 2.0 * f.value(x - h * phi) -
                       f.value(x - 2.0 * h * phi)) /
                      (2.0 * h * h * h);
    sum += -d3 / 6.0 * p.head3;
  }
  const auto& nodes = p.mesh.nodes;
  switch (p.mode) {
    case Difference::one_sided:
      for (std::size_t i = 0; i < nodes.size(); ++i) sum += p.kernel[i] * (f.value(x - nodes[i] * phi) - fx);
      sum += -fx * p.tail0;
      break;
    case Difference::symmetric:
      for (std::size_t i = 0; i < nodes.size(); ++i)
        sum += p.kernel[i] * (0.5 * (f.value(x - nodes[i] * phi) + f.value(x + nodes[i] * phi)) - fx);
      sum += -fx * p.tail0;
      break;
    case Difference::gradient_regularized:
      for (std::size_t i = 0; i < nodes.size(); ++i)
        sum += p.kernel[i] * (f.value(x - nodes[i] * phi) - fx + nodes[i] * dphi);
      sum += -fx * p.tail0 + dphi * p.tail1;
      break;
  }
  return sum;
}

inline Vec gradient_at(const ScalarField& f, const Vec& x, const RealspaceOptions& o) {
  if (f.has_gradient()) return f.gradient(x);
  Vec g{0.0, 0.0, 0.0};
  const double h = o.fd_step * f.length_scale;
  for (int i = 0; i < f.dimension; ++i) {
    Vec e{0.0, 0.0, 0.0};
    e[i] = h;
    g[i] = (f.value(x + e) - f.value(x - e)) / (2.0 * h);
  }
  return g;
}

// Generic per-component evaluation. `mode_for` picks the difference scheme for
// a component's (beta, lambda); Case II components add their drift.
template <class ModeFor>
OperatorValue apply_components(const ScalarField& f, const DirectionalMeasure& m, const StabilityProfile& prof,
                               const Vec& x, const RealspaceOptions& o, ModeFor mode_for) {
  if (f.dimension != m.dimension()) throw std::invalid_argument("field and measure dimensions differ");
  OperatorValue out;
  if (f.is_constant) return out;
  const double fx = f.value(x);
  const Vec grad = gradient_at(f, x, o);

  struct Cached {
    ComponentParams c;
    RadialPlan plan;
  };
  std::vector<Cached> cache;
  auto plan_for = [&](const ComponentParams& c) -> const RadialPlan& {
    for (const auto& e : cache)
      if (e.c.beta == c.beta && e.c.lambda == c.lambda) return e.plan;
    cache.push_back({c, make_plan(f, x, c.beta, c.lambda, mode_for(c), o)});
    return cache.back().plan;
  };
  auto drift_coef = [&](const RadialPlan& p) {
    if (p.mode != Difference::gradient_regularized || p.lambda == 0.0) return 0.0;
    return std::tgamma(1.0 - p.beta) * std::pow(p.lambda, p.beta - 1.0);
  };

  double total = 0.0, bound = 0.0;
  for (std::size_t i = 0; i < m.atoms().size(); ++i) {
    const auto& a = m.atoms()[i];
    if (a.weight == 0.0) continue;
    const RadialPlan& p = plan_for(prof.atoms()[i]);
    const Vec& phi = a.direction.coords();
    const double norm_c = 1.0 / gamma_abs(p.beta);
    total += a.weight * norm_c * (radial_integral(f, x, phi, fx, grad, p, o) - drift_coef(p) * dot(phi, grad));
    bound += a.weight * norm_c * p.tail_bound;
  }
  for (std::size_t i = 0; i < m.bands().size(); ++i) {
    const Band& b = m.bands()[i];
    if (b.density == 0.0) continue;
    const RadialPlan& p = plan_for(prof.bands()[i]);
    const double norm_c = 1.0 / gamma_abs(p.beta);
    const double dc = drift_coef(p);
    double v = integrate_band(
        m.dimension(), b,
        [&](const Vec& phi) { return radial_integral(f, x, phi, fx, grad, p, o) - dc * dot(phi, grad); }, o.sphere);
    total += b.density * norm_c * v;
    bound += b.mass(m.dimension()) * norm_c * p.tail_bound;
  }
  out.value = total;
  out.tail_bound = bound;
  if (bound > o.tail_tolerance) throw std::runtime_error("real-space tail bound exceeds tolerance");
  return out;
}

}  // namespace detail

// Case I: (1/|Gamma(-beta)|) int (f(x-y) - f(x)) m(y^) e^{-lambda|y|} |y|^{-n-beta} dy.
inline OperatorValue apply_caseI(const ScalarField& f, const DirectionalMeasure& m, double beta, double lambda,
                                 const Vec& x, const RealspaceOptions& o = {}) {
  check_beta(beta);
  check_lambda(lambda);
  const bool sym = m.is_symmetric();
  if (beta > 1.0 && !sym) throw std::invalid_argument("Case I with beta > 1 needs a symmetric measure (use Case II)");
  auto prof = StabilityProfile::constant(m, beta, lambda);
  return detail::apply_components(f, m, prof, x, o, [&](const ComponentParams&) {
    return sym ? Difference::symmetric : Difference::one_sided;
  });
}

// Case II: gradient-regularized integral minus the tempering drift
// (Gamma(1-beta) lambda^{beta-1} / |Gamma(-beta)|) b . grad f.
inline OperatorValue apply_caseII(const ScalarField& f, const DirectionalMeasure& m, double beta, double lambda,
                                  const Vec& x, const RealspaceOptions& o = {}) {
  check_beta(beta);
  check_lambda(lambda);
  if (!(beta > 1.0)) throw std::invalid_argument("Case II needs beta in (1, 2)");
  if (!f.has_gradient()) throw std::invalid_argument("Case II needs a field with an analytic gradient");
  auto prof = StabilityProfile::constant(m, beta, lambda);
  return detail::apply_components(f, m, prof, x, o,
                                  [](const ComponentParams&) { return Difference::gradient_regularized; });
}

// Direction-dependent (beta, lambda): each component uses its own kernel.
inline OperatorValue apply_general(const ScalarField& f, const DirectionalMeasure& m, const StabilityProfile& prof,
                                   const Vec& x, const RealspaceOptions& o = {}) {
  for (const auto* list : {&prof.atoms(), &prof.bands()})
    for (const auto& c : *list) {
      check_beta(c.beta);
      check_lambda(c.lambda);
    }
  const bool sym = is_symmetric(m, prof);
  return detail::apply_components(f, m, prof, x, o, [&](const ComponentParams& c) {
    if (sym) return Difference::symmetric;
    if (c.beta < 1.0) return Difference::one_sided;
    if (!f.has_gradient()) throw std::invalid_argument("components with beta > 1 need a field gradient");
    return Difference::gradient_regularized;
  });
}

// ---- Gaussian-jump nonlocal operators ------------------------------------

struct GaussianOperatorOptions {
  double truncation = 7.5;  // in units of sigma; Gaussian tail mass below 1e-12
  int panel_order = 8;
};

// zeta * int (f(x - z) - f(x)) G(z) dz for the isotropic, per-axis and
// anisotropic Gaussian jump laws.
inline double apply_gaussian_nonlocal(const ScalarField& f, GaussianVariant variant, double sigma, double zeta,
                                      const Vec& x, const GaussianOperatorOptions& o = {},
                                      const GaussianAnisoSpec* aniso = nullptr) {
  if (variant != GaussianVariant::aniso && !(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (f.is_constant) return 0.0;
  const int n = f.dimension;
  const double fx = f.value(x);
  auto panels_1d = [&](double s) {
    const double L = o.truncation * s;
    const double width = 0.5 * std::min(s, f.length_scale);
    const int m = std::max(2, static_cast<int>(std::ceil(2.0 * L / width)));
    quad::RadialMesh out;
    const auto& rule = quad::gauss_legendre(o.panel_order);
    for (int j = 0; j < m; ++j) {
      double a = -L + 2.0 * L * j / m, b = -L + 2.0 * L * (j + 1) / m;
      for (int i = 0; i < o.panel_order; ++i) {
        out.nodes.push_back(0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i]);
        out.weights.push_back(0.5 * (b - a) * rule.weights[i]);
      }
    }
    return out;
  };
  auto gauss1 = [](double s, double t) { return std::exp(-0.5 * t * t / (s * s)) / (std::sqrt(2.0 * kPi) * s); };

  if (variant == GaussianVariant::iso) {
    const auto mesh = panels_1d(sigma);
    const std::size_t m = mesh.nodes.size();
    std::vector<double> w(m);
    for (std::size_t i = 0; i < m; ++i) w[i] = mesh.weights[i] * gauss1(sigma, mesh.nodes[i]);
    double sum = 0.0;
    if (n == 1) {
      for (std::size_t i = 0; i < m; ++i) sum += w[i] * (f.value(x - Vec{mesh.nodes[i], 0, 0}) - fx);
    } else if (n == 2) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
          sum += w[i] * w[j] * (f.value(x - Vec{mesh.nodes[i], mesh.nodes[j], 0}) - fx);
    } else {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
          for (std::size_t l = 0; l < m; ++l)
            sum += w[i] * w[j] * w[l] * (f.value(x - Vec{mesh.nodes[i], mesh.nodes[j], mesh.nodes[l]}) - fx);
    }
    return zeta * sum;
  }
  if (variant == GaussianVariant::axes) {
    const auto mesh = panels_1d(sigma);
    double sum = 0.0;
    for (int a = 0; a < n; ++a)
      for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        Vec e{0.0, 0.0, 0.0};
        e[a] = mesh.nodes[i];
        sum += mesh.weights[i] * gauss1(sigma, mesh.nodes[i]) * (f.value(x - e) - fx);
      }
    return zeta * sum / n;
  }
  if (!aniso) throw std::invalid_argument("anisotropic Gaussian operator needs a GaussianAnisoSpec");
  if (n != 2) throw std::invalid_argument("anisotropic Gaussian operator is 2D");
  const auto& m = *aniso->measure;
  auto radial = [&](const Vec& phi, double s) {
    const auto& rule = quad::gauss_legendre(o.panel_order);
    const double L = (o.truncation + 1.0) * s;
    const double width = 0.5 * std::min(s, f.length_scale);
    const int panels = std::max(2, static_cast<int>(std::ceil(L / width)));
    double sum = 0.0;
    for (int j = 0; j < panels; ++j) {
      double a = L * j / panels, b = L * (j + 1) / panels;
      for (int i = 0; i < o.panel_order; ++i) {
        double r = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i];
        sum += 0.5 * (b - a) * rule.weights[i] * r * std::exp(-0.5 * r * r / (s * s)) * (f.value(x - r * phi) - fx);
      }
    }
    return sum;
  };
  double sum = 0.0;
  for (std::size_t i = 0; i < m.atoms().size(); ++i)
    sum += m.atoms()[i].weight * radial(m.atoms()[i].direction.coords(), aniso->atom_sigma[i]);
  SphereOptions so{1e-11, 1e-11, 4000, std::nullopt};
  for (std::size_t i = 0; i < m.bands().size(); ++i) {
    const double s = aniso->band_sigma[i];
    sum += m.bands()[i].density * integrate_band(2, m.bands()[i], [&](const Vec& phi) { return radial(phi, s); }, so);
  }
  return zeta * aniso->normalization() * sum;
}

// ---- symmetric bilinear form ---------------------------------------------

struct BilinearOptions {
  double inner_cutoff = 1e-4;
  int geometric_panels = 24;
  double panel_fraction = 0.25;
  int radial_order = 8;
  int x_panels = 12;  // per axis over the support box of q
  int x_order = 8;
  double tail_tolerance = 1e-8;
  SphereOptions sphere{1e-9, 1e-7, 2000, std::nullopt};
};

struct BilinearValue {
  double value = 0.0;
  double truncation_error = 0.0;  // tube Taylor remainder estimate plus far-field bound
};

// a(p, q) = int int (p(x)-p(y)) (q(x)-q(y)) m((x-y)^) e^{-lambda|x-y|} |x-y|^{-n-beta} dx dy
// for symmetric m. With z = x - y,
//   a = int m(dphi) int_0^inf r^{-1-beta} e^{-lambda r} J(r phi) dr,
//   J(z) = int_{supp q} q(x) (2 p(x) - p(x - z) - p(x + z)) dx.
// The tube r < delta uses J(z) ~ r^2 J(delta phi) / delta^2.
inline BilinearValue bilinear_form(const ScalarField& p, const ScalarField& q, const DirectionalMeasure& m, double beta,
                                   double lambda, const BilinearOptions& o = {}) {
  check_beta(beta);
  check_lambda(lambda);
  if (!m.is_symmetric()) throw std::invalid_argument("bilinear_form needs a symmetric measure");
  if (p.dimension != q.dimension || q.dimension != m.dimension()) throw std::invalid_argument("dimension mismatch");
  if (!q.compact()) throw std::invalid_argument("bilinear_form needs q with a compact support hint");
  const int n = q.dimension;
  BilinearValue out;
  if (p.is_constant || q.is_constant) return out;

  // Tensor Gauss-Legendre rule on the support box of q.
  std::vector<Vec> xs;
  std::vector<double> xw;
  {
    const auto& rule = quad::gauss_legendre(o.x_order);
    std::vector<double> nodes, weights;
    const double lo = -q.support_radius, width = 2.0 * q.support_radius / o.x_panels;
    for (int j = 0; j < o.x_panels; ++j) {
      double a = lo + j * width;
      for (int i = 0; i < o.x_order; ++i) {
        nodes.push_back(a + 0.5 * width * (1.0 + rule.nodes[i]));
        weights.push_back(0.5 * width * rule.weights[i]);
      }
    }
    const std::size_t k = nodes.size();
    std::vector<std::size_t> idx(n, 0);
    for (;;) {
      Vec x = q.center;
      double w = 1.0;
      for (int d = 0; d < n; ++d) {
        x[d] += nodes[idx[d]];
        w *= weights[idx[d]];
      }
      double qv = q.value(x);
      if (qv != 0.0) {
        xs.push_back(x);
        xw.push_back(w * qv);
      }
      int d = 0;
      while (d < n && ++idx[d] == k) idx[d++] = 0;
      if (d == n) break;
    }
  }
  std::vector<double> px(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) px[i] = p.value(xs[i]);
  double pq = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) pq += xw[i] * px[i];

  auto J = [&](const Vec& z) {
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) s += xw[i] * (2.0 * px[i] - p.value(xs[i] - z) - p.value(xs[i] + z));
    return s;
  };

  // Beyond R_far, p(x +- z) = 0 on supp q and J = 2 <p, q>.
  double R_far = kInf;
  if (p.compact() && p.cutoff == 0.0) R_far = norm(p.center - q.center) + p.support_radius + q.support_radius;
  double R = R_far;
  if (!std::isfinite(R)) {
    if (lambda == 0.0) throw std::invalid_argument("bilinear_form: non-compact p needs lambda > 0");
    R = 8.0 * q.support_radius;
    while (4.0 * std::abs(pq) * quad::power_exp_tail(-1.0 - beta, lambda, R) > o.tail_tolerance && R < 1e6) R *= 1.5;
    out.truncation_error += 4.0 * p.sup_norm * quad::power_exp_tail(-1.0 - beta, lambda, R);
  }
  const double ell = std::min(p.length_scale, q.length_scale);
  const auto mesh = quad::graded_mesh(o.inner_cutoff, ell, R, o.geometric_panels, o.panel_fraction * ell, o.radial_order);
  std::vector<double> kern(mesh.nodes.size());
  for (std::size_t i = 0; i < kern.size(); ++i)
    kern[i] = mesh.weights[i] * std::pow(mesh.nodes[i], -1.0 - beta) * std::exp(-lambda * mesh.nodes[i]);
  const double delta = o.inner_cutoff;
  const double tube = quad::power_exp_head(1.0 - beta, lambda, delta) / (delta * delta);
  const double far = std::isfinite(R_far) ? 2.0 * pq * quad::power_exp_tail(-1.0 - beta, lambda, R_far) : 0.0;

  double tube_total = 0.0;
  auto directional = [&](const Vec& phi) {
    double s = 0.0;
    for (std::size_t i = 0; i < kern.size(); ++i) s += kern[i] * J(mesh.nodes[i] * phi);
    double t = J(delta * phi) * tube;
    tube_total += std::abs(t);
    return s + t + far;
  };
  out.value = sphere_integrate(m, directional, o.sphere);
  // The r^3 Taylor term vanishes by symmetry; the r^4 term is O(delta^2) relative to the tube.
  out.truncation_error += delta * delta * tube_total + o.sphere.abs_tol;
  return out;
}

}  // namespace anisolap
