#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace anisolap::quad {

inline constexpr double kPi = 3.14159265358979323846;

template <class T>
double magnitude(const T& v) {
  return std::abs(v);
}

template <class T>
bool all_finite(const T& v) {
  if constexpr (std::is_arithmetic_v<T>) {
    return std::isfinite(v);
  } else {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  }
}

// Gauss-Legendre nodes and weights on [-1, 1].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline Rule compute_gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be positive");
  Rule rule{std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      double dx = p1 / (n * (x * p1 - p0) / (x * x - 1.0));
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int j = 2; j <= n; ++j) {
      double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (x * p1 - p0) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

inline const Rule& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, Rule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

template <class F>
auto integrate_gl(F&& f, double a, double b, int order) {
  const Rule& rule = gauss_legendre(order);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  using T = std::decay_t<decltype(f(a))>;
  T sum{};
  for (int i = 0; i < order; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return T(sum * half);
}

template <class T>
struct Estimate {
  T value{};
  double error = 0.0;
};

namespace detail {

// Kronrod 15 / Gauss 7 pair (QUADPACK constants), nodes listed outermost first.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Segment {
  double a, b;
  T value;
  double error;
};

template <class F, class T>
Segment<T> gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  T fc = f(c);
  T kron = kWgk[7] * fc;
  T gauss = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    T sum = f(c - h * kXgk[j]) + f(c + h * kXgk[j]);
    kron += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  kron *= h;
  gauss *= h;
  if (!all_finite(kron)) throw std::domain_error("quadrature: non-finite integrand value");
  return {a, b, kron, magnitude(kron - gauss)};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod 15 on [a, b] (bisects the worst segment).
// Works for real and complex integrands.
template <class F>
auto adaptive_gk15(F&& f, double a, double b, double abs_tol, double rel_tol = 0.0,
                   int max_segments = 2000) {
  using T = std::decay_t<decltype(f(a))>;
  using Seg = detail::Segment<T>;
  if (a == b) return Estimate<T>{T{}, 0.0};
  std::vector<Seg> segs{detail::gk15<F, T>(f, a, b)};
  T total = segs[0].value;
  double err = segs[0].error;
  while (err > std::max(abs_tol, rel_tol * magnitude(total)) &&
         static_cast<int>(segs.size()) < max_segments) {
    auto worst = std::max_element(segs.begin(), segs.end(),
                                  [](const Seg& x, const Seg& y) { return x.error < y.error; });
    Seg w = *worst;
    double mid = 0.5 * (w.a + w.b);
    if (!(mid > w.a && mid < w.b)) break;
    *worst = detail::gk15<F, T>(f, w.a, mid);
    segs.push_back(detail::gk15<F, T>(f, mid, w.b));
    total = T{};
    err = 0.0;
    for (const auto& s : segs) {
      total += s.value;
      err += s.error;
    }
  }
  return Estimate<T>{total, err};
}

// Integral over consecutive breakpoints, each piece adaptive.
template <class F>
auto adaptive_piecewise(F&& f, std::vector<double> breaks, double abs_tol, double rel_tol = 0.0) {
  using T = std::decay_t<decltype(f(0.0))>;
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  Estimate<T> out;
  const double pieces = std::max<double>(1.0, breaks.size() - 1.0);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    auto e = adaptive_gk15(f, breaks[i], breaks[i + 1], abs_tol / pieces, rel_tol);
    out.value += e.value;
    out.error += e.error;
  }
  return out;
}

// Panels for radial integrals on [delta, R]: geometric grading from delta to
// `ell` (resolves the r^{-1-beta} singular weight), then uniform panels.
struct RadialMesh {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline RadialMesh graded_mesh(double delta, double ell, double R, int geometric_panels,
                              double panel_width, int order) {
  if (!(delta > 0.0) || !(R > delta)) throw std::invalid_argument("graded_mesh: need 0 < delta < R");
  RadialMesh mesh;
  const Rule& rule = gauss_legendre(order);
  auto add_panel = [&](double a, double b) {
    const double h = 0.5 * (b - a), c = 0.5 * (a + b);
    for (int i = 0; i < order; ++i) {
      mesh.nodes.push_back(c + h * rule.nodes[i]);
      mesh.weights.push_back(h * rule.weights[i]);
    }
  };
  const double top = std::min(ell, R);
  if (top > delta) {
    const double ratio = std::pow(top / delta, 1.0 / geometric_panels);
    double a = delta;
    for (int j = 1; j <= geometric_panels; ++j) {
      double b = (j == geometric_panels) ? top : delta * std::pow(ratio, j);
      add_panel(a, b);
      a = b;
    }
  }
  if (R > top) {
    int m = std::max(1, static_cast<int>(std::ceil((R - top) / panel_width)));
    double w = (R - top) / m;
    for (int j = 0; j < m; ++j) add_panel(top + j * w, top + (j + 1) * w);
  }
  return mesh;
}

// Integral of r^p e^{-lambda r} over [R, inf). Needs p < -1 when lambda = 0.
inline double power_exp_tail(double p, double lambda, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("power_exp_tail: R must be positive");
  if (lambda == 0.0) {
    if (!(p < -1.0)) throw std::domain_error("power_exp_tail: divergent tail (p >= -1, lambda = 0)");
    return -std::pow(R, p + 1.0) / (p + 1.0);
  }
  // r = R + u/lambda.
  auto g = [&](double u) { return std::pow(R + u / lambda, p) * std::exp(-u); };
  auto est = adaptive_gk15(g, 0.0, 60.0, 1e-15 * std::pow(R, p), 1e-13);
  return std::exp(-lambda * R) / lambda * est.value;
}

// Integral of r^p e^{-lambda r} over [0, delta] for p > -1, by the exponential series.
inline double power_exp_head(double p, double lambda, double delta) {
  if (!(p > -1.0)) throw std::domain_error("power_exp_head: p must exceed -1");
  double sum = 0.0, coef = 1.0;
  for (int j = 0; j < 60; ++j) {
    double term = coef * std::pow(delta, p + j + 1.0) / (p + j + 1.0);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    coef *= -lambda / (j + 1.0);
  }
  return sum;
}

}  // namespace anisolap::quad
