#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include "anisolap/measures.hpp"

namespace anisolap {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// A real field on R^n with an optional analytic gradient and a support hint:
// |f(x)| <= cutoff whenever |x - center| >= support_radius.
struct ScalarField {
  int dimension = 1;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  Vec center{0.0, 0.0, 0.0};
  double support_radius = kInf;
  double cutoff = 0.0;
  double length_scale = 1.0;  // typical variation scale, sets panel widths
  double sup_norm = 1.0;      // bound on |f|
  bool is_constant = false;
  std::string name = "field";

  double operator()(const Vec& x) const { return value(x); }
  bool has_gradient() const { return static_cast<bool>(gradient); }
  bool compact() const { return std::isfinite(support_radius); }
};

inline ScalarField gaussian_bump(int n, const Vec& center, double width, double amplitude = 1.0) {
  check_dimension(n);
  if (!(width > 0.0)) throw std::invalid_argument("gaussian_bump: width must be positive");
  ScalarField f;
  f.dimension = n;
  f.center = center;
  const double s2 = width * width;
  f.value = [=](const Vec& x) {
    Vec d = x - center;
    return amplitude * std::exp(-0.5 * dot(d, d) / s2);
  };
  f.gradient = [=](const Vec& x) {
    Vec d = x - center;
    double v = amplitude * std::exp(-0.5 * dot(d, d) / s2);
    return (-v / s2) * d;
  };
  f.cutoff = 1e-17 * std::abs(amplitude);
  f.support_radius = width * std::sqrt(2.0 * std::log(1e17));
  f.length_scale = width;
  f.sup_norm = std::abs(amplitude);
  f.name = "gaussian";
  return f;
}

// exp(1 - 1/(1 - s^2)) for s = |x - c| / radius < 1, zero outside; peak value 1.
inline ScalarField compact_bump(int n, const Vec& center, double radius, double amplitude = 1.0) {
  check_dimension(n);
  if (!(radius > 0.0)) throw std::invalid_argument("compact_bump: radius must be positive");
  ScalarField f;
  f.dimension = n;
  f.center = center;
  f.value = [=](const Vec& x) {
    Vec d = x - center;
    double s2 = dot(d, d) / (radius * radius);
    if (s2 >= 1.0) return 0.0;
    return amplitude * std::exp(1.0 - 1.0 / (1.0 - s2));
  };
  f.gradient = [=](const Vec& x) {
    Vec d = x - center;
    double s2 = dot(d, d) / (radius * radius);
    if (s2 >= 1.0) return Vec{0.0, 0.0, 0.0};
    double v = amplitude * std::exp(1.0 - 1.0 / (1.0 - s2));
    double g = -2.0 * v / ((1.0 - s2) * (1.0 - s2) * radius * radius);
    return g * d;
  };
  f.support_radius = radius;
  f.cutoff = 0.0;
  f.length_scale = 0.25 * radius;
  f.sup_norm = std::abs(amplitude);
  f.name = "compact_bump";
  return f;
}

inline ScalarField constant_field(int n, double c) {
  check_dimension(n);
  ScalarField f;
  f.dimension = n;
  f.value = [=](const Vec&) { return c; };
  f.gradient = [](const Vec&) { return Vec{0.0, 0.0, 0.0}; };
  f.sup_norm = std::abs(c);
  f.is_constant = true;
  f.name = "constant";
  return f;
}

// cos(k.x + phase).
inline ScalarField cosine_wave(int n, const Vec& k, double phase = 0.0) {
  check_dimension(n);
  ScalarField f;
  f.dimension = n;
  f.value = [=](const Vec& x) { return std::cos(dot(k, x) + phase); };
  f.gradient = [=](const Vec& x) { return (-std::sin(dot(k, x) + phase)) * k; };
  double kk = norm(k);
  f.length_scale = kk > 0 ? 1.0 / kk : 1.0;
  f.name = "cosine";
  return f;
}

// a f + b g.
inline ScalarField combine(double a, const ScalarField& f, double b, const ScalarField& g) {
  if (f.dimension != g.dimension) throw std::invalid_argument("combine: dimension mismatch");
  ScalarField h;
  h.dimension = f.dimension;
  h.value = [=](const Vec& x) { return a * f.value(x) + b * g.value(x); };
  if (f.has_gradient() && g.has_gradient())
    h.gradient = [=](const Vec& x) { return a * f.gradient(x) + b * g.gradient(x); };
  h.center = f.center;
  if (f.compact() && g.compact()) h.support_radius = std::max(f.support_radius, norm(g.center - f.center) + g.support_radius);
  h.cutoff = std::abs(a) * f.cutoff + std::abs(b) * g.cutoff;
  h.length_scale = std::min(f.length_scale, g.length_scale);
  h.sup_norm = std::abs(a) * f.sup_norm + std::abs(b) * g.sup_norm;
  h.is_constant = f.is_constant && g.is_constant;
  h.name = "combination";
  return h;
}

// x -> f(x - shift).
inline ScalarField translated(const ScalarField& f, const Vec& shift) {
  ScalarField h = f;
  h.value = [=](const Vec& x) { return f.value(x - shift); };
  if (f.has_gradient()) h.gradient = [=](const Vec& x) { return f.gradient(x - shift); };
  h.center = f.center + shift;
  return h;
}

}  // namespace anisolap
