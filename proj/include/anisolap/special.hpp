#pragma once

#include <cmath>
#include <stdexcept>

#include "anisolap/quadrature.hpp"

namespace anisolap {

// Surface measure of the unit sphere in R^n (omega_1 = 2 counts the two points).
inline double sphere_area(int n) {
  return 2.0 * std::pow(quad::kPi, 0.5 * n) / std::tgamma(0.5 * n);
}

// Dawson's integral F(x) = exp(-x^2) * int_0^x exp(t^2) dt, via Rybicki's
// sampling series F(x) ~ pi^{-1/2} sum_{n odd} exp(-(x - n h)^2) / n.
// With h = 0.2 the aliasing error is below exp(-(pi / 2h)^2) ~ 1e-27.
inline double dawson(double x) {
  constexpr double h = 0.2;
  if (std::abs(x) < 1e-4) return x * (1.0 - 2.0 * x * x / 3.0);
  if (std::abs(x) > 1e4) return 0.5 / x * (1.0 + 0.5 / (x * x));
  const double ax = std::abs(x);
  // Center the series at the odd multiple of h closest to ax.
  const int n0 = 2 * static_cast<int>(std::floor(0.5 * ax / h)) + 1;
  const double xp = ax - n0 * h;
  double sum = 0.0;
  for (int j = -32; j <= 32; ++j) {
    const int n = n0 + 2 * j;
    const double d = xp - 2 * j * h;
    sum += std::exp(-d * d) / n;
  }
  const double v = sum / std::sqrt(quad::kPi);
  return x < 0 ? -v : v;
}

}  // namespace anisolap
