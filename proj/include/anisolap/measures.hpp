#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "anisolap/quadrature.hpp"

namespace anisolap {

using quad::kPi;

// Points and wavenumbers in dimension n <= 3; unused trailing entries stay zero.
using Vec = std::array<double, 3>;

inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }
inline Vec operator+(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec operator-(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec operator*(double s, const Vec& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline Vec operator-(const Vec& a) { return {-a[0], -a[1], -a[2]}; }

inline Vec make_vec(std::span<const double> c) {
  if (c.size() > 3) throw std::invalid_argument("vector dimension exceeds 3");
  Vec v{0.0, 0.0, 0.0};
  std::copy(c.begin(), c.end(), v.begin());
  return v;
}

inline void check_dimension(int n) {
  if (n < 1 || n > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
}

class Direction {
 public:
  Direction() = default;
  // Coordinates must already have unit norm (within 1e-12).
  Direction(int dim, const Vec& coords) : dim_(dim), c_(coords) {
    check_dimension(dim);
    for (int i = dim; i < 3; ++i)
      if (coords[i] != 0.0) throw std::invalid_argument("direction has entries beyond its dimension");
    if (std::abs(norm(coords) - 1.0) > 1e-12) throw std::invalid_argument("direction is not a unit vector");
  }
  static Direction normalized(int dim, Vec coords) {
    check_dimension(dim);
    for (int i = dim; i < 3; ++i) coords[i] = 0.0;
    double r = norm(coords);
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("cannot normalize a zero direction");
    return Direction(dim, (1.0 / r) * coords);
  }
  int dimension() const { return dim_; }
  const Vec& coords() const { return c_; }
  double operator[](int i) const { return c_[i]; }

 private:
  int dim_ = 1;
  Vec c_{1.0, 0.0, 0.0};
};

struct Atom {
  Direction direction;
  double weight;
};

// Piecewise-constant angular density. In 2D the region is the arc
// theta in [theta_lo, theta_hi) with direction (cos, sin). In 3D it is the
// rectangle theta (polar, from e3) in [theta_lo, theta_hi] and azimuth phi in
// [phi_lo, phi_hi], with direction (sin t cos p, sin t sin p, cos t).
struct Band {
  double theta_lo = 0.0, theta_hi = 0.0;
  double phi_lo = 0.0, phi_hi = 0.0;
  double density = 0.0;

  double area(int dim) const {
    if (dim == 2) return theta_hi - theta_lo;
    return (phi_hi - phi_lo) * (std::cos(theta_lo) - std::cos(theta_hi));
  }
  double mass(int dim) const { return density * area(dim); }
};

inline Vec direction_2d(double theta) { return {std::cos(theta), std::sin(theta), 0.0}; }
inline Vec direction_3d(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

class DirectionalMeasure {
 public:
  DirectionalMeasure(int dim, std::vector<Atom> atoms, std::vector<Band> bands)
      : dim_(dim), atoms_(std::move(atoms)), bands_(std::move(bands)) {
    check_dimension(dim_);
    if (atoms_.empty() && bands_.empty()) throw std::invalid_argument("measure has no atoms or bands");
    if (dim_ == 1 && !bands_.empty()) throw std::invalid_argument("1D measures admit atoms at +-1 only");
    double total = 0.0;
    for (const auto& a : atoms_) {
      if (a.direction.dimension() != dim_) throw std::invalid_argument("atom dimension mismatch");
      if (!(a.weight >= 0.0)) throw std::invalid_argument("negative atom weight");
      total += a.weight;
    }
    for (const auto& b : bands_) {
      validate_band(b);
      total += b.mass(dim_);
    }
    check_disjoint();
    if (std::abs(total - 1.0) > 1e-10)
      throw std::invalid_argument("measure total mass is " + std::to_string(total) + ", expected 1");
  }

  int dimension() const { return dim_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Band>& bands() const { return bands_; }

  // Index of the band containing phi, or -1.
  int band_index(const Vec& phi) const {
    for (std::size_t i = 0; i < bands_.size(); ++i) {
      const Band& b = bands_[i];
      if (dim_ == 2) {
        if (wrap_from(std::atan2(phi[1], phi[0]), b.theta_lo) < b.theta_hi) return static_cast<int>(i);
      } else {
        double t = std::acos(std::clamp(phi[2], -1.0, 1.0));
        double p = wrap_from(std::atan2(phi[1], phi[0]), b.phi_lo);
        if (t >= b.theta_lo && t <= b.theta_hi && p < b.phi_hi) return static_cast<int>(i);
      }
    }
    return -1;
  }

  // Density of the absolutely continuous part at a direction (0 off the bands).
  double band_density(const Vec& phi) const {
    int i = band_index(phi);
    return i < 0 ? 0.0 : bands_[i].density;
  }

  // One direction inside every cell of the partition generated by the band
  // edges and their antipodes; the band part is constant on each cell.
  std::vector<Vec> symmetry_probes() const {
    std::vector<Vec> out;
    if (bands_.empty()) return out;
    auto wrap = [](double a) { return std::fmod(std::fmod(a, 2 * kPi) + 2 * kPi, 2 * kPi); };
    if (dim_ == 2) {
      std::vector<double> cuts{0.0, 2.0 * kPi};
      for (const auto& b : bands_)
        for (double e : {b.theta_lo, b.theta_hi})
          for (double sh : {0.0, kPi}) cuts.push_back(wrap(e + sh));
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        if (cuts[i + 1] - cuts[i] > 1e-12) out.push_back(direction_2d(0.5 * (cuts[i] + cuts[i + 1])));
      return out;
    }
    std::vector<double> tc{0.0, kPi}, pc{0.0, 2 * kPi};
    for (const auto& b : bands_) {
      for (double e : {b.theta_lo, b.theta_hi}) {
        tc.push_back(e);
        tc.push_back(kPi - e);
      }
      for (double e : {b.phi_lo, b.phi_hi})
        for (double sh : {0.0, kPi}) pc.push_back(wrap(e + sh));
    }
    std::sort(tc.begin(), tc.end());
    std::sort(pc.begin(), pc.end());
    for (std::size_t i = 0; i + 1 < tc.size(); ++i) {
      if (tc[i + 1] - tc[i] < 1e-12) continue;
      for (std::size_t j = 0; j + 1 < pc.size(); ++j)
        if (pc[j + 1] - pc[j] > 1e-12)
          out.push_back(direction_3d(0.5 * (tc[i] + tc[i + 1]), 0.5 * (pc[j] + pc[j + 1])));
    }
    return out;
  }

  // Index of the atom at exactly -phi, or -1.
  int antipodal_atom(std::size_t i) const {
    for (std::size_t j = 0; j < atoms_.size(); ++j)
      if (norm(atoms_[i].direction.coords() + atoms_[j].direction.coords()) < 1e-12) return static_cast<int>(j);
    return -1;
  }

  // m(phi) = m(-phi), exact on atoms and on every cell of the band partition.
  bool is_symmetric(double tol = 1e-12) const {
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (atoms_[i].weight == 0.0) continue;
      int j = antipodal_atom(i);
      if (j < 0 || std::abs(atoms_[j].weight - atoms_[i].weight) > tol) return false;
    }
    for (const auto& v : symmetry_probes())
      if (std::abs(band_density(v) - band_density(-v)) > tol) return false;
    return true;
  }

 private:
  static double wrap_from(double angle, double lo) {
    double t = std::fmod(angle - lo, 2 * kPi);
    if (t < 0) t += 2 * kPi;
    return lo + t;
  }

  void validate_band(const Band& b) const {
    if (!(b.density >= 0.0) || !std::isfinite(b.density)) throw std::invalid_argument("negative band density");
    if (dim_ == 2) {
      double w = b.theta_hi - b.theta_lo;
      if (!(w > 0.0) || w > 2 * kPi + 1e-12) throw std::invalid_argument("2D band must have width in (0, 2pi]");
    } else {
      if (!(b.theta_lo >= 0.0 && b.theta_lo < b.theta_hi && b.theta_hi <= kPi + 1e-12))
        throw std::invalid_argument("3D band needs 0 <= theta_lo < theta_hi <= pi");
      double w = b.phi_hi - b.phi_lo;
      if (!(w > 0.0) || w > 2 * kPi + 1e-12) throw std::invalid_argument("3D band azimuth width must be in (0, 2pi]");
    }
  }

  static double arc_overlap(double a0, double a1, double b0, double b1) {
    double best = 0.0;
    for (int s = -2; s <= 2; ++s) {
      double lo = std::max(a0, b0 + 2 * kPi * s), hi = std::min(a1, b1 + 2 * kPi * s);
      best += std::max(0.0, hi - lo);
    }
    return best;
  }

  void check_disjoint() const {
    for (std::size_t i = 0; i < bands_.size(); ++i)
      for (std::size_t j = i + 1; j < bands_.size(); ++j) {
        const Band &a = bands_[i], &b = bands_[j];
        if (dim_ == 2) {
          if (arc_overlap(a.theta_lo, a.theta_hi, b.theta_lo, b.theta_hi) > 1e-12)
            throw std::invalid_argument("band regions overlap");
        } else {
          double t = std::min(a.theta_hi, b.theta_hi) - std::max(a.theta_lo, b.theta_lo);
          if (t > 1e-12 && arc_overlap(a.phi_lo, a.phi_hi, b.phi_lo, b.phi_hi) > 1e-12)
            throw std::invalid_argument("band regions overlap");
        }
      }
  }

  int dim_;
  std::vector<Atom> atoms_;
  std::vector<Band> bands_;
};

// Weights are renormalized and directions normalized.
inline DirectionalMeasure make_atomic_measure(int dim, const std::vector<std::pair<Vec, double>>& atoms) {
  check_dimension(dim);
  if (atoms.empty()) throw std::invalid_argument("empty atom list");
  double total = 0.0;
  for (const auto& [v, w] : atoms) {
    if (!(w >= 0.0)) throw std::invalid_argument("negative atom weight");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("zero total atom weight");
  std::vector<Atom> out;
  for (const auto& [v, w] : atoms) {
    for (int i = dim; i < 3; ++i)
      if (v[i] != 0.0) throw std::invalid_argument("atom dimension mismatch");
    out.push_back({Direction::normalized(dim, v), w / total});
  }
  return DirectionalMeasure(dim, std::move(out), {});
}

// Band densities are used as given; the total mass must already be 1.
inline DirectionalMeasure make_banded_measure(int dim, std::vector<Band> bands) {
  if (bands.empty()) throw std::invalid_argument("empty band list");
  return DirectionalMeasure(dim, {}, std::move(bands));
}

inline DirectionalMeasure isotropic_measure(int dim) {
  check_dimension(dim);
  if (dim == 1) return make_atomic_measure(1, {{{1, 0, 0}, 0.5}, {{-1, 0, 0}, 0.5}});
  if (dim == 2) return make_banded_measure(2, {Band{0.0, 2 * kPi, 0, 0, 1.0 / (2 * kPi)}});
  return make_banded_measure(3, {Band{0.0, kPi, 0.0, 2 * kPi, 1.0 / (4 * kPi)}});
}

// The two-band measure used for the anisotropic trajectories: density `upper`
// on (0, pi) and `lower` on (pi, 2pi).
inline DirectionalMeasure half_plane_measure(double upper, double lower) {
  return make_banded_measure(2, {Band{0.0, kPi, 0, 0, upper}, Band{kPi, 2 * kPi, 0, 0, lower}});
}

struct SphereOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  int max_segments = 2000;
  // When set, angles where kink_normal . phi = 0 become breakpoints.
  std::optional<Vec> kink_normal;
};

namespace detail {

inline std::vector<double> arc_breaks(double lo, double hi, const std::optional<Vec>& normal) {
  std::vector<double> br{lo, hi};
  if (normal && (std::abs((*normal)[0]) + std::abs((*normal)[1]) > 0.0)) {
    double base = std::atan2((*normal)[1], (*normal)[0]) + kPi / 2;
    for (int s = -6; s <= 6; ++s) {
      double a = base + s * kPi;
      if (a > lo && a < hi) br.push_back(a);
    }
  }
  return br;
}

}  // namespace detail

// Integral of f over one band (without the density factor).
template <class F>
auto integrate_band(int dim, const Band& b, F&& f, const SphereOptions& opt = {}) {
  using T = std::decay_t<decltype(f(std::declval<const Vec&>()))>;
  if (dim == 2) {
    auto g = [&](double t) -> T { return f(direction_2d(t)); };
    return quad::adaptive_piecewise(g, detail::arc_breaks(b.theta_lo, b.theta_hi, opt.kink_normal),
                                    opt.abs_tol, opt.rel_tol)
        .value;
  }
  // 3D: outer polar angle, inner azimuth; kinks are handled by tolerance.
  auto outer = [&](double t) -> T {
    auto inner = [&](double p) -> T { return f(direction_3d(t, p)); };
    std::vector<double> br{b.phi_lo, b.phi_hi};
    if (opt.kink_normal) {
      const Vec& k = *opt.kink_normal;
      // k.phi = sin t (k1 cos p + k2 sin p) + k3 cos t = 0.
      double a = std::hypot(k[0], k[1]);
      if (a > 0 && std::sin(t) > 0) {
        double c = -k[2] * std::cos(t) / (a * std::sin(t));
        if (std::abs(c) < 1.0) {
          double base = std::atan2(k[1], k[0]);
          for (int s = -3; s <= 3; ++s)
            for (double sgn : {1.0, -1.0}) {
              double p = base + sgn * std::acos(c) + 2 * kPi * s;
              if (p > b.phi_lo && p < b.phi_hi) br.push_back(p);
            }
        }
      }
    }
    return T(quad::adaptive_piecewise(inner, br, 0.1 * opt.abs_tol, opt.rel_tol).value * std::sin(t));
  };
  return quad::adaptive_gk15(outer, b.theta_lo, b.theta_hi, opt.abs_tol, opt.rel_tol, opt.max_segments).value;
}

// Integral of f(phi) m(dphi): atoms summed exactly, bands by adaptive quadrature.
template <class F>
auto sphere_integrate(const DirectionalMeasure& m, F&& f, const SphereOptions& opt = {}) {
  using T = std::decay_t<decltype(f(std::declval<const Vec&>()))>;
  T sum{};
  for (const auto& a : m.atoms()) {
    if (a.weight == 0.0) continue;
    T v = f(a.direction.coords());
    if (!quad::all_finite(v)) throw std::domain_error("sphere_integrate: non-finite integrand value");
    sum += a.weight * v;
  }
  for (const auto& b : m.bands())
    if (b.density != 0.0) sum += b.density * integrate_band(m.dimension(), b, f, opt);
  return sum;
}

struct NondegeneracyResult {
  bool nondegenerate = false;
  int rank = 0;
  std::vector<Direction> spanning;  // n independent support directions when nondegenerate
  std::vector<Vec> complement;      // orthonormal basis of the orthogonal complement of the support span
};

// Support directions: atoms with positive weight, plus interior points of every
// band with positive density and positive angular width.
inline std::vector<Vec> support_directions(const DirectionalMeasure& m) {
  std::vector<Vec> dirs;
  for (const auto& a : m.atoms())
    if (a.weight > 0.0) dirs.push_back(a.direction.coords());
  for (const auto& b : m.bands()) {
    if (!(b.density > 0.0)) continue;
    if (m.dimension() == 2) {
      double w = b.theta_hi - b.theta_lo;
      dirs.push_back(direction_2d(b.theta_lo + w / 3));
      dirs.push_back(direction_2d(b.theta_lo + 2 * w / 3));
    } else {
      for (double ft : {1.0 / 3, 2.0 / 3})
        for (double fp : {1.0 / 3, 2.0 / 3})
          dirs.push_back(direction_3d(b.theta_lo + ft * (b.theta_hi - b.theta_lo),
                                      b.phi_lo + fp * (b.phi_hi - b.phi_lo)));
    }
  }
  return dirs;
}

inline NondegeneracyResult is_nondegenerate(const DirectionalMeasure& m) {
  const int n = m.dimension();
  std::vector<Vec> dirs = support_directions(m);
  NondegeneracyResult res;
  Eigen::MatrixXd D(n, static_cast<Eigen::Index>(dirs.size()));
  for (std::size_t j = 0; j < dirs.size(); ++j)
    for (int i = 0; i < n; ++i) D(i, static_cast<Eigen::Index>(j)) = dirs[j][i];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > 1e-8) ++res.rank;
  for (int i = res.rank; i < n; ++i) {
    Vec v{0, 0, 0};
    for (int r = 0; r < n; ++r) v[r] = svd.matrixU()(r, i);
    res.complement.push_back(v);
  }
  res.nondegenerate = res.rank == n;
  if (res.nondegenerate) {
    // Greedy selection of n independent support directions.
    Eigen::MatrixXd basis(n, 0);
    for (const auto& d : dirs) {
      Eigen::MatrixXd trial(n, basis.cols() + 1);
      trial.leftCols(basis.cols()) = basis;
      for (int i = 0; i < n; ++i) trial(i, basis.cols()) = d[i];
      Eigen::JacobiSVD<Eigen::MatrixXd> t(trial);
      if (t.singularValues().minCoeff() > 1e-8) {
        basis = trial;
        res.spanning.push_back(Direction::normalized(n, d));
        if (basis.cols() == n) break;
      }
    }
  }
  return res;
}

struct MomentSummary {
  Eigen::MatrixXd A;  // second moments of phi
  Eigen::VectorXd b;  // first moments of phi
};

inline MomentSummary moments(const DirectionalMeasure& m) {
  const int n = m.dimension();
  MomentSummary out{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  SphereOptions opt;
  opt.abs_tol = 1e-13;
  for (int i = 0; i < n; ++i) {
    out.b(i) = sphere_integrate(m, [i](const Vec& p) { return p[i]; }, opt);
    for (int j = i; j < n; ++j) {
      out.A(i, j) = sphere_integrate(m, [i, j](const Vec& p) { return p[i] * p[j]; }, opt);
      out.A(j, i) = out.A(i, j);
    }
  }
  return out;
}

// Jump exponent and tempering for one atom or band.
struct ComponentParams {
  double beta;
  double lambda;
};

inline bool is_beta_one(double beta) { return std::abs(beta - 1.0) < 1e-6; }

// Per-atom / per-band (beta, lambda), indexed like the measure's atoms() and bands().
class StabilityProfile {
 public:
  StabilityProfile(const DirectionalMeasure& m, std::vector<ComponentParams> atoms,
                   std::vector<ComponentParams> bands)
      : atoms_(std::move(atoms)), bands_(std::move(bands)) {
    if (atoms_.size() != m.atoms().size() || bands_.size() != m.bands().size())
      throw std::invalid_argument("profile does not match the measure's atoms/bands");
    for (const auto* list : {&atoms_, &bands_})
      for (const auto& c : *list) {
        if (!(c.beta > 0.0 && c.beta <= 2.0)) throw std::invalid_argument("profile beta outside (0, 2]");
        if (!(c.lambda >= 0.0)) throw std::invalid_argument("profile lambda must be >= 0");
      }
  }
  static StabilityProfile constant(const DirectionalMeasure& m, double beta, double lambda) {
    return StabilityProfile(m, std::vector<ComponentParams>(m.atoms().size(), {beta, lambda}),
                            std::vector<ComponentParams>(m.bands().size(), {beta, lambda}));
  }
  const std::vector<ComponentParams>& atoms() const { return atoms_; }
  const std::vector<ComponentParams>& bands() const { return bands_; }

  // True when some components have beta < 1 and others beta > 1.
  bool mixed_sign() const {
    bool lo = false, hi = false;
    for (const auto* list : {&atoms_, &bands_})
      for (const auto& c : *list) {
        lo = lo || c.beta < 1.0;
        hi = hi || c.beta > 1.0;
      }
    return lo && hi;
  }
  bool has_beta_one() const {
    for (const auto* list : {&atoms_, &bands_})
      for (const auto& c : *list)
        if (is_beta_one(c.beta)) return true;
    return false;
  }
  bool is_constant() const {
    const ComponentParams* first = nullptr;
    for (const auto* list : {&atoms_, &bands_})
      for (const auto& c : *list) {
        if (!first) first = &c;
        if (c.beta != first->beta || c.lambda != first->lambda) return false;
      }
    return true;
  }

 private:
  std::vector<ComponentParams> atoms_, bands_;
};

// Symmetry of the pair (m, profile): the kernel m(phi) beta/lambda(phi) is even.
inline bool is_symmetric(const DirectionalMeasure& m, const StabilityProfile& prof) {
  if (!m.is_symmetric()) return false;
  if (prof.is_constant()) return true;
  auto same = [](const ComponentParams& a, const ComponentParams& b) {
    return a.beta == b.beta && a.lambda == b.lambda;
  };
  for (std::size_t i = 0; i < m.atoms().size(); ++i) {
    if (m.atoms()[i].weight == 0.0) continue;
    if (!same(prof.atoms()[i], prof.atoms()[m.antipodal_atom(i)])) return false;
  }
  for (const auto& v : m.symmetry_probes()) {
    int a = m.band_index(v), b = m.band_index(-v);
    if (a < 0 || b < 0 || m.bands()[a].density == 0.0) continue;
    if (!same(prof.bands()[a], prof.bands()[b])) return false;
  }
  return true;
}

}  // namespace anisolap
