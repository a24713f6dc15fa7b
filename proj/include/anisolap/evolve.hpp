#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "anisolap/fields.hpp"
#include "anisolap/parallel.hpp"
#include "anisolap/sampler.hpp"
#include "anisolap/symbols.hpp"

namespace anisolap {

// Periodic box [-L, L)^n with N points per axis, x_j = -L + j h, h = 2L/N.
// Wavenumbers k_m = pi m / L for m in [-N/2, N/2).
struct SpectralGrid {
  int dimension = 1;
  double L = 1.0;
  int N = 8;

  SpectralGrid() = default;
  SpectralGrid(int n, double half_width, int points) : dimension(n), L(half_width), N(points) { validate(); }

  void validate() const {
    check_dimension(dimension);
    if (!(L > 0.0)) throw std::invalid_argument("grid half-width must be positive");
    if (N < 8 || (N & (N - 1)) != 0) throw std::invalid_argument("grid points per axis must be a power of two >= 8");
  }
  double h() const { return 2.0 * L / N; }
  double cell_volume() const { return std::pow(h(), dimension); }
  std::size_t size() const {
    std::size_t s = 1;
    for (int d = 0; d < dimension; ++d) s *= static_cast<std::size_t>(N);
    return s;
  }
  double coord(int j) const { return -L + j * h(); }
  int signed_mode(int m) const { return m < N / 2 ? m : m - N; }
  double wavenumber(int m) const { return kPi * signed_mode(m) / L; }

  // Row-major multi-index (axis 0 slowest).
  std::array<int, 3> unflatten(std::size_t idx) const {
    std::array<int, 3> j{0, 0, 0};
    for (int d = dimension - 1; d >= 0; --d) {
      j[d] = static_cast<int>(idx % static_cast<std::size_t>(N));
      idx /= static_cast<std::size_t>(N);
    }
    return j;
  }
  std::size_t flatten(const std::array<int, 3>& j) const {
    std::size_t idx = 0;
    for (int d = 0; d < dimension; ++d) idx = idx * static_cast<std::size_t>(N) + static_cast<std::size_t>(j[d]);
    return idx;
  }
  Vec point(std::size_t idx) const {
    auto j = unflatten(idx);
    Vec x{0.0, 0.0, 0.0};
    for (int d = 0; d < dimension; ++d) x[d] = coord(j[d]);
    return x;
  }
  Vec wavevector(std::size_t idx) const {
    auto j = unflatten(idx);
    Vec k{0.0, 0.0, 0.0};
    for (int d = 0; d < dimension; ++d) k[d] = wavenumber(j[d]);
    return k;
  }
  bool is_nyquist(std::size_t idx) const {
    auto j = unflatten(idx);
    for (int d = 0; d < dimension; ++d)
      if (j[d] == N / 2) return true;
    return false;
  }
  bool operator==(const SpectralGrid& o) const { return dimension == o.dimension && L == o.L && N == o.N; }
};

struct DensityField {
  SpectralGrid grid;
  std::vector<double> values;
  double time = 0.0;
  double ringing = 0.0;  // magnitude of negative mass after evolution

  DensityField() = default;
  DensityField(SpectralGrid g, std::vector<double> v, double t = 0.0) : grid(g), values(std::move(v)), time(t) {
    grid.validate();
    if (values.size() != grid.size()) throw std::invalid_argument("density values do not match the grid");
  }

  double mass() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * grid.cell_volume();
  }
  // Mass in the outer strip of max(1, N/32) cells on every face.
  double boundary_mass() const {
    const int w = std::max(1, grid.N / 32);
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      auto j = grid.unflatten(i);
      for (int d = 0; d < grid.dimension; ++d)
        if (j[d] < w || j[d] >= grid.N - w) {
          s += std::abs(values[i]);
          break;
        }
    }
    return s * grid.cell_volume();
  }
};

inline DensityField sample_on_grid(const ScalarField& f, const SpectralGrid& g) {
  if (f.dimension != g.dimension) throw std::invalid_argument("field and grid dimensions differ");
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f.value(g.point(i));
  return DensityField(g, std::move(v));
}

// Normal density with the given per-axis variance.
inline DensityField gaussian_density(const SpectralGrid& g, const Vec& center, double variance) {
  std::vector<double> v(g.size());
  const double c = std::pow(2.0 * kPi * variance, -0.5 * g.dimension);
  for (std::size_t i = 0; i < v.size(); ++i) {
    Vec d = g.point(i) - center;
    v[i] = c * std::exp(-0.5 * dot(d, d) / variance);
  }
  return DensityField(g, std::move(v));
}

// Unit mass at the grid point nearest the origin.
inline DensityField point_mass(const SpectralGrid& g) {
  std::vector<double> v(g.size(), 0.0);
  std::array<int, 3> j{g.N / 2, g.N / 2, g.N / 2};
  v[g.flatten(j)] = 1.0 / g.cell_volume();
  return DensityField(g, std::move(v));
}

namespace detail {

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Owns a complex buffer and forward/backward plans for one grid.
class Fft {
 public:
  explicit Fft(const SpectralGrid& g) : size_(g.size()) {
    buf_.reset(fftw_alloc_complex(size_));
    if (!buf_) throw std::bad_alloc();
    std::vector<int> dims(g.dimension, g.N);
    std::lock_guard lock(fftw_planner_mutex());
    fwd_ = fftw_plan_dft(g.dimension, dims.data(), buf_.get(), buf_.get(), FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft(g.dimension, dims.data(), buf_.get(), buf_.get(), FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!fwd_ || !bwd_) throw std::runtime_error("FFTW planning failed");
  }
  ~Fft() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(buf_.get()); }
  std::size_t size() const { return size_; }
  // sum_j a_j e^{+2 pi i j m / N}: the transform with the e^{ik.x} sign.
  void to_wavenumbers() { fftw_execute(bwd_); }
  // Inverse (unnormalized).
  void to_space() { fftw_execute(fwd_); }

 private:
  std::size_t size_;
  std::unique_ptr<fftw_complex, FftwFree> buf_;
  fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

}  // namespace detail

// psi at every grid wavevector; the Nyquist modes use Re psi so that the
// multiplier stays Hermitian on the grid.
inline std::vector<cd> symbol_on_grid(const GeneratorSymbol& psi, const SpectralGrid& g) {
  if (psi.dimension() != g.dimension) throw std::invalid_argument("symbol and grid dimensions differ");
  std::vector<cd> out(g.size());
  parallel_for(out.size(), [&](std::size_t i) {
    cd v = psi(g.wavevector(i));
    out[i] = g.is_nyquist(i) ? cd(v.real(), 0.0) : v;
  });
  return out;
}

// Inverse DFT of multiplier * DFT(values).
inline std::vector<double> apply_multiplier(const std::vector<double>& values, const SpectralGrid& g,
                                            const std::vector<cd>& multiplier) {
  detail::Fft fft(g);
  auto* d = fft.data();
  for (std::size_t i = 0; i < values.size(); ++i) d[i] = values[i];
  fft.to_wavenumbers();
  for (std::size_t i = 0; i < values.size(); ++i) d[i] *= multiplier[i];
  fft.to_space();
  std::vector<double> out(values.size());
  const double scale = 1.0 / static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = d[i].real() * scale;
  return out;
}

// Spectral application of the operator with symbol psi to grid samples.
inline std::vector<double> apply_spectral(const std::vector<double>& values, const SpectralGrid& g,
                                          const GeneratorSymbol& psi) {
  return apply_multiplier(values, g, symbol_on_grid(psi, g));
}

// DFT approximation of f^(k) = int e^{ik.x} f(x) dx at the grid wavevectors.
inline std::vector<cd> fourier_transform(const std::vector<double>& values, const SpectralGrid& g) {
  detail::Fft fft(g);
  auto* d = fft.data();
  for (std::size_t i = 0; i < values.size(); ++i) d[i] = values[i];
  fft.to_wavenumbers();
  std::vector<cd> out(values.size());
  const double vol = g.cell_volume();
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto j = g.unflatten(i);
    int parity = 0;
    for (int a = 0; a < g.dimension; ++a) parity += j[a];
    out[i] = d[i] * vol * ((parity % 2) ? -1.0 : 1.0);
  }
  return out;
}

struct EvolveOptions {
  double boundary_tolerance = 1e-6;  // relative mass allowed in the boundary strip
  bool enforce_boundary = true;
};

inline void check_boundary(const DensityField& p, const EvolveOptions& o, const char* what) {
  if (!o.enforce_boundary) return;
  const double total = std::abs(p.mass());
  if (total == 0.0) return;
  const double b = p.boundary_mass();
  if (b > o.boundary_tolerance * total)
    throw std::runtime_error(std::string(what) + ": boundary mass fraction " + std::to_string(b / total) +
                             " exceeds tolerance; enlarge the box");
}

inline double negative_mass(const std::vector<double>& v, double vol) {
  double s = 0.0;
  for (double x : v)
    if (x < 0.0) s -= x;
  return s * vol;
}

// p(t) = F^{-1}[e^{t psi} F p0] on the periodic grid.
inline DensityField evolve_spectral(const DensityField& p0, const GeneratorSymbol& psi, double t,
                                    const EvolveOptions& o = {}) {
  if (!(t >= 0.0)) throw std::invalid_argument("evolution time must be >= 0");
  check_boundary(p0, o, "initial density");
  const auto sym = symbol_on_grid(psi, p0.grid);
  std::vector<cd> mult(sym.size());
  for (std::size_t i = 0; i < sym.size(); ++i) mult[i] = std::exp(t * sym[i]);
  DensityField out(p0.grid, apply_multiplier(p0.values, p0.grid, mult), p0.time + t);
  out.ringing = negative_mass(out.values, out.grid.cell_volume());
  check_boundary(out, o, "evolved density");
  return out;
}

struct TimeFractionalResult {
  DensityField density;
  std::vector<double> std_error;  // pointwise Monte Carlo standard error (batch means)
  std::vector<double> taus;       // sampled operational times
};

// Subordinated evolution: average of e^{tau_i psi} over tau_i = E(t), applied in k-space.
inline TimeFractionalResult evolve_time_fractional(const DensityField& p0, const GeneratorSymbol& psi, double alpha,
                                                   double t, std::size_t n_samples, std::uint64_t seed,
                                                   const EvolveOptions& o = {},
                                                   const SubordinatorOptions& so = {}) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (!(t > 0.0)) throw std::invalid_argument("time must be positive");
  if (n_samples < 2) throw std::invalid_argument("need at least two subordination samples");
  check_boundary(p0, o, "initial density");
  const auto& g = p0.grid;
  const auto sym = symbol_on_grid(psi, g);
  TimeFractionalResult res;
  res.taus.resize(n_samples);
  parallel_for(n_samples, [&](std::size_t i) {
    Rng rng = stream_rng(seed, i);
    res.taus[i] = sample_inverse_subordinator(alpha, t, rng, so);
  });
  const std::size_t batches = std::min<std::size_t>(20, n_samples);
  std::vector<std::vector<double>> batch_density(batches);
  std::vector<double> batch_weight(batches);
  parallel_for(batches, [&](std::size_t b) {
    std::size_t lo = b * n_samples / batches, hi = (b + 1) * n_samples / batches;
    std::vector<cd> mult(sym.size(), 0.0);
    for (std::size_t i = lo; i < hi; ++i)
      for (std::size_t m = 0; m < sym.size(); ++m) mult[m] += std::exp(res.taus[i] * sym[m]);
    for (auto& v : mult) v /= static_cast<double>(hi - lo);
    batch_density[b] = apply_multiplier(p0.values, g, mult);
    batch_weight[b] = static_cast<double>(hi - lo) / n_samples;
  });
  std::vector<double> mean(g.size(), 0.0), se(g.size(), 0.0);
  for (std::size_t b = 0; b < batches; ++b)
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += batch_weight[b] * batch_density[b][i];
  for (std::size_t b = 0; b < batches; ++b)
    for (std::size_t i = 0; i < mean.size(); ++i) se[i] += std::pow(batch_density[b][i] - mean[i], 2);
  for (auto& v : se) v = std::sqrt(v / ((batches - 1.0) * batches));
  res.density = DensityField(g, std::move(mean), p0.time + t);
  res.density.ringing = negative_mass(res.density.values, g.cell_volume());
  res.std_error = std::move(se);
  check_boundary(res.density, o, "subordinated density");
  return res;
}

struct Histogram {
  DensityField density;
  std::size_t outside = 0;
  double outside_fraction = 0.0;
};

// Nearest-grid-point histogram normalized by the total sample count.
inline Histogram density_from_samples(const std::vector<Vec>& endpoints, const SpectralGrid& g) {
  if (endpoints.empty()) throw std::invalid_argument("density_from_samples: no samples");
  std::vector<double> v(g.size(), 0.0);
  std::size_t outside = 0;
  for (const auto& x : endpoints) {
    std::array<int, 3> j{0, 0, 0};
    bool in = true;
    for (int d = 0; d < g.dimension; ++d) {
      double s = std::floor((x[d] + g.L) / g.h() + 0.5);
      if (!(s >= 0.0 && s < g.N)) {
        in = false;
        break;
      }
      j[d] = static_cast<int>(s);
    }
    if (in) v[g.flatten(j)] += 1.0;
    else ++outside;
  }
  const double norm_c = 1.0 / (static_cast<double>(endpoints.size()) * g.cell_volume());
  for (auto& x : v) x *= norm_c;
  Histogram h{DensityField(g, std::move(v)), outside, static_cast<double>(outside) / endpoints.size()};
  if (h.outside_fraction > 0.01)
    throw std::runtime_error("more than 1% of the samples fall outside the grid box");
  return h;
}

struct DensityDistance {
  double l1 = 0.0, l2 = 0.0, max = 0.0;
};

inline DensityDistance compare_densities(const DensityField& a, const DensityField& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("compare_densities: grid mismatch");
  DensityDistance d;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    double e = std::abs(a.values[i] - b.values[i]);
    d.l1 += e;
    d.l2 += e * e;
    d.max = std::max(d.max, e);
  }
  const double vol = a.grid.cell_volume();
  d.l1 *= vol;
  d.l2 = std::sqrt(d.l2 * vol);
  return d;
}

// Cell averages on a grid coarser by `factor` (trapezoid weights per axis),
// so that a fine density can be compared with a coarse histogram.
inline DensityField aggregate_cells(const DensityField& fine, int factor) {
  const auto& g = fine.grid;
  if (factor < 1 || g.N % factor != 0 || (factor > 1 && factor % 2 != 0))
    throw std::invalid_argument("aggregation factor must be 1 or an even divisor of N");
  SpectralGrid c(g.dimension, g.L, g.N / factor);
  std::vector<double> w1(factor + 1, 1.0);
  if (factor > 1) w1.front() = w1.back() = 0.5;
  for (auto& w : w1) w /= factor;
  std::vector<double> out(c.size(), 0.0);
  const int half = factor / 2;
  for (std::size_t ci = 0; ci < out.size(); ++ci) {
    auto cj = c.unflatten(ci);
    std::array<int, 3> o{0, 0, 0};
    double s = 0.0;
    for (;;) {
      std::array<int, 3> fj{0, 0, 0};
      double w = 1.0;
      for (int d = 0; d < g.dimension; ++d) {
        int idx = cj[d] * factor + o[d] - half;
        fj[d] = ((idx % g.N) + g.N) % g.N;
        w *= w1[o[d]];
      }
      s += w * fine.values[g.flatten(fj)];
      int d = 0;
      while (d < g.dimension && ++o[d] > (factor > 1 ? factor : 0)) o[d++] = 0;
      if (d == g.dimension) break;
    }
    out[ci] = s;
  }
  DensityField r(c, std::move(out), fine.time);
  return r;
}

}  // namespace anisolap
