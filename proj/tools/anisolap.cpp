// anisolap: command-line driver for the anisotropic nonlocal-diffusion toolkit.
// Exit codes: 0 all checks passed, 1 a check failed or a computation errored,
// 2 usage or configuration error.

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "anisolap/anisolap.hpp"

namespace fs = std::filesystem;
using namespace anisolap;

namespace {

constexpr int kPass = 0, kFail = 1, kUsage = 2;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// One machine-readable line per check.
struct Checks {
  bool all = true;
  void report(const std::string& name, double value, double tolerance, bool pass, const char* relation = "<=") {
    all = all && pass;
    std::printf("CHECK name=%s value=%.6g tolerance=%s%.6g result=%s\n", name.c_str(), value, relation, tolerance,
                pass ? "PASS" : "FAIL");
    std::fflush(stdout);
  }
  int status() const { return all ? kPass : kFail; }
};

// Scalar flags: a value given on the command line wins over the config.
struct Flags {
  std::optional<long long> paths;
  std::optional<std::uint64_t> seed;
  std::optional<double> t;
  std::optional<long long> steps;
  std::string out;
  std::string k_list, k_grid, direction;
  std::string field, points;
  bool validate = false;
};

long long resolve_paths(const json& c, const Flags& f, long long fallback) {
  if (f.paths) return *f.paths;
  return cfg::get_int(c, "paths", "config", fallback);
}

std::uint64_t resolve_seed(const json& c, const Flags& f) {
  if (f.seed) return *f.seed;
  if (!c.contains("seed")) throw ConfigError("config.seed", "a seed is required for sampling (use --seed or \"seed\")");
  const json& s = c["seed"];
  if (!s.is_number_unsigned() && !s.is_number_integer()) throw ConfigError("config.seed", "expected a nonnegative integer");
  return s.get<std::uint64_t>();
}

double resolve_time(const json& c, const Flags& f, const char* key = "T") {
  if (f.t) return *f.t;
  if (c.contains("t")) return cfg::get_double(c, "t", "config");
  return cfg::get_double(c, key, "config");
}

std::string resolve_out(const json& c, const Flags& f) {
  if (!f.out.empty()) return f.out;
  if (c.contains("out")) return cfg::get_string(c, "out", "config");
  return {};
}

std::ofstream open_out(const std::string& path) {
  if (path.empty()) throw ConfigError("out", "no output path given");
  if (auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
  std::ofstream o(path);
  if (!o) throw std::runtime_error("cannot write " + path);
  return o;
}

void write_json(const std::string& path, const json& j) {
  if (path.empty()) return;
  auto o = open_out(path);
  o << j.dump(2) << "\n";
}

// "k1,k2;k1,k2" -> wavevectors.
std::vector<Vec> parse_vec_list(const std::string& s, int n, const std::string& what) {
  std::vector<Vec> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    Vec v{0.0, 0.0, 0.0};
    std::stringstream is(item);
    std::string c;
    int i = 0;
    while (std::getline(is, c, ',')) {
      if (i >= n) throw ConfigError(what, "too many coordinates in '" + item + "'");
      try {
        v[i++] = std::stod(c);
      } catch (const std::exception&) {
        throw ConfigError(what, "not a number: '" + c + "'");
      }
    }
    if (i != n) throw ConfigError(what, "expected " + std::to_string(n) + " coordinates in '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(what, "empty list");
  return out;
}

std::vector<Vec> vec_list_json(const json& j, int n, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a nonempty array of vectors");
  std::vector<Vec> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(cfg::vec(j[i], path + "[" + std::to_string(i) + "]", n));
  return out;
}

std::vector<double> double_list(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a nonempty array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(cfg::number(v, path));
  return out;
}

json vec_json(const Vec& v, int n) { return cfg::vec_json(v, n); }

json cd_json(cd v) { return json::array({v.real(), v.imag()}); }

// ---- density CSV ------------------------------------------------------------

void write_density(const std::string& path, const DensityField& d, const std::vector<double>* std_error = nullptr) {
  auto o = open_out(path);
  const auto& g = d.grid;
  o << "# grid dimension=" << g.dimension << " L=" << num(g.L) << " N=" << g.N << " t=" << num(d.time) << "\n";
  for (int i = 0; i < g.dimension; ++i) o << "x" << (i + 1) << ",";
  o << "value" << (std_error ? ",std_error" : "") << "\n";
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    Vec x = g.point(i);
    for (int k = 0; k < g.dimension; ++k) o << num(x[k]) << ",";
    o << num(d.values[i]);
    if (std_error) o << "," << num((*std_error)[i]);
    o << "\n";
  }
}

DensityField read_density(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open density file");
  std::string line;
  if (!std::getline(in, line) || line.rfind("# grid", 0) != 0) throw ConfigError(path, "missing '# grid' header");
  std::map<std::string, std::string> kv;
  std::stringstream hs(line.substr(6));
  std::string tok;
  while (hs >> tok) {
    auto eq = tok.find('=');
    if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  SpectralGrid g;
  double t = 0.0;
  try {
    g = SpectralGrid(std::stoi(kv.at("dimension")), std::stod(kv.at("L")), std::stoi(kv.at("N")));
    if (kv.count("t")) t = std::stod(kv.at("t"));
  } catch (const std::exception& e) {
    throw ConfigError(path, std::string("bad grid header: ") + e.what());
  }
  std::getline(in, line);  // column names
  std::vector<double> v;
  v.reserve(g.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    for (int i = 0; i <= g.dimension; ++i)
      if (!std::getline(ls, cell, ',')) throw ConfigError(path, "short row");
    v.push_back(std::stod(cell));
  }
  if (v.size() != g.size()) throw ConfigError(path, "row count does not match the grid");
  return DensityField(g, std::move(v), t);
}

std::vector<Vec> read_points(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open points file");
  std::vector<Vec> pts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
    pts.push_back(parse_vec_list(line, n, path).front());
  }
  if (pts.empty()) throw ConfigError(path, "no points");
  return pts;
}

// Initial density: {"kind": "gaussian", "variance", "center"} | {"kind": "point"} | a field spec.
DensityField initial_density(const json& j, const SpectralGrid& g, const std::string& path) {
  const std::string kind = cfg::get_string(j, "kind", path);
  if (kind == "gaussian" && j.contains("variance")) {
    Vec c = j.contains("center") ? cfg::vec(j["center"], path + ".center", g.dimension) : Vec{0.0, 0.0, 0.0};
    return gaussian_density(g, c, cfg::get_double(j, "variance", path));
  }
  if (kind == "point") return point_mass(g);
  return sample_on_grid(field_from_json(j, g.dimension, path), g);
}

// ---- sample / ecf -----------------------------------------------------------

struct TrajectoryRun {
  std::string name;
  JumpSpec jump;
};

void write_trajectories(std::ostream& o, const std::vector<Trajectory>& paths, bool header) {
  if (paths.empty()) return;
  const int n = paths.front().dimension;
  if (header) {
    o << "path_id,t";
    for (int i = 0; i < n; ++i) o << ",x" << (i + 1);
    o << ",state\n";
  }
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const auto& tr = paths[p];
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      o << p << "," << num(tr.times[i]);
      for (int k = 0; k < n; ++k) o << "," << num(tr.positions[i][k]);
      o << "," << (tr.states.empty() ? 0 : tr.states[i]) << "\n";
    }
  }
}

std::vector<Trajectory> sample_paths(const JumpSpec& jump, const json& c, const Flags& f, std::size_t n_paths,
                                     std::uint64_t seed) {
  const int n = jump_dimension(jump);
  Vec start = c.contains("start") ? cfg::vec(c["start"], "config.start", n) : Vec{0.0, 0.0, 0.0};
  std::vector<Trajectory> paths(n_paths);
  const bool by_steps = f.steps || c.contains("steps");
  if (by_steps) {
    const long long steps = f.steps ? *f.steps : cfg::get_int(c, "steps", "config");
    if (steps < 1) throw ConfigError("config.steps", "must be positive");
    parallel_for(n_paths, [&](std::size_t i) {
      Rng rng = stream_rng(seed, i);
      paths[i] = simulate_jumps(jump, static_cast<std::size_t>(steps), start, rng);
    });
  } else {
    const double zeta = cfg::get_double(c, "zeta", "config");
    const double T = resolve_time(c, f);
    if (!(zeta > 0.0)) throw ConfigError("config.zeta", "must be positive");
    if (!(T > 0.0)) throw ConfigError("config.T", "must be positive");
    parallel_for(n_paths, [&](std::size_t i) {
      Rng rng = stream_rng(seed, i);
      paths[i] = simulate_compound_poisson(jump, zeta, T, start, rng);
    });
  }
  return paths;
}

int cmd_sample(const json& c, const Flags& f) {
  auto jump = jump_from_json(cfg::require(c, "jump", "config"), "config.jump");
  const auto n_paths = resolve_paths(c, f, 1);
  if (n_paths < 1) throw ConfigError("paths", "must be positive");
  const auto seed = resolve_seed(c, f);
  auto paths = sample_paths(jump, c, f, static_cast<std::size_t>(n_paths), seed);
  auto o = open_out(resolve_out(c, f));
  write_trajectories(o, paths, true);
  std::size_t events = 0;
  for (const auto& p : paths) events += p.times.size() - 1;
  std::printf("sampled %lld paths, %zu events\n", n_paths, events);
  return kPass;
}

int cmd_ecf(const json& c, const Flags& f) {
  auto jump = jump_from_json(cfg::require(c, "jump", "config"), "config.jump");
  const int n = jump_dimension(jump);
  const auto n_paths = resolve_paths(c, f, 100000);
  if (n_paths < 1) throw ConfigError("paths", "must be positive");
  const auto seed = resolve_seed(c, f);
  const double zeta = cfg::get_double(c, "zeta", "config");
  const double T = resolve_time(c, f);
  std::vector<Vec> ks = !f.k_list.empty() ? parse_vec_list(f.k_list, n, "--k-list")
                                          : vec_list_json(cfg::require(c, "k_list", "config"), n, "config.k_list");
  Vec start = c.contains("start") ? cfg::vec(c["start"], "config.start", n) : Vec{0.0, 0.0, 0.0};
  auto ends = simulate_endpoints(jump, zeta, T, static_cast<std::size_t>(n_paths), seed, start);
  const double tol = cfg::get_double(c, "tolerance_factor", "config", 5.0) / std::sqrt(static_cast<double>(n_paths));
  Checks checks;
  std::string out = resolve_out(c, f);
  std::optional<std::ofstream> o;
  if (!out.empty()) {
    o = open_out(out);
    for (int i = 0; i < n; ++i) *o << "k" << (i + 1) << ",";
    *o << "ecf_re,ecf_im,exact_re,exact_im,deviation,tolerance\n";
  }
  for (std::size_t i = 0; i < ks.size(); ++i) {
    auto e = empirical_cf(ends, ks[i]);
    cd exact = std::exp(zeta * T * (jump_cf(jump, ks[i]) - 1.0)) * std::polar(1.0, dot(ks[i], start));
    double dev = std::abs(e.value - exact);
    checks.report("ecf_k" + std::to_string(i), dev, tol, dev <= tol);
    if (o) {
      for (int k = 0; k < n; ++k) *o << num(ks[i][k]) << ",";
      *o << num(e.value.real()) << "," << num(e.value.imag()) << "," << num(exact.real()) << "," << num(exact.imag())
         << "," << num(dev) << "," << num(tol) << "\n";
    }
  }
  return checks.status();
}

// ---- symbol -----------------------------------------------------------------

int cmd_symbol(const json& c, const Flags& f) {
  const json& sj = c.contains("symbol") ? c["symbol"] : c;
  auto psi = symbol_from_json(sj, c.contains("symbol") ? "config.symbol" : "config");
  const int n = psi.dimension();
  std::vector<Vec> ks;
  if (!f.k_list.empty()) {
    ks = parse_vec_list(f.k_list, n, "--k-list");
  } else {
    std::string grid = f.k_grid;
    if (grid.empty() && c.contains("k_grid")) grid = cfg::get_string(c, "k_grid", "config");
    if (grid.empty()) throw ConfigError("--k-grid", "give --k-grid min:max:count or --k-list");
    double lo, hi;
    long count;
    if (std::sscanf(grid.c_str(), "%lf:%lf:%ld", &lo, &hi, &count) != 3 || count < 1 || !(hi >= lo))
      throw ConfigError("--k-grid", "expected min:max:count");
    Vec dir{1.0, 0.0, 0.0};
    if (!f.direction.empty()) dir = parse_vec_list(f.direction, n, "--direction").front();
    else if (c.contains("direction")) dir = cfg::vec(c["direction"], "config.direction", n);
    dir = Direction::normalized(n, dir).coords();
    for (long i = 0; i < count; ++i) ks.push_back((lo + (count > 1 ? (hi - lo) * i / (count - 1) : 0.0)) * dir);
  }
  std::vector<cd> vals(ks.size());
  parallel_for(ks.size(), [&](std::size_t i) { vals[i] = psi(ks[i]); });
  auto o = open_out(resolve_out(c, f));
  for (int i = 0; i < n; ++i) o << "k" << (i + 1) << ",";
  o << "re,im\n";
  for (std::size_t i = 0; i < ks.size(); ++i) {
    for (int k = 0; k < n; ++k) o << num(ks[i][k]) << ",";
    o << num(vals[i].real()) << "," << num(vals[i].imag()) << "\n";
  }
  for (const auto& w : psi.warnings()) std::fprintf(stderr, "warning: %s\n", w.c_str());
  return kPass;
}

// ---- apply ------------------------------------------------------------------

struct OperatorSpec {
  std::string kind;
  std::optional<DirectionalMeasure> measure;
  std::optional<StabilityProfile> profile;
  double sigma = 1.0, zeta = 1.0;
  std::optional<GaussianAnisoSpec> aniso;
  int dimension = 1;
};

OperatorSpec operator_from_json(const json& j, const std::string& path) {
  OperatorSpec op;
  op.kind = cfg::get_string(j, "case", path);
  if (op.kind == "caseI" || op.kind == "caseII" || op.kind == "general") {
    op.measure = measure_from_json(cfg::require(j, "measure", path), path + ".measure");
    op.profile = profile_from_json(j.contains("profile") ? j["profile"] : j, *op.measure, path + ".profile");
    op.dimension = op.measure->dimension();
  } else if (op.kind == "gaussian_iso" || op.kind == "gaussian_axes") {
    op.dimension = static_cast<int>(cfg::get_int(j, "dimension", path));
    op.sigma = cfg::get_double(j, "sigma", path);
    op.zeta = cfg::get_double(j, "zeta", path, 1.0);
  } else if (op.kind == "gaussian_aniso") {
    json jj = j;
    jj["kind"] = "gaussian_aniso";
    op.aniso = std::get<GaussianAnisoJump>(jump_from_json(jj, path)).spec;
    op.zeta = cfg::get_double(j, "zeta", path, 1.0);
    op.dimension = 2;
  } else {
    throw ConfigError(path + ".case", "unknown operator '" + op.kind + "'");
  }
  return op;
}

OperatorValue apply_spec(const OperatorSpec& op, const ScalarField& f, const Vec& x) {
  if (op.kind == "caseI") return apply_operator(OperatorCase::caseI, f, *op.measure, *op.profile, x);
  if (op.kind == "caseII") return apply_operator(OperatorCase::caseII, f, *op.measure, *op.profile, x);
  if (op.kind == "general") return apply_operator(OperatorCase::general, f, *op.measure, *op.profile, x);
  GaussianVariant v = op.kind == "gaussian_iso" ? GaussianVariant::iso
                      : op.kind == "gaussian_axes" ? GaussianVariant::axes
                                                   : GaussianVariant::aniso;
  return {apply_gaussian_nonlocal(f, v, op.sigma, op.zeta, x, {}, op.aniso ? &*op.aniso : nullptr), 0.0};
}

int cmd_apply(const json& c, const Flags& f) {
  auto op = operator_from_json(cfg::require(c, "operator", "config"), "config.operator");
  const int n = op.dimension;
  const std::string name = f.field.empty() ? "gaussian" : f.field;
  ScalarField field;
  if (c.contains("fields") && c["fields"].contains(name)) {
    field = field_from_json(c["fields"][name], n, "config.fields." + name);
  } else if (name == "gaussian") {
    field = gaussian_bump(n, {0.0, 0.0, 0.0}, 1.0);
  } else if (name == "bump") {
    field = compact_bump(n, {0.0, 0.0, 0.0}, 1.0);
  } else {
    throw ConfigError("--field", "unknown field '" + name + "'");
  }
  std::vector<Vec> pts = !f.points.empty() ? read_points(f.points, n)
                                           : vec_list_json(cfg::require(c, "points", "config"), n, "config.points");
  std::vector<OperatorValue> vals(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) { vals[i] = apply_spec(op, field, pts[i]); });
  auto o = open_out(resolve_out(c, f));
  for (int i = 0; i < n; ++i) o << "x" << (i + 1) << ",";
  o << "value,tail_bound\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int k = 0; k < n; ++k) o << num(pts[i][k]) << ",";
    o << num(vals[i].value) << "," << num(vals[i].tail_bound) << "\n";
  }
  return kPass;
}

// ---- evolve / compare -------------------------------------------------------

int cmd_evolve(const json& c, const Flags& f) {
  auto psi = symbol_from_json(cfg::require(c, "symbol", "config"), "config.symbol");
  auto g = grid_from_json(cfg::require(c, "grid", "config"), "config.grid");
  auto p0 = initial_density(cfg::require(c, "initial", "config"), g, "config.initial");
  const double t = resolve_time(c, f, "t");
  EvolveOptions eo;
  if (c.contains("enforce_boundary")) eo.enforce_boundary = c["enforce_boundary"].get<bool>();
  eo.boundary_tolerance = cfg::get_double(c, "boundary_tolerance", "config", eo.boundary_tolerance);
  const std::string out = resolve_out(c, f);
  Checks checks;
  if (c.contains("alpha")) {
    const double alpha = cfg::get_double(c, "alpha", "config");
    const auto samples = cfg::get_int(c, "subordination_samples", "config", 2000);
    auto r = evolve_time_fractional(p0, psi, alpha, t, static_cast<std::size_t>(samples), resolve_seed(c, f), eo);
    if (!out.empty()) write_density(out, r.density, &r.std_error);
    std::printf("mass=%s ringing=%s\n", num(r.density.mass()).c_str(), num(r.density.ringing).c_str());
    checks.report("mass_drift", std::abs(r.density.mass() - p0.mass()), 1e-10, std::abs(r.density.mass() - p0.mass()) <= 1e-10);
  } else {
    auto r = evolve_spectral(p0, psi, t, eo);
    if (!out.empty()) write_density(out, r);
    std::printf("mass=%s ringing=%s boundary_mass=%s\n", num(r.mass()).c_str(), num(r.ringing).c_str(),
                num(r.boundary_mass()).c_str());
    checks.report("mass_drift", std::abs(r.mass() - p0.mass()), 1e-12, std::abs(r.mass() - p0.mass()) <= 1e-12);
  }
  return checks.status();
}

int cmd_compare(const std::string& a, const std::string& b, std::optional<double> tol_l1, const std::string& out) {
  auto da = read_density(a), db = read_density(b);
  auto d = compare_densities(da, db);
  std::printf("l1=%s l2=%s max=%s\n", num(d.l1).c_str(), num(d.l2).c_str(), num(d.max).c_str());
  write_json(out, {{"l1", d.l1}, {"l2", d.l2}, {"max", d.max}});
  if (tol_l1) {
    Checks checks;
    checks.report("l1_distance", d.l1, *tol_l1, d.l1 <= *tol_l1);
    return checks.status();
  }
  return kPass;
}

// ---- multistate -------------------------------------------------------------

std::optional<FunctionalSpec> functional_from_json(const json& c, int n) {
  if (!c.contains("functional")) return std::nullopt;
  const json& j = c["functional"];
  const std::string kind = cfg::get_string(j, "kind", "config.functional");
  FunctionalSpec fs;
  fs.name = kind;
  if (kind == "constant") {
    const double v = cfg::get_double(j, "value", "config.functional", 1.0);
    fs.U = [v](const Vec&) { return v; };
  } else if (kind == "half_space") {
    Vec nrm = cfg::vec(cfg::require(j, "normal", "config.functional"), "config.functional.normal", n);
    const double off = cfg::get_double(j, "offset", "config.functional", 0.0);
    // Symmetric Heaviside: time spent on the boundary counts one half.
    fs.U = [nrm, off](const Vec& x) {
      const double s = dot(nrm, x) - off;
      return s > 0.0 ? 1.0 : s < 0.0 ? 0.0 : 0.5;
    };
  } else {
    throw ConfigError("config.functional.kind", "unknown functional '" + kind + "'");
  }
  return fs;
}

int cmd_multistate(const json& c, const Flags& f) {
  const json& mj = c.contains("model") ? c["model"] : c;
  auto model = state_model_from_json(mj, c.contains("model") ? "config.model" : "config");
  const int n = model.dimension();
  const auto n_paths = resolve_paths(c, f, 10000);
  if (n_paths < 1) throw ConfigError("paths", "must be positive");
  const auto seed = resolve_seed(c, f);
  const double t = resolve_time(c, f, "t");
  auto functional = functional_from_json(c, n);
  Checks checks;
  json report{{"paths", n_paths}, {"t", t}};

  // Total probability of the Montroll transform at k = 0.
  for (double s : {0.5, 1.0, 3.0}) {
    auto mt = montroll_transform(model, {0.0, 0.0, 0.0}, s);
    const double dev = std::abs(mt.value.sum() - 1.0 / s);
    checks.report("montroll_k0_s" + num(s), dev, 1e-10, dev <= 1e-10);
  }

  if (f.validate || c.value("validate", false)) {
    std::vector<Vec> ks = !f.k_list.empty() ? parse_vec_list(f.k_list, n, "--k-list")
                          : c.contains("k_list") ? vec_list_json(c["k_list"], n, "config.k_list")
                                                 : std::vector<Vec>{Vec{0.5, 0, 0}, Vec{1.0, 0, 0}, Vec{2.0, 0, 0}};
    if (!model.exponential_only()) {
      std::fprintf(stderr, "error: validation refused: power-law waiting has only an asymptotic transform\n");
      return kUsage;
    }
    auto r = validate_multistate(model, ks, t, static_cast<std::size_t>(n_paths), seed);
    checks.report("multistate_ecf_max_deviation", r.max_deviation, r.tolerance, r.pass);
    json probes = json::array();
    for (const auto& p : r.probes)
      probes.push_back({{"k", vec_json(p.k, n)}, {"state", p.state}, {"oracle", cd_json(p.oracle)},
                        {"empirical", cd_json(p.empirical)}, {"deviation", p.deviation}});
    report["validation"] = {{"max_deviation", r.max_deviation}, {"tolerance", r.tolerance}, {"probes", probes}};
  }

  if (functional || !resolve_out(c, f).empty()) {
    auto e = simulate_multistate_ensemble(model, t, static_cast<std::size_t>(n_paths), seed ^ 0x5bd1e995u, {0, 0, 0},
                                          functional ? &*functional : nullptr);
    if (functional) {
      auto mean = functional_mean(e);
      report["functional"] = {{"kind", functional->name}, {"mean", mean.value}, {"std_error", mean.std_error}};
      if (c.contains("rho")) {
        json cfs = json::array();
        for (double rho : double_list(c["rho"], "config.rho")) {
          auto cf = empirical_functional_cf(e, rho);
          cfs.push_back({{"rho", rho}, {"cf", cd_json(cf.value)}, {"std_error", cf.std_error}});
        }
        report["functional"]["cf"] = cfs;
      }
      if (c["functional"].contains("expected_mean")) {
        const double want = cfg::get_double(c["functional"], "expected_mean", "config.functional");
        const double dev = std::abs(mean.value - want);
        checks.report("functional_mean", dev, 3.0 * mean.std_error, dev <= 3.0 * mean.std_error);
      }
    }
    if (c.contains("trajectories_out")) {
      auto o = open_out(cfg::get_string(c, "trajectories_out", "config"));
      std::vector<Trajectory> head(e.paths.begin(), e.paths.begin() + std::min<std::size_t>(e.paths.size(), 20));
      write_trajectories(o, head, true);
    }
  }
  write_json(resolve_out(c, f), report);
  return checks.status();
}

// ---- analyze ----------------------------------------------------------------

ProbeSpec probes_from_json(const json& c) {
  ProbeSpec p;
  if (!c.contains("probes")) return p;
  const json& j = c["probes"];
  p.k_min = cfg::get_double(j, "k_min", "config.probes", p.k_min);
  p.k_max = cfg::get_double(j, "k_max", "config.probes", p.k_max);
  p.radial = static_cast<int>(cfg::get_int(j, "radial", "config.probes", p.radial));
  p.angular = static_cast<int>(cfg::get_int(j, "angular", "config.probes", p.angular));
  p.refinements = static_cast<int>(cfg::get_int(j, "refinements", "config.probes", p.refinements));
  return p;
}

int analyze_coercivity(const json& c, const Flags& f) {
  auto m = measure_from_json(cfg::require(c, "measure", "config"), "config.measure");
  const double beta = cfg::get_double(c, "beta", "config"), lambda = cfg::get_double(c, "lambda", "config", 0.0);
  auto r = coercivity_ratio(m, beta, lambda, probes_from_json(c));
  const int n = m.dimension();
  json j{{"ratio_infimum", r.ratio_infimum}, {"argmin", vec_json(r.argmin, n)}, {"probes", r.probes},
         {"verdict", r.verdict()}, {"evaluations", r.evaluations}};
  if (r.witness)
    j["witness"] = {{"k", vec_json(*r.witness, n)}, {"numerator", r.witness_numerator}, {"denominator", r.witness_denominator}};
  Checks checks;
  const std::string expect = c.value("expect", std::string(""));
  if (expect == "degenerate") {
    const bool ok = !r.coercive && r.witness && r.witness_numerator <= 1e-10 && r.witness_denominator > 0.0;
    checks.report("coercivity_witness_numerator", r.witness ? r.witness_numerator : 1.0, 1e-10, ok);
  } else if (expect == "coercive") {
    const double floor = cfg::get_double(c, "floor", "config", 0.0);
    checks.report("coercivity_infimum", r.ratio_infimum, floor, r.coercive && r.ratio_infimum >= floor, ">=");
  }
  if (c.value("slopes", false) && lambda > 0.0) {
    Vec d = c.contains("slope_direction") ? Direction::normalized(n, cfg::vec(c["slope_direction"], "config.slope_direction", n)).coords()
                                          : Vec{1.0, 0.0, 0.0};
    auto s = coercivity_slopes(m, beta, lambda, d);
    j["slopes"] = {{"numerator_small", s.numerator_small}, {"denominator_small", s.denominator_small},
                   {"numerator_large", s.numerator_large}, {"denominator_large", s.denominator_large}};
    auto rel = [](double v, double want) { return std::abs(v / want - 1.0); };
    checks.report("slope_numerator_small", rel(s.numerator_small, 2.0), 0.05, rel(s.numerator_small, 2.0) <= 0.05);
    checks.report("slope_denominator_small", rel(s.denominator_small, 2.0), 0.05, rel(s.denominator_small, 2.0) <= 0.05);
    checks.report("slope_numerator_large", rel(s.numerator_large, beta), 0.05, rel(s.numerator_large, beta) <= 0.05);
    checks.report("slope_denominator_large", rel(s.denominator_large, beta), 0.05, rel(s.denominator_large, beta) <= 0.05);
  }
  std::printf("ratio_infimum=%s verdict=%s\n", num(r.ratio_infimum).c_str(), r.verdict().c_str());
  write_json(resolve_out(c, f), j);
  return checks.status();
}

int analyze_parseval(const json& c, const Flags& f) {
  auto m = measure_from_json(cfg::require(c, "measure", "config"), "config.measure");
  const double beta = cfg::get_double(c, "beta", "config"), lambda = cfg::get_double(c, "lambda", "config", 0.0);
  auto q = field_from_json(cfg::require(c, "field", "config"), m.dimension(), "config.field");
  ParsevalOptions o;
  o.grid = grid_from_json(cfg::require(c, "grid", "config"), "config.grid");
  o.tolerance = cfg::get_double(c, "tolerance", "config", o.tolerance);
  if (c.contains("x_panels")) o.bilinear.x_panels = static_cast<int>(cfg::get_int(c, "x_panels", "config"));
  auto r = parseval_bilinear_check(q, m, beta, lambda, o);
  Checks checks;
  checks.report("parseval_relative_deviation", r.relative_deviation, r.tolerance, r.pass);
  write_json(resolve_out(c, f), {{"bilinear", r.bilinear}, {"spectral", r.spectral},
                                 {"relative_deviation", r.relative_deviation}, {"bilinear_error", r.bilinear_error},
                                 {"spectral_tail_share", r.spectral_tail}, {"tolerance", r.tolerance}});
  return checks.status();
}

int analyze_counterexample(const json& c, const Flags& f) {
  const double beta = cfg::get_double(c, "beta", "config", 0.5), lambda = cfg::get_double(c, "lambda", "config", 1.0);
  std::vector<double> radii = c.contains("radii") ? double_list(c["radii"], "config.radii")
                                                  : std::vector<double>{1, 2, 5, 10, 20, 50};
  auto r = cfg::guarded("config", [&] { return counterexample_1d(beta, lambda, radii); });
  Checks checks;
  checks.report("counterexample_min_value", *std::min_element(r.values.begin(), r.values.end()), 0.0, r.positive, ">");
  checks.report("counterexample_monotone", r.monotone ? 1.0 : 0.0, 1.0, r.monotone, "==");
  checks.report("counterexample_seminorm_product", r.seminorm_q * r.seminorm_p, 0.0, r.seminorm_q * r.seminorm_p == 0.0, "==");
  write_json(resolve_out(c, f), {{"beta", beta}, {"lambda", lambda}, {"radii", r.radii}, {"values", r.values},
                                 {"limit", std::isfinite(r.limit) ? json(r.limit) : json("infinite")},
                                 {"seminorm_q", r.seminorm_q}, {"seminorm_p", r.seminorm_p},
                                 {"inequality_fails", r.inequality_fails()}});
  return checks.status();
}

int analyze_mass(const json& c, const Flags& f) {
  auto psi = symbol_from_json(cfg::require(c, "symbol", "config"), "config.symbol");
  auto g = grid_from_json(cfg::require(c, "grid", "config"), "config.grid");
  auto p0 = initial_density(cfg::require(c, "initial", "config"), g, "config.initial");
  std::vector<double> times = double_list(cfg::require(c, "times", "config"), "config.times");
  EvolveOptions eo;
  if (c.contains("enforce_boundary")) eo.enforce_boundary = c["enforce_boundary"].get<bool>();
  if (c.contains("corrupt")) psi = corrupted_symbol(psi, cfg::get_double(c, "corrupt", "config"));
  auto r = mass_conservation_check(psi, p0, times, eo);
  Checks checks;
  checks.report("mass_drift", r.max_drift, r.mass_tolerance, r.max_drift <= r.mass_tolerance);
  checks.report("semigroup_defect", r.semigroup_defect, r.semigroup_tolerance, r.semigroup_defect <= r.semigroup_tolerance);
  write_json(resolve_out(c, f), {{"times", r.times}, {"masses", r.masses}, {"max_drift", r.max_drift},
                                 {"semigroup_defect", r.semigroup_defect}, {"decay_rate", r.decay_rate}});
  return checks.status();
}

int analyze_scaling(const json& c, const Flags& f) {
  const int n = static_cast<int>(cfg::get_int(c, "dimension", "config", 2));
  auto sigmas = double_list(cfg::require(c, "sigmas", "config"), "config.sigmas");
  auto probes = vec_list_json(cfg::require(c, "probes", "config"), n, "config.probes");
  auto r = cfg::guarded("config", [&] { return scaling_limit_check(sigmas, cfg::get_double(c, "K1", "config", 1.0), n, probes); });
  Checks checks;
  json rungs = json::array();
  for (const auto& g : r.rungs)
    rungs.push_back({{"sigma", g.sigma}, {"zeta_iso", g.zeta_iso}, {"zeta_axes", g.zeta_axes},
                     {"deviation_iso", g.deviation_iso}, {"deviation_axes", g.deviation_axes}});
  for (std::size_t i = 0; i < r.expected.size(); ++i) {
    const double di = std::abs(r.ratios_iso[i] / r.expected[i] - 1.0), da = std::abs(r.ratios_axes[i] / r.expected[i] - 1.0);
    checks.report("scaling_iso_rung" + std::to_string(i), r.ratios_iso[i], r.expected[i], di <= r.tolerance, "~");
    checks.report("scaling_axes_rung" + std::to_string(i), r.ratios_axes[i], r.expected[i], da <= r.tolerance, "~");
  }
  write_json(resolve_out(c, f), {{"K1", r.K1}, {"rungs", rungs}, {"ratios_iso", r.ratios_iso},
                                 {"ratios_axes", r.ratios_axes}, {"expected", r.expected}});
  return checks.status();
}

int cmd_analyze(const std::string& what, const json& c, const Flags& f) {
  if (what == "coercivity") return analyze_coercivity(c, f);
  if (what == "parseval") return analyze_parseval(c, f);
  if (what == "counterexample") return analyze_counterexample(c, f);
  if (what == "mass") return analyze_mass(c, f);
  if (what == "scaling") return analyze_scaling(c, f);
  throw ConfigError("analyze", "unknown analysis '" + what + "'");
}

// ---- run: bundled scenarios ----------------------------------------------------

OperatorCase case_from_string(const std::string& s, const std::string& path) {
  if (s == "caseI") return OperatorCase::caseI;
  if (s == "caseII") return OperatorCase::caseII;
  if (s == "general") return OperatorCase::general;
  throw ConfigError(path, "unknown case '" + s + "'");
}

int run_equivalence(const json& c, const Flags& f) {
  const json& list = cfg::require(c, "scenarios", "config");
  if (!list.is_array() || list.empty()) throw ConfigError("config.scenarios", "expected a nonempty array");
  Checks checks;
  json out = json::array();
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string p = "config.scenarios[" + std::to_string(i) + "]";
    const json& s = list[i];
    const std::string name = cfg::get_string(s, "name", p);
    auto m = measure_from_json(cfg::require(s, "measure", p), p + ".measure");
    auto prof = profile_from_json(cfg::require(s, "profile", p), m, p + ".profile");
    auto oc = case_from_string(cfg::get_string(s, "case", p), p + ".case");
    auto field = field_from_json(cfg::require(s, "field", p), m.dimension(), p + ".field");
    auto g = grid_from_json(cfg::require(s, "grid", p), p + ".grid");
    const json& pts = cfg::require(s, "points", p);
    auto points = lattice_points(m.dimension(), cfg::get_double(pts, "lo", p + ".points"),
                                 cfg::get_double(pts, "hi", p + ".points"), cfg::get_double(pts, "step", p + ".points"));
    const double tol = cfg::get_double(s, "tolerance", p, 1e-3);
    auto r = equivalence_check(oc, field, m, prof, g, points, {}, tol);
    checks.report("equivalence_" + name, r.relative_l2, tol, r.pass);
    out.push_back({{"name", name}, {"relative_l2", r.relative_l2}, {"max_abs", r.max_abs}, {"tail_bound", r.tail_bound},
                   {"points", r.points.size()}, {"seconds", r.seconds}, {"pass", r.pass}});
  }
  write_json(resolve_out(c, f), {{"scenario", c.value("scenario", std::string("equivalence"))},
                                 {"results", out}, {"verdict", checks.all ? "pass" : "fail"}});
  std::printf("verdict=%s\n", checks.all ? "pass" : "fail");
  return checks.status();
}

// Trajectory figures: each run shares the path seeds, so rows are comparable.
int run_trajectories(const json& c, const Flags& f) {
  const json& runs = cfg::require(c, "runs", "config");
  if (!runs.is_array() || runs.empty()) throw ConfigError("config.runs", "expected a nonempty array");
  const auto n_paths = resolve_paths(c, f, 5);
  const auto seed = resolve_seed(c, f);
  const std::string dir = resolve_out(c, f);
  std::map<std::string, std::vector<Trajectory>> results;
  std::map<std::string, JumpSpec> specs;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::string p = "config.runs[" + std::to_string(i) + "]";
    const std::string name = cfg::get_string(runs[i], "name", p);
    auto jump = jump_from_json(cfg::require(runs[i], "jump", p), p + ".jump");
    auto paths = sample_paths(jump, c, f, static_cast<std::size_t>(n_paths), seed);
    if (!dir.empty()) {
      auto o = open_out((fs::path(dir) / (name + ".csv")).string());
      write_trajectories(o, paths, true);
    }
    results.emplace(name, std::move(paths));
    specs.emplace(name, jump);
  }
  Checks checks;
  // Ratio of the largest to the median jump length over all paths of a run.
  auto spread = [&](const std::string& name) {
    std::vector<double> lens;
    for (const auto& tr : results.at(name))
      for (std::size_t i = 1; i < tr.positions.size(); ++i) lens.push_back(norm(tr.positions[i] - tr.positions[i - 1]));
    std::sort(lens.begin(), lens.end());
    return lens.back() / lens[lens.size() / 2];
  };
  if (c.contains("compare_spread")) {
    for (const auto& pair : c["compare_spread"]) {
      const std::string heavy = pair.at(0).get<std::string>(), light = pair.at(1).get<std::string>();
      const double a = spread(heavy), b = spread(light);
      checks.report("max_over_median_" + heavy + "_vs_" + light, a, b, a > b, ">");
    }
  }
  if (c.contains("drift_check")) {
    // Mean e2 displacement of an anisotropic run against its isotropic twin on shared seeds.
    const json& d = c["drift_check"];
    const std::string an = cfg::get_string(d, "anisotropic", "config.drift_check");
    const std::string is = cfg::get_string(d, "isotropic", "config.drift_check");
    const auto ens = cfg::get_int(d, "paths", "config.drift_check", 4000);
    const long long steps = cfg::get_int(d, "steps", "config.drift_check", 200);
    auto ends = [&](const JumpSpec& spec) {
      std::vector<double> y(static_cast<std::size_t>(ens));
      parallel_for(y.size(), [&](std::size_t i) {
        Rng rng = stream_rng(seed + 1, i);
        y[i] = simulate_jumps(spec, static_cast<std::size_t>(steps), {0, 0, 0}, rng).positions.back()[1];
      });
      return y;
    };
    auto ya = ends(specs.at(an)), yi = ends(specs.at(is));
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < ya.size(); ++i) mean += ya[i] - yi[i];
    mean /= ya.size();
    for (std::size_t i = 0; i < ya.size(); ++i) m2 += std::pow(ya[i] - yi[i] - mean, 2);
    const double se = std::sqrt(m2 / (ya.size() - 1.0) / ya.size());
    checks.report("upward_drift_" + an + "_minus_" + is, mean / se, 3.0, mean > 3.0 * se, ">");
  }
  return checks.status();
}

int cmd_run(const json& c, const Flags& f) {
  const std::string command = cfg::get_string(c, "command", "config");
  std::printf("scenario=%s command=%s\n", c.value("scenario", std::string("unnamed")).c_str(), command.c_str());
  if (command == "equivalence") return run_equivalence(c, f);
  if (command == "trajectories") return run_trajectories(c, f);
  if (command == "sample") return cmd_sample(c, f);
  if (command == "ecf") return cmd_ecf(c, f);
  if (command == "symbol") return cmd_symbol(c, f);
  if (command == "apply") return cmd_apply(c, f);
  if (command == "evolve") return cmd_evolve(c, f);
  if (command == "multistate") return cmd_multistate(c, f);
  if (command.rfind("analyze.", 0) == 0) return cmd_analyze(command.substr(8), c, f);
  throw ConfigError("config.command", "unknown command '" + command + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anisolap: anisotropic (tempered) fractional diffusion toolkit"};
  app.require_subcommand(1);
  Flags flags;
  std::string config;
  long long paths = -1, steps = -1;
  std::uint64_t seed = 0;
  double t = -1.0;

  auto add_common = [&](CLI::App* sub, bool sampling) {
    sub->add_option("--config", config, "JSON configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "output file");
    if (sampling) {
      sub->add_option("--paths", paths, "number of sample paths");
      sub->add_option("--seed", seed, "master seed");
      sub->add_option("--t", t, "time horizon");
    }
  };

  auto* sample = app.add_subcommand("sample", "simulate compound Poisson trajectories");
  add_common(sample, true);
  sample->add_option("--steps", steps, "fixed number of jumps instead of a time horizon");

  auto* ecf = app.add_subcommand("ecf", "empirical characteristic function against the exact one");
  add_common(ecf, true);
  ecf->add_option("--k-list", flags.k_list, "wavevectors 'k1,k2;k1,k2'");

  auto* symbol = app.add_subcommand("symbol", "tabulate a generator symbol");
  add_common(symbol, false);
  symbol->add_option("--k-grid", flags.k_grid, "min:max:count along --direction");
  symbol->add_option("--k-list", flags.k_list, "wavevectors 'k1,k2;k1,k2'");
  symbol->add_option("--direction", flags.direction, "direction for --k-grid");

  auto* apply = app.add_subcommand("apply", "real-space operator at points");
  add_common(apply, false);
  apply->add_option("--field", flags.field, "field name (config 'fields' entry, or gaussian/bump)");
  apply->add_option("--points", flags.points, "CSV of evaluation points");

  auto* evolve = app.add_subcommand("evolve", "spectral density evolution");
  add_common(evolve, false);
  evolve->add_option("--t", t, "evolution time");
  evolve->add_option("--seed", seed, "seed for time-fractional subordination");

  auto* compare = app.add_subcommand("compare", "distances between two density CSVs");
  std::string fa, fb;
  double tol_l1 = -1.0;
  compare->add_option("--a", fa, "first density")->required()->check(CLI::ExistingFile);
  compare->add_option("--b", fb, "second density")->required()->check(CLI::ExistingFile);
  compare->add_option("--tol-l1", tol_l1, "fail when the L1 distance exceeds this");
  compare->add_option("--out", flags.out, "JSON report");

  auto* multi = app.add_subcommand("multistate", "multi-state CTRW simulation and validation");
  add_common(multi, true);
  multi->add_flag("--validate", flags.validate, "compare state-resolved ECFs with the exact oracle");
  multi->add_option("--k-list", flags.k_list, "validation wavevectors");

  auto* analyze = app.add_subcommand("analyze", "coercivity, parseval, counterexample, mass, scaling");
  std::string what;
  analyze->add_option("what", what, "analysis")
      ->required()
      ->check(CLI::IsMember({"coercivity", "parseval", "counterexample", "mass", "scaling"}));
  add_common(analyze, false);

  auto* run = app.add_subcommand("run", "run a bundled scenario config");
  add_common(run, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  if (paths >= 0) flags.paths = paths;
  if (steps >= 0) flags.steps = steps;
  if (t >= 0.0) flags.t = t;
  for (auto* sub : {sample, ecf, evolve, multi, run})
    if (sub->parsed() && sub->count("--seed")) flags.seed = seed;

  try {
    if (compare->parsed())
      return cmd_compare(fa, fb, tol_l1 >= 0.0 ? std::optional<double>(tol_l1) : std::nullopt, flags.out);
    const json c = load_json_file(config);
    if (sample->parsed()) return cmd_sample(c, flags);
    if (ecf->parsed()) return cmd_ecf(c, flags);
    if (symbol->parsed()) return cmd_symbol(c, flags);
    if (apply->parsed()) return cmd_apply(c, flags);
    if (evolve->parsed()) return cmd_evolve(c, flags);
    if (multi->parsed()) return cmd_multistate(c, flags);
    if (analyze->parsed()) return cmd_analyze(what, c, flags);
    if (run->parsed()) return cmd_run(c, flags);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kUsage;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFail;
  }
  return kUsage;
}
