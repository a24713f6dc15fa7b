#pragma once

#include <json.hpp>

#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "anisolap/evolve.hpp"
#include "anisolap/fields.hpp"
#include "anisolap/measures.hpp"
#include "anisolap/multistate.hpp"
#include "anisolap/sampler.hpp"
#include "anisolap/symbols.hpp"

namespace anisolap {

using json = nlohmann::json;

// Invalid or incomplete configuration; `what()` names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& msg) : std::runtime_error(path + ": " + msg) {}
};

namespace cfg {

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

inline const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(join(path, key), "missing required field");
  return *it;
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

inline double get_double(const json& j, const std::string& key, const std::string& path) {
  return number(require(j, key, path), join(path, key));
}
inline double get_double(const json& j, const std::string& key, const std::string& path, double fallback) {
  return j.contains(key) ? get_double(j, key, path) : fallback;
}

inline long long get_int(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return v.get<long long>();
}
inline long long get_int(const json& j, const std::string& key, const std::string& path, long long fallback) {
  return j.contains(key) ? get_int(j, key, path) : fallback;
}

inline std::string get_string(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_string()) throw ConfigError(join(path, key), "expected a string");
  return v.get<std::string>();
}

inline Vec vec(const json& j, const std::string& path, int max_dim = 3) {
  if (!j.is_array() || j.empty() || static_cast<int>(j.size()) > max_dim) throw ConfigError(path, "expected a coordinate array");
  Vec v{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = number(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

inline json vec_json(const Vec& v, int n) {
  json a = json::array();
  for (int i = 0; i < n; ++i) a.push_back(v[i]);
  return a;
}

// Rethrow library validation errors with the field path attached.
template <class F>
auto guarded(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(path, e.what());
  }
}

}  // namespace cfg

// {"dimension": n, "atoms": [[[coords...], w], ...], "bands": [{"region": [lo, hi], "density": d}]}
// Bands also accept "region_pi" (multiples of pi) and "mass" instead of "density";
// {"dimension": n, "preset": "isotropic"} is a shorthand.
inline DirectionalMeasure measure_from_json(const json& j, const std::string& path = "measure") {
  const int n = static_cast<int>(cfg::get_int(j, "dimension", path));
  return cfg::guarded(path, [&] {
    check_dimension(n);
    if (j.contains("preset")) {
      const std::string p = cfg::get_string(j, "preset", path);
      if (p == "isotropic") return isotropic_measure(n);
      if (p == "half_plane")  // upper/lower are the masses of the two half-planes
        return half_plane_measure(cfg::get_double(j, "upper", path) / kPi, cfg::get_double(j, "lower", path) / kPi);
      throw ConfigError(cfg::join(path, "preset"), "unknown preset '" + p + "'");
    }
    std::vector<Atom> atoms;
    std::vector<Band> bands;
    if (j.contains("atoms")) {
      const json& a = j["atoms"];
      if (!a.is_array()) throw ConfigError(path + ".atoms", "expected an array");
      std::vector<std::pair<Vec, double>> raw;
      for (std::size_t i = 0; i < a.size(); ++i) {
        std::string p = path + ".atoms[" + std::to_string(i) + "]";
        if (!a[i].is_array() || a[i].size() != 2) throw ConfigError(p, "expected [[coords...], weight]");
        Vec v = cfg::vec(a[i][0], p + "[0]", n);
        if (static_cast<int>(a[i][0].size()) != n) throw ConfigError(p, "coordinate count differs from dimension");
        raw.emplace_back(v, cfg::number(a[i][1], p + "[1]"));
      }
      for (const auto& [v, w] : raw) {
        if (!(w >= 0.0)) throw ConfigError(path + ".atoms", "negative weight");
        atoms.push_back({Direction::normalized(n, v), w});
      }
    }
    if (j.contains("bands")) {
      const json& b = j["bands"];
      if (!b.is_array()) throw ConfigError(path + ".bands", "expected an array");
      for (std::size_t i = 0; i < b.size(); ++i) {
        std::string p = path + ".bands[" + std::to_string(i) + "]";
        const bool in_pi = b[i].contains("region_pi");
        const json& r = cfg::require(b[i], in_pi ? "region_pi" : "region", p);
        const std::size_t want = n == 2 ? 2 : 4;
        if (!r.is_array() || r.size() != want) throw ConfigError(p, "region needs " + std::to_string(want) + " angles");
        std::vector<double> ang;
        for (std::size_t q = 0; q < want; ++q) ang.push_back(cfg::number(r[q], p + ".region") * (in_pi ? kPi : 1.0));
        Band band;
        band.theta_lo = ang[0];
        band.theta_hi = ang[1];
        if (n == 3) {
          band.phi_lo = ang[2];
          band.phi_hi = ang[3];
        }
        if (b[i].contains("mass")) {
          const double area = band.area(n);
          if (!(area > 0.0)) throw ConfigError(p, "band has zero angular area");
          band.density = cfg::get_double(b[i], "mass", p) / area;
        } else {
          band.density = cfg::get_double(b[i], "density", p);
        }
        bands.push_back(band);
      }
    }
    if (j.contains("atoms") && !j.contains("bands")) {
      // Atom weights are renormalized, as for make_atomic_measure.
      double total = 0.0;
      for (const auto& a : atoms) total += a.weight;
      if (!(total > 0.0)) throw ConfigError(path + ".atoms", "zero total weight");
      for (auto& a : atoms) a.weight /= total;
    }
    return DirectionalMeasure(n, std::move(atoms), std::move(bands));
  });
}

inline json to_json(const DirectionalMeasure& m) {
  const int n = m.dimension();
  json j{{"dimension", n}};
  if (!m.atoms().empty()) {
    json a = json::array();
    for (const auto& at : m.atoms()) a.push_back(json::array({cfg::vec_json(at.direction.coords(), n), at.weight}));
    j["atoms"] = a;
  }
  if (!m.bands().empty()) {
    json b = json::array();
    for (const auto& band : m.bands()) {
      json r = json::array({band.theta_lo / kPi, band.theta_hi / kPi});
      if (n == 3) {
        r.push_back(band.phi_lo / kPi);
        r.push_back(band.phi_hi / kPi);
      }
      b.push_back({{"region_pi", r}, {"mass", band.mass(n)}});
    }
    j["bands"] = b;
  }
  return j;
}

// {"beta": b, "lambda": l} or {"atoms": [{"beta", "lambda"}...], "bands": [...]}.
inline StabilityProfile profile_from_json(const json& j, const DirectionalMeasure& m, const std::string& path = "profile") {
  return cfg::guarded(path, [&] {
    if (j.contains("beta")) {
      return StabilityProfile::constant(m, cfg::get_double(j, "beta", path), cfg::get_double(j, "lambda", path, 0.0));
    }
    auto list = [&](const char* key, std::size_t count) {
      std::vector<ComponentParams> out;
      if (!j.contains(key)) {
        if (count) throw ConfigError(cfg::join(path, key), "missing per-component parameters");
        return out;
      }
      const json& a = j[key];
      if (!a.is_array() || a.size() != count) throw ConfigError(cfg::join(path, key), "needs one entry per component");
      for (std::size_t i = 0; i < a.size(); ++i) {
        std::string p = cfg::join(path, key) + "[" + std::to_string(i) + "]";
        out.push_back({cfg::get_double(a[i], "beta", p), cfg::get_double(a[i], "lambda", p, 0.0)});
      }
      return out;
    };
    return StabilityProfile(m, list("atoms", m.atoms().size()), list("bands", m.bands().size()));
  });
}

inline json to_json(const StabilityProfile& p) {
  if (p.is_constant()) {
    const auto& c = !p.atoms().empty() ? p.atoms().front() : p.bands().front();
    return {{"beta", c.beta}, {"lambda", c.lambda}};
  }
  json j;
  for (const auto* key : {"atoms", "bands"}) {
    const auto& list = std::string(key) == "atoms" ? p.atoms() : p.bands();
    json a = json::array();
    for (const auto& c : list) a.push_back({{"beta", c.beta}, {"lambda", c.lambda}});
    j[key] = a;
  }
  return j;
}

// {"kind": "gaussian_iso" | "gaussian_axes", "dimension", "sigma"}
// {"kind": "gaussian_aniso", "measure", "sigma" | "atom_sigma" + "band_sigma"}
// {"kind": "stable" | "tempered_stable", "measure", "beta", "r0", "lambda"}
inline JumpSpec jump_from_json(const json& j, const std::string& path = "jump") {
  const std::string kind = cfg::get_string(j, "kind", path);
  return cfg::guarded(path, [&]() -> JumpSpec {
    if (kind == "gaussian_iso" || kind == "gaussian_axes") {
      const int n = static_cast<int>(cfg::get_int(j, "dimension", path));
      const double s = cfg::get_double(j, "sigma", path);
      JumpSpec spec = kind == "gaussian_iso" ? JumpSpec(GaussianIsoJump{n, s}) : JumpSpec(GaussianAxesJump{n, s});
      validate(spec);
      return spec;
    }
    if (kind == "gaussian_aniso") {
      auto m = measure_from_json(cfg::require(j, "measure", path), path + ".measure");
      if (j.contains("sigma")) return GaussianAnisoJump{GaussianAnisoSpec::uniform_sigma(m, cfg::get_double(j, "sigma", path))};
      auto list = [&](const char* key) {
        std::vector<double> v;
        if (!j.contains(key)) return v;
        for (const auto& x : j[key]) v.push_back(cfg::number(x, cfg::join(path, key)));
        return v;
      };
      return GaussianAnisoJump{GaussianAnisoSpec(m, list("atom_sigma"), list("band_sigma"))};
    }
    if (kind == "stable" || kind == "tempered_stable") {
      auto m = measure_from_json(cfg::require(j, "measure", path), path + ".measure");
      const double lambda = kind == "stable" ? cfg::get_double(j, "lambda", path, 0.0) : cfg::get_double(j, "lambda", path);
      if (kind == "stable" && lambda != 0.0) throw ConfigError(path + ".lambda", "use kind tempered_stable for lambda > 0");
      auto s = make_stable_jump(m, cfg::get_double(j, "beta", path), cfg::get_double(j, "r0", path), lambda);
      s.max_rejections = static_cast<int>(cfg::get_int(j, "max_rejections", path, s.max_rejections));
      return s;
    }
    throw ConfigError(path + ".kind", "unknown jump kind '" + kind + "'");
  });
}

inline json to_json(const JumpSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianIsoJump>) {
          return {{"kind", "gaussian_iso"}, {"dimension", s.dimension}, {"sigma", s.sigma}};
        } else if constexpr (std::is_same_v<T, GaussianAxesJump>) {
          return {{"kind", "gaussian_axes"}, {"dimension", s.dimension}, {"sigma", s.sigma}};
        } else if constexpr (std::is_same_v<T, GaussianAnisoJump>) {
          return {{"kind", "gaussian_aniso"},
                  {"measure", to_json(*s.spec.measure)},
                  {"atom_sigma", s.spec.atom_sigma},
                  {"band_sigma", s.spec.band_sigma}};
        } else {
          json j{{"kind", s.lambda > 0.0 ? "tempered_stable" : "stable"},
                 {"measure", to_json(*s.measure)},
                 {"beta", s.beta},
                 {"r0", s.r0}};
          if (s.lambda > 0.0) j["lambda"] = s.lambda;
          return j;
        }
      },
      spec);
}

// Generator symbols by kind; "zeta" scales any kind.
inline GeneratorSymbol symbol_from_json(const json& j, const std::string& path = "symbol") {
  const std::string kind = cfg::get_string(j, "kind", path);
  return cfg::guarded(path, [&]() -> GeneratorSymbol {
    const double zeta = cfg::get_double(j, "zeta", path, 1.0);
    auto measure = [&] { return measure_from_json(cfg::require(j, "measure", path), path + ".measure"); };
    std::optional<GeneratorSymbol> s;
    if (kind == "gaussian_iso" || kind == "gaussian_axes") {
      s = make_gaussian_symbol(kind == "gaussian_iso" ? GaussianVariant::iso : GaussianVariant::axes,
                               static_cast<int>(cfg::get_int(j, "dimension", path)), cfg::get_double(j, "sigma", path));
    } else if (kind == "gaussian_aniso") {
      auto spec = std::get<GaussianAnisoJump>(jump_from_json(j, path)).spec;
      s = make_gaussian_aniso_symbol(spec);
    } else if (kind == "stable_aniso" || kind == "tempered_aniso") {
      s = make_tempered_symbol(measure(), cfg::get_double(j, "beta", path), cfg::get_double(j, "lambda", path, 0.0));
    } else if (kind == "beta1_aniso") {
      s = make_beta1_symbol(measure(), cfg::get_double(j, "lambda", path, 0.0));
    } else if (kind == "beta2_quadratic") {
      s = make_beta2_symbol(measure(), cfg::get_double(j, "lambda", path, 0.0));
    } else if (kind == "general_profile") {
      auto m = measure();
      s = make_general_symbol(m, profile_from_json(cfg::require(j, "profile", path), m, path + ".profile"));
    } else if (kind == "isotropic_reference") {
      s = make_isotropic_reference_symbol(static_cast<int>(cfg::get_int(j, "dimension", path)),
                                          cfg::get_double(j, "beta", path), cfg::get_double(j, "lambda", path, 0.0));
    } else if (kind == "heat") {
      s = make_heat_symbol(static_cast<int>(cfg::get_int(j, "dimension", path)), cfg::get_double(j, "K1", path));
    } else if (kind == "compound_poisson") {
      // zeta (Lambda(k) - 1) for a jump law with rate zeta.
      auto jump = std::make_shared<const JumpSpec>(jump_from_json(cfg::require(j, "jump", path), path + ".jump"));
      return GeneratorSymbol(SymbolKind::custom, jump_dimension(*jump),
                             [jump, zeta](const Vec& k) { return zeta * (jump_cf(*jump, k) - 1.0); }, "compound_poisson");
    } else {
      throw ConfigError(path + ".kind", "unknown symbol kind '" + kind + "'");
    }
    return zeta == 1.0 ? *s : s->scaled(zeta);
  });
}

inline SpectralGrid grid_from_json(const json& j, const std::string& path = "grid") {
  return cfg::guarded(path, [&] {
    return SpectralGrid(static_cast<int>(cfg::get_int(j, "dimension", path)), cfg::get_double(j, "L", path),
                        static_cast<int>(cfg::get_int(j, "N", path)));
  });
}

inline json to_json(const SpectralGrid& g) { return {{"dimension", g.dimension}, {"L", g.L}, {"N", g.N}}; }

// {"kind": "gaussian", "width", "center", "amplitude"} | {"kind": "bump", "radius", ...}
// | {"kind": "cosine", "k", "phase"}
inline ScalarField field_from_json(const json& j, int n, const std::string& path = "field") {
  const std::string kind = cfg::get_string(j, "kind", path);
  return cfg::guarded(path, [&] {
    Vec c = j.contains("center") ? cfg::vec(j["center"], path + ".center", n) : Vec{0.0, 0.0, 0.0};
    const double amp = cfg::get_double(j, "amplitude", path, 1.0);
    if (kind == "gaussian") return gaussian_bump(n, c, cfg::get_double(j, "width", path), amp);
    if (kind == "bump") return compact_bump(n, c, cfg::get_double(j, "radius", path), amp);
    if (kind == "cosine")
      return cosine_wave(n, cfg::vec(cfg::require(j, "k", path), path + ".k", n), cfg::get_double(j, "phase", path, 0.0));
    throw ConfigError(path + ".kind", "unknown field kind '" + kind + "'");
  });
}

inline WaitingLaw waiting_from_json(const json& j, const std::string& path) {
  const std::string kind = cfg::get_string(j, "kind", path);
  WaitingLaw w;
  if (kind == "exp") w = WaitingLaw::exponential(cfg::get_double(j, "rate", path));
  else if (kind == "power") w = WaitingLaw::power_law(cfg::get_double(j, "alpha", path), cfg::get_double(j, "scale", path, 1.0));
  else throw ConfigError(path + ".kind", "unknown waiting law '" + kind + "'");
  cfg::guarded(path, [&] {
    w.validate();
    return 0;
  });
  return w;
}

inline json to_json(const WaitingLaw& w) {
  if (w.kind == WaitingLaw::Kind::exponential) return {{"kind", "exp"}, {"rate", w.rate}};
  return {{"kind", "power"}, {"alpha", w.alpha}, {"scale", w.scale}};
}

// {"N": 2, "M": [[...]], "init": [...], "waiting": [...], "jumps": [...]}
inline StateModel state_model_from_json(const json& j, const std::string& path = "model") {
  const int n = static_cast<int>(cfg::get_int(j, "N", path));
  if (n < 1) throw ConfigError(path + ".N", "need at least one state");
  StateModel m;
  const json& M = cfg::require(j, "M", path);
  if (!M.is_array() || static_cast<int>(M.size()) != n) throw ConfigError(path + ".M", "expected N rows");
  m.M.resize(n, n);
  for (int i = 0; i < n; ++i) {
    std::string p = path + ".M[" + std::to_string(i) + "]";
    if (!M[i].is_array() || static_cast<int>(M[i].size()) != n) throw ConfigError(p, "expected N entries");
    for (int k = 0; k < n; ++k) m.M(i, k) = cfg::number(M[i][k], p);
  }
  const json& init = cfg::require(j, "init", path);
  if (!init.is_array() || static_cast<int>(init.size()) != n) throw ConfigError(path + ".init", "expected N entries");
  for (const auto& v : init) m.init.push_back(cfg::number(v, path + ".init"));
  const json& w = cfg::require(j, "waiting", path);
  const json& jp = cfg::require(j, "jumps", path);
  if (!w.is_array() || static_cast<int>(w.size()) != n) throw ConfigError(path + ".waiting", "expected N laws");
  if (!jp.is_array() || static_cast<int>(jp.size()) != n) throw ConfigError(path + ".jumps", "expected N jump specs");
  for (int i = 0; i < n; ++i) {
    m.waiting.push_back(waiting_from_json(w[i], path + ".waiting[" + std::to_string(i) + "]"));
    m.jumps.push_back(jump_from_json(jp[i], path + ".jumps[" + std::to_string(i) + "]"));
  }
  cfg::guarded(path, [&] {
    m.validate();
    return 0;
  });
  return m;
}

inline json to_json(const StateModel& m) {
  const int n = m.size();
  json M = json::array();
  for (int i = 0; i < n; ++i) {
    json row = json::array();
    for (int k = 0; k < n; ++k) row.push_back(m.M(i, k));
    M.push_back(row);
  }
  json w = json::array(), jp = json::array();
  for (int i = 0; i < n; ++i) {
    w.push_back(to_json(m.waiting[i]));
    jp.push_back(to_json(m.jumps[i]));
  }
  return {{"N", n}, {"M", M}, {"init", m.init}, {"waiting", w}, {"jumps", jp}};
}

inline json load_json_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(file, std::string("JSON parse error: ") + e.what());
  }
}

}  // namespace anisolap
