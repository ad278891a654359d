#pragma once

// Run description shared by the command-line tool and the tests: one JSON document naming the
// manifold, the family, the points, the tasks, the output and the oracle settings.
//
//   {
//     "manifold": "sphere:2" | {"id": "torus-conformal", "dim": 3, "terms": [[0.1, 1, 1, 0]]},
//     "family":   "sasaki" | {"alpha": "exp(t)", "beta": "exp(t)"} | {"alpha": "1+t", "beta_flatness": true},
//     "t_max": 25,
//     "points": [{"x": [1.0, 0.3], "v": [0.5, 0.0]}],
//     "grid": {"x": [[1.0, 0.3]], "speeds": [0, 0.5, 1.5], "directions": [[1, 0]]},
//     "tasks": ["verify"],
//     "output": {"path": "-", "format": "json"},
//     "oracle": {"strategy": "richardson", "base_step": 0, "tol_abs": 1e-5, "tol_rel": 1e-3}
//   }

#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tbcurv/basemanifold.hpp"
#include "tbcurv/bundlemetric.hpp"
#include "tbcurv/errors.hpp"
#include "tbcurv/metricfamily.hpp"
#include "tbcurv/oracle.hpp"

namespace tbcurv {

enum class OutputFormat { Json, Csv, Text };

struct RunConfig {
  nlohmann::ordered_json manifold_spec;  // null when absent
  nlohmann::ordered_json family_spec;
  double t_max = NaturalMetricFamily::default_t_max;
  std::size_t samples = 4096;
  std::vector<BundlePoint> explicit_points;
  std::optional<nlohmann::ordered_json> grid;
  std::vector<std::string> tasks;
  std::string out_path = "-";
  OutputFormat format = OutputFormat::Json;
  OracleConfig oracle = OracleConfig::defaults();
};

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_number(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double x = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(std::string("bad number '") + s + "' in " + what);
  }
}

inline Vector to_vector(const nlohmann::ordered_json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(std::string(what) + " must be an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

template <class T>
T get_or(const nlohmann::ordered_json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace detail

/// Comma-separated numbers, e.g. "1.0,0.3".
inline Vector parse_vector(std::string_view text, const char* what) {
  std::vector<double> xs;
  for (const std::string& part : detail::split(text, ',')) xs.push_back(detail::parse_number(part, what));
  return Eigen::Map<Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

/// "name[:dim][:option...]" with options polar, stereographic, r=<radius>.
inline nlohmann::ordered_json manifold_spec_from_text(std::string_view text) {
  const auto parts = detail::split(text, ':');
  nlohmann::ordered_json j;
  j["id"] = parts[0];
  if (parts.size() > 1) j["dim"] = static_cast<int>(detail::parse_number(parts[1], "manifold dimension"));
  for (std::size_t k = 2; k < parts.size(); ++k) {
    const std::string& opt = parts[k];
    if (opt == "polar" || opt == "stereographic")
      j["chart"] = opt;
    else if (opt.rfind("r=", 0) == 0)
      j["radius"] = detail::parse_number(opt.substr(2), "sphere radius");
    else
      throw ConfigError("unknown manifold option '" + opt + "'");
  }
  return j;
}

inline ChartManifold manifold_from_spec(const nlohmann::ordered_json& spec_in) {
  if (spec_in.is_null()) throw ConfigError("no manifold given");
  const nlohmann::ordered_json spec = spec_in.is_string() ? manifold_spec_from_text(spec_in.get<std::string>()) : spec_in;
  if (!spec.is_object() || !spec.contains("id")) throw ConfigError("manifold needs an id");
  const std::string id = detail::get_or<std::string>(spec, "id", "");
  const int dim = detail::get_or<int>(spec, "dim", 2);
  if (dim < 2 || dim > 8) throw ConfigError("manifold dimension must be between 2 and 8");
  if (id == "euclidean") return euclidean(dim);
  if (id == "hyperbolic") return hyperbolic(dim);
  if (id == "sphere") {
    const std::string chart = detail::get_or<std::string>(spec, "chart", "polar");
    if (chart != "polar" && chart != "stereographic") throw ConfigError("sphere chart must be polar or stereographic");
    return sphere(dim, detail::get_or<double>(spec, "radius", 1.0),
                  chart == "polar" ? SphereChart::Polar : SphereChart::Stereographic);
  }
  if (id == "torus-conformal") {
    ConformalPolynomial f;
    if (spec.contains("terms")) {
      if (!spec["terms"].is_array()) throw ConfigError("torus-conformal terms must be an array");
      for (const auto& term : spec["terms"]) {
        const Vector t = detail::to_vector(term, "conformal term");
        if (t.size() != dim + 1) throw ConfigError("each conformal term is [coefficient, exponent_1..exponent_n]");
        Monomial m{t[0], {}};
        for (int k = 1; k <= dim; ++k) {
          if (t[k] != std::floor(t[k])) throw ConfigError("conformal exponents must be integers");
          m.powers.push_back(static_cast<int>(t[k]));
        }
        f.terms.push_back(std::move(m));
      }
    }
    return torus_conformal(dim, std::move(f));
  }
  throw ConfigError("unknown manifold '" + id + "' (expected euclidean, sphere, hyperbolic or torus-conformal)");
}

inline NaturalMetricFamily family_from_spec(const nlohmann::ordered_json& spec, double t_max) {
  if (spec.is_string() || (spec.is_object() && spec.contains("preset"))) {
    const std::string name = spec.is_string() ? spec.get<std::string>() : detail::get_or<std::string>(spec, "preset", "");
    const auto p = preset_from_name(name);
    if (!p) throw ConfigError("unknown family preset '" + name + "' (expected sasaki, cheeger-gromoll, exp+ or exp-)");
    return make_family(*p, t_max);
  }
  if (!spec.is_object() || !spec.contains("alpha")) throw ConfigError("family needs a preset name or an alpha expression");
  const ScalarFunction alpha = ScalarFunction::parse(detail::get_or<std::string>(spec, "alpha", ""));
  const bool flat = detail::get_or<bool>(spec, "beta_flatness", false);
  if (flat && spec.contains("beta")) throw ConfigError("give either beta or beta_flatness, not both");
  if (!flat && !spec.contains("beta")) throw ConfigError("custom family needs beta or beta_flatness");
  const ScalarFunction beta = flat ? flatness_beta(alpha) : ScalarFunction::parse(detail::get_or<std::string>(spec, "beta", ""));
  const std::string name = detail::get_or<std::string>(spec, "name", flat ? "custom-flat" : "custom");
  return NaturalMetricFamily(alpha, beta, name, t_max);
}

inline OutputFormat format_from_name(std::string_view s) {
  if (s == "json") return OutputFormat::Json;
  if (s == "csv") return OutputFormat::Csv;
  if (s == "text") return OutputFormat::Text;
  throw ConfigError("unknown output format '" + std::string(s) + "' (expected json, csv or text)");
}

inline RunConfig run_config_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig rc;
  if (j.contains("manifold")) rc.manifold_spec = j["manifold"];
  rc.family_spec = j.contains("family") ? j["family"] : nlohmann::ordered_json("sasaki");
  rc.t_max = detail::get_or<double>(j, "t_max", rc.t_max);
  rc.samples = detail::get_or<std::size_t>(j, "samples", rc.samples);
  if (rc.samples < 2) throw ConfigError("samples must be at least 2");
  if (j.contains("points")) {
    if (!j["points"].is_array()) throw ConfigError("points must be an array");
    for (const auto& p : j["points"]) {
      if (!p.is_object() || !p.contains("x")) throw ConfigError("each point needs x");
      const Vector x = detail::to_vector(p["x"], "point x");
      const Vector v = p.contains("v") ? detail::to_vector(p["v"], "point v") : Vector(Vector::Zero(x.size()));
      rc.explicit_points.push_back({x, v});
    }
  }
  if (j.contains("grid")) rc.grid = j["grid"];
  if (j.contains("tasks")) {
    if (!j["tasks"].is_array()) throw ConfigError("tasks must be an array");
    for (const auto& t : j["tasks"]) rc.tasks.push_back(t.get<std::string>());
  }
  if (j.contains("output")) {
    rc.out_path = detail::get_or<std::string>(j["output"], "path", rc.out_path);
    rc.format = format_from_name(detail::get_or<std::string>(j["output"], "format", "json"));
  }
  if (j.contains("oracle")) {
    const auto& o = j["oracle"];
    const StepStrategy s = strategy_from_name(detail::get_or<std::string>(o, "strategy", "richardson"));
    rc.oracle = OracleConfig::defaults(s);
    rc.oracle.diff.base_step = detail::get_or<double>(o, "base_step", 0.0);
    rc.oracle.tol.abs = detail::get_or<double>(o, "tol_abs", rc.oracle.tol.abs);
    rc.oracle.tol.rel = detail::get_or<double>(o, "tol_rel", rc.oracle.tol.rel);
  }
  rc.oracle.check();
  return rc;
}

/// Explicit points followed by the grid (base points x directions x speeds, in that nesting).
/// Grid directions are chart vectors scaled to unit g-length; the default is the first chart axis.
inline std::vector<BundlePoint> expand_points(const RunConfig& rc, const ChartManifold& m) {
  std::vector<BundlePoint> pts = rc.explicit_points;
  if (rc.grid) {
    const auto& g = *rc.grid;
    if (!g.contains("x")) throw ConfigError("grid needs base points x");
    std::vector<Vector> dirs;
    if (g.contains("directions"))
      for (const auto& d : g["directions"]) dirs.push_back(detail::to_vector(d, "grid direction"));
    else
      dirs.push_back(Vector::Unit(m.dim(), 0));
    std::vector<double> speeds{0.0};
    if (g.contains("speeds")) speeds = g["speeds"].get<std::vector<double>>();
    for (const auto& xj : g["x"]) {
      const Vector x = detail::to_vector(xj, "grid x");
      if (x.size() != m.dim()) throw ConfigError("grid point has the wrong dimension");
      const Matrix gx = m.metric(x);
      for (const Vector& d : dirs) {
        if (d.size() != m.dim()) throw ConfigError("grid direction has the wrong dimension");
        const double len = std::sqrt(d.dot(gx * d));
        if (!(len > 0.0)) throw ConfigError("grid direction must be nonzero");
        for (double s : speeds) pts.push_back({x, Vector(s / len * d)});
      }
    }
  }
  for (const BundlePoint& p : pts)
    if (p.x.size() != m.dim() || p.v.size() != m.dim())
      throw ConfigError("point dimension does not match manifold '" + m.id() + "'");
  if (pts.empty()) throw ConfigError("no points given");
  return pts;
}

}  // namespace tbcurv
