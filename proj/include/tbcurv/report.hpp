#pragma once

// JSON and text renderings of curvature reports. Key order is fixed, floats are shortest
// round-trip, so identical runs give identical bytes.

#include <sstream>
#include <string>

#include <json.hpp>

#include "tbcurv/oracle.hpp"

namespace tbcurv {

using Json = nlohmann::ordered_json;

inline Json to_json(const Vector& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (int j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline Json to_json(const OracleConfig& c) {
  return Json{{"strategy", std::string(strategy_name(c.diff.strategy))},
              {"base_step", c.diff.base()},
              {"tol_abs", c.tol.abs},
              {"tol_rel", c.tol.rel}};
}

inline Json to_json(const SignCalibration& s) {
  Json classes = Json::object();
  for (std::size_t k = 0; k < component_class_count; ++k) {
    const std::string name(class_name(static_cast<ComponentClass>(k)));
    classes[name] = s.class_sign[k] ? Json(*s.class_sign[k]) : Json(nullptr);
  }
  Json mixed = Json::array();
  for (ComponentClass c : s.mixed) mixed.push_back(std::string(class_name(c)));
  return Json{{"sign", s.sign}, {"underdetermined", s.underdetermined}, {"class_sign", classes}, {"erratum_classes", mixed}};
}

inline Json to_json(const CurvatureReport& r) {
  Json j;
  j["manifold"] = r.manifold;
  j["family"] = Json{{"name", r.family}, {"alpha", r.alpha}, {"beta", r.beta}};
  j["point"] = Json{{"x", to_json(r.x)}, {"v", to_json(r.v)}, {"t", r.t}};
  j["config"] = to_json(r.config);
  j["calibration"] = to_json(r.calibration);
  j["pass"] = r.pass;
  j["error"] = r.error.empty() ? Json(nullptr) : Json(r.error);
  Json warnings = Json::array();
  for (const auto& w : r.warnings) warnings.push_back(w);
  j["warnings"] = warnings;
  if (!r.error.empty()) return j;
  j["condition"] = r.condition;
  j["max_abs_deviation"] = r.max_abs_deviation;
  j["max_rel_deviation"] = r.max_rel_deviation;
  Json per_class = Json::object();
  for (std::size_t k = 0; k < component_class_count; ++k)
    per_class[std::string(class_name(static_cast<ComponentClass>(k)))] = r.class_max_deviation[k];
  j["class_max_deviation"] = per_class;
  j["dim"] = 2 * r.n;
  j["closed"] = r.closed;
  j["oracle"] = r.oracle;
  j["deviation"] = r.deviation;
  return j;
}

inline std::string to_text(const CurvatureReport& r) {
  std::ostringstream os;
  os << (r.error.empty() ? (r.pass ? "PASS" : "FAIL") : "ERROR") << "  " << r.manifold << "  " << r.family
     << "  t=" << format_double(r.t) << "  x=(";
  for (int i = 0; i < r.x.size(); ++i) os << (i ? "," : "") << format_double(r.x[i]);
  os << ")";
  if (!r.error.empty()) {
    os << "  " << r.error << "\n";
    return os.str();
  }
  os << "  sign=" << (r.calibration.sign > 0 ? "+1" : "-1") << (r.calibration.underdetermined ? " (underdetermined)" : "")
     << "  max|dev|=" << format_double(r.max_abs_deviation) << "  max rel=" << format_double(r.max_rel_deviation) << "\n";
  for (ComponentClass c : r.calibration.mixed) os << "    erratum: class " << class_name(c) << " needs the opposite sign\n";
  for (const auto& w : r.warnings) os << "    " << w << "\n";
  return os.str();
}

}  // namespace tbcurv
