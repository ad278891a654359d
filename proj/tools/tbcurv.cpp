// tbcurv: curvature of tangent bundles with natural metrics, from the command line.
//
// Exit codes: 0 success, 1 verification or property failure, 2 configuration error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tbcurv/closedform.hpp"
#include "tbcurv/oracle.hpp"
#include "tbcurv/report.hpp"
#include "tbcurv/runconfig.hpp"

namespace {

using namespace tbcurv;
using Json = nlohmann::ordered_json;

constexpr int exit_ok = 0, exit_failure = 1, exit_config = 2;

constexpr const char* convention_note =
    "# t = |v|_g; alpha, beta, F and H are evaluated at t^2 = |v|^2. Frame e_1..e_2n is the unnormalized adapted frame.";

struct Flags {
  std::string config, manifold, family, alpha, beta, point, v, grid, out, format, steps;
  bool beta_flatness = false;
  std::optional<double> tol_abs, tol_rel, t_max, base_step;
  std::optional<std::size_t> samples;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON run config; flags override it");
  sub->add_option("--manifold", f.manifold, "name[:dim][:polar|stereographic][:r=R] or a JSON object");
  sub->add_option("--family", f.family, "sasaki, cheeger-gromoll, exp+ or exp-");
  sub->add_option("--alpha", f.alpha, "alpha(t) expression");
  sub->add_option("--beta", f.beta, "beta(t) expression");
  sub->add_flag("--beta-flatness", f.beta_flatness, "derive beta from alpha so that F vanishes");
  sub->add_option("--point", f.point, "base point, comma separated");
  sub->add_option("--v", f.v, "fiber vector, comma separated");
  sub->add_option("--grid", f.grid, "grid as JSON: {\"x\": [[..]], \"speeds\": [..], \"directions\": [[..]]}");
  sub->add_option("--out", f.out, "output path ('-' for stdout)");
  sub->add_option("--format", f.format, "json, csv or text");
  sub->add_option("--tol-abs", f.tol_abs, "absolute tolerance");
  sub->add_option("--tol-rel", f.tol_rel, "relative tolerance");
  sub->add_option("--steps", f.steps, "fixed, scaled or richardson");
  sub->add_option("--base-step", f.base_step, "finite-difference base step (0 = automatic)");
  sub->add_option("--t-max", f.t_max, "upper end of the validated |v|^2 range");
  sub->add_option("--samples", f.samples, "validation grid size");
}

Json parse_json_text(const std::string& text, const char* what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON in ") + what + ": " + e.what());
  }
}

Json load_config(const Flags& f) {
  Json j = Json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw ConfigError("cannot read config '" + f.config + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    j = parse_json_text(ss.str(), "config file");
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
  }
  if (!f.manifold.empty())
    j["manifold"] = f.manifold.front() == '{' ? parse_json_text(f.manifold, "--manifold") : Json(f.manifold);
  if (!f.family.empty() && !f.alpha.empty()) throw ConfigError("give either --family or --alpha, not both");
  if (!f.family.empty()) j["family"] = f.family;
  if (!f.alpha.empty()) {
    Json fam{{"alpha", f.alpha}};
    if (f.beta_flatness) fam["beta_flatness"] = true;
    if (!f.beta.empty()) fam["beta"] = f.beta;
    j["family"] = fam;
  } else if (!f.beta.empty() || f.beta_flatness) {
    throw ConfigError("--beta and --beta-flatness need --alpha");
  }
  if (!f.point.empty()) {
    Json p{{"x", to_json(parse_vector(f.point, "--point"))}};
    if (!f.v.empty()) p["v"] = to_json(parse_vector(f.v, "--v"));
    j["points"] = Json::array({p});
    if (f.grid.empty()) j.erase("grid");
  } else if (!f.v.empty()) {
    throw ConfigError("--v needs --point");
  }
  if (!f.grid.empty()) {
    j["grid"] = parse_json_text(f.grid, "--grid");
    if (f.point.empty()) j.erase("points");
  }
  if (!f.out.empty() || !f.format.empty()) {
    Json out = j.contains("output") ? j["output"] : Json::object();
    if (!f.out.empty()) out["path"] = f.out;
    if (!f.format.empty()) out["format"] = f.format;
    j["output"] = out;
  }
  if (!f.steps.empty() || f.tol_abs || f.tol_rel || f.base_step) {
    Json o = j.contains("oracle") ? j["oracle"] : Json::object();
    if (!f.steps.empty()) {
      // A new strategy brings its own default tolerances unless they are given explicitly.
      o["strategy"] = f.steps;
      o.erase("tol_abs");
      o.erase("tol_rel");
    }
    if (f.tol_abs) o["tol_abs"] = *f.tol_abs;
    if (f.tol_rel) o["tol_rel"] = *f.tol_rel;
    if (f.base_step) o["base_step"] = *f.base_step;
    j["oracle"] = o;
  }
  if (f.t_max) j["t_max"] = *f.t_max;
  if (f.samples) j["samples"] = *f.samples;
  return j;
}

void emit(const RunConfig& rc, const std::string& body) {
  if (rc.out_path.empty() || rc.out_path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream out(rc.out_path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + rc.out_path + "'");
  out << body;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string fmt(double x) { return format_double(x); }

Vector to_vector_json(const Json& j) { return detail::to_vector(j, "point"); }

std::string join(const Vector& v, char sep = ' ') {
  std::string s;
  for (int i = 0; i < v.size(); ++i) s += (i ? std::string(1, sep) : std::string()) + fmt(v[i]);
  return s;
}

Json point_json(const BundlePoint& p, double t) {
  return Json{{"x", to_json(p.x)}, {"v", to_json(p.v)}, {"t", t}};
}

std::optional<ExpSign> exp_sign(const NaturalMetricFamily& fam) {
  if (fam.name() == "exp+") return ExpSign::Plus;
  if (fam.name() == "exp-") return ExpSign::Minus;
  return std::nullopt;
}

// ---------------------------------------------------------------------------------------

int cmd_family_check(const RunConfig& rc) {
  const NaturalMetricFamily fam = family_from_spec(rc.family_spec, rc.t_max);
  const ValidationReport val = validate(fam, rc.samples);
  Json j;
  j["family"] = Json{{"name", fam.name()}, {"alpha", fam.alpha().label()}, {"beta", fam.beta().label()}};
  j["t_max"] = rc.t_max;
  j["samples"] = rc.samples;
  j["valid"] = val.valid;
  j["violation"] = val.first_violation ? Json{{"t", *val.first_violation}, {"condition", val.violated_condition}}
                                       : Json(nullptr);
  if (!val.error.empty()) j["error"] = val.error;

  int code = val.valid ? exit_ok : exit_config;
  if (val.valid) {
    double maxF = 0.0, maxH = 0.0, max_identity = 0.0;
    for (std::size_t k = 0; k < rc.samples; ++k) {
      const double t = k + 1 == rc.samples ? rc.t_max : rc.t_max * static_cast<double>(k) / static_cast<double>(rc.samples - 1);
      const FamilyCoefficients c = fam.at({t});
      const double F = transverse_fiber_curvature(c), H = radial_fiber_curvature(c);
      maxF = std::max(maxF, std::abs(F));
      maxH = std::max(maxH, std::abs(H));
      const double lhs = c.alpha * c.radial(), rhs = c.phi() * c.phi();
      max_identity = std::max(max_identity, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
    Json samples = Json::array();
    for (int k = 0; k <= 10; ++k) {
      const double t = rc.t_max * k / 10.0;
      const FamilyCoefficients c = fam.at({t});
      samples.push_back(Json{{"t", t}, {"F", transverse_fiber_curvature(c)}, {"H", radial_fiber_curvature(c)}});
    }
    const bool F_zero = maxF <= 1e-10, H_zero = maxH <= 1e-8;
    const bool phi_pos = !val.first_phi_nonpositive;
    const bool prop_ok = !(F_zero && phi_pos) || (H_zero && max_identity <= 1e-10);
    const bool cor_ok = !(H_zero && phi_pos) || F_zero;
    j["samples_FH"] = samples;
    j["max_abs_F"] = maxF;
    j["max_abs_H"] = maxH;
    j["F_zero"] = F_zero;
    j["H_zero"] = H_zero;
    j["phi_positive"] = phi_pos;
    j["first_phi_nonpositive"] = val.first_phi_nonpositive ? Json(*val.first_phi_nonpositive) : Json(nullptr);
    j["F_zero_implies_H_zero"] = prop_ok;
    j["H_zero_implies_F_zero"] = cor_ok;
    if (!prop_ok || !cor_ok) code = exit_failure;
  }

  if (rc.format == OutputFormat::Json) {
    emit(rc, dump(j));
  } else if (rc.format == OutputFormat::Csv) {
    std::string s = std::string(convention_note) + "\nt,F,H\n";
    if (j.contains("samples_FH"))
      for (const auto& r : j["samples_FH"])
        s += fmt(r["t"].get<double>()) + "," + fmt(r["F"].get<double>()) + "," + fmt(r["H"].get<double>()) + "\n";
    emit(rc, s);
  } else {
    std::ostringstream os;
    os << "family " << fam.name() << ": alpha = " << fam.alpha().label() << ", beta = " << fam.beta().label() << "\n";
    if (!val.valid) {
      os << "invalid";
      if (val.first_violation) os << ": " << val.violated_condition << " fails at t = " << fmt(*val.first_violation);
      if (!val.error.empty()) os << ": " << val.error;
      os << "\n";
    } else {
      os << "valid on [0, " << fmt(rc.t_max) << "]\n";
      for (const auto& r : j["samples_FH"])
        os << "  t = " << fmt(r["t"].get<double>()) << "  F = " << fmt(r["F"].get<double>())
           << "  H = " << fmt(r["H"].get<double>()) << "\n";
      os << "F == 0: " << (j["F_zero"].get<bool>() ? "yes" : "no") << "  H == 0: " << (j["H_zero"].get<bool>() ? "yes" : "no")
         << "  alpha + t alpha' > 0: " << (j["phi_positive"].get<bool>() ? "yes" : "no") << "\n";
      os << "F == 0 => H == 0: " << (j["F_zero_implies_H_zero"].get<bool>() ? "holds" : "FAILS") << "\n";
      os << "H == 0 => F == 0: " << (j["H_zero_implies_F_zero"].get<bool>() ? "holds" : "FAILS") << "\n";
    }
    emit(rc, os.str());
  }
  return code;
}

struct Setup {
  ChartManifold manifold;
  NaturalMetricFamily family;
  std::vector<BundlePoint> points;
};

Setup setup(const RunConfig& rc) {
  ChartManifold m = manifold_from_spec(rc.manifold_spec);
  NaturalMetricFamily fam = family_from_spec(rc.family_spec, rc.t_max);
  auto pts = expand_points(rc, m);
  return {std::move(m), std::move(fam), std::move(pts)};
}

/// Runs fn(point, frame, coefficients) -> Json for every point; errors become {"error": ...}.
template <class Fn>
std::pair<Json, bool> per_point(const Setup& s, Fn&& fn) {
  Json rows = Json::array();
  bool ok = true;
  for (const BundlePoint& p : s.points) {
    Json row;
    try {
      const AdaptedFramePoint fp = adapted_frame(s.manifold, p.x, p.v);
      const FamilyCoefficients c = s.family.at(SquaredSpeed::of_speed(fp.t));
      row = point_json(p, fp.t);
      fn(row, fp, c);
    } catch (const Error& e) {
      row = point_json(p, 0.0);
      row["error"] = e.what();
      ok = false;
    }
    rows.push_back(std::move(row));
  }
  return {rows, ok};
}

Json header(const Setup& s, const char* task) {
  return Json{{"task", task},
              {"manifold", s.manifold.id()},
              {"family", Json{{"name", s.family.name()}, {"alpha", s.family.alpha().label()}, {"beta", s.family.beta().label()}}}};
}

/// CSV of per-point 2D tables stored under `key` as nested arrays.
std::string table_csv(const Json& rows, const char* key, const char* value_name) {
  std::string s = std::string(convention_note) + "\npoint,x,v,t,a,b," + value_name + ",error\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Json& r = rows[i];
    const std::string prefix = std::to_string(i) + "," + join(to_vector_json(r["x"])) + "," + join(to_vector_json(r["v"])) + "," +
                               fmt(r["t"].get<double>()) + ",";
    if (r.contains("error")) {
      s += prefix + ",,," + r["error"].get<std::string>() + "\n";
      continue;
    }
    const Json& m = r[key];
    for (std::size_t a = 0; a < m.size(); ++a)
      for (std::size_t b = 0; b < m[a].size(); ++b)
        s += prefix + std::to_string(a) + "," + std::to_string(b) + "," + fmt(m[a][b].get<double>()) + ",\n";
  }
  return s;
}

void reject_text(const RunConfig& rc, const char* task) {
  if (rc.format == OutputFormat::Text) throw ConfigError(std::string(task) + ": text output is not available, use json or csv");
}

int cmd_curvature(const RunConfig& rc) {
  reject_text(rc, "curvature");
  const Setup s = setup(rc);
  auto [rows, ok] = per_point(s, [&](Json& row, const AdaptedFramePoint& fp, const FamilyCoefficients& c) {
    const TMCurvatureTable T = tm_curvature(frame_curvature(s.manifold, fp, rc.oracle.diff, fp.t > 0.0), c);
    row["F"] = T.F;
    row["H"] = T.H;
    row["dim"] = 2 * T.n;
    row["components"] = detail::flatten(T, T.n);
  });
  if (rc.format == OutputFormat::Csv) {
    std::string out = std::string(convention_note) + "\n# value = <R(e_a, e_b) e_c, e_d>\npoint,x,v,t,a,b,c,d,value,error\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Json& r = rows[i];
      const std::string prefix = std::to_string(i) + "," + join(to_vector_json(r["x"])) + "," + join(to_vector_json(r["v"])) +
                                 "," + fmt(r["t"].get<double>()) + ",";
      if (r.contains("error")) {
        out += prefix + ",,,,," + r["error"].get<std::string>() + "\n";
        continue;
      }
      const int m = r["dim"].get<int>();
      const auto& comp = r["components"];
      std::size_t idx = 0;
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          for (int c = 0; c < m; ++c)
            for (int d = 0; d < m; ++d, ++idx)
              out += prefix + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + "," + std::to_string(d) +
                     "," + fmt(comp[idx].get<double>()) + ",\n";
    }
    emit(rc, out);
  } else {
    Json j = header(s, "curvature");
    j["points"] = rows;
    emit(rc, dump(j));
  }
  return ok ? exit_ok : exit_failure;
}

int cmd_sectional(const RunConfig& rc) {
  reject_text(rc, "sectional");
  const Setup s = setup(rc);
  auto [rows, ok] = per_point(s, [&](Json& row, const AdaptedFramePoint& fp, const FamilyCoefficients& c) {
    const Tensor4 R = frame_curvature(s.manifold, fp, rc.oracle.diff, false).R;
    row["sectional"] = to_json(tm_sectional(R, c).full());
    row["base_sectional"] = to_json(base_invariants(R).sectional);
  });
  if (rc.format == OutputFormat::Csv) {
    emit(rc, table_csv(rows, "sectional", "K"));
  } else {
    Json j = header(s, "sectional");
    j["points"] = rows;
    emit(rc, dump(j));
  }
  return ok ? exit_ok : exit_failure;
}

int cmd_ricci(const RunConfig& rc) {
  reject_text(rc, "ricci");
  const Setup s = setup(rc);
  auto [rows, ok] = per_point(s, [&](Json& row, const AdaptedFramePoint& fp, const FamilyCoefficients& c) {
    const FrameCurvature fc = frame_curvature(s.manifold, fp, rc.oracle.diff, fp.t > 0.0);
    const TMCurvatureTable T = tm_curvature(fc, c);
    const Matrix closed = tm_ricci(T, fc.R), traced = tm_ricci_traced(T);
    row["ricci"] = to_json(closed);
    row["ricci_traced"] = to_json(traced);
    Json disc = Json::array();
    for (const RicciDiscrepancy& d : reconcile_ricci(closed, traced))
      disc.push_back(Json{{"a", d.a}, {"b", d.b}, {"closed", d.closed}, {"traced", d.traced}});
    row["discrepancies"] = disc;
  });
  if (rc.format == OutputFormat::Csv) {
    emit(rc, table_csv(rows, "ricci", "ricci"));
  } else {
    Json j = header(s, "ricci");
    j["points"] = rows;
    emit(rc, dump(j));
  }
  return ok ? exit_ok : exit_failure;
}

/// Scalar curvature at one point: general formula, specialized exponential-metric formula when
/// it applies, F and H.
struct ScalarRow {
  double general = 0.0;
  std::optional<double> special;
  double F = 0.0, H = 0.0;
};

ScalarRow scalar_row(const Setup& s, const AdaptedFramePoint& fp, const FamilyCoefficients& c, const DiffConfig& dc) {
  const Tensor4 R = frame_curvature(s.manifold, fp, dc, false).R;
  ScalarRow row{tm_scalar(R, c), std::nullopt, transverse_fiber_curvature(c), radial_fiber_curvature(c)};
  if (const auto sign = exp_sign(s.family)) {
    const int n = R.dim();
    if (s.manifold.constant_curvature()) {
      row.special = scalar_exp_specials(*s.manifold.constant_curvature(), n, c.t2, *sign);
    } else {
      double sum = 0.0;  // sum_ij |R(u_i,u_j)v|^2
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int r = 0; r < n; ++r) sum += c.t2 * R(i, j, 0, r) * R(i, j, 0, r);
      row.special = scalar_exp_formula(base_invariants(R).scalar, sum, n, c.t2, *sign);
    }
  }
  return row;
}

int cmd_scalar(const RunConfig& rc) {
  reject_text(rc, "scalar");
  const Setup s = setup(rc);
  auto [rows, ok] = per_point(s, [&](Json& row, const AdaptedFramePoint& fp, const FamilyCoefficients& c) {
    const FrameCurvature fc = frame_curvature(s.manifold, fp, rc.oracle.diff, fp.t > 0.0);
    const ScalarRow sr = scalar_row(s, fp, c, rc.oracle.diff);
    row["scalar"] = sr.general;
    row["scalar_traced"] = tm_scalar_traced(tm_curvature(fc, c));
    row["scalar_special"] = sr.special ? Json(*sr.special) : Json(nullptr);
    row["base_scalar"] = base_invariants(fc.R).scalar;
    row["F"] = sr.F;
    row["H"] = sr.H;
  });
  if (rc.format == OutputFormat::Csv) {
    std::string out = std::string(convention_note) + "\npoint,x,v,t,scalar,scalar_traced,scalar_special,base_scalar,F,H,error\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Json& r = rows[i];
      out += std::to_string(i) + "," + join(to_vector_json(r["x"])) + "," + join(to_vector_json(r["v"])) + "," +
             fmt(r["t"].get<double>()) + ",";
      if (r.contains("error")) {
        out += ",,,,,," + r["error"].get<std::string>() + "\n";
        continue;
      }
      out += fmt(r["scalar"].get<double>()) + "," + fmt(r["scalar_traced"].get<double>()) + "," +
             (r["scalar_special"].is_null() ? std::string() : fmt(r["scalar_special"].get<double>())) + "," +
             fmt(r["base_scalar"].get<double>()) + "," + fmt(r["F"].get<double>()) + "," + fmt(r["H"].get<double>()) + ",\n";
    }
    emit(rc, out);
  } else {
    Json j = header(s, "scalar");
    j["points"] = rows;
    emit(rc, dump(j));
  }
  return ok ? exit_ok : exit_failure;
}

int cmd_verify(const RunConfig& rc) {
  const Setup s = setup(rc);
  const std::vector<CurvatureReport> reports = compare(s.manifold, s.family, s.points, rc.oracle);
  std::size_t passed = 0;
  for (const auto& r : reports) passed += r.pass ? 1 : 0;
  const bool ok = passed == reports.size();
  if (rc.format == OutputFormat::Json) {
    Json j = header(s, "verify");
    j["summary"] = Json{{"points", reports.size()}, {"passed", passed}, {"pass", ok}};
    Json arr = Json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    j["reports"] = arr;
    emit(rc, dump(j));
  } else if (rc.format == OutputFormat::Csv) {
    std::string out = std::string(convention_note) + "\npoint,x,v,t,pass,sign,max_abs_deviation,max_rel_deviation,error\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto& r = reports[i];
      out += std::to_string(i) + "," + join(r.x) + "," + join(r.v) + "," + fmt(r.t) + "," + (r.pass ? "1" : "0") + "," +
             std::to_string(r.calibration.sign) + "," + fmt(r.max_abs_deviation) + "," + fmt(r.max_rel_deviation) + "," +
             r.error + "\n";
    }
    emit(rc, out);
  } else {
    std::string out;
    for (const auto& r : reports) out += to_text(r);
    out += std::to_string(passed) + "/" + std::to_string(reports.size()) + " points pass\n";
    emit(rc, out);
  }
  return ok ? exit_ok : exit_failure;
}

int cmd_scan(const RunConfig& rc) {
  const Setup s = setup(rc);
  constexpr double agree_tol = 1e-9;
  bool ok = true;
  Json rows = Json::array();
  for (const BundlePoint& p : s.points) {
    Json row = point_json(p, 0.0);
    try {
      const AdaptedFramePoint fp = adapted_frame(s.manifold, p.x, p.v);
      const FamilyCoefficients c = s.family.at(SquaredSpeed::of_speed(fp.t));
      const ScalarRow sr = scalar_row(s, fp, c, rc.oracle.diff);
      row["t"] = fp.t;
      row["t2"] = c.t2;
      row["scalar"] = sr.general;
      row["scalar_special"] = sr.special ? Json(*sr.special) : Json(nullptr);
      row["F"] = sr.F;
      row["H"] = sr.H;
      if (sr.special && std::abs(*sr.special - sr.general) > agree_tol * std::max(1.0, std::abs(sr.general))) {
        row["error"] = "specialized formula disagrees with the general one";
        ok = false;
      }
    } catch (const Error& e) {
      row["error"] = e.what();
      ok = false;
    }
    rows.push_back(std::move(row));
  }
  if (rc.format == OutputFormat::Json) {
    Json j = header(s, "scan");
    j["rows"] = rows;
    emit(rc, dump(j));
  } else {
    std::string out = std::string(convention_note) + "\nx,speed,t2,scalar,scalar_special,F,H,error\n";
    for (const Json& r : rows) {
      out += join(to_vector_json(r["x"])) + "," + fmt(r["t"].get<double>()) + ",";
      if (r.contains("t2")) {
        out += fmt(r["t2"].get<double>()) + "," + fmt(r["scalar"].get<double>()) + "," +
               (r["scalar_special"].is_null() ? std::string() : fmt(r["scalar_special"].get<double>())) + "," +
               fmt(r["F"].get<double>()) + "," + fmt(r["H"].get<double>()) + ",";
      } else {
        out += ",,,,,";
      }
      out += (r.contains("error") ? r["error"].get<std::string>() : std::string()) + "\n";
    }
    emit(rc, out);
  }
  return ok ? exit_ok : exit_failure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curvature of tangent bundles with natural metrics"};
  app.require_subcommand(1);
  Flags flags;
  struct Cmd {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&);
  };
  const std::vector<Cmd> cmds{
      {"family-check", "validate a metric family and check the F/H properties", cmd_family_check},
      {"curvature", "closed-form curvature components in the adapted frame", cmd_curvature},
      {"sectional", "sectional curvature of the frame planes", cmd_sectional},
      {"ricci", "Ricci tensor, closed form and traced", cmd_ricci},
      {"scalar", "scalar curvature", cmd_scalar},
      {"verify", "compare closed forms against the numerical oracle", cmd_verify},
      {"scan", "scalar curvature sweep as CSV", cmd_scan},
  };
  std::vector<CLI::App*> subs;
  for (const Cmd& c : cmds) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, flags);
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      Json j = load_config(flags);
      if (std::string(cmds[i].name) == "scan" && !(j.contains("output") && j["output"].contains("format"))) {
        j["output"]["format"] = "csv";
      }
      const RunConfig rc = run_config_from_json(j);
      return cmds[i].run(rc);
    } catch (const ConfigError& e) {
      std::cerr << "configuration error: " << e.what() << "\n";
      return exit_config;
    } catch (const SyntaxError& e) {
      std::cerr << "expression error: " << e.what() << "\n";
      return exit_config;
    } catch (const ValidityError& e) {
      std::cerr << "invalid family: " << e.what() << "\n";
      return exit_config;
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return exit_failure;
    }
  }
  return exit_config;
}
