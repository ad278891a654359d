// Acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero if any fails.
// Usage: acceptance <path-to-tbcurv-cli> <work-dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "random_expr.hpp"
#include "tbcurv/closedform.hpp"
#include "tbcurv/oracle.hpp"

using namespace tbcurv;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  int k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

const std::vector<FamilyPreset> presets{FamilyPreset::Sasaki, FamilyPreset::CheegerGromoll, FamilyPreset::ExpPlus,
                                        FamilyPreset::ExpMinus};

// Points at x with the given speeds along a g-normalized chart direction.
std::vector<BundlePoint> speed_points(const ChartManifold& m, const Vector& x, const Vector& dir,
                                      std::initializer_list<double> speeds) {
  const Vector unit = dir / std::sqrt(dir.dot(m.metric(x) * dir));
  std::vector<BundlePoint> pts;
  for (double s : speeds) pts.push_back({x, Vector(s * unit)});
  return pts;
}

double max_abs(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, std::abs(x));
  return m;
}

double class_max(const std::vector<double>& table, int n, ComponentClass cls) {
  const int m = 2 * n;
  double out = 0.0;
  std::size_t idx = 0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d, ++idx)
          if (canonical_ref(n, a, b, c, d).cls == cls) out = std::max(out, std::abs(table[idx]));
  return out;
}

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& why) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += why;
    }
  }
};

// 1. Closed form against the oracle over manifolds x families x speeds.
Outcome oracle_equivalence() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  struct Case {
    ChartManifold m;
    Vector x, dir;
  };
  const std::vector<Case> cases{{sphere(2), vec({1.0, 0.3}), vec({1, 0.4})},
                                {sphere(3), vec({1.0, 1.2, 0.3}), vec({1, 0.5, -0.3})},
                                {hyperbolic(2), vec({0.2, -0.1}), vec({1, 0.7})},
                                {euclidean(3), vec({0.5, -0.2, 0.1}), vec({1, 1, 0})}};
  const OracleConfig cfg = OracleConfig::defaults();
  SignEvidence global(cfg.tol.abs);
  double worst = 0.0;
  int runs = 0, points = 0;
  std::vector<int> signs;
  for (const Case& c : cases)
    for (FamilyPreset p : presets) {
      const auto reports = compare(c.m, make_family(p), speed_points(c.m, c.x, c.dir, {0.0, 0.5, 1.5}), cfg);
      ++runs;
      for (const auto& r : reports) {
        ++points;
        o.require(r.error.empty(), c.m.id() + " " + std::string(preset_name(p)) + ": " + r.error);
        if (!r.error.empty()) continue;
        o.require(r.pass, c.m.id() + " " + std::string(preset_name(p)) + " t=" + fmt(r.t) + " dev " + fmt(r.max_abs_deviation));
        o.require(r.calibration.mixed.empty(), c.m.id() + " " + std::string(preset_name(p)) + ": erratum classes");
        worst = std::max(worst, r.max_abs_deviation);
        const int m2 = 2 * r.n;
        auto at = [m2](const std::vector<double>& v) {
          return [&v, m2](int a, int b, int cc, int d) { return v[static_cast<std::size_t>(((a * m2 + b) * m2 + cc) * m2 + d)]; };
        };
        global.add(r.n, at(r.closed), at(r.oracle));
      }
      if (!reports.empty() && !reports[0].calibration.underdetermined) signs.push_back(reports[0].calibration.sign);
    }
  const SignCalibration cal = global.result();
  for (int s : signs) o.require(s == cal.sign, "per-run signs disagree");
  o.require(!cal.underdetermined && cal.mixed.empty(), "global sign calibration is not clean");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(secs < 60.0, "runtime " + fmt(secs) + " s");
  o.detail = std::to_string(runs) + " runs, " + std::to_string(points) + " points, sign " + (cal.sign > 0 ? "+1" : "-1") +
             ", max |dev| " + fmt(worst) + ", " + fmt(secs) + " s" + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// 2. The covariant-derivative components on a metric with nonparallel curvature. The 2D metric
// e^{2f} delta with f = 0.1 x1 x2 is flat (f is harmonic), so the 3D version is used.
Outcome nabla_term() {
  Outcome o;
  const ChartManifold m = torus_conformal(3, {{{0.1, {1, 1, 0}}}});
  std::vector<BundlePoint> pts;
  for (const Vector& x : {vec({0.3, -0.4, 0.5}), vec({-0.6, 0.2, 0.1}), vec({0.8, 0.9, -0.7})})
    for (const auto& p : speed_points(m, x, vec({1, 0.3, -0.2}), {1.0})) pts.push_back(p);
  double smallest = INFINITY, worst = 0.0;
  for (FamilyPreset p : presets) {
    for (const auto& r : compare(m, make_family(p), pts, OracleConfig::defaults())) {
      o.require(r.error.empty() && r.pass, std::string(preset_name(p)) + " fails: " + r.error + " dev " + fmt(r.max_abs_deviation));
      if (!r.error.empty()) continue;
      smallest = std::min(smallest, class_max(r.closed, 3, ComponentClass::HHVH));
      worst = std::max(worst, r.class_max_deviation[static_cast<std::size_t>(ComponentClass::HHVH)]);
    }
  }
  o.require(smallest > 1e-4, "HHVH too small: " + fmt(smallest));
  o.detail = "min over points of max |HHVH| " + fmt(smallest) + ", HHVH max |dev| " + fmt(worst) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// 3. Flatness of Sasaki and of the flatness construction over a flat base, and a non-flat counterexample.
Outcome flatness() {
  Outcome o;
  const ChartManifold m = euclidean(3);
  const auto pts = speed_points(m, vec({0.5, -0.2, 0.1}), vec({1, 2, -1}), {0.0, 0.5, 1.5});
  const ScalarFunction alpha = ScalarFunction::parse("exp(t)");
  const std::vector<NaturalMetricFamily> flat{make_family(FamilyPreset::Sasaki),
                                              NaturalMetricFamily(alpha, flatness_beta(alpha), "exp-flat", 10.0)};
  double closed_max = 0.0, oracle_max = 0.0;
  for (const auto& fam : flat)
    for (const auto& r : compare(m, fam, pts, OracleConfig::defaults())) {
      o.require(r.error.empty(), r.error);
      closed_max = std::max(closed_max, max_abs(r.closed));
      oracle_max = std::max(oracle_max, max_abs(r.oracle));
    }
  o.require(closed_max <= 1e-9, "closed form max " + fmt(closed_max));
  o.require(oracle_max <= 1e-6, "oracle max " + fmt(oracle_max));

  const auto cg = compare(m, make_family(FamilyPreset::CheegerGromoll), {pts[0]}, OracleConfig::defaults());
  const double cg_closed = class_max(cg[0].closed, 3, ComponentClass::VVVV);
  const double cg_oracle = class_max(cg[0].oracle, 3, ComponentClass::VVVV);
  o.require(cg_closed >= 1.0 && cg_oracle >= 1.0, "Cheeger-Gromoll vertical block too small");
  o.detail = "flat max closed " + fmt(closed_max) + " oracle " + fmt(oracle_max) + "; Cheeger-Gromoll vertical max " +
             fmt(cg_closed) + " (oracle " + fmt(cg_oracle) + ")" + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// 4. F and H for Sasaki and for random families made flat by construction.
Outcome fiber_functions() {
  Outcome o;
  const double t_max = 10.0;
  const int grid = 1001;
  const auto sasaki = make_family(FamilyPreset::Sasaki, t_max);
  for (int k = 0; k < grid; ++k) {
    const double t = t_max * k / (grid - 1);
    o.require(transverse_fiber_curvature(sasaki, t) == 0.0 && radial_fiber_curvature(sasaki, t) == 0.0,
              "Sasaki F or H nonzero at t=" + fmt(t));
  }
  std::mt19937_64 rng(20241017);
  int accepted = 0, tried = 0;
  double max_f = 0.0, max_h = 0.0;
  while (accepted < 50 && tried < 1000) {
    ++tried;
    const ScalarFunction a = ScalarFunction::parse(testing::random_positive_text(rng, 2));
    const NaturalMetricFamily fam(a, flatness_beta(a), "random", t_max);
    const ValidationReport rep = validate(fam);
    if (!rep.valid || rep.first_phi_nonpositive) continue;
    ++accepted;
    double f_here = 0.0, h_here = 0.0;
    for (int k = 0; k < grid; ++k) {
      const auto c = fam.at({t_max * k / (grid - 1)});
      f_here = std::max(f_here, std::abs(transverse_fiber_curvature(c)));
      h_here = std::max(h_here, std::abs(radial_fiber_curvature(c)));
    }
    o.require(f_here <= 1e-10 && h_here <= 1e-8, a.label() + ": max|F| " + fmt(f_here) + " max|H| " + fmt(h_here));
    max_f = std::max(max_f, f_here);
    max_h = std::max(max_h, h_here);
  }
  o.require(accepted == 50, "only " + std::to_string(accepted) + " valid random families");
  o.detail = std::to_string(accepted) + " random families, max|F| " + fmt(max_f) + ", max|H| " + fmt(max_h) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// 5. Sectional curvature properties over sampled points, planes and families.
Outcome sectional_properties() {
  Outcome o;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  const std::vector<ChartManifold> manifolds{sphere(2), sphere(3), hyperbolic(2), hyperbolic(3), euclidean(3),
                                             torus_conformal(3, {{{0.1, {1, 1, 0}}}})};
  double min_mixed = INFINITY, zero_speed_dev = 0.0;
  int samples = 0;
  for (const ChartManifold& m : manifolds)
    for (FamilyPreset p : presets) {
      const auto fam = make_family(p);
      for (int k = 0; k < 5; ++k) {
        const int n = m.dim();
        Vector x(n), dir(n);
        for (int i = 0; i < n; ++i) {
          x[i] = 0.5 * (m.domain().lo[i] + m.domain().hi[i]) + 0.25 * ud(rng) * (m.domain().hi[i] - m.domain().lo[i]);
          dir[i] = ud(rng);
        }
        const double speed = k == 0 ? 0.0 : 2.0 * std::abs(ud(rng));
        const AdaptedFramePoint fp = adapted_frame(m, x, speed * dir / std::sqrt(dir.dot(m.metric(x) * dir)));
        const Tensor4 R = frame_curvature(m, fp, {}, false).R;
        const TMSectional K = tm_sectional(R, fam.at({fp.t * fp.t}));
        ++samples;
        min_mixed = std::min(min_mixed, K.mixed.minCoeff());
        for (int i = 0; i < n; ++i) o.require(K.mixed(i, 0) == 0.0, m.id() + ": K(e_i, e_n+1) != 0");
        if (speed == 0.0)
          zero_speed_dev = std::max(zero_speed_dev, (K.horizontal - base_invariants(R).sectional).cwiseAbs().maxCoeff());
      }
    }
  o.require(min_mixed >= -1e-12, "negative mixed sectional " + fmt(min_mixed));
  o.require(zero_speed_dev <= 1e-10, "t = 0 horizontal deviates by " + fmt(zero_speed_dev));
  o.detail = std::to_string(samples) + " samples, min mixed " + fmt(min_mixed) + ", t=0 deviation " + fmt(zero_speed_dev) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// 6. Exponential-metric scalar curvature on flat bases and the sign change of the negative one.
Outcome scalar_specials() {
  Outcome o;
  double worst = 0.0;
  for (int n : {2, 3}) {
    const ChartManifold m = euclidean(n);
    for (ExpSign which : {ExpSign::Plus, ExpSign::Minus}) {
      const auto fam = make_family(which == ExpSign::Plus ? FamilyPreset::ExpPlus : FamilyPreset::ExpMinus);
      for (double t2 : {0.0, 1.0, 4.0, 6.0}) {
        Vector v = Vector::Zero(n);
        v[0] = std::sqrt(t2);
        const AdaptedFramePoint fp = adapted_frame(m, Vector::Zero(n), v);
        const double general = tm_scalar(frame_curvature(m, fp, {}, false).R, fam.at({t2}));
        const double formula = scalar_exp_formula(0.0, 0.0, n, t2, which);
        worst = std::max(worst, std::abs(general - formula));
        if (which == ExpSign::Plus) o.require(general < 0.0 && formula < 0.0, "S_+exp >= 0 at n=" + std::to_string(n));
      }
    }
  }
  o.require(worst <= 1e-9, "general vs formula " + fmt(worst));

  auto s_minus = [](double t2) { return scalar_exp_specials(0.0, 3, t2, ExpSign::Minus); };
  double lo = 5.0, hi = 6.5;
  o.require(s_minus(lo) > 0.0 && s_minus(hi) < 0.0, "no sign change in [5, 6.5]");
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (s_minus(mid) > 0.0 ? lo : hi) = mid;
  }
  const double root = 0.5 * (lo + hi);
  const double threshold = *flat_exp_threshold(3);
  const double residual = std::abs(s_minus(threshold));
  o.require(std::abs(root - threshold) <= 1e-9, "root " + fmt(root) + " vs threshold " + fmt(threshold));
  o.require(residual <= 1e-9, "residual " + fmt(residual));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", root);
  o.detail = "max |general - formula| " + fmt(worst) + ", root " + buf + ", residual at 2+sqrt(13) " + fmt(residual) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// 7. Mixed sectional curvature over the unit sphere: general formula vs the constant-curvature shortcut.
Outcome constcurv_adjudication() {
  Outcome o;
  const ChartManifold m = sphere(2);
  const auto pt = speed_points(m, vec({1.0, 0.3}), vec({1, 0}), {1.0})[0];
  const ConstCurvAdjudication adj = adjudicate_constcurv(m, make_family(FamilyPreset::Sasaki), pt, OracleConfig::defaults());
  o.require(adj.general_matches, "general mixed formula does not match the oracle");
  bool flagged = false;
  std::string flags;
  for (const auto& f : adj.shortcut_inconsistent) {
    if (f.i == 0 && f.j == 0) flagged = true;
    flags += " (" + std::to_string(f.i + 1) + "," + std::to_string(f.j + 1) + "): shortcut " + fmt(f.shortcut) + " oracle " +
             fmt(f.oracle);
  }
  o.require(flagged, "shortcut not flagged at i=j=1");
  o.detail = "flagged" + flags + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// 8. Ricci: flat Sasaki vanishes, and the sphere's closed-form Ricci matches the traced oracle.
Outcome ricci() {
  Outcome o;
  const ChartManifold flat = euclidean(3);
  double flat_max = 0.0;
  for (const auto& p : speed_points(flat, vec({0.5, -0.2, 0.1}), vec({1, 2, -1}), {0.0, 0.5, 1.5})) {
    const AdaptedFramePoint fp = adapted_frame(flat, p.x, p.v);
    const TMCurvatureTable T = tm_curvature(flat, make_family(FamilyPreset::Sasaki), fp);
    flat_max = std::max(flat_max, tm_ricci(T, frame_curvature(flat, fp, {}, false).R).cwiseAbs().maxCoeff());
  }
  o.require(flat_max <= 1e-9, "flat Ricci max " + fmt(flat_max));

  const ChartManifold s2 = sphere(2);
  double dev = 0.0;
  for (const auto& p : speed_points(s2, vec({1.0, 0.3}), vec({1, 0.4}), {0.0, 1.0})) {
    const auto num = numeric_tm_curvature(s2, make_family(FamilyPreset::Sasaki), p, OracleConfig::defaults());
    const Matrix traced = ricci_from_table(num, num.norms_squared());
    const TMCurvatureTable T = tm_curvature(s2, make_family(FamilyPreset::Sasaki), num.frame);
    const Matrix closed = tm_ricci(T, frame_curvature(s2, num.frame, {}, false).R);
    dev = std::max(dev, (closed - traced).cwiseAbs().maxCoeff());
  }
  o.require(dev <= 1e-4, "sphere Ricci deviation " + fmt(dev));
  o.detail = "flat max " + fmt(flat_max) + ", sphere max |dev| " + fmt(dev) + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// 9. Two identical verify runs write identical bytes.
Outcome determinism(const std::string& cli, const std::filesystem::path& work) {
  Outcome o;
  std::filesystem::create_directories(work);
  const auto config = work / "determinism.json";
  std::ofstream(config) << R"({
  "manifold": "sphere:2",
  "family": "cheeger-gromoll",
  "grid": {"x": [[1.0, 0.3], [2.0, -1.0]], "speeds": [0, 0.5, 1.5], "directions": [[1, 0], [1, 1]]},
  "output": {"format": "json"}
})";
  auto run = [&](const std::filesystem::path& out) {
    const std::string cmd = "\"" + cli + "\" verify --config \"" + config.string() + "\" --out \"" + out.string() + "\"";
    return std::system(cmd.c_str());
  };
  const auto a = work / "run1.json", b = work / "run2.json";
  const int ra = run(a), rb = run(b);
  o.require(ra == 0 && rb == 0, "verify exit codes " + std::to_string(ra) + ", " + std::to_string(rb));
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string sa = slurp(a), sb = slurp(b);
  o.require(!sa.empty(), "empty report");
  o.require(sa == sb, "reports differ");
  o.detail = std::to_string(sa.size()) + " bytes, identical: " + (sa == sb ? "yes" : "no") +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: acceptance <tbcurv-cli> <work-dir>\n");
    return 2;
  }
  const std::string cli = argv[1];
  const std::filesystem::path work = argv[2];

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence over manifolds, families and speeds", oracle_equivalence},
      {"covariant-derivative components on the conformal metric", nabla_term},
      {"flatness of Sasaki and of the flatness construction", flatness},
      {"F and H vanish for flat-by-construction families", fiber_functions},
      {"sectional curvature properties", sectional_properties},
      {"exponential-metric scalar curvature and threshold", scalar_specials},
      {"constant-curvature mixed sectional adjudication", constcurv_adjudication},
      {"Ricci curvature", ricci},
      {"deterministic verify reports", [&] { return determinism(cli, work); }},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s  criterion %zu: %s  [%s]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
