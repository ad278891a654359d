#pragma once

// Brute-force curvature of (TM, G): central differences of the induced metric in (x, v),
// Levi-Civita curvature of the 2n-dimensional metric, contraction with the adapted frame.
// Nothing here calls the closed forms; compare() puts the two side by side.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tbcurv/basemanifold.hpp"
#include "tbcurv/bundlemetric.hpp"
#include "tbcurv/closedform.hpp"
#include "tbcurv/errors.hpp"
#include "tbcurv/levicivita.hpp"
#include "tbcurv/metricfamily.hpp"
#include "tbcurv/numdiff.hpp"

namespace tbcurv {

struct Tolerance {
  double abs = 1e-5;
  double rel = 1e-3;

  bool accepts(double deviation, double reference) const noexcept {
    return std::abs(deviation) <= abs + rel * std::abs(reference);
  }
};

struct OracleConfig {
  DiffConfig diff;
  Tolerance tol;

  /// Default tolerances for a step strategy: 1e-5 / 1e-3 with Richardson, 1e-3 / 1e-2 otherwise.
  static OracleConfig defaults(StepStrategy s = StepStrategy::Richardson) {
    OracleConfig c;
    c.diff.strategy = s;
    c.tol = s == StepStrategy::Richardson ? Tolerance{1e-5, 1e-3} : Tolerance{1e-3, 1e-2};
    return c;
  }

  void check() const {
    if (diff.base_step < 0.0) throw ConfigError("base step must be positive");
    if (!(tol.abs > 0.0) || !(tol.rel > 0.0)) throw ConfigError("tolerances must be positive");
  }
};

inline constexpr double conditioning_limit = 1e8;

struct NumericTMCurvature {
  AdaptedFramePoint frame;
  Matrix E;          // adapted frame vectors, rows, induced coordinates
  Matrix gram;       // E G E^T
  Tensor4 table;     // <R(e_a, e_b) e_c, e_d>
  double condition = 1.0;
  std::vector<std::string> warnings;

  double operator()(int a, int b, int c, int d) const { return table(a, b, c, d); }
  Vector norms_squared() const { return gram.diagonal(); }
};

/// Curvature of the induced metric at p, contracted with the adapted frame of (p.x, p.v).
inline NumericTMCurvature numeric_tm_curvature(const ChartManifold& m, const NaturalMetricFamily& fam,
                                               const BundlePoint& p, const OracleConfig& cfg) {
  cfg.check();
  const int n = m.dim();
  if (p.x.size() != n || p.v.size() != n) throw DegenerateInput("oracle: dimension mismatch");
  const DiffConfig& dc = cfg.diff;
  Vector X(2 * n);
  X << p.x, p.v;
  const double h = detail::max_step(X, dc);
  m.require_interior(p.x, detail::christoffel_reach(m, p.x, dc) + 2.0 * h, "oracle");
  fam.at(squared_speed(m.metric(p.x), p.v));

  auto G_at = [&](const Vector& Y) -> Matrix {
    const Vector x = Y.head(n), v = Y.tail(n);
    return induced_metric(m.metric(x), detail::christoffels_unchecked(m, x, dc), fam, v);
  };
  auto Gamma_at = [&](const Vector& Y) { return christoffel_from_metric(G_at, Y, dc); };

  const Matrix G = G_at(X);
  const std::vector<Christoffel> dGamma = partials(Gamma_at, X, dc);
  const RiemannAtPoint Rbar = riemann_from_christoffel(G, Gamma_at(X), dGamma);

  NumericTMCurvature out;
  out.frame = adapted_frame(m, p.x, p.v);
  out.E = adapted_frame_vectors(detail::christoffels_unchecked(m, p.x, dc), out.frame);
  out.gram = out.E * G * out.E.transpose();
  out.table = contract_frame(Rbar.low, out.E);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(G, Eigen::EigenvaluesOnly);
  out.condition = eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();
  if (out.condition > conditioning_limit)
    out.warnings.push_back("ConditioningWarning: condition number of G is " + format_double(out.condition));
  return out;
}

// ---------------------------------------------------------------------------------------
// Sign calibration

struct SignCalibration {
  int sign = 1;
  bool underdetermined = false;
  /// Component classes whose best sign differs from the global one: a formula erratum.
  std::vector<ComponentClass> mixed;
  std::array<std::optional<int>, component_class_count> class_sign{};
};

/// Accumulates evidence for the relative sign of closed-form and oracle components.
class SignEvidence {
 public:
  explicit SignEvidence(double abs_tol) : threshold_(100.0 * abs_tol) {}

  template <class Closed, class Oracle>
  void add(int n, const Closed& closed, const Oracle& oracle) {
    const int m = 2 * n;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int c = 0; c < m; ++c)
          for (int d = 0; d < m; ++d) {
            const double x = closed(a, b, c, d), y = oracle(a, b, c, d);
            cost_plus_ += std::abs(x - y);
            cost_minus_ += std::abs(x + y);
            if (std::abs(x) <= threshold_ || std::abs(y) <= threshold_) continue;
            const auto k = static_cast<std::size_t>(canonical_ref(n, a, b, c, d).cls);
            (x * y > 0.0 ? agree_ : disagree_)[k] += 1;
          }
  }

  SignCalibration result() const {
    SignCalibration s;
    bool any = false;
    for (std::size_t k = 0; k < component_class_count; ++k) {
      if (agree_[k] + disagree_[k] == 0) continue;
      any = true;
      s.class_sign[k] = agree_[k] >= disagree_[k] ? 1 : -1;
    }
    if (!any) {
      s.underdetermined = true;
      return s;
    }
    s.sign = cost_minus_ < cost_plus_ ? -1 : 1;
    for (std::size_t k = 0; k < component_class_count; ++k)
      if (s.class_sign[k] && *s.class_sign[k] != s.sign) s.mixed.push_back(static_cast<ComponentClass>(k));
    return s;
  }

 private:
  double threshold_;
  double cost_plus_ = 0.0, cost_minus_ = 0.0;
  std::array<long, component_class_count> agree_{}, disagree_{};
};

template <class Closed, class Oracle>
SignCalibration calibrate_sign(int n, const Closed& closed, const Oracle& oracle, double abs_tol) {
  SignEvidence ev(abs_tol);
  ev.add(n, closed, oracle);
  return ev.result();
}

// ---------------------------------------------------------------------------------------
// Reports

struct CurvatureReport {
  std::string manifold, family, alpha, beta;
  Vector x, v;
  double t = 0.0;
  OracleConfig config;
  int n = 0;

  std::vector<double> closed, oracle, deviation;  // row-major (a, b, c, d), deviation = s*closed - oracle
  std::array<double, component_class_count> class_max_deviation{};
  double max_abs_deviation = 0.0;
  double max_rel_deviation = 0.0;  // over components with |oracle| > abs tolerance
  double condition = 0.0;
  SignCalibration calibration;
  bool pass = false;
  std::string error;
  std::vector<std::string> warnings;
};

namespace detail {

inline CurvatureReport report_header(const ChartManifold& m, const NaturalMetricFamily& fam, const BundlePoint& p,
                                     const OracleConfig& cfg) {
  CurvatureReport r;
  r.manifold = m.id();
  r.family = fam.name();
  r.alpha = fam.alpha().label();
  r.beta = fam.beta().label();
  r.x = p.x;
  r.v = p.v;
  r.config = cfg;
  r.n = m.dim();
  return r;
}

inline void score(CurvatureReport& r) {
  const int m = 2 * r.n;
  const double s = r.calibration.sign;
  r.deviation.assign(r.closed.size(), 0.0);
  r.class_max_deviation.fill(0.0);
  r.max_abs_deviation = r.max_rel_deviation = 0.0;
  bool ok = true;
  std::size_t idx = 0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d, ++idx) {
          const double dev = s * r.closed[idx] - r.oracle[idx];
          r.deviation[idx] = dev;
          const auto k = static_cast<std::size_t>(canonical_ref(r.n, a, b, c, d).cls);
          r.class_max_deviation[k] = std::max(r.class_max_deviation[k], std::abs(dev));
          r.max_abs_deviation = std::max(r.max_abs_deviation, std::abs(dev));
          if (std::abs(r.oracle[idx]) > r.config.tol.abs)
            r.max_rel_deviation = std::max(r.max_rel_deviation, std::abs(dev) / std::abs(r.oracle[idx]));
          ok = ok && r.config.tol.accepts(dev, r.oracle[idx]);
        }
  r.pass = ok;
}

template <class Table>
std::vector<double> flatten(const Table& T, int n) {
  const int m = 2 * n;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m) * m * m * m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d) out.push_back(T(a, b, c, d));
  return out;
}

}  // namespace detail

/// Worker count: TBCURV_THREADS when set, else the hardware concurrency.
inline unsigned worker_count(std::size_t jobs) {
  unsigned w = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TBCURV_THREADS")) {
    const long k = std::strtol(env, nullptr, 10);
    if (k > 0) w = static_cast<unsigned>(k);
  }
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(w, jobs)));
}

/// Runs fn(i) for i in [0, count) on up to worker_count(count) threads.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const unsigned workers = worker_count(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

/// One report per point, in point order. The sign is calibrated once over all points.
inline std::vector<CurvatureReport> compare(const ChartManifold& m, const NaturalMetricFamily& fam,
                                            const std::vector<BundlePoint>& points, const OracleConfig& cfg) {
  cfg.check();
  std::vector<CurvatureReport> reports(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    CurvatureReport r = detail::report_header(m, fam, points[i], cfg);
    try {
      const NumericTMCurvature num = numeric_tm_curvature(m, fam, points[i], cfg);
      r.t = num.frame.t;
      const TMCurvatureTable closed = tm_curvature(m, fam, num.frame, cfg.diff);
      r.closed = detail::flatten(closed, r.n);
      r.oracle = detail::flatten(num, r.n);
      r.condition = num.condition;
      r.warnings = num.warnings;
    } catch (const Error& e) {
      r.error = e.what();
    }
    reports[i] = std::move(r);
  });

  SignEvidence ev(cfg.tol.abs);
  for (const CurvatureReport& r : reports) {
    if (!r.error.empty()) continue;
    const int m2 = 2 * r.n;
    auto at = [m2](const std::vector<double>& v) {
      return [&v, m2](int a, int b, int c, int d) { return v[static_cast<std::size_t>(((a * m2 + b) * m2 + c) * m2 + d)]; };
    };
    ev.add(r.n, at(r.closed), at(r.oracle));
  }
  const SignCalibration cal = ev.result();
  for (CurvatureReport& r : reports) {
    r.calibration = cal;
    if (r.error.empty()) detail::score(r);
  }
  return reports;
}

// ---------------------------------------------------------------------------------------
// Constant-curvature shortcut against the oracle

struct ConstCurvFlag {
  int i = 0, j = 0;
  double shortcut = 0.0, general = 0.0, oracle = 0.0;
};

struct ConstCurvAdjudication {
  double K0 = 0.0, t = 0.0;
  Matrix oracle_mixed;    // K(e_i, e_n+j) from the oracle table
  Matrix general_mixed;   // general mixed sectional formula
  Matrix shortcut_mixed;   // constant-curvature shortcut
  bool general_matches = false;
  std::vector<ConstCurvFlag> shortcut_inconsistent;
};

inline ConstCurvAdjudication adjudicate_constcurv(const ChartManifold& m, const NaturalMetricFamily& fam,
                                                  const BundlePoint& p, const OracleConfig& cfg) {
  if (!m.constant_curvature()) throw ConfigError("'" + m.id() + "' is not a constant-curvature catalog manifold");
  const int n = m.dim();
  const NumericTMCurvature num = numeric_tm_curvature(m, fam, p, cfg);
  const FamilyCoefficients c = fam.at(SquaredSpeed::of_speed(num.frame.t));
  const Matrix K = sectional_from_table(num, num.norms_squared());

  ConstCurvAdjudication adj;
  adj.K0 = *m.constant_curvature();
  adj.t = num.frame.t;
  adj.oracle_mixed = K.topRightCorner(n, n);
  adj.general_mixed = tm_sectional(frame_curvature(m, num.frame, cfg.diff, false).R, c).mixed;
  adj.shortcut_mixed = tm_sectional_constcurv(adj.K0, c, n).mixed_shortcut;
  adj.general_matches = true;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double o = adj.oracle_mixed(i, j);
      adj.general_matches = adj.general_matches && cfg.tol.accepts(adj.general_mixed(i, j) - o, o);
      if (!cfg.tol.accepts(adj.shortcut_mixed(i, j) - o, o))
        adj.shortcut_inconsistent.push_back({i, j, adj.shortcut_mixed(i, j), adj.general_mixed(i, j), o});
    }
  return adj;
}

}  // namespace tbcurv
