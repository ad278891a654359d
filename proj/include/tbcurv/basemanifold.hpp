#pragma once

// Chart-defined Riemannian manifolds (M, g): Christoffel symbols, curvature, its covariant
// derivative, orthonormal frames adapted to a tangent vector, and base curvature invariants.

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tbcurv/errors.hpp"
#include "tbcurv/levicivita.hpp"
#include "tbcurv/numdiff.hpp"
#include "tbcurv/scalarfun.hpp"
#include "tbcurv/tensor.hpp"

namespace tbcurv {

/// Axis-aligned coordinate box.
struct Box {
  Vector lo, hi;

  static Box cube(int n, double lo, double hi) {
    return {Vector::Constant(n, lo), Vector::Constant(n, hi)};
  }
  bool contains(const Vector& x, double margin = 0.0) const {
    for (int i = 0; i < x.size(); ++i)
      if (!(x[i] >= lo[i] + margin && x[i] <= hi[i] - margin)) return false;
    return true;
  }
};

/// Single-chart Riemannian manifold.
class ChartManifold {
 public:
  using MetricFn = std::function<Matrix(const Vector&)>;
  using ChristoffelFn = std::function<Christoffel(const Vector&)>;

  /// Stencil margins are this many stencil radii.
  static constexpr double margin_radii = 5.0;

  ChartManifold(std::string id, int dim, Box domain, MetricFn metric, std::optional<ChristoffelFn> christoffel = {},
                std::optional<double> constant_curvature = {})
      : id_(std::move(id)),
        dim_(dim),
        domain_(std::move(domain)),
        metric_(std::move(metric)),
        christoffel_(std::move(christoffel)),
        constant_curvature_(constant_curvature) {
    if (dim_ < 2) throw ConfigError("manifold dimension must be at least 2");
  }

  const std::string& id() const noexcept { return id_; }
  int dim() const noexcept { return dim_; }
  const Box& domain() const noexcept { return domain_; }
  bool has_analytic_christoffels() const noexcept { return christoffel_.has_value(); }
  /// Sectional curvature when the catalog knows it is constant.
  std::optional<double> constant_curvature() const noexcept { return constant_curvature_; }

  Matrix metric(const Vector& x) const { return metric_(x); }
  const MetricFn& metric_fn() const noexcept { return metric_; }
  const std::optional<ChristoffelFn>& christoffel_fn() const noexcept { return christoffel_; }

  /// Throws StencilOutOfDomain unless x is `reach` * margin_radii inside the chart box.
  void require_interior(const Vector& x, double reach, const char* what) const {
    if (x.size() != dim_) throw DegenerateInput(std::string(what) + ": point has wrong dimension");
    if (!domain_.contains(x, margin_radii * reach))
      throw StencilOutOfDomain(std::string(what) + ": point too close to the chart boundary of '" + id_ + "'");
  }

 private:
  std::string id_;
  int dim_;
  Box domain_;
  MetricFn metric_;
  std::optional<ChristoffelFn> christoffel_;
  std::optional<double> constant_curvature_;
};

namespace detail {

inline double max_step(const Vector& x, const DiffConfig& cfg) {
  double h = 0.0;
  for (int i = 0; i < x.size(); ++i) h = std::max(h, cfg.step(x[i]));
  return h;
}

inline Christoffel christoffels_unchecked(const ChartManifold& m, const Vector& x, const DiffConfig& cfg) {
  if (m.christoffel_fn()) return (*m.christoffel_fn())(x);
  return christoffel_from_metric(m.metric_fn(), x, cfg);
}

inline double christoffel_reach(const ChartManifold& m, const Vector& x, const DiffConfig& cfg) {
  return m.has_analytic_christoffels() ? 0.0 : max_step(x, cfg);
}

}  // namespace detail

/// Γ^a_{bc}(x): analytic when the manifold provides it, otherwise central differences of g.
inline Christoffel christoffels(const ChartManifold& m, const Vector& x, const DiffConfig& cfg = {}) {
  m.require_interior(x, detail::christoffel_reach(m, x, cfg), "christoffels");
  return detail::christoffels_unchecked(m, x, cfg);
}

namespace detail {

inline RiemannAtPoint riemann_unchecked(const ChartManifold& m, const Vector& x, const DiffConfig& cfg) {
  auto gamma_at = [&](const Vector& y) { return christoffels_unchecked(m, y, cfg); };
  const std::vector<Christoffel> dgamma = partials(gamma_at, x, cfg);
  return riemann_from_christoffel(m.metric(x), gamma_at(x), dgamma);
}

}  // namespace detail

/// Coordinate curvature (see levicivita.hpp for index conventions).
inline RiemannAtPoint riemann(const ChartManifold& m, const Vector& x, const DiffConfig& cfg = {}) {
  m.require_interior(x, detail::christoffel_reach(m, x, cfg) + detail::max_step(x, cfg), "riemann");
  return detail::riemann_unchecked(m, x, cfg);
}

/// (nabla_e R)_{abcd} in coordinates, indexed (e, a, b, c, d).
inline Tensor5 nabla_riemann(const ChartManifold& m, const Vector& x, const DiffConfig& cfg = {}) {
  const double h = detail::max_step(x, cfg);
  m.require_interior(x, detail::christoffel_reach(m, x, cfg) + 2.0 * h, "nabla_riemann");
  auto low_at = [&](const Vector& y) { return detail::riemann_unchecked(m, y, cfg).low; };
  const std::vector<Tensor4> dlow = partials(low_at, x, cfg);
  return covariant_derivative(low_at(x), dlow, detail::christoffels_unchecked(m, x, cfg));
}

/// Base point q with a g-orthonormal frame u (rows, chart components) whose first vector
/// is v / |v| when v != 0.
struct AdaptedFramePoint {
  Vector q;
  Matrix u;
  Vector v;
  double t = 0.0;  // |v|_g
};

inline double g_inner(const Matrix& g, const Vector& a, const Vector& b) { return a.dot(g * b); }

/// Gram-Schmidt on (v, chart basis). With v = 0 the chart basis alone is used and t = 0.
inline AdaptedFramePoint adapted_frame(const ChartManifold& m, const Vector& q, const Vector& v) {
  const int n = m.dim();
  if (q.size() != n || v.size() != n) throw DegenerateInput("adapted_frame: dimension mismatch");
  if (!m.domain().contains(q)) throw StencilOutOfDomain("adapted_frame: point outside the chart of '" + m.id() + "'");
  const Matrix g = m.metric(q);
  AdaptedFramePoint fp{q, Matrix::Zero(n, n), v, 0.0};
  const double t2 = g_inner(g, v, v);
  if (!(t2 >= 0.0)) throw SingularMetric("adapted_frame: metric is not positive definite");
  fp.t = std::sqrt(t2);
  int count = 0;
  if (fp.t > 0.0) fp.u.row(count++) = (v / fp.t).transpose();
  for (int k = 0; k < n && count < n; ++k) {
    Vector w = Vector::Unit(n, k);
    const double scale = std::sqrt(g(k, k));
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j < count; ++j) {
        const Vector uj = fp.u.row(j).transpose();
        w -= g_inner(g, uj, w) * uj;
      }
    const double norm = std::sqrt(std::max(g_inner(g, w, w), 0.0));
    if (norm <= 1e-8 * scale) continue;
    fp.u.row(count++) = (w / norm).transpose();
  }
  if (count < n) throw DegenerateInput("adapted_frame: chart basis does not span the tangent space");
  return fp;
}

/// Frame with the completion u_2..u_n rotated by an orthogonal (n-1)x(n-1) matrix.
inline AdaptedFramePoint rotate_completion(const AdaptedFramePoint& fp, const Matrix& rotation) {
  AdaptedFramePoint out = fp;
  const auto k = fp.u.rows() - 1;
  out.u.bottomRows(k) = rotation * fp.u.bottomRows(k);
  return out;
}

/// Curvature and its covariant derivative contracted with an adapted frame:
///   R(i,j,l,m)     = g(R(u_i, u_j) u_l, u_m)
///   dR(p,i,j,l,m)  = g((nabla_{u_p} R)(u_i, u_j) u_l, u_m)
struct FrameCurvature {
  Tensor4 R;
  std::optional<Tensor5> dR;
};

inline FrameCurvature frame_curvature(const ChartManifold& m, const AdaptedFramePoint& fp, const DiffConfig& cfg = {},
                                      bool with_nabla = true) {
  FrameCurvature fc{contract_frame(riemann(m, fp.q, cfg).low, fp.u), std::nullopt};
  if (with_nabla) fc.dR = contract_frame(nabla_riemann(m, fp.q, cfg), fp.u);
  return fc;
}

struct BaseInvariants {
  Matrix sectional;  // K(u_i, u_j); diagonal set to 0
  Matrix ricci;      // Ricc(u_i, u_j)
  double scalar = 0.0;
};

inline BaseInvariants base_invariants(const Tensor4& R) {
  const int n = R.dim();
  BaseInvariants inv{Matrix::Zero(n, n), Matrix::Zero(n, n), 0.0};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i != j) inv.sectional(i, j) = R(i, j, j, i);
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += R(i, k, k, j);
      inv.ricci(i, j) = s;
    }
  inv.scalar = inv.ricci.trace();
  return inv;
}

inline BaseInvariants base_invariants(const ChartManifold& m, const AdaptedFramePoint& fp, const DiffConfig& cfg = {}) {
  return base_invariants(frame_curvature(m, fp, cfg, false).R);
}

// ---------------------------------------------------------------------------------------
// Catalog

inline ChartManifold euclidean(int n) {
  return ChartManifold(
      "euclidean(" + std::to_string(n) + ")", n, Box::cube(n, -10.0, 10.0),
      [n](const Vector&) { return Matrix::Identity(n, n); }, [n](const Vector&) { return Christoffel(n); }, 0.0);
}

namespace detail {

// Γ of g = e^{2f} delta from the gradient of f.
inline Christoffel conformal_christoffel(const Vector& df) {
  const int n = static_cast<int>(df.size());
  Christoffel gamma(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        gamma(a, b, c) = kronecker(a, b) * df[c] + kronecker(a, c) * df[b] - kronecker(b, c) * df[a];
  return gamma;
}

}  // namespace detail

enum class SphereChart { Polar, Stereographic };

/// Round sphere of the given radius. Polar chart: x_0..x_{n-2} in (0, pi), x_{n-1} in (-pi, pi),
/// g = r^2 diag(1, sin^2 x_0, sin^2 x_0 sin^2 x_1, ...).
/// Stereographic chart: g = (2 r^2 / (r^2 + |x|^2))^2 delta.
inline ChartManifold sphere(int n, double radius = 1.0, SphereChart chart = SphereChart::Polar) {
  if (!(radius > 0.0)) throw ConfigError("sphere radius must be positive");
  const double r2 = radius * radius;
  const std::string id = std::string(chart == SphereChart::Polar ? "sphere" : "sphere-stereo") + "(" +
                         std::to_string(n) + ", r=" + format_double(radius) + ")";
  if (chart == SphereChart::Stereographic) {
    auto factor = [r2](const Vector& x) { return 2.0 * r2 / (r2 + x.squaredNorm()); };
    return ChartManifold(
        id, n, Box::cube(n, -3.0 * radius, 3.0 * radius),
        [n, factor](const Vector& x) {
          const double w = factor(x);
          return Matrix((w * w) * Matrix::Identity(n, n));
        },
        [r2](const Vector& x) { return detail::conformal_christoffel(-2.0 * x / (r2 + x.squaredNorm())); },
        1.0 / r2);
  }
  Box box{Vector::Constant(n, 0.0), Vector::Constant(n, std::numbers::pi)};
  box.lo[n - 1] = -std::numbers::pi;
  auto diag = [n, r2](const Vector& x) {
    Vector w(n);
    double acc = r2;
    for (int k = 0; k < n; ++k) {
      w[k] = acc;
      if (k < n - 1) acc *= std::sin(x[k]) * std::sin(x[k]);
    }
    return w;
  };
  return ChartManifold(
      id, n, box, [diag](const Vector& x) { return Matrix(diag(x).asDiagonal()); },
      [n, diag](const Vector& x) {
        // Diagonal metric with d_m g_kk = 2 cot(x_m) g_kk for m < k.
        const Vector w = diag(x);
        Christoffel gamma(n);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            if (b < a) {
              const double c = std::cos(x[b]) / std::sin(x[b]);
              gamma(a, a, b) = c;
              gamma(a, b, a) = c;
            } else {
              gamma(a, b, b) = -(w[b] / w[a]) * std::cos(x[a]) / std::sin(x[a]);
            }
          }
        return gamma;
      },
      1.0 / r2);
}

/// Poincare ball g = 4 delta / (1 - |x|^2)^2, curvature -1. The chart box is inscribed in the ball.
inline ChartManifold hyperbolic(int n) {
  const double half = 0.95 / std::sqrt(static_cast<double>(n));
  return ChartManifold(
      "hyperbolic(" + std::to_string(n) + ")", n, Box::cube(n, -half, half),
      [n](const Vector& x) {
        const double w = 2.0 / (1.0 - x.squaredNorm());
        return Matrix((w * w) * Matrix::Identity(n, n));
      },
      [](const Vector& x) { return detail::conformal_christoffel(2.0 * x / (1.0 - x.squaredNorm())); }, -1.0);
}

/// c * x_0^{p_0} * ... * x_{n-1}^{p_{n-1}}
struct Monomial {
  double coef = 0.0;
  std::vector<int> powers;
};

/// Polynomial f in the chart coordinates, value and gradient.
struct ConformalPolynomial {
  std::vector<Monomial> terms;

  double value(const Vector& x) const {
    double s = 0.0;
    for (const Monomial& m : terms) {
      double p = m.coef;
      for (std::size_t k = 0; k < m.powers.size(); ++k) p *= std::pow(x[static_cast<int>(k)], m.powers[k]);
      s += p;
    }
    return s;
  }
  Vector gradient(const Vector& x) const {
    Vector g = Vector::Zero(x.size());
    for (const Monomial& m : terms)
      for (std::size_t d = 0; d < m.powers.size(); ++d) {
        if (m.powers[d] == 0) continue;
        double p = m.coef * m.powers[d];
        for (std::size_t k = 0; k < m.powers.size(); ++k) {
          const int e = static_cast<int>(m.powers[k]) - (k == d ? 1 : 0);
          p *= std::pow(x[static_cast<int>(k)], e);
        }
        g[static_cast<int>(d)] += p;
      }
    return g;
  }
};

/// g = e^{2f} delta on the box [-2, 2]^n, f a polynomial with user coefficients.
inline ChartManifold torus_conformal(int n, ConformalPolynomial f) {
  for (const Monomial& m : f.terms) {
    if (static_cast<int>(m.powers.size()) != n)
      throw ConfigError("conformal polynomial term has " + std::to_string(m.powers.size()) + " exponents, expected " +
                        std::to_string(n));
    for (int p : m.powers)
      if (p < 0) throw ConfigError("conformal polynomial exponents must be nonnegative");
  }
  return ChartManifold(
      "torus-conformal(" + std::to_string(n) + ")", n, Box::cube(n, -2.0, 2.0),
      [n, f](const Vector& x) { return Matrix(std::exp(2.0 * f.value(x)) * Matrix::Identity(n, n)); },
      [f](const Vector& x) { return detail::conformal_christoffel(f.gradient(x)); });
}

}  // namespace tbcurv
