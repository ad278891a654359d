#pragma once

// The natural metric G on TM in induced coordinates (x, v), and the adapted frame there.
//
// Induced basis order: d/dx^1 .. d/dx^n, d/dv^1 .. d/dv^n. Bundle vectors are 2n-vectors
// in that basis.

#include <cmath>
#include <utility>

#include "tbcurv/basemanifold.hpp"
#include "tbcurv/errors.hpp"
#include "tbcurv/metricfamily.hpp"
#include "tbcurv/tensor.hpp"

namespace tbcurv {

struct BundlePoint {
  Vector x;  // base coordinates
  Vector v;  // fiber components
};

/// |v|^2_g at a bundle point.
inline SquaredSpeed squared_speed(const Matrix& g, const Vector& v) { return {v.dot(g * v)}; }

/// C(a, c) = Γ^a_{bc} v^b, so that K(A) = A_v + C A_x.
inline Matrix connection_coupling(const Christoffel& gamma, const Vector& v) {
  const int n = gamma.dim();
  Matrix c = Matrix::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int cc = 0; cc < n; ++cc) c(a, cc) += gamma(a, b, cc) * v[b];
  return c;
}

/// (pi_* A, K A) for a bundle vector A at p.
inline std::pair<Vector, Vector> connection_split(const Christoffel& gamma, const Vector& v, const Vector& A) {
  const auto n = v.size();
  if (A.size() != 2 * n) throw DegenerateInput("connection_split: bundle vector must have 2n components");
  const Vector hor = A.head(n);
  return {hor, A.tail(n) + connection_coupling(gamma, v) * hor};
}

inline std::pair<Vector, Vector> connection_split(const ChartManifold& m, const BundlePoint& p, const Vector& A,
                                                  const DiffConfig& cfg = {}) {
  return connection_split(christoffels(m, p.x, cfg), p.v, A);
}

/// G from g, Γ and the family at one point:
/// G(A, B) = g(pi_* A, pi_* B) + alpha g(KA, KB) + beta g(KA, v) g(KB, v).
inline Matrix induced_metric(const Matrix& g, const Christoffel& gamma, const NaturalMetricFamily& fam, const Vector& v) {
  const auto n = v.size();
  const FamilyCoefficients c = fam.at(squared_speed(g, v));
  Matrix P = Matrix::Identity(2 * n, 2 * n);
  P.bottomLeftCorner(n, n) = connection_coupling(gamma, v);
  const Vector gv = g * v;
  Matrix B = Matrix::Zero(2 * n, 2 * n);
  B.topLeftCorner(n, n) = g;
  B.bottomRightCorner(n, n) = c.alpha * g + c.beta * gv * gv.transpose();
  return P.transpose() * B * P;
}

inline Matrix induced_metric(const ChartManifold& m, const NaturalMetricFamily& fam, const BundlePoint& p,
                             const DiffConfig& cfg = {}) {
  if (p.x.size() != m.dim() || p.v.size() != m.dim()) throw DegenerateInput("induced_metric: dimension mismatch");
  return induced_metric(m.metric(p.x), christoffels(m, p.x, cfg), fam, p.v);
}

/// Rows e_1..e_n (horizontal lifts of u_i) then e_{n+1}..e_{2n} (vertical lifts).
inline Matrix adapted_frame_vectors(const Christoffel& gamma, const AdaptedFramePoint& fp) {
  const auto n = fp.u.rows();
  const Matrix c = connection_coupling(gamma, fp.v);
  Matrix E = Matrix::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector ui = fp.u.row(i).transpose();
    E.row(i).head(n) = ui.transpose();
    E.row(i).tail(n) = -(c * ui).transpose();
    E.row(n + i).tail(n) = ui.transpose();
  }
  return E;
}

inline Matrix adapted_frame_vectors(const ChartManifold& m, const AdaptedFramePoint& fp, const DiffConfig& cfg = {}) {
  return adapted_frame_vectors(christoffels(m, fp.q, cfg), fp);
}

/// Diagonal of the adapted frame's Gram matrix: 1 (horizontal), alpha + t^2 beta (e_{n+1}), alpha.
inline Vector frame_norms_squared(const FamilyCoefficients& c, int n) {
  Vector N(2 * n);
  for (int i = 0; i < n; ++i) {
    N[i] = 1.0;
    N[n + i] = c.alpha;
  }
  N[n] = c.radial();
  return N;
}

}  // namespace tbcurv
