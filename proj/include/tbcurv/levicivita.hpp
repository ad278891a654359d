#pragma once

// Levi-Civita connection and curvature of a metric given in coordinates, in any dimension.
// Shared by the base manifold and by the brute-force curvature of the tangent bundle.
//
// Conventions:
//   R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z
//   up(a, b, c, d)  = R^a_{bcd}, the d_a component of R(d_c, d_d) d_b
//   low(a, b, c, d) = g(R(d_a, d_b) d_c, d_d)
// so that the sectional curvature of an orthonormal pair is low(x, y, y, x).

#include <span>
#include <vector>

#include "tbcurv/errors.hpp"
#include "tbcurv/numdiff.hpp"
#include "tbcurv/tensor.hpp"

namespace tbcurv {

/// Inverse of an SPD matrix; SingularMetric when the Cholesky factorization fails.
inline Matrix spd_inverse(const Matrix& g) {
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success) throw SingularMetric("metric is not positive definite");
  return llt.solve(Matrix::Identity(g.rows(), g.cols()));
}

/// Γ^a_{bc} = 1/2 g^{ad} (d_b g_{dc} + d_c g_{bd} - d_d g_{bc}); dg[c] = d_c g.
inline Christoffel christoffel_from_partials(const Matrix& g, std::span<const Matrix> dg) {
  const int n = static_cast<int>(g.rows());
  const Matrix ginv = spd_inverse(g);
  Christoffel lowered(n);  // Γ_{dbc}
  for (int d = 0; d < n; ++d)
    for (int b = 0; b < n; ++b)
      for (int c = b; c < n; ++c) {
        const double v = 0.5 * (dg[b](d, c) + dg[c](b, d) - dg[d](b, c));
        lowered(d, b, c) = v;
        lowered(d, c, b) = v;
      }
  Christoffel gamma(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = b; c < n; ++c) {
        double s = 0.0;
        for (int d = 0; d < n; ++d) s += ginv(a, d) * lowered(d, b, c);
        gamma(a, b, c) = s;
        gamma(a, c, b) = s;
      }
  return gamma;
}

template <class MetricFn>
Christoffel christoffel_from_metric(MetricFn&& metric, const Vector& x, const DiffConfig& cfg) {
  const std::vector<Matrix> dg = partials(metric, x, cfg);
  return christoffel_from_partials(metric(x), dg);
}

struct RiemannAtPoint {
  Tensor4 up;   // R^a_{bcd}
  Tensor4 low;  // g(R(d_a, d_b) d_c, d_d)
};

/// Curvature from Γ and its partials dgamma[e] = d_e Γ.
inline RiemannAtPoint riemann_from_christoffel(const Matrix& g, const Christoffel& gamma,
                                               std::span<const Christoffel> dgamma) {
  const int n = gamma.dim();
  RiemannAtPoint r{Tensor4(n), Tensor4(n)};
  // R^e_{c a b} = d_a Γ^e_{bc} - d_b Γ^e_{ac} + Γ^e_{af} Γ^f_{bc} - Γ^e_{bf} Γ^f_{ac}
  for (int e = 0; e < n; ++e)
    for (int c = 0; c < n; ++c)
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          double s = dgamma[a](e, b, c) - dgamma[b](e, a, c);
          for (int f = 0; f < n; ++f) s += gamma(e, a, f) * gamma(f, b, c) - gamma(e, b, f) * gamma(f, a, c);
          r.up(e, c, a, b) = s;
          r.up(e, c, b, a) = -s;
        }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          double s = 0.0;
          for (int e = 0; e < n; ++e) s += g(d, e) * r.up(e, c, a, b);
          r.low(a, b, c, d) = s;
        }
  return r;
}

/// (nabla_e R)_{abcd} from R_{abcd}, its partials dlow[e] and Γ. Result indexed (e, a, b, c, d).
inline Tensor5 covariant_derivative(const Tensor4& low, std::span<const Tensor4> dlow, const Christoffel& gamma) {
  const int n = low.dim();
  Tensor5 out(n);
  for (int e = 0; e < n; ++e)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d) {
            double s = dlow[e](a, b, c, d);
            for (int f = 0; f < n; ++f) {
              s -= gamma(f, e, a) * low(f, b, c, d);
              s -= gamma(f, e, b) * low(a, f, c, d);
              s -= gamma(f, e, c) * low(a, b, f, d);
              s -= gamma(f, e, d) * low(a, b, c, f);
            }
            out(e, a, b, c, d) = s;
          }
  return out;
}

/// T(i,j,k,l) = sum T(a,b,c,d) E(i,a) E(j,b) E(k,c) E(l,d), with frame vectors as rows of E.
inline Tensor4 contract_frame(const Tensor4& t, const Matrix& frame) {
  const int n = t.dim();
  Tensor4 a(n), b(n);
  // Transform one slot at a time.
  for (int i = 0; i < n; ++i)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          double v = 0.0;
          for (int p = 0; p < n; ++p) v += frame(i, p) * t(p, q, r, s);
          a(i, q, r, s) = v;
        }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          double v = 0.0;
          for (int q = 0; q < n; ++q) v += frame(j, q) * a(i, q, r, s);
          b(i, j, r, s) = v;
        }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int s = 0; s < n; ++s) {
          double v = 0.0;
          for (int r = 0; r < n; ++r) v += frame(k, r) * b(i, j, r, s);
          a(i, j, k, s) = v;
        }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double v = 0.0;
          for (int s = 0; s < n; ++s) v += frame(l, s) * a(i, j, k, s);
          b(i, j, k, l) = v;
        }
  return b;
}

inline Tensor5 contract_frame(const Tensor5& t, const Matrix& frame) {
  const int n = t.dim();
  Tensor5 out(n);
  Tensor4 slice(n);
  std::vector<Tensor4> per_direction;
  per_direction.reserve(static_cast<std::size_t>(n));
  for (int e = 0; e < n; ++e) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d) slice(a, b, c, d) = t(e, a, b, c, d);
    per_direction.push_back(contract_frame(slice, frame));
  }
  for (int p = 0; p < n; ++p)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            double v = 0.0;
            for (int e = 0; e < n; ++e) v += frame(p, e) * per_direction[static_cast<std::size_t>(e)](i, j, k, l);
            out(p, i, j, k, l) = v;
          }
  return out;
}

}  // namespace tbcurv
