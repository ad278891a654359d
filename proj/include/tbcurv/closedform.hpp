#pragma once

// Closed-form curvature of (TM, G) in the adapted frame e_1..e_2n at z = (q, u, t, 0, ..., 0).
//
// Frame indices are 0-based: e_a for a < n is the horizontal lift of u_a, e_{n+a} the vertical
// lift, and u_0 = v / t. Components are <R(e_a, e_b) e_c, e_d> in the unnormalized frame, whose
// Gram matrix is diag(1, .., 1, alpha + t^2 beta, alpha, .., alpha).

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tbcurv/basemanifold.hpp"
#include "tbcurv/bundlemetric.hpp"
#include "tbcurv/errors.hpp"
#include "tbcurv/metricfamily.hpp"
#include "tbcurv/tensor.hpp"

namespace tbcurv {

/// Component classes by horizontal (H) / vertical (V) pattern of the canonical placement.
enum class ComponentClass { HHHH = 0, VVVV = 1, HVVV = 2, VVHH = 3, HVHV = 4, HHVH = 5 };
inline constexpr int component_class_count = 6;

inline std::string_view class_name(ComponentClass c) {
  static constexpr std::array<std::string_view, 6> names{"HHHH", "VVVV", "HVVV", "VVHH", "HVHV", "HHVH"};
  return names[static_cast<std::size_t>(c)];
}

/// Where a component (a, b, c, d) of the 2n-frame lives: sign * block[cls](i, j, k, l).
struct CanonicalRef {
  ComponentClass cls;
  int i, j, k, l;
  double sign;
};

inline CanonicalRef canonical_ref(int n, int a, int b, int c, int d) {
  const int pattern = (a >= n) << 3 | (b >= n) << 2 | (c >= n) << 1 | (d >= n);
  const int A = a % n, B = b % n, C = c % n, D = d % n;
  using K = ComponentClass;
  switch (pattern) {
    case 0b0000: return {K::HHHH, A, B, C, D, 1.0};
    case 0b1111: return {K::VVVV, A, B, C, D, 1.0};
    case 0b0010: return {K::HHVH, A, B, C, D, 1.0};
    case 0b0001: return {K::HHVH, A, B, D, C, -1.0};
    case 0b1000: return {K::HHVH, C, D, A, B, 1.0};
    case 0b0100: return {K::HHVH, C, D, B, A, -1.0};
    case 0b0111: return {K::HVVV, A, B, C, D, 1.0};
    case 0b1011: return {K::HVVV, B, A, C, D, -1.0};
    case 0b1101: return {K::HVVV, C, D, A, B, 1.0};
    case 0b1110: return {K::HVVV, D, C, A, B, -1.0};
    case 0b1100: return {K::VVHH, A, B, C, D, 1.0};
    case 0b0011: return {K::VVHH, C, D, A, B, 1.0};
    case 0b0101: return {K::HVHV, A, B, C, D, 1.0};
    case 0b1001: return {K::HVHV, B, A, C, D, -1.0};
    case 0b0110: return {K::HVHV, A, B, D, C, -1.0};
    default: return {K::HVHV, B, A, D, C, 1.0};  // 0b1010
  }
}

struct TMCurvatureTable {
  int n = 0;
  double t = 0.0;
  FamilyCoefficients coeffs;
  double F = 0.0, H = 0.0;
  bool has_nabla_part = true;
  /// Canonical blocks indexed by ComponentClass, each n^4:
  ///   HHHH <R(e_i,e_j)e_k,e_l>          VVVV <R(e_n+i,e_n+j)e_n+k,e_n+l>
  ///   HVVV <R(e_i,e_n+j)e_n+k,e_n+l>    VVHH <R(e_n+i,e_n+j)e_k,e_l>
  ///   HVHV <R(e_i,e_n+j)e_k,e_n+l>      HHVH <R(e_i,e_j)e_n+k,e_l>
  std::array<Tensor4, component_class_count> blocks;

  const Tensor4& block(ComponentClass c) const { return blocks[static_cast<std::size_t>(c)]; }
  Tensor4& block(ComponentClass c) { return blocks[static_cast<std::size_t>(c)]; }

  double operator()(int a, int b, int c, int d) const {
    const CanonicalRef r = canonical_ref(n, a, b, c, d);
    return r.sign * block(r.cls)(r.i, r.j, r.k, r.l);
  }

  Tensor4 dense() const {
    Tensor4 out(2 * n);
    for (int a = 0; a < 2 * n; ++a)
      for (int b = 0; b < 2 * n; ++b)
        for (int c = 0; c < 2 * n; ++c)
          for (int d = 0; d < 2 * n; ++d) out(a, b, c, d) = (*this)(a, b, c, d);
    return out;
  }

  Vector norms_squared() const { return frame_norms_squared(coeffs, n); }
};

/// Closed-form table from the base frame curvature and the family coefficients at t^2.
/// Without dR the HHVH block needs t = 0 or include_nabla_part = false.
inline TMCurvatureTable tm_curvature(const FrameCurvature& fc, const FamilyCoefficients& c, bool include_nabla_part = true) {
  const Tensor4& R = fc.R;
  const int n = R.dim();
  const double t2 = c.t2, t = std::sqrt(t2);
  const double a = c.alpha, ad = c.alpha_dot, b = c.beta;
  if (include_nabla_part && !fc.dR && t2 > 0.0)
    throw MissingNablaR("tm_curvature: the HHVH components need the covariant derivative of R");

  TMCurvatureTable T;
  T.n = n;
  T.t = t;
  T.coeffs = c;
  T.F = transverse_fiber_curvature(c);
  T.H = radial_fiber_curvature(c);
  T.has_nabla_part = include_nabla_part;
  for (Tensor4& blk : T.blocks) blk = Tensor4(n);

  auto d = kronecker;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double quad = 0.0, dsum = 0.0, esum = 0.0;
          for (int r = 0; r < n; ++r) {
            quad += 0.5 * R(i, j, r, 0) * R(k, l, r, 0) + 0.25 * R(i, l, r, 0) * R(k, j, r, 0) +
                    0.25 * R(j, l, r, 0) * R(i, k, r, 0);
            dsum += R(k, r, j, 0) * R(r, l, i, 0) - R(k, r, i, 0) * R(r, l, j, 0);
            esum += R(k, r, j, 0) * R(r, i, l, 0);
          }
          T.block(ComponentClass::HHHH)(i, j, k, l) = t2 * a * quad + R(i, j, k, l);

          const double eps = d(i, l) * d(j, k) - d(j, l) * d(i, k);
          const bool radial = i == 0 || j == 0 || k == 0 || l == 0;
          T.block(ComponentClass::VVVV)(i, j, k, l) = eps * (radial ? T.H : T.F);

          T.block(ComponentClass::VVHH)(i, j, k, l) =
              0.5 * (2.0 * a + (d(i, 0) + d(j, 0)) * b * t2) * R(i, j, k, l) +
              0.5 * d(i, 0) * (b - 2.0 * ad) * t2 * R(k, l, j, 0) + 0.5 * d(j, 0) * (2.0 * ad - b) * t2 * R(k, l, i, 0) +
              a * a * t2 / 4.0 * dsum;

          T.block(ComponentClass::HVHV)(i, j, k, l) = 0.5 * a * R(k, i, l, j) + a * a * t2 / 4.0 * esum +
                                                      0.5 * t2 * (d(j, 0) + d(l, 0)) * ad * (R(k, i, l, 0) - R(k, i, j, 0));

          if (include_nabla_part && fc.dR) {
            const Tensor5& dR = *fc.dR;
            T.block(ComponentClass::HHVH)(i, j, k, l) = 0.5 * a * t * (dR(j, i, l, k, 0) - dR(i, j, l, k, 0));
          }
        }
  return T;
}

inline TMCurvatureTable tm_curvature(const ChartManifold& m, const NaturalMetricFamily& fam, const AdaptedFramePoint& fp,
                                     const DiffConfig& cfg = {}) {
  const FamilyCoefficients c = fam.at(SquaredSpeed::of_speed(fp.t));
  return tm_curvature(frame_curvature(m, fp, cfg, fp.t > 0.0), c);
}

// ---------------------------------------------------------------------------------------
// Sectional curvature

/// K(e_a, e_b) on frame planes. Diagonals are 0.
struct TMSectional {
  Matrix horizontal;  // K(e_i, e_j)
  Matrix vertical;    // K(e_n+i, e_n+j)
  Matrix mixed;       // K(e_i, e_n+j)

  /// All planes as a 2n x 2n matrix.
  Matrix full() const {
    const auto n = horizontal.rows();
    Matrix out(2 * n, 2 * n);
    out << horizontal, mixed, mixed.transpose(), vertical;
    return out;
  }
};

inline TMSectional tm_sectional(const Tensor4& R, const FamilyCoefficients& c) {
  const int n = R.dim();
  const double a = c.alpha, t2 = c.t2;
  const double F = transverse_fiber_curvature(c), H = radial_fiber_curvature(c);
  TMSectional s{Matrix::Zero(n, n), Matrix::Zero(n, n), Matrix::Zero(n, n)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double rv = 0.0, ru = 0.0;  // |R(u_i,u_j)v|^2 / t^2 and |R(u_j,v)u_i|^2 / t^2
      for (int r = 0; r < n; ++r) {
        rv += R(i, j, 0, r) * R(i, j, 0, r);
        ru += R(j, 0, i, r) * R(j, 0, i, r);
      }
      if (i != j) {
        s.horizontal(i, j) = R(i, j, j, i) - 0.75 * a * t2 * rv;
        s.vertical(i, j) = (i == 0 || j == 0) ? H / (a * c.radial()) : F / (a * a);
      }
      if (j != 0) s.mixed(i, j) = 0.25 * a * t2 * ru;  // R(v, v) = 0 exactly
    }
  return s;
}

/// Sectional curvature read off a 2n-frame table: K(a,b) = <R(e_a,e_b)e_b,e_a> / (N_a N_b).
template <class Table>
Matrix sectional_from_table(const Table& T, const Vector& norms) {
  const auto m = norms.size();
  Matrix K = Matrix::Zero(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      if (a != b) K(a, b) = T(a, b, b, a) / (norms[a] * norms[b]);
  return K;
}

/// Sectional curvature over a base of constant curvature K0.
struct ConstCurvSectional {
  Matrix horizontal;      // shortcut: K0 - 3/4 K0^2 alpha (d_i0 + d_j0) t^2
  Matrix mixed;           // from the general mixed formula with R of constant curvature
  Matrix mixed_shortcut;   // shortcut: alpha/4 K0 t^2 (d_ij + d_i0)
};

inline ConstCurvSectional tm_sectional_constcurv(double K0, const FamilyCoefficients& c, int n) {
  const double a = c.alpha, t2 = c.t2;
  auto d = kronecker;
  ConstCurvSectional s{Matrix::Zero(n, n), Matrix::Zero(n, n), Matrix::Zero(n, n)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i != j) s.horizontal(i, j) = K0 - 0.75 * K0 * K0 * a * (d(i, 0) + d(j, 0)) * t2;
      s.mixed(i, j) = 0.25 * a * K0 * K0 * t2 * (d(i, 0) + d(i, j) - 2.0 * d(i, 0) * d(i, j));
      s.mixed_shortcut(i, j) = 0.25 * a * K0 * t2 * (d(i, j) + d(i, 0));
    }
  return s;
}

// ---------------------------------------------------------------------------------------
// Ricci and scalar curvature

/// Ric(e_a, e_b) = sum_l <R(e_a, e_l) e_l, e_b> / N_l over the unnormalized frame.
template <class Table>
Matrix ricci_from_table(const Table& T, const Vector& norms) {
  const auto m = norms.size();
  Matrix ric = Matrix::Zero(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b) {
      double s = 0.0;
      for (int l = 0; l < m; ++l) s += T(a, l, l, b) / norms[l];
      ric(a, b) = s;
      ric(b, a) = s;
    }
  return ric;
}

inline double scalar_from_ricci(const Matrix& ric, const Vector& norms) {
  double s = 0.0;
  for (int a = 0; a < norms.size(); ++a) s += ric(a, a) / norms[a];
  return s;
}

/// Ricci table assembled from the closed-form expressions. The mixed block has no usable closed
/// form and is traced from the HHVH components of the table.
inline Matrix tm_ricci(const TMCurvatureTable& T, const Tensor4& R) {
  const int n = T.n;
  const FamilyCoefficients& c = T.coeffs;
  const double a = c.alpha, t2 = c.t2;
  Matrix ric = Matrix::Zero(2 * n, 2 * n);
  const Vector N = T.norms_squared();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double quad = 0.0, vv = 0.0, base = 0.0;
      for (int r = 0; r < n; ++r) {
        base += R(i, r, r, j);
        for (int l = 0; l < n; ++l) {
          quad += R(i, r, l, 0) * R(j, r, l, 0);
          vv += R(r, l, i, 0) * R(r, l, j, 0);
        }
      }
      ric(i, j) = -0.5 * a * t2 * quad + base;

      double mixed = 0.0;
      for (int l = 0; l < 2 * n; ++l) mixed += T(i, l, l, n + j) / N[l];
      ric(i, n + j) = mixed;
      ric(n + j, i) = mixed;

      if (i == 0 || j == 0) {
        ric(n + i, n + j) = (i == j) ? (n - 1) / a * T.H : 0.0;
      } else if (i == j) {
        ric(n + i, n + j) = 0.25 * t2 * a * vv + (n - 2) / a * T.F + T.H / c.radial();
      } else {
        ric(n + i, n + j) = 0.25 * t2 * a * vv;
      }
    }
  return ric;
}

/// Ricci table by tracing the closed-form curvature table.
inline Matrix tm_ricci_traced(const TMCurvatureTable& T) { return ricci_from_table(T, T.norms_squared()); }

struct RicciDiscrepancy {
  int a = 0, b = 0;
  double closed = 0.0, traced = 0.0;
};

/// Entries (a <= b) where the closed-form Ricci differs from the traced one by more than tol * max(1, |traced|).
inline std::vector<RicciDiscrepancy> reconcile_ricci(const Matrix& closed, const Matrix& traced, double tol = 1e-9) {
  std::vector<RicciDiscrepancy> out;
  for (int a = 0; a < closed.rows(); ++a)
    for (int b = a; b < closed.cols(); ++b)
      if (std::abs(closed(a, b) - traced(a, b)) > tol * std::max(1.0, std::abs(traced(a, b))))
        out.push_back({a, b, closed(a, b), traced(a, b)});
  return out;
}

/// Scalar curvature in closed form.
inline double tm_scalar(const Tensor4& R, const FamilyCoefficients& c) {
  const int n = R.dim();
  const double a = c.alpha, t2 = c.t2;
  double S = 0.0, quad = 0.0;
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < n; ++r) {
      S += R(i, r, r, i);
      for (int l = 0; l < n; ++l) quad += R(i, r, l, 0) * R(i, r, l, 0);
    }
  return S - 0.25 * t2 * a * quad + 2.0 * (n - 1) / (a * c.radial()) * radial_fiber_curvature(c) +
         double(n - 1) * (n - 2) / (a * a) * transverse_fiber_curvature(c);
}

inline double tm_scalar_traced(const TMCurvatureTable& T) {
  const Vector N = T.norms_squared();
  return scalar_from_ricci(ricci_from_table(T, N), N);
}

enum class ExpSign { Plus, Minus };

/// Scalar curvature of the exponential metrics in terms of S(pi(v)) and sum_ij |R(u_i,u_j)v|^2.
inline double scalar_exp_formula(double base_scalar, double sum_Rv_sq, int n, double t2, ExpSign which) {
  const double n1 = n - 1, n2 = n - 2;
  if (which == ExpSign::Plus)
    return base_scalar - n1 * std::exp(-t2) * (2.0 + n2 * (1.0 + t2)) / (1.0 + t2) - std::exp(t2) / 4.0 * sum_Rv_sq;
  return base_scalar + n1 * std::exp(t2) / (1.0 + t2) * (n2 * (3.0 - t2) + (6.0 + 2.0 * t2) / (1.0 + t2)) -
         std::exp(-t2) / 4.0 * sum_Rv_sq;
}

/// The same over a base of constant curvature K0, |v|^2 = t2.
inline double scalar_exp_specials(double K0, int n, double t2, ExpSign which) {
  const double n1 = n - 1, n2 = n - 2;
  if (which == ExpSign::Plus)
    return n1 * (K0 * (n - K0 / 2.0 * t2 * std::exp(t2)) - std::exp(-t2) * (2.0 + n2 * (1.0 + t2)) / (1.0 + t2));
  return n1 * (K0 * (n - K0 / 2.0 * t2 * std::exp(-t2)) +
               std::exp(t2) / (1.0 + t2) * (n2 * (3.0 - t2) + (6.0 + 2.0 * t2) / (1.0 + t2)));
}

/// |v|^2 where the scalar curvature of the negative exponential metric over a flat base
/// changes sign. Defined for n >= 3.
inline std::optional<double> flat_exp_threshold(int n) {
  if (n < 3) return std::nullopt;
  return ((n - 1) + std::sqrt(4.0 * (n - 2) * n + 1.0)) / (n - 2);
}

}  // namespace tbcurv
