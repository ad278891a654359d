#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "tbcurv/basemanifold.hpp"

using namespace tbcurv;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  int k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

ChartManifold conformal3() { return torus_conformal(3, {{{0.1, {1, 1, 0}}}}); }

// Same metric, Christoffels by finite differences.
ChartManifold without_christoffels(const ChartManifold& m) {
  return ChartManifold(m.id() + "-fd", m.dim(), m.domain(), m.metric_fn());
}

Matrix gamma_contract(const Christoffel& gamma, const Vector& a, const Vector& b) {
  const int n = gamma.dim();
  Vector out = Vector::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) out[i] += gamma(i, j, k) * a[j] * b[k];
  return out;
}

// State along a geodesic: position, velocity and a transported frame (rows).
struct Transport {
  Vector x, xdot;
  Matrix frame;
};

Transport derivative(const ChartManifold& m, const Transport& s) {
  const Christoffel gamma = christoffels(m, s.x);
  Transport d{s.xdot, -gamma_contract(gamma, s.xdot, s.xdot), Matrix(s.frame.rows(), s.frame.cols())};
  for (int r = 0; r < s.frame.rows(); ++r)
    d.frame.row(r) = -gamma_contract(gamma, s.xdot, s.frame.row(r).transpose()).transpose();
  return d;
}

Transport axpy(const Transport& s, double h, const Transport& d) {
  return {s.x + h * d.x, s.xdot + h * d.xdot, s.frame + h * d.frame};
}

// RK4 from parameter 0 to s along the geodesic with initial velocity u_p, transporting u.
Transport transport(const ChartManifold& m, const AdaptedFramePoint& fp, int p, double s, int steps) {
  Transport st{fp.q, fp.u.row(p).transpose(), fp.u};
  const double h = s / steps;
  for (int k = 0; k < steps; ++k) {
    const Transport k1 = derivative(m, st);
    const Transport k2 = derivative(m, axpy(st, h / 2, k1));
    const Transport k3 = derivative(m, axpy(st, h / 2, k2));
    const Transport k4 = derivative(m, axpy(st, h, k3));
    st.x += h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
    st.xdot += h / 6 * (k1.xdot + 2 * k2.xdot + 2 * k3.xdot + k4.xdot);
    st.frame += h / 6 * (k1.frame + 2 * k2.frame + 2 * k3.frame + k4.frame);
  }
  return st;
}

Tensor4 frame_R_along(const ChartManifold& m, const AdaptedFramePoint& fp, int p, double s) {
  const Transport st = transport(m, fp, p, s, 40);
  return contract_frame(riemann(m, st.x).low, st.frame);
}

}  // namespace

TEST(Christoffels, SpherePolar) {
  const ChartManifold s2 = sphere(2);
  const Vector x = vec({0.8, 0.4});
  const Christoffel g = christoffels(s2, x);
  EXPECT_NEAR(g(0, 1, 1), -std::sin(0.8) * std::cos(0.8), 1e-15);
  EXPECT_NEAR(g(1, 0, 1), std::cos(0.8) / std::sin(0.8), 1e-15);
  EXPECT_NEAR(g(1, 1, 0), std::cos(0.8) / std::sin(0.8), 1e-15);
  EXPECT_EQ(g(0, 0, 0), 0.0);
  EXPECT_EQ(g(1, 1, 1), 0.0);
}

TEST(Christoffels, AnalyticMatchesFiniteDifferences) {
  const std::vector<std::pair<ChartManifold, Vector>> cases{
      {sphere(2), vec({0.8, 0.4})},
      {sphere(3), vec({1.1, 0.7, -2.0})},
      {sphere(3, 2.0, SphereChart::Stereographic), vec({0.5, -1.0, 0.3})},
      {hyperbolic(3), vec({0.2, -0.3, 0.1})},
      {conformal3(), vec({0.3, -0.4, 0.5})},
  };
  for (const auto& [m, x] : cases) {
    const Christoffel a = christoffels(m, x);
    const Christoffel f = christoffels(without_christoffels(m), x);
    EXPECT_LT((a - f).max_abs(), 1e-9) << m.id();
    for (int i = 0; i < m.dim(); ++i)
      for (int j = 0; j < m.dim(); ++j)
        for (int k = 0; k < m.dim(); ++k) EXPECT_EQ(f(i, j, k), f(i, k, j));
  }
}

TEST(Riemann, ConstantCurvatureCatalog) {
  struct Case {
    ChartManifold m;
    Vector x;
    double K;
  };
  const std::vector<Case> cases{
      {sphere(2), vec({0.8, 0.4}), 1.0},
      {sphere(3), vec({1.1, 0.7, -2.0}), 1.0},
      {sphere(2, 2.0), vec({2.0, 1.0}), 0.25},
      {sphere(3, 1.0, SphereChart::Stereographic), vec({0.5, -1.0, 0.3}), 1.0},
      {hyperbolic(2), vec({0.3, 0.2}), -1.0},
      {hyperbolic(4), vec({0.1, -0.2, 0.15, 0.05}), -1.0},
      {euclidean(3), vec({1.0, 2.0, 3.0}), 0.0},
  };
  for (const auto& c : cases) {
    const int n = c.m.dim();
    ASSERT_TRUE(c.m.constant_curvature().has_value());
    EXPECT_DOUBLE_EQ(*c.m.constant_curvature(), c.K);
    Vector v = Vector::Zero(n);
    v[n - 1] = 0.4;
    const BaseInvariants inv = base_invariants(c.m, adapted_frame(c.m, c.x, v));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i != j) EXPECT_NEAR(inv.sectional(i, j), c.K, 1e-8) << c.m.id();
        EXPECT_NEAR(inv.ricci(i, j), i == j ? (n - 1) * c.K : 0.0, 1e-8) << c.m.id();
      }
    EXPECT_NEAR(inv.scalar, n * (n - 1) * c.K, 1e-7) << c.m.id();
  }
}

TEST(Riemann, ScalarOfUnitSpheres) {
  EXPECT_NEAR(base_invariants(sphere(2), adapted_frame(sphere(2), vec({1.0, 0.0}), vec({0, 0}))).scalar, 2.0, 1e-8);
  EXPECT_NEAR(base_invariants(sphere(3), adapted_frame(sphere(3), vec({1.0, 1.0, 0.0}), vec({0, 0, 0}))).scalar, 6.0,
              1e-8);
}

TEST(Riemann, TwoDimensionalHarmonicConformalFactorIsFlat) {
  // f = 0.1 x1 x2 is harmonic, and the curvature of e^{2f} delta in 2D is -e^{-2f} Lap f.
  const ChartManifold m = torus_conformal(2, {{{0.1, {1, 1}}}});
  EXPECT_LT(riemann(m, vec({0.7, -0.3})).low.max_abs(), 1e-9);
}

TEST(Riemann, ConformalSectionalMatchesClassicalFormula) {
  // For g = e^{2f} delta and coordinate axes a != b:
  // K(d_a, d_b) = -e^{-2f} (f_aa + f_bb + sum_{c != a,b} f_c^2)   with f_ab terms vanishing on the diagonal.
  // Here f = 0.1 x1 x2 + 0.05 x3^2, so f_11 = f_22 = 0 and f_33 = 0.1.
  const ChartManifold m = torus_conformal(3, {{{0.1, {1, 1, 0}}, {0.05, {0, 0, 2}}}});
  const Vector x = vec({0.3, -0.4, 0.5});
  const Vector df = vec({0.1 * x[1], 0.1 * x[0], 0.1 * x[2]});
  const double hess[3] = {0.0, 0.0, 0.1};
  const Tensor4 R = riemann(m, x).low;
  const double w = std::exp(2 * (0.1 * x[0] * x[1] + 0.05 * x[2] * x[2]));
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      if (a == b) continue;
      const int c = 3 - a - b;
      const double K = -(hess[a] + hess[b] + df[c] * df[c]) / w;
      EXPECT_NEAR(R(a, b, b, a) / (w * w), K, 1e-9) << a << b;
    }
}

TEST(Riemann, SymmetriesAndBianchi) {
  const ChartManifold m = conformal3();
  const AdaptedFramePoint fp = adapted_frame(m, vec({0.3, -0.4, 0.5}), vec({0.2, 0.5, -0.1}));
  const FrameCurvature fc = frame_curvature(m, fp);
  const Tensor4& R = fc.R;
  const Tensor5& dR = *fc.dR;
  const double tol = 1e-8;
  EXPECT_GT(R.max_abs(), 1e-3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int l = 0; l < 3; ++l)
        for (int k = 0; k < 3; ++k) {
          EXPECT_NEAR(R(i, j, l, k), -R(j, i, l, k), tol);
          EXPECT_NEAR(R(i, j, l, k), -R(i, j, k, l), tol);
          EXPECT_NEAR(R(i, j, l, k), R(l, k, i, j), tol);
          EXPECT_NEAR(R(i, j, l, k) + R(j, l, i, k) + R(l, i, j, k), 0.0, tol);
          for (int p = 0; p < 3; ++p) {
            EXPECT_NEAR(dR(p, i, j, l, k), -dR(p, j, i, l, k), 1e-6);
            EXPECT_NEAR(dR(p, i, j, l, k), dR(p, l, k, i, j), 1e-6);
            // Second Bianchi identity.
            EXPECT_NEAR(dR(p, i, j, l, k) + dR(i, j, p, l, k) + dR(j, p, i, l, k), 0.0, 1e-6);
          }
        }
}

TEST(NablaRiemann, VanishesOnConstantCurvature) {
  EXPECT_LT(nabla_riemann(sphere(3), vec({1.1, 0.7, -2.0})).max_abs(), 1e-6);
  EXPECT_LT(nabla_riemann(hyperbolic(3), vec({0.2, -0.3, 0.1})).max_abs(), 1e-6);
  EXPECT_LT(nabla_riemann(sphere(2, 1.0, SphereChart::Stereographic), vec({0.4, 0.9})).max_abs(), 1e-6);
  EXPECT_EQ(nabla_riemann(euclidean(3), vec({0.0, 0.0, 0.0})).max_abs(), 0.0);
}

TEST(NablaRiemann, MatchesParallelTransportAlongGeodesics) {
  const ChartManifold m = conformal3();
  const AdaptedFramePoint fp = adapted_frame(m, vec({0.3, -0.4, 0.5}), vec({0.2, 0.5, -0.1}));
  const Tensor5 dR = *frame_curvature(m, fp).dR;
  EXPECT_GT(dR.max_abs(), 1e-3);
  const double h = 0.02;
  for (int p = 0; p < 3; ++p) {
    const Tensor4 f1 = frame_R_along(m, fp, p, h), fm1 = frame_R_along(m, fp, p, -h);
    const Tensor4 f2 = frame_R_along(m, fp, p, 2 * h), fm2 = frame_R_along(m, fp, p, -2 * h);
    const Tensor4 deriv = ((f1 - fm1) * 8.0 - (f2 - fm2)) * (1.0 / (12 * h));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l)
          for (int k = 0; k < 3; ++k) EXPECT_NEAR(dR(p, i, j, l, k), deriv(i, j, l, k), 1e-6) << p << i << j << l << k;
  }
}

TEST(NablaRiemann, FiniteDifferenceChristoffelsAgree) {
  const ChartManifold m = conformal3();
  const Vector x = vec({0.3, -0.4, 0.5});
  const Tensor5 a = nabla_riemann(m, x);
  const Tensor5 f = nabla_riemann(without_christoffels(m), x);
  EXPECT_LT((a - f).max_abs(), 1e-5);
}

TEST(AdaptedFrame, OrthonormalWithLeadingDirection) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  for (const ChartManifold& m : {sphere(3), hyperbolic(3), conformal3(), sphere(4, 1.5, SphereChart::Stereographic)}) {
    for (int k = 0; k < 5; ++k) {
      const int n = m.dim();
      Vector q(n), v(n);
      for (int i = 0; i < n; ++i) {
        q[i] = 0.5 * (m.domain().lo[i] + m.domain().hi[i]) + 0.2 * ud(rng) * (m.domain().hi[i] - m.domain().lo[i]);
        v[i] = ud(rng);
      }
      const AdaptedFramePoint fp = adapted_frame(m, q, v);
      const Matrix gram = fp.u * m.metric(q) * fp.u.transpose();
      EXPECT_LT((gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12) << m.id();
      EXPECT_NEAR(fp.t, std::sqrt(v.dot(m.metric(q) * v)), 1e-14);
      EXPECT_EQ(Vector(fp.u.row(0).transpose()), Vector(v / fp.t));
    }
  }
}

TEST(AdaptedFrame, ZeroVector) {
  const ChartManifold m = sphere(2);
  const AdaptedFramePoint fp = adapted_frame(m, vec({1.0, 0.5}), vec({0.0, 0.0}));
  EXPECT_EQ(fp.t, 0.0);
  const Matrix gram = fp.u * m.metric(fp.q) * fp.u.transpose();
  EXPECT_TRUE(gram.isIdentity(1e-14));
}

TEST(AdaptedFrame, CompletionRotationLeavesInvariantsUnchanged) {
  const ChartManifold m = conformal3();
  const AdaptedFramePoint fp = adapted_frame(m, vec({0.3, -0.4, 0.5}), vec({0.2, 0.5, -0.1}));
  const double th = 0.7;
  Matrix rot(2, 2);
  rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  const AdaptedFramePoint rp = rotate_completion(fp, rot);
  const BaseInvariants a = base_invariants(m, fp), b = base_invariants(m, rp);
  EXPECT_NEAR(a.scalar, b.scalar, 1e-10);
  EXPECT_NEAR(a.ricci(0, 0), b.ricci(0, 0), 1e-10);
  // K(u_2, u_3) is the sectional curvature of the same plane.
  EXPECT_NEAR(a.sectional(1, 2), b.sectional(1, 2), 1e-10);
  // The plane through u_1 and u_2 rotates: K(u1, u2') = c^2 K12 + s^2 K13 + 2 c s R(1,2,3,1).
  const Tensor4 R = frame_curvature(m, fp, {}, false).R;
  const double c = std::cos(th), s = std::sin(th);
  EXPECT_NEAR(b.sectional(0, 1), c * c * R(0, 1, 1, 0) + s * s * R(0, 2, 2, 0) - 2 * c * s * R(0, 1, 2, 0), 1e-10);
}

TEST(Errors, StencilOutOfDomain) {
  const ChartManifold s2 = sphere(2);
  EXPECT_THROW(riemann(s2, vec({1e-4, 0.3})), StencilOutOfDomain);
  EXPECT_THROW(nabla_riemann(s2, vec({1.0, std::numbers::pi - 1e-3})), StencilOutOfDomain);
  EXPECT_THROW(christoffels(without_christoffels(s2), vec({1e-6, 0.3})), StencilOutOfDomain);
  EXPECT_NO_THROW(christoffels(s2, vec({1e-6, 0.3})));
  EXPECT_THROW(adapted_frame(s2, vec({4.0, 0.0}), vec({1.0, 0.0})), StencilOutOfDomain);
  EXPECT_THROW(riemann(s2, vec({1.0, 0.3, 0.2})), DegenerateInput);
}

TEST(Errors, SingularMetric) {
  const ChartManifold bad("indefinite", 2, Box::cube(2, -1, 1), [](const Vector& x) {
    Matrix g(2, 2);
    g << 1.0, 0.0, 0.0, x[0] - 0.5;
    return g;
  });
  EXPECT_THROW(christoffels(bad, vec({0.0, 0.0})), SingularMetric);
  EXPECT_THROW(adapted_frame(bad, vec({0.0, 0.0}), vec({0.0, 1.0})), SingularMetric);
  EXPECT_NO_THROW(christoffels(bad, vec({0.9, 0.0})));
}

TEST(Errors, CatalogArguments) {
  EXPECT_THROW(torus_conformal(3, {{{0.1, {1, 1}}}}), ConfigError);
  EXPECT_THROW(torus_conformal(2, {{{0.1, {1, -1}}}}), ConfigError);
  EXPECT_THROW(sphere(2, -1.0), ConfigError);
  EXPECT_THROW(euclidean(1), ConfigError);
}
