// Tangent bundle of the unit 2-sphere with the Sasaki metric: sectional curvatures of the
// frame planes at one point, and the worst deviation from the numerical oracle.

#include <cstdio>

#include "tbcurv/closedform.hpp"
#include "tbcurv/oracle.hpp"

int main() {
  using namespace tbcurv;
  const ChartManifold s2 = sphere(2);
  const NaturalMetricFamily sasaki = make_family(FamilyPreset::Sasaki);

  Vector x(2), v(2);
  x << 1.0, 0.3;
  v << 1.0, 0.0;  // unit speed along the polar angle
  const AdaptedFramePoint fp = adapted_frame(s2, x, v);
  const FamilyCoefficients c = sasaki.at(SquaredSpeed::of_speed(fp.t));

  const TMSectional K = tm_sectional(frame_curvature(s2, fp, {}, false).R, c);
  std::printf("|v| = %g\n", fp.t);
  const Matrix full = K.full();
  for (int a = 0; a < full.rows(); ++a) {
    for (int b = 0; b < full.cols(); ++b) std::printf("%9.5f ", full(a, b));
    std::printf("\n");
  }

  const auto reports = compare(s2, sasaki, {{x, v}}, OracleConfig::defaults());
  std::printf("oracle: max |deviation| = %.3g, %s\n", reports[0].max_abs_deviation, reports[0].pass ? "pass" : "FAIL");
  return reports[0].pass ? 0 : 1;
}
