#pragma once

// Natural metric families (alpha, beta) on a tangent bundle and the scalar functions
// derived from them.
//
// Every coefficient here is a function of the squared fiber norm t2 = |v|^2, never of |v|.
// Call sites holding a speed |v| go through SquaredSpeed::of_speed.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>

#include "tbcurv/errors.hpp"
#include "tbcurv/scalarfun.hpp"
#include "tbcurv/tensor.hpp"

namespace tbcurv {

/// Squared fiber norm |v|^2, the argument of alpha, beta, F and H.
struct SquaredSpeed {
  double value = 0.0;
  static SquaredSpeed of_speed(double speed) noexcept { return {speed * speed}; }
};

/// alpha, beta and their derivatives at one value of |v|^2.
struct FamilyCoefficients {
  double t2 = 0.0;
  double alpha = 0.0, alpha_dot = 0.0, alpha_ddot = 0.0;
  double beta = 0.0, beta_dot = 0.0;

  /// alpha + t beta: the fiber metric eigenvalue along v.
  double radial() const noexcept { return alpha + t2 * beta; }
  double radial_dot() const noexcept { return alpha_dot + beta + t2 * beta_dot; }
  /// alpha + t alpha'
  double phi() const noexcept { return alpha + t2 * alpha_dot; }
  double phi_dot() const noexcept { return 2.0 * alpha_dot + t2 * alpha_ddot; }
};

class NaturalMetricFamily {
 public:
  static constexpr double default_t_max = 25.0;

  NaturalMetricFamily(ScalarFunction alpha, ScalarFunction beta, std::string name, double t_max = default_t_max)
      : alpha_(std::move(alpha)), beta_(std::move(beta)), name_(std::move(name)), t_max_(t_max) {
    if (!(t_max_ > 0.0)) throw ValidityError("t_max must be positive");
  }

  const ScalarFunction& alpha() const noexcept { return alpha_; }
  const ScalarFunction& beta() const noexcept { return beta_; }
  const std::string& name() const noexcept { return name_; }
  double t_max() const noexcept { return t_max_; }

  NaturalMetricFamily with_t_max(double t_max) const { return {alpha_, beta_, name_, t_max}; }

  /// Coefficients at |v|^2 = t2 without positivity checks (DomainError still propagates).
  FamilyCoefficients raw(SquaredSpeed t2) const {
    const Jet3 a = alpha_.jet3(t2.value);
    const Jet3 b = beta_.jet3(t2.value);
    return {t2.value, a.d[0], a.d[1], a.d[2], b.d[0], b.d[1]};
  }

  /// Coefficients at |v|^2 = t2; refuses points outside [0, t_max] or where the family
  /// is not a Riemannian metric.
  FamilyCoefficients at(SquaredSpeed t2) const {
    if (!(t2.value >= 0.0) || t2.value > t_max_)
      throw ValidityError("|v|^2 = " + format_double(t2.value) + " outside the validated range [0, " +
                          format_double(t_max_) + "] of family '" + name_ + "'");
    const FamilyCoefficients c = raw(t2);
    if (!(c.alpha > 0.0))
      throw ValidityError("family '" + name_ + "': alpha <= 0 at |v|^2 = " + format_double(t2.value));
    if (!(c.radial() > 0.0))
      throw ValidityError("family '" + name_ + "': alpha + t beta <= 0 at |v|^2 = " + format_double(t2.value));
    return c;
  }

 private:
  ScalarFunction alpha_, beta_;
  std::string name_;
  double t_max_;
};

enum class FamilyPreset { Sasaki, CheegerGromoll, ExpPlus, ExpMinus };

inline std::optional<FamilyPreset> preset_from_name(std::string_view name) {
  if (name == "sasaki") return FamilyPreset::Sasaki;
  if (name == "cheeger-gromoll") return FamilyPreset::CheegerGromoll;
  if (name == "exp+") return FamilyPreset::ExpPlus;
  if (name == "exp-") return FamilyPreset::ExpMinus;
  return std::nullopt;
}

inline std::string_view preset_name(FamilyPreset p) {
  switch (p) {
    case FamilyPreset::Sasaki: return "sasaki";
    case FamilyPreset::CheegerGromoll: return "cheeger-gromoll";
    case FamilyPreset::ExpPlus: return "exp+";
    case FamilyPreset::ExpMinus: return "exp-";
  }
  return "?";
}

inline NaturalMetricFamily make_family(FamilyPreset p, double t_max = NaturalMetricFamily::default_t_max) {
  const std::string name(preset_name(p));
  switch (p) {
    case FamilyPreset::Sasaki:
      return {ScalarFunction::parse("1"), ScalarFunction::parse("0"), name, t_max};
    case FamilyPreset::CheegerGromoll:
      return {ScalarFunction::parse("1/(1+t)"), ScalarFunction::parse("1/(1+t)"), name, t_max};
    case FamilyPreset::ExpPlus:
      return {ScalarFunction::parse("exp(t)"), ScalarFunction::parse("exp(t)"), name, t_max};
    case FamilyPreset::ExpMinus:
      return {ScalarFunction::parse("exp(-t)"), ScalarFunction::parse("exp(-t)"), name, t_max};
  }
  throw ConfigError("unknown family preset");
}

/// beta making F vanish identically: beta = (t alpha'^2 + 2 alpha alpha') / alpha.
/// Derivatives of the result are exact one order below those of alpha.
inline ScalarFunction flatness_beta(const ScalarFunction& alpha) {
  auto fn = [alpha](double t) {
    const Jet3 a3 = alpha.jet3(t);
    const Jet2 a = a3.truncate<2>();
    const Jet2 ad = Jet2::from({a3.d[1], a3.d[2], a3.d[3]});
    const Jet2 tt = Jet2::variable(t);
    const Jet2 b = (tt * ad * ad + 2.0 * a * ad) / a;
    return Jet3::from({b.d[0], b.d[1], b.d[2]});
  };
  return ScalarFunction("flatness_beta(" + alpha.label() + ")", fn, std::max(alpha.exact_order() - 1, 0));
}

/// F(t) = (alpha beta - t alpha'^2 - 2 alpha alpha') / (alpha + t beta): curvature of fiber
/// planes orthogonal to v (in the unnormalized vertical frame).
inline double transverse_fiber_curvature(const FamilyCoefficients& c) {
  if (!(c.radial() > 0.0)) throw ValidityError("alpha + t beta <= 0 at |v|^2 = " + format_double(c.t2));
  return (c.alpha * c.beta - c.t2 * c.alpha_dot * c.alpha_dot - 2.0 * c.alpha * c.alpha_dot) / c.radial();
}

/// H(t) = phi (d/dt) ln(alpha Delta) - 2 phi', with phi = alpha + t alpha', Delta = alpha + t beta:
/// curvature of fiber planes containing v.
inline double radial_fiber_curvature(const FamilyCoefficients& c) {
  const double ad = c.alpha * c.radial();
  if (!(c.alpha > 0.0) || !(ad > 0.0)) throw ValidityError("alpha (alpha + t beta) <= 0 at |v|^2 = " + format_double(c.t2));
  const double dlog = (c.alpha_dot * c.radial() + c.alpha * c.radial_dot()) / ad;
  return c.phi() * dlog - 2.0 * c.phi_dot();
}

inline double transverse_fiber_curvature(const NaturalMetricFamily& fam, double t2) {
  return transverse_fiber_curvature(fam.at({t2}));
}
inline double radial_fiber_curvature(const NaturalMetricFamily& fam, double t2) {
  return radial_fiber_curvature(fam.at({t2}));
}

/// alpha(|xi|^2) Id + beta(|xi|^2) xi xi^T: the fiber block of the metric in an orthonormal frame.
inline Matrix fiber_block(const NaturalMetricFamily& fam, const Vector& xi) {
  const FamilyCoefficients c = fam.at({xi.squaredNorm()});
  const auto n = xi.size();
  return c.alpha * Matrix::Identity(n, n) + c.beta * xi * xi.transpose();
}

struct ValidationReport {
  bool valid = true;
  std::size_t samples = 0;
  double t_max = 0.0;
  /// First t where alpha <= 0 or alpha + t beta <= 0.
  std::optional<double> first_violation;
  std::string violated_condition;
  /// First t where alpha + t alpha' <= 0 (not a metric condition; needed by the F = 0 => H = 0 argument).
  std::optional<double> first_phi_nonpositive;
  std::string error;  // DomainError text, if evaluation failed
};

namespace detail {

// First t on the grid where cond(t) <= 0, with touching zeros between grid points found by
// refining local minima through the derivative. cond returns (value, derivative, scale).
template <class Cond>
std::optional<double> first_nonpositive(Cond&& cond, double t_max, std::size_t samples) {
  constexpr double rel_tol = 64 * std::numeric_limits<double>::epsilon();
  auto bad = [&](double t) {
    const auto [v, dv, scale] = cond(t);
    return v <= rel_tol * scale;
  };
  const double h = t_max / static_cast<double>(samples - 1);
  auto grid = [&](std::size_t k) { return k + 1 == samples ? t_max : h * static_cast<double>(k); };
  double prev_v = 0.0, prev2_v = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = grid(k);
    const auto [v, dv, scale] = cond(t);
    if (v <= rel_tol * scale) {
      // Bisect the sign change back towards the previous (good) grid point.
      if (k == 0) return t;
      double lo = grid(k - 1), hi = t;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (bad(mid) ? hi : lo) = mid;
      }
      return hi;
    }
    if (k >= 2 && prev_v < prev2_v && prev_v < v) {
      // Local minimum near grid(k-1): locate the stationary point by bisection on the derivative.
      double lo = grid(k - 2), hi = t;
      auto d = [&](double s) { return std::get<1>(cond(s)); };
      if (d(lo) < 0.0 && d(hi) > 0.0) {
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
          const double mid = 0.5 * (lo + hi);
          (d(mid) < 0.0 ? lo : hi) = mid;
        }
        const double ts = 0.5 * (lo + hi);
        if (bad(ts)) return ts;
      }
    }
    prev2_v = prev_v;
    prev_v = v;
  }
  return std::nullopt;
}

}  // namespace detail

/// Samples the metric conditions alpha > 0 and alpha + t beta > 0 on [0, t_max].
inline ValidationReport validate(const NaturalMetricFamily& fam, std::size_t samples = 4096) {
  if (samples < 2) throw ValidityError("validate needs at least 2 samples");
  ValidationReport rep;
  rep.samples = samples;
  rep.t_max = fam.t_max();
  try {
    auto alpha_cond = [&](double t) {
      const Jet3 a = fam.alpha().jet3(t);
      return std::tuple{a.d[0], a.d[1], std::abs(a.d[0])};
    };
    auto radial_cond = [&](double t) {
      const FamilyCoefficients c = fam.raw({t});
      return std::tuple{c.radial(), c.radial_dot(), std::abs(c.alpha) + std::abs(t * c.beta)};
    };
    auto phi_cond = [&](double t) {
      const FamilyCoefficients c = fam.raw({t});
      return std::tuple{c.phi(), c.phi_dot(), std::abs(c.alpha) + std::abs(t * c.alpha_dot)};
    };
    const auto a_bad = detail::first_nonpositive(alpha_cond, fam.t_max(), samples);
    const auto r_bad = detail::first_nonpositive(radial_cond, fam.t_max(), samples);
    if (a_bad && (!r_bad || *a_bad <= *r_bad)) {
      rep.first_violation = a_bad;
      rep.violated_condition = "alpha(t) > 0";
    } else if (r_bad) {
      rep.first_violation = r_bad;
      rep.violated_condition = "alpha(t) + t beta(t) > 0";
    }
    rep.first_phi_nonpositive = detail::first_nonpositive(phi_cond, fam.t_max(), samples);
  } catch (const DomainError& e) {
    rep.error = e.what();
    rep.valid = false;
    return rep;
  }
  rep.valid = !rep.first_violation.has_value();
  return rep;
}

}  // namespace tbcurv
