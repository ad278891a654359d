#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "tbcurv/errors.hpp"
#include "tbcurv/tensor.hpp"

namespace tbcurv {

enum class StepStrategy { Fixed, Scaled, Richardson };

inline std::string_view strategy_name(StepStrategy s) {
  switch (s) {
    case StepStrategy::Fixed: return "fixed";
    case StepStrategy::Scaled: return "scaled";
    case StepStrategy::Richardson: return "richardson";
  }
  return "?";
}

inline StepStrategy strategy_from_name(std::string_view s) {
  if (s == "fixed") return StepStrategy::Fixed;
  if (s == "scaled") return StepStrategy::Scaled;
  if (s == "richardson") return StepStrategy::Richardson;
  throw ConfigError("unknown step strategy '" + std::string(s) + "' (expected fixed, scaled or richardson)");
}

/// Central-difference settings.
///
/// fixed:      h = base_step
/// scaled:     h = base_step * max(1, |x_i|)
/// richardson: scaled steps h and h/2 combined to cancel the h^2 error term
///
/// base_step = 0 selects eps^(1/3) for the plain schemes and eps^(1/5) for Richardson.
struct DiffConfig {
  StepStrategy strategy = StepStrategy::Richardson;
  double base_step = 0.0;

  double base() const noexcept {
    if (base_step > 0.0) return base_step;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    return strategy == StepStrategy::Richardson ? std::pow(eps, 0.2) : std::cbrt(eps);
  }
  double step(double x) const noexcept {
    return strategy == StepStrategy::Fixed ? base() : base() * std::max(1.0, std::abs(x));
  }
};

/// d f / d x_axis at x. T needs T - T and T * double (Eigen matrices, CubeTensor).
template <class F>
auto partial(F&& f, const Vector& x, int axis, const DiffConfig& cfg) {
  using T = std::decay_t<decltype(f(x))>;
  const double h = cfg.step(x[axis]);
  auto shifted = [&](double dx) -> T {
    Vector y = x;
    y[axis] += dx;
    return f(y);
  };
  // Results are materialized as T so Eigen expression templates never outlive their operands.
  auto central = [&](double hh) -> T { return (shifted(hh) - shifted(-hh)) * (0.5 / hh); };
  if (cfg.strategy != StepStrategy::Richardson) return central(h);
  const T coarse = central(h);
  const T fine = central(0.5 * h);
  return T((fine * 4.0 - coarse) * (1.0 / 3.0));
}

/// All first partials, indexed by axis.
template <class F>
auto partials(F&& f, const Vector& x, const DiffConfig& cfg) {
  using T = decltype(partial(f, x, 0, cfg));
  std::vector<T> out;
  out.reserve(static_cast<std::size_t>(x.size()));
  for (int k = 0; k < x.size(); ++k) out.push_back(partial(f, x, k, cfg));
  return out;
}

}  // namespace tbcurv
