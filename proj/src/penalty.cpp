#include "youden_napg/penalty.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace youden {

namespace {

void check_params(const ScadParams& params) {
  if (!(params.lambda >= 0.0)) throw ContractViolation("SCAD lambda must be non-negative");
  if (!(params.a > 2.0)) throw ContractViolation("SCAD shape a must exceed 2");
}

}  // namespace

double scad_value(double x, const ScadParams& params) {
  check_params(params);
  if (!(x >= 0.0)) throw ContractViolation(fmt::format("scad_value needs x >= 0, got {}", x));
  const double lam = params.lambda;
  const double a = params.a;
  if (x <= lam) return lam * x;
  if (x <= a * lam) return (2.0 * a * lam * x - x * x - lam * lam) / (2.0 * (a - 1.0));
  return lam * lam * (a + 1.0) / 2.0;
}

double scad_derivative(double x, const ScadParams& params) {
  check_params(params);
  if (!(x >= 0.0)) throw ContractViolation(fmt::format("scad_derivative needs x >= 0, got {}", x));
  const double lam = params.lambda;
  const double a = params.a;
  if (x == 0.0) return 0.0;
  if (x <= lam) return lam;
  if (x <= a * lam) return (a * lam - x) / (a - 1.0);
  return 0.0;
}

double scad_prox(double x, double step, const ScadParams& params) {
  check_params(params);
  if (!(step > 0.0)) throw ContractViolation(fmt::format("scad_prox needs step > 0, got {}", step));
  const double lam = params.lambda;
  const double a = params.a;
  const double sign = std::signbit(x) ? -1.0 : 1.0;
  const double ax = std::abs(x);

  if (step < a - 1.0) {
    if (ax <= lam * (1.0 + step)) return sign * std::max(ax - step * lam, 0.0);
    if (ax <= a * lam) return sign * ((a - 1.0) * ax - a * step * lam) / (a - 1.0 - step);
    return x;
  }

  // The middle piece is concave (or flat) here, so its minimum sits on an
  // endpoint unless the stationary point is a genuine minimizer.
  auto objective = [&](double z) { return (z - ax) * (z - ax) / (2.0 * step) + scad_value(z, params); };
  std::array<double, 6> candidates{
      0.0,
      std::clamp(ax - step * lam, 0.0, lam),
      lam,
      std::numeric_limits<double>::quiet_NaN(),
      a * lam,
      std::max(ax, a * lam),
  };
  if (step == a - 1.0) {
    candidates[3] = std::numeric_limits<double>::quiet_NaN();
  } else {
    const double z = ((a - 1.0) * ax - a * step * lam) / (a - 1.0 - step);
    if (z >= lam && z <= a * lam) candidates[3] = z;
  }
  double best = 0.0;
  double best_value = objective(0.0);
  for (double z : candidates) {
    if (std::isnan(z)) continue;
    const double val = objective(z);
    if (val < best_value) {
      best = z;
      best_value = val;
    }
  }
  return sign * best;
}

double penalty_g(const Vector& stacked, const HyperParams& hyper) {
  const Index p = stacked.size() - 1;
  const ScadParams params{hyper.lambda1, hyper.scad_a};
  double total = 0.0;
  for (Index t = 0; t < p; ++t) total += scad_value(std::abs(stacked(t)), params);
  const double c = stacked(p);
  return total + hyper.lambda2 * c * c;
}

Vector prox_g(const Vector& stacked, double step, const HyperParams& hyper) {
  if (!(step > 0.0)) throw ContractViolation(fmt::format("prox_g needs step > 0, got {}", step));
  const Index p = stacked.size() - 1;
  const ScadParams params{hyper.lambda1, hyper.scad_a};
  Vector out(stacked.size());
  for (Index t = 0; t < p; ++t) out(t) = scad_prox(stacked(t), step, params);
  out(p) = stacked(p) / (1.0 + 2.0 * step * hyper.lambda2);
  return out;
}

RulePoint prox_g(const RulePoint& v, double step, const HyperParams& hyper) {
  return RulePoint::from_stacked(prox_g(v.stacked(), step, hyper));
}

SmoothedYoudenProblem::SmoothedYoudenProblem(const ObjectiveContext& ctx, const HyperParams& hyper)
    : ctx_(ctx), hyper_(hyper) {
  hyper_.validate();
}

Vector gradient_mapping(const CompositeObjective& problem, const Vector& v, const Vector& grad,
                        double step) {
  if (!(step > 0.0)) throw ContractViolation("gradient mapping needs a positive step");
  if (v.size() != problem.dimension() || grad.size() != problem.dimension()) {
    throw ContractViolation("gradient mapping dimension mismatch");
  }
  return (v - problem.prox(v - step * grad, step)) / step;
}

double stationarity_residual(const CompositeObjective& problem, const Vector& v,
                             const Vector& grad) {
  return gradient_mapping(problem, v, grad, 1.0).norm();
}

double stationarity_residual(const CompositeObjective& problem, const Vector& v) {
  return stationarity_residual(problem, v, problem.smooth_gradient(v));
}

Vector gradient_mapping(const RulePoint& v, double step, const ObjectiveContext& ctx,
                        const HyperParams& hyper) {
  const SmoothedYoudenProblem problem(ctx, hyper);
  const Vector x = v.stacked();
  return gradient_mapping(problem, x, problem.smooth_gradient(x), step);
}

double stationarity_residual(const RulePoint& v, const ObjectiveContext& ctx,
                             const HyperParams& hyper) {
  return gradient_mapping(v, 1.0, ctx, hyper).norm();
}

}  // namespace youden
