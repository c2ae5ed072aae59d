#pragma once

#include "youden_napg/composite.hpp"
#include "youden_napg/objective.hpp"

namespace youden {

struct ScadParams {
  double lambda = 0.0;
  double a = 3.7;
};

/// p_lambda(x) for x >= 0: lambda x on [0, lambda], a quadratic blend on
/// (lambda, a lambda], and the constant lambda^2 (a + 1) / 2 beyond.
double scad_value(double x, const ScadParams& params);

/// p'_lambda(x) for x >= 0, with p'(0) = 0.
double scad_derivative(double x, const ScadParams& params);

/// argmin_z (z - x)^2 / (2 step) + p_lambda(|z|). Closed form while
/// step < a - 1; otherwise the candidate stationary points are compared.
double scad_prox(double x, double step, const ScadParams& params);

/// g(omega, c) = sum_t p_{lambda1}(|omega_t|) + lambda2 c^2.
double penalty_g(const Vector& stacked, const HyperParams& hyper);

/// Separable prox of step * g: SCAD prox per weight, c / (1 + 2 step lambda2).
RulePoint prox_g(const RulePoint& v, double step, const HyperParams& hyper);
Vector prox_g(const Vector& stacked, double step, const HyperParams& hyper);

/// The smoothed weighted Youden minimization problem F = f + g.
class SmoothedYoudenProblem final : public CompositeObjective {
 public:
  SmoothedYoudenProblem(const ObjectiveContext& ctx, const HyperParams& hyper);

  Index dimension() const override { return ctx_.data().n_features() + 1; }
  double smooth_value(const Vector& v) const override { return smooth_f(v, ctx_); }
  Vector smooth_gradient(const Vector& v) const override { return smooth_grad(v, ctx_); }
  double smooth_value_and_gradient(const Vector& v, Vector& grad) const override {
    return smooth_f_and_grad(v, ctx_, grad);
  }
  double nonsmooth_value(const Vector& v) const override { return penalty_g(v, hyper_); }
  Vector prox(const Vector& v, double step) const override { return prox_g(v, step, hyper_); }

  const ObjectiveContext& context() const { return ctx_; }
  const HyperParams& hyper() const { return hyper_; }

 private:
  ObjectiveContext ctx_;
  HyperParams hyper_;
};

Vector gradient_mapping(const RulePoint& v, double step, const ObjectiveContext& ctx,
                        const HyperParams& hyper);

double stationarity_residual(const RulePoint& v, const ObjectiveContext& ctx,
                             const HyperParams& hyper);

}  // namespace youden
