#pragma once

#include "youden_napg/core.hpp"

namespace youden {

/// F(v) = f(v) + g(v) with f smooth and g prox-friendly. The solvers only see
/// problems through this interface.
class CompositeObjective {
 public:
  virtual ~CompositeObjective() = default;

  virtual Index dimension() const = 0;
  virtual double smooth_value(const Vector& v) const = 0;
  virtual Vector smooth_gradient(const Vector& v) const = 0;
  /// f(v) and grad f(v) together; override when the two share work.
  virtual double smooth_value_and_gradient(const Vector& v, Vector& grad) const {
    grad = smooth_gradient(v);
    return smooth_value(v);
  }
  virtual double nonsmooth_value(const Vector& v) const = 0;
  /// argmin_z g(z) + ||z - v||^2 / (2 step)
  virtual Vector prox(const Vector& v, double step) const = 0;

  double value(const Vector& v) const { return smooth_value(v) + nonsmooth_value(v); }
};

/// G_t(v) = (v - prox_{t g}(v - t grad)) / t, reusing a precomputed gradient.
Vector gradient_mapping(const CompositeObjective& problem, const Vector& v, const Vector& grad,
                        double step);

/// ||v - prox_g(v - grad f(v), 1)||, i.e. ||G_1(v)||.
double stationarity_residual(const CompositeObjective& problem, const Vector& v,
                             const Vector& grad);
double stationarity_residual(const CompositeObjective& problem, const Vector& v);

}  // namespace youden
