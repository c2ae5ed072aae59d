#pragma once

#include <cstdint>
#include <vector>

#include "youden_napg/composite.hpp"
#include "youden_napg/pipeline.hpp"

namespace youden {

struct LogisticModel {
  Vector coefficients;
  double intercept = 0.0;
};

struct LossAndGradient {
  double loss = 0.0;
  Vector gradient;  // length p + 1, intercept last
};

/// Mean negative log-likelihood with D = 1 for diseased rows, D = 0 for healthy.
LossAndGradient logistic_loss_grad(const LogisticModel& model, const BiomarkerDataset& data);

double soft_threshold(double x, double threshold);

/// Mean logistic loss + lambda * ||coefficients||_1; the intercept is not penalized.
class LassoLogisticProblem final : public CompositeObjective {
 public:
  LassoLogisticProblem(const BiomarkerDataset& data, double lambda);

  Index dimension() const override { return data_->n_features() + 1; }
  double smooth_value(const Vector& v) const override;
  Vector smooth_gradient(const Vector& v) const override;
  double smooth_value_and_gradient(const Vector& v, Vector& grad) const override;
  double nonsmooth_value(const Vector& v) const override;
  Vector prox(const Vector& v, double step) const override;

 private:
  const BiomarkerDataset* data_;
  double lambda_;
};

struct LassoLogisticResult {
  LogisticModel model;
  double cutoff = 0.0;  // threshold on coefficients' T, intercept folded in
  FitResult fit;        // method "lasso_logistic"; rule normalized like the main pipeline
};

/// Fits at one lambda; the cutoff maximizes the training weighted Youden.
/// The objective-stagnation stop is disabled, so fits end on the residual test or max_iter.
LassoLogisticResult lasso_logistic_fit_fixed(const BiomarkerDataset& train, double lambda,
                                             double pi, const SolverConfig& solver = {});

/// Selects lambda by stratified k-fold CV on the held-out weighted Youden
/// (per-fold cutoffs from the fold's training scores), then refits.
LassoLogisticResult lasso_logistic_fit(const BiomarkerDataset& train,
                                       const std::vector<double>& lambda_grid, double pi,
                                       int folds, std::uint64_t seed,
                                       const SolverConfig& solver = {});

}  // namespace youden
