#pragma once

#include <span>

#include "youden_napg/core.hpp"

namespace youden {

/// Standard normal CDF via erfc; the argument is clamped to [-40, 40].
double normal_cdf(double x);
/// Standard normal density.
double normal_pdf(double x);

/// Binds the weight pi and bandwidth h to a dataset. The dataset must outlive
/// the context.
class ObjectiveContext {
 public:
  ObjectiveContext(const BiomarkerDataset& data, double pi, double bandwidth);

  const BiomarkerDataset& data() const { return *data_; }
  double pi() const { return pi_; }
  double bandwidth() const { return bandwidth_; }

 private:
  const BiomarkerDataset* data_;
  double pi_;
  double bandwidth_;
};

// Minimization-form data term
//   f(w, c) = pi * mean_i Phi((c - w'X_i)/h) - (1 - pi) * mean_j Phi((c - w'Y_j)/h),
// which lies in [-(1 - pi), pi].
double smooth_f(const RulePoint& v, const ObjectiveContext& ctx);
double smooth_f(const Vector& stacked, const ObjectiveContext& ctx);

/// Analytic gradient of smooth_f; the last entry is the derivative in the cutoff.
Vector smooth_grad(const RulePoint& v, const ObjectiveContext& ctx);
Vector smooth_grad(const Vector& stacked, const ObjectiveContext& ctx);

/// Value and gradient sharing one pass over the scores.
double smooth_f_and_grad(const Vector& stacked, const ObjectiveContext& ctx, Vector& grad);

/// Maps the minimization objective onto the weighted Youden scale,
/// J = 2 pi - 1 - 2 f. Exact when f is evaluated with indicators.
inline double youden_from_f(double f, double pi) { return 2.0 * pi - 1.0 - 2.0 * f; }

/// Indicator-based Se (w'X > c), Sp (w'Y <= c) and the weighted Youden index.
EvalMetrics empirical_weighted_youden(const RulePoint& v, const BiomarkerDataset& data, double pi);

struct CutoffScan {
  double cutoff = 0.0;
  double youden = 0.0;
};

/// Best empirical cutoff for fixed scores. Candidates are the midpoints of
/// consecutive distinct pooled scores plus one point below the minimum and
/// one above the maximum; ties resolve to the smallest cutoff.
CutoffScan best_cutoff_scan(std::span<const double> scores_diseased,
                            std::span<const double> scores_healthy, double pi);

}  // namespace youden
