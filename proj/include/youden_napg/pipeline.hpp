#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "youden_napg/core.hpp"
#include "youden_napg/solver.hpp"

namespace youden {

/// (10, 5, 1, 0.5, 0.1, 0.05, 0.01, 0.005)
std::vector<double> default_lambda_grid();

/// (n1 n0)^(-0.1)
double default_bandwidth(Index n_diseased, Index n_healthy);

/// Class-mean-difference direction (unit norm, e_1 if the means coincide)
/// with the cutoff at the projected midpoint of the two class means.
RulePoint initialize(const BiomarkerDataset& data, const HyperParams& hyper);

struct NormalizedRule {
  RulePoint rule;
  bool degenerate = false;  // omega was exactly zero; returned unchanged
};

/// (omega / ||omega||, c / ||omega||).
NormalizedRule normalize_rule(const RulePoint& v);

/// Sets weights with |omega_t| < threshold to exactly zero.
RulePoint snap_small_weights(RulePoint v, double threshold = 1e-8);

struct FitOptions {
  std::optional<double> lambda;  // skips cross-validation when set
  std::vector<double> lambda_grid = default_lambda_grid();
  int folds = 5;
  std::uint64_t seed = 0;
  std::optional<double> bandwidth;  // default_bandwidth of the training data when unset
  double lambda2 = 1e-6;
  double scad_a = 3.7;
  SolverConfig solver;
  /// Select lambda on this set instead of k-fold CV on the training data.
  const BiomarkerDataset* validation = nullptr;
};

struct CvRow {
  double lambda = 0.0;
  double mean_validation_youden = 0.0;
};

struct CvResult {
  double lambda_star = 0.0;
  std::vector<CvRow> table;
  int invariant_violations = 0;  // summed over every fold fit
};

struct FitResult {
  std::string method = "napg_scad";
  RulePoint rule;  // normalized unless degenerate
  bool degenerate = false;
  double lambda_selected = 0.0;
  double pi = 0.5;
  std::optional<double> bandwidth;
  SolverTrace trace;
  Termination termination = Termination::max_iter;
  int iterations = 0;
  double final_residual = 0.0;
  EvalMetrics train_metrics;
  std::vector<CvRow> cv_table;
  int invariant_violations = 0;  // final fit plus all CV fits
};

/// Stratified fold labels: result[0] for diseased rows, result[1] for healthy rows.
std::vector<std::vector<int>> stratified_folds(const BiomarkerDataset& data, int folds,
                                               std::uint64_t seed);

/// (fit part, held-out part) for each fold of stratified_folds.
std::vector<std::pair<BiomarkerDataset, BiomarkerDataset>> fold_splits(const BiomarkerDataset& data,
                                                                       int folds, std::uint64_t seed);

/// Fits at one penalty level (no cross-validation).
FitResult fit_fixed_lambda(const BiomarkerDataset& train, double pi, double lambda,
                           const FitOptions& options);

/// Stratified k-fold selection of lambda by mean held-out weighted Youden;
/// ties go to the larger lambda.
CvResult cross_validate(const BiomarkerDataset& train, double pi,
                        const std::vector<double>& lambda_grid, int folds, std::uint64_t seed,
                        const FitOptions& options = {});

FitResult fit(const BiomarkerDataset& train, double pi, const FitOptions& options = {});

/// Weighted Youden, Se and Sp of the rule on `test`; with a ground-truth
/// weight vector also the detection rate and shrinkage accuracy.
EvalMetrics evaluate(const RulePoint& rule, const BiomarkerDataset& test, double pi,
                     const std::optional<Vector>& truth = std::nullopt);

}  // namespace youden
