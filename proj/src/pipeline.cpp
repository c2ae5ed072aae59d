#include "youden_napg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "youden_napg/objective.hpp"
#include "youden_napg/penalty.hpp"

namespace youden {

std::vector<double> default_lambda_grid() { return {10, 5, 1, 0.5, 0.1, 0.05, 0.01, 0.005}; }

double default_bandwidth(Index n_diseased, Index n_healthy) {
  if (n_diseased < 1 || n_healthy < 1) throw ContractViolation("class sizes must be positive");
  return std::pow(static_cast<double>(n_diseased) * static_cast<double>(n_healthy), -0.1);
}

RulePoint initialize(const BiomarkerDataset& data, [[maybe_unused]] const HyperParams& hyper) {
  data.validate();
  const Vector mean_d = data.diseased.colwise().mean().transpose();
  const Vector mean_h = data.healthy.colwise().mean().transpose();
  Vector omega = mean_d - mean_h;
  const double norm = omega.norm();
  if (norm > 0.0) {
    omega /= norm;
  } else {
    omega = Vector::Unit(data.n_features(), 0);
  }
  const double cutoff = (0.5 * (mean_d + mean_h)).dot(omega);
  return RulePoint{std::move(omega), cutoff};
}

NormalizedRule normalize_rule(const RulePoint& v) {
  const double norm = v.omega.norm();
  if (norm == 0.0) return {v, true};
  return {RulePoint{v.omega / norm, v.cutoff / norm}, false};
}

RulePoint snap_small_weights(RulePoint v, double threshold) {
  for (Index t = 0; t < v.omega.size(); ++t) {
    if (std::abs(v.omega(t)) < threshold) v.omega(t) = 0.0;
  }
  return v;
}

std::vector<std::vector<int>> stratified_folds(const BiomarkerDataset& data, int folds,
                                               std::uint64_t seed) {
  if (folds < 2) throw ValidationError("cross-validation needs at least two folds");
  if (data.n_diseased() < folds || data.n_healthy() < folds) {
    throw ValidationError(fmt::format("each class needs at least {} rows for {}-fold CV", folds, folds));
  }
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> out;
  for (Index n : {data.n_diseased(), data.n_healthy()}) {
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> fold_of(static_cast<std::size_t>(n));
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      fold_of[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos % static_cast<std::size_t>(folds));
    }
    out.push_back(std::move(fold_of));
  }
  return out;
}

std::vector<std::pair<BiomarkerDataset, BiomarkerDataset>> fold_splits(const BiomarkerDataset& data,
                                                                       int folds, std::uint64_t seed) {
  const auto fold_of = stratified_folds(data, folds, seed);
  std::vector<std::pair<BiomarkerDataset, BiomarkerDataset>> out;
  for (int f = 0; f < folds; ++f) {
    std::vector<Index> d_in, d_out, h_in, h_out;
    for (std::size_t i = 0; i < fold_of[0].size(); ++i) {
      (fold_of[0][i] == f ? d_out : d_in).push_back(static_cast<Index>(i));
    }
    for (std::size_t j = 0; j < fold_of[1].size(); ++j) {
      (fold_of[1][j] == f ? h_out : h_in).push_back(static_cast<Index>(j));
    }
    out.emplace_back(select_rows(data, d_in, h_in), select_rows(data, d_out, h_out));
  }
  return out;
}

FitResult fit_fixed_lambda(const BiomarkerDataset& train, double pi, double lambda,
                           const FitOptions& options) {
  train.validate();
  HyperParams hyper;
  hyper.pi = pi;
  hyper.bandwidth = options.bandwidth.value_or(default_bandwidth(train.n_diseased(), train.n_healthy()));
  hyper.lambda1 = lambda;
  hyper.lambda2 = options.lambda2;
  hyper.scad_a = options.scad_a;
  hyper.validate();

  const ObjectiveContext ctx(train, pi, hyper.bandwidth);
  const SmoothedYoudenProblem problem(ctx, hyper);
  const RulePoint init = initialize(train, hyper);
  SolveResult solved = solve(problem, init.stacked(), options.solver);

  const NormalizedRule normalized =
      normalize_rule(snap_small_weights(RulePoint::from_stacked(solved.point)));

  FitResult out;
  out.rule = normalized.rule;
  out.degenerate = normalized.degenerate;
  out.lambda_selected = lambda;
  out.pi = pi;
  out.bandwidth = hyper.bandwidth;
  out.termination = solved.reason;
  out.iterations = solved.iterations;
  out.final_residual = solved.residual;
  out.invariant_violations = solved.trace.invariant_violations;
  out.trace = std::move(solved.trace);
  out.train_metrics = evaluate(out.rule, train, pi);
  return out;
}

CvResult cross_validate(const BiomarkerDataset& train, double pi,
                        const std::vector<double>& lambda_grid, int folds, std::uint64_t seed,
                        const FitOptions& options) {
  if (lambda_grid.empty()) throw ValidationError("lambda grid is empty");
  for (double lam : lambda_grid) {
    if (!(lam >= 0.0)) throw ValidationError(fmt::format("invalid lambda {}", lam));
  }

  // (train, held-out) pairs; one pair when an external validation set is supplied.
  std::vector<std::pair<BiomarkerDataset, BiomarkerDataset>> splits;
  if (options.validation != nullptr) {
    splits.emplace_back(train, *options.validation);
  } else {
    splits = fold_splits(train, folds, seed);
  }

  CvResult out;
  double best = -std::numeric_limits<double>::infinity();
  for (double lam : lambda_grid) {
    double total = 0.0;
    for (const auto& [fit_part, held_out] : splits) {
      const FitResult r = fit_fixed_lambda(fit_part, pi, lam, options);
      total += evaluate(r.rule, held_out, pi).weighted_youden;
      out.invariant_violations += r.invariant_violations;
    }
    const double mean = total / static_cast<double>(splits.size());
    out.table.push_back({lam, mean});
    if (mean > best || (mean == best && lam > out.lambda_star)) {
      best = mean;
      out.lambda_star = lam;
    }
  }
  return out;
}

FitResult fit(const BiomarkerDataset& train, double pi, const FitOptions& options) {
  if (!(pi > 0.0 && pi < 1.0)) throw ValidationError(fmt::format("pi must lie in (0,1), got {}", pi));
  std::vector<CvRow> table;
  int cv_violations = 0;
  double lambda = 0.0;
  if (options.lambda) {
    lambda = *options.lambda;
  } else {
    CvResult cv = cross_validate(train, pi, options.lambda_grid, options.folds, options.seed, options);
    lambda = cv.lambda_star;
    table = std::move(cv.table);
    cv_violations = cv.invariant_violations;
  }
  FitResult out = fit_fixed_lambda(train, pi, lambda, options);
  out.cv_table = std::move(table);
  out.invariant_violations += cv_violations;
  return out;
}

EvalMetrics evaluate(const RulePoint& rule, const BiomarkerDataset& test, double pi,
                     const std::optional<Vector>& truth) {
  EvalMetrics m = empirical_weighted_youden(rule, test, pi);
  if (truth) {
    if (truth->size() != rule.omega.size()) {
      throw ValidationError(fmt::format("truth has {} entries but the rule has {}", truth->size(),
                                        rule.omega.size()));
    }
    int true_nonzero = 0, true_zero = 0, detected = 0, shrunk = 0;
    for (Index t = 0; t < truth->size(); ++t) {
      const bool est_zero = rule.omega(t) == 0.0;
      if ((*truth)(t) != 0.0) {
        ++true_nonzero;
        detected += est_zero ? 0 : 1;
      } else {
        ++true_zero;
        shrunk += est_zero ? 1 : 0;
      }
    }
    if (true_nonzero > 0) m.detection_rate = static_cast<double>(detected) / true_nonzero;
    if (true_zero > 0) m.shrinkage_accuracy = static_cast<double>(shrunk) / true_zero;
  }
  return m;
}

}  // namespace youden
