#include "youden_napg/baseline.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "youden_napg/objective.hpp"

namespace youden {

namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Mean NLL and (optionally) its gradient at stacked (coefficients, intercept).
double loss_impl(const BiomarkerDataset& data, const Vector& v, Vector* grad) {
  const Index p = data.n_features();
  if (v.size() != p + 1) throw ContractViolation("logistic parameter has wrong length");
  const auto beta = v.head(p);
  const double b0 = v(p);
  const double n = static_cast<double>(data.n_diseased() + data.n_healthy());

  const Vector zd = (data.diseased * beta).array() + b0;
  const Vector zh = (data.healthy * beta).array() + b0;
  double loss = 0.0;
  Vector rd(zd.size()), rh(zh.size());
  for (Index i = 0; i < zd.size(); ++i) {
    loss += softplus(-zd(i));
    rd(i) = sigmoid(zd(i)) - 1.0;
  }
  for (Index j = 0; j < zh.size(); ++j) {
    loss += softplus(zh(j));
    rh(j) = sigmoid(zh(j));
  }
  if (grad) {
    grad->resize(p + 1);
    grad->head(p) = (data.diseased.transpose() * rd + data.healthy.transpose() * rh) / n;
    (*grad)(p) = (rd.sum() + rh.sum()) / n;
  }
  return loss / n;
}

}  // namespace

LossAndGradient logistic_loss_grad(const LogisticModel& model, const BiomarkerDataset& data) {
  Vector v(model.coefficients.size() + 1);
  v.head(model.coefficients.size()) = model.coefficients;
  v(model.coefficients.size()) = model.intercept;
  LossAndGradient out;
  out.loss = loss_impl(data, v, &out.gradient);
  return out;
}

double soft_threshold(double x, double threshold) {
  if (x > threshold) return x - threshold;
  if (x < -threshold) return x + threshold;
  return 0.0;
}

LassoLogisticProblem::LassoLogisticProblem(const BiomarkerDataset& data, double lambda)
    : data_(&data), lambda_(lambda) {
  if (!(lambda >= 0.0)) throw ContractViolation("lasso lambda must be non-negative");
}

double LassoLogisticProblem::smooth_value(const Vector& v) const { return loss_impl(*data_, v, nullptr); }

Vector LassoLogisticProblem::smooth_gradient(const Vector& v) const {
  Vector g;
  loss_impl(*data_, v, &g);
  return g;
}

double LassoLogisticProblem::smooth_value_and_gradient(const Vector& v, Vector& grad) const {
  return loss_impl(*data_, v, &grad);
}

double LassoLogisticProblem::nonsmooth_value(const Vector& v) const {
  return lambda_ * v.head(v.size() - 1).lpNorm<1>();
}

Vector LassoLogisticProblem::prox(const Vector& v, double step) const {
  Vector out = v;
  const double thr = step * lambda_;
  for (Index t = 0; t + 1 < v.size(); ++t) out(t) = soft_threshold(v(t), thr);
  return out;
}

namespace {

std::vector<double> scores_of(const Matrix& rows, const Vector& coef) {
  const Vector s = rows * coef;
  return {s.data(), s.data() + s.size()};
}

}  // namespace

LassoLogisticResult lasso_logistic_fit_fixed(const BiomarkerDataset& train, double lambda,
                                             double pi, const SolverConfig& solver) {
  train.validate();
  const LassoLogisticProblem problem(train, lambda);
  const Vector init = Vector::Zero(problem.dimension());
  // Convex problem: stop on stationarity only, never on a flat objective.
  SolverConfig config = solver;
  config.tol_f_rel = 0.0;
  SolveResult solved = solve(problem, init, config);

  const Index p = train.n_features();
  LassoLogisticResult out;
  out.model.coefficients = solved.point.head(p);
  out.model.intercept = solved.point(p);

  const RulePoint snapped = snap_small_weights(RulePoint{out.model.coefficients, 0.0});
  const std::vector<double> sd = scores_of(train.diseased, snapped.omega);
  const std::vector<double> sh = scores_of(train.healthy, snapped.omega);
  out.cutoff = best_cutoff_scan(sd, sh, pi).cutoff;

  const NormalizedRule normalized = normalize_rule(RulePoint{snapped.omega, out.cutoff});
  out.fit.method = "lasso_logistic";
  out.fit.rule = normalized.rule;
  out.fit.degenerate = normalized.degenerate;
  out.fit.lambda_selected = lambda;
  out.fit.pi = pi;
  out.fit.termination = solved.reason;
  out.fit.iterations = solved.iterations;
  out.fit.final_residual = solved.residual;
  out.fit.invariant_violations = solved.trace.invariant_violations;
  out.fit.trace = std::move(solved.trace);
  out.fit.train_metrics = evaluate(out.fit.rule, train, pi);
  return out;
}

LassoLogisticResult lasso_logistic_fit(const BiomarkerDataset& train,
                                       const std::vector<double>& lambda_grid, double pi,
                                       int folds, std::uint64_t seed, const SolverConfig& solver) {
  if (lambda_grid.empty()) throw ValidationError("lambda grid is empty");
  const auto splits = fold_splits(train, folds, seed);

  std::vector<CvRow> table;
  double best = -std::numeric_limits<double>::infinity();
  double lambda_star = lambda_grid.front();
  int violations = 0;
  for (double lam : lambda_grid) {
    double total = 0.0;
    for (const auto& [fit_part, held_out] : splits) {
      const LassoLogisticResult r = lasso_logistic_fit_fixed(fit_part, lam, pi, solver);
      total += evaluate(r.fit.rule, held_out, pi).weighted_youden;
      violations += r.fit.invariant_violations;
    }
    const double mean = total / static_cast<double>(splits.size());
    table.push_back({lam, mean});
    if (mean > best || (mean == best && lam > lambda_star)) {
      best = mean;
      lambda_star = lam;
    }
  }
  LassoLogisticResult out = lasso_logistic_fit_fixed(train, lambda_star, pi, solver);
  out.fit.cv_table = std::move(table);
  out.fit.invariant_violations += violations;
  return out;
}

}  // namespace youden
