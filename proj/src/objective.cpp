#include "youden_napg/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include <fmt/format.h>

namespace youden {

double normal_cdf(double x) {
  x = std::clamp(x, -40.0, 40.0);
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_pdf(double x) {
  static const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

ObjectiveContext::ObjectiveContext(const BiomarkerDataset& data, double pi, double bandwidth)
    : data_(&data), pi_(pi), bandwidth_(bandwidth) {
  if (!(pi > 0.0 && pi < 1.0)) throw ContractViolation("pi must lie in (0,1)");
  if (!(bandwidth > 0.0)) throw ContractViolation("bandwidth must be positive");
}

namespace {

void check_dim(Index stacked_size, const BiomarkerDataset& data) {
  if (stacked_size != data.n_features() + 1) {
    throw ContractViolation(fmt::format("rule has {} weights but data has {} features",
                                        stacked_size - 1, data.n_features()));
  }
}

}  // namespace

double smooth_f(const Vector& stacked, const ObjectiveContext& ctx) {
  const BiomarkerDataset& data = ctx.data();
  check_dim(stacked.size(), data);
  const Index p = data.n_features();
  const auto omega = stacked.head(p);
  const double c = stacked(p);
  const double h = ctx.bandwidth();

  const Vector sx = data.diseased * omega;
  const Vector sy = data.healthy * omega;
  double ax = 0.0;
  for (Index i = 0; i < sx.size(); ++i) ax += normal_cdf((c - sx(i)) / h);
  double ay = 0.0;
  for (Index j = 0; j < sy.size(); ++j) ay += normal_cdf((c - sy(j)) / h);
  return ctx.pi() * ax / static_cast<double>(sx.size()) -
         (1.0 - ctx.pi()) * ay / static_cast<double>(sy.size());
}

double smooth_f(const RulePoint& v, const ObjectiveContext& ctx) {
  return smooth_f(v.stacked(), ctx);
}

double smooth_f_and_grad(const Vector& stacked, const ObjectiveContext& ctx, Vector& grad) {
  const BiomarkerDataset& data = ctx.data();
  check_dim(stacked.size(), data);
  const Index p = data.n_features();
  const auto omega = stacked.head(p);
  const double c = stacked(p);
  const double h = ctx.bandwidth();
  const double n1 = static_cast<double>(data.n_diseased());
  const double n0 = static_cast<double>(data.n_healthy());

  const Vector sx = data.diseased * omega;
  const Vector sy = data.healthy * omega;
  Vector wx(sx.size());
  Vector wy(sy.size());
  double ax = 0.0, dx = 0.0;
  for (Index i = 0; i < sx.size(); ++i) {
    const double z = (c - sx(i)) / h;
    ax += normal_cdf(z);
    wx(i) = normal_pdf(z);
    dx += wx(i);
  }
  double ay = 0.0, dy = 0.0;
  for (Index j = 0; j < sy.size(); ++j) {
    const double z = (c - sy(j)) / h;
    ay += normal_cdf(z);
    wy(j) = normal_pdf(z);
    dy += wy(j);
  }
  const double kx = ctx.pi() / (n1 * h);
  const double ky = (1.0 - ctx.pi()) / (n0 * h);
  grad.resize(p + 1);
  grad.head(p) = -kx * (data.diseased.transpose() * wx) + ky * (data.healthy.transpose() * wy);
  grad(p) = kx * dx - ky * dy;
  return ctx.pi() * ax / n1 - (1.0 - ctx.pi()) * ay / n0;
}

Vector smooth_grad(const Vector& stacked, const ObjectiveContext& ctx) {
  Vector g;
  smooth_f_and_grad(stacked, ctx, g);
  return g;
}

Vector smooth_grad(const RulePoint& v, const ObjectiveContext& ctx) {
  return smooth_grad(v.stacked(), ctx);
}

EvalMetrics empirical_weighted_youden(const RulePoint& v, const BiomarkerDataset& data, double pi) {
  if (v.omega.size() != data.n_features()) {
    throw ContractViolation(fmt::format("rule has {} weights but data has {} features",
                                        v.omega.size(), data.n_features()));
  }
  const Vector sx = data.diseased * v.omega;
  const Vector sy = data.healthy * v.omega;
  Index above = 0;
  for (Index i = 0; i < sx.size(); ++i) above += sx(i) > v.cutoff ? 1 : 0;
  Index below = 0;
  for (Index j = 0; j < sy.size(); ++j) below += sy(j) <= v.cutoff ? 1 : 0;

  EvalMetrics m;
  m.sensitivity = static_cast<double>(above) / static_cast<double>(sx.size());
  m.specificity = static_cast<double>(below) / static_cast<double>(sy.size());
  m.weighted_youden = weighted_youden(pi, m.sensitivity, m.specificity);
  m.nonzero_count = static_cast<int>((v.omega.array() != 0.0).count());
  return m;
}

CutoffScan best_cutoff_scan(std::span<const double> scores_diseased,
                            std::span<const double> scores_healthy, double pi) {
  if (scores_diseased.empty() || scores_healthy.empty()) {
    throw ContractViolation("best_cutoff_scan needs non-empty score lists");
  }
  // (score, is_diseased), ascending.
  std::vector<std::pair<double, bool>> pooled;
  pooled.reserve(scores_diseased.size() + scores_healthy.size());
  for (double s : scores_diseased) pooled.emplace_back(s, true);
  for (double s : scores_healthy) pooled.emplace_back(s, false);
  std::sort(pooled.begin(), pooled.end());

  const auto n1 = static_cast<double>(scores_diseased.size());
  const auto n0 = static_cast<double>(scores_healthy.size());
  // Counts of diseased above / healthy at-or-below the running cutoff.
  std::size_t above = scores_diseased.size();
  std::size_t below = 0;
  auto youden_at = [&] {
    return weighted_youden(pi, static_cast<double>(above) / n1, static_cast<double>(below) / n0);
  };

  CutoffScan best{pooled.front().first - 1.0, youden_at()};
  std::size_t i = 0;
  while (i < pooled.size()) {
    const double value = pooled[i].first;
    while (i < pooled.size() && pooled[i].first == value) {
      if (pooled[i].second) {
        --above;
      } else {
        ++below;
      }
      ++i;
    }
    const double cutoff =
        i < pooled.size() ? value + 0.5 * (pooled[i].first - value) : value + 1.0;
    const double j = youden_at();
    if (j > best.youden) best = {cutoff, j};
  }
  return best;
}

}  // namespace youden
