#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "youden_napg/core.hpp"
#include "youden_napg/pipeline.hpp"

namespace youden {

enum class ScenarioId { s1, s2, s3 };

std::string to_string(ScenarioId id);
/// Accepts "s1", "s2", "s3"; anything else raises ValidationError.
ScenarioId parse_scenario(std::string_view text);

// Scenarios 2 and 3 only name their ingredients (copula, AR(1), "complex and
// asymmetric" link, noise). Everything below is this library's concrete choice.
struct ScenarioConstants {
  static constexpr double copula_rho = 0.3;
  static constexpr double chi2_df = 3.0;
  static constexpr double gamma_shape = 2.0;
  static constexpr double gamma_scale = 1.0;
  static constexpr double exp_rate = 1.0;
  static constexpr double t_df = 5.0;
  static constexpr double ar1_rho = 0.5;
  static constexpr double perturb_amplitude = 0.3;
  static constexpr double link_mix = 0.85;     // G(u) = mix*sigma(slope*u) + (1-mix)*Phi(u - shift)
  static constexpr double link_slope = 1.5;
  static constexpr double link_shift = 1.0;
  static constexpr double noise_sd = 0.5;
  static constexpr int max_retries = 10;
  static constexpr Index s3_features = 500;
};

struct ScenarioSpec {
  ScenarioId id = ScenarioId::s1;
  Index n_total = 0;
  std::uint64_t seed = 0;
  Vector true_omega;
  int attempts = 1;  // 1 + number of empty-class redraws
  bool stand_in_constants = false;  // true for s2/s3
};

Vector scenario_truth(ScenarioId id, Index p = ScenarioConstants::s3_features);

struct SimulatedSample {
  BiomarkerDataset data;  // diseased rows keep their generation order, as do healthy rows
  ScenarioSpec spec;
  Matrix features;        // all n rows in generation order
  Vector latent;          // argument of the link: omega0^T T (s1) or standardized score + noise
  std::vector<int> labels;
  std::uint64_t label_seed = 0;  // substream that produced the labels' uniforms
};

double logistic(double u);
/// 0.85 sigma(1.5 u) + 0.15 Phi(u - 1)
double asymmetric_link(double u);

/// Bernoulli labels with P(D = 1) = link(latent_i); deterministic in `label_seed`.
std::vector<int> draw_labels(ScenarioId id, const Vector& latent, std::uint64_t label_seed);

/// Independent substream key derived from (seed, index).
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

SimulatedSample generate_s1(Index n, std::uint64_t seed);
/// `copula_rho` is exposed so the marginals can be checked without dependence.
SimulatedSample generate_s2(Index n, std::uint64_t seed,
                            double copula_rho = ScenarioConstants::copula_rho);
/// p >= 10; the truth occupies the first 10 columns.
SimulatedSample generate_s3(Index n, std::uint64_t seed, Index p = ScenarioConstants::s3_features);
SimulatedSample generate(ScenarioId id, Index n, std::uint64_t seed,
                         Index p = ScenarioConstants::s3_features);

enum class Method { ours, lasso_logistic };
std::string to_string(Method m);
/// Accepts "ours", "lasso-logistic", "lasso_logistic".
Method parse_method(std::string_view text);

struct ReplicationOptions {
  FitOptions fit;         // lambda grid, folds, solver config; seed is overwritten per replication
  Index p = ScenarioConstants::s3_features;  // s3 only
  std::optional<int> threads;  // default: YOUDEN_NAPG_THREADS, else hardware concurrency
  bool keep_samples = false;
};

struct ReplicationOutcome {
  int rep = 0;
  bool ok = false;
  std::string error;
  EvalMetrics train;
  EvalMetrics test;
  double lambda_selected = 0.0;
  RulePoint rule;
  int invariant_violations = 0;
  double max_final_residual = 0.0;
  std::optional<SimulatedSample> sample;
};

struct ReplicationSummary {
  ScenarioId scenario = ScenarioId::s1;
  Index sample_size = 0;
  double pi = 0.5;
  Method method = Method::ours;
  double mean_train_J = 0.0;
  double mean_test_J = 0.0;
  double detection_rate = 0.0;
  double shrinkage_accuracy = 0.0;
  int reps_ok = 0;
  int failures = 0;
  int invariant_violations = 0;
  std::vector<ReplicationOutcome> outcomes;  // replication-index order
};

/// Worker count from YOUDEN_NAPG_THREADS (>= 1) or the hardware.
int worker_count(std::optional<int> requested = std::nullopt);

/// Generate, split 50/50 (stratified), fit, evaluate; replications run in parallel
/// and are reduced in index order.
ReplicationSummary run_replications(ScenarioId scenario, Index n, int reps, double pi, Method method,
                                    std::uint64_t seed, const ReplicationOptions& options = {});

/// Header: sample_size,pi,method,mean_train_J,mean_test_J,detection_rate,shrinkage_accuracy,reps_ok
void write_summary_csv(const std::vector<ReplicationSummary>& rows, std::ostream& out);
void write_summary_csv(const std::vector<ReplicationSummary>& rows, const std::string& path);

/// Sidecar describing the generator constants; s2/s3 are flagged as stand-ins.
std::string scenario_description_json(ScenarioId id, Index n, std::uint64_t seed, Index p);

}  // namespace youden
