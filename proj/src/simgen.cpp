#include "youden_napg/simgen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <random>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <fmt/format.h>
#include "json.hpp"

#include "youden_napg/baseline.hpp"
#include "youden_napg/objective.hpp"

namespace youden {

std::string to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::s1: return "s1";
    case ScenarioId::s2: return "s2";
    case ScenarioId::s3: return "s3";
  }
  return "?";
}

ScenarioId parse_scenario(std::string_view text) {
  if (text == "s1") return ScenarioId::s1;
  if (text == "s2") return ScenarioId::s2;
  if (text == "s3") return ScenarioId::s3;
  throw ValidationError(fmt::format("unknown scenario '{}' (expected s1, s2 or s3)", text));
}

std::string to_string(Method m) { return m == Method::ours ? "ours" : "lasso_logistic"; }

Method parse_method(std::string_view text) {
  if (text == "ours") return Method::ours;
  if (text == "lasso-logistic" || text == "lasso_logistic") return Method::lasso_logistic;
  throw ValidationError(fmt::format("unknown method '{}' (expected ours or lasso-logistic)", text));
}

Vector scenario_truth(ScenarioId id, Index p) {
  switch (id) {
    case ScenarioId::s1: {
      Vector w(10);
      w << 4, 0, 6, 0, 0, 7, 0, 8, 0, 0;
      return w;
    }
    case ScenarioId::s2: {
      Vector w(10);
      w << -5, -4, -4.5, 3.5, 0, 0, 0, 0, 0, 0;
      return w;
    }
    case ScenarioId::s3: {
      if (p < 10) throw ValidationError("scenario s3 needs at least 10 features");
      Vector w = Vector::Zero(p);
      w.head(10) << -5, 4.5, -4.5, 3.5, -3, 2.5, -2, 1.5, -1, 0.5;
      return w;
    }
  }
  throw ContractViolation("bad scenario id");
}

double logistic(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double asymmetric_link(double u) {
  using C = ScenarioConstants;
  return C::link_mix * logistic(C::link_slope * u) + (1.0 - C::link_mix) * normal_cdf(u - C::link_shift);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x9e3779b9u};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::vector<int> draw_labels(ScenarioId id, const Vector& latent, std::uint64_t label_seed) {
  std::mt19937_64 rng(label_seed);
  boost::random::uniform_01<double> unif;
  std::vector<int> labels(static_cast<std::size_t>(latent.size()));
  for (Index i = 0; i < latent.size(); ++i) {
    const double prob = id == ScenarioId::s1 ? logistic(latent(i)) : asymmetric_link(latent(i));
    labels[static_cast<std::size_t>(i)] = unif(rng) < prob ? 1 : 0;
  }
  return labels;
}

namespace {

// Substream indices within one attempt.
constexpr std::uint64_t kFeatureStream = 0;
constexpr std::uint64_t kLabelStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

Matrix standard_normal(Index n, Index p, std::mt19937_64& rng) {
  boost::random::normal_distribution<double> norm;
  Matrix m(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) m(i, j) = norm(rng);
  }
  return m;
}

std::vector<std::string> feature_names(Index p) {
  std::vector<std::string> names;
  for (Index j = 0; j < p; ++j) names.push_back(fmt::format("T{}", j + 1));
  return names;
}

// Standardized score plus link noise.
Vector noisy_standardized(const Vector& score, std::uint64_t noise_seed) {
  const double mean = score.mean();
  const double var = (score.array() - mean).square().sum() / std::max<double>(1.0, score.size() - 1.0);
  const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
  std::mt19937_64 rng(noise_seed);
  boost::random::normal_distribution<double> norm(0.0, ScenarioConstants::noise_sd);
  Vector out(score.size());
  for (Index i = 0; i < score.size(); ++i) out(i) = (score(i) - mean) / sd + norm(rng);
  return out;
}

// Inverse-CDF transform of a standard normal draw, staying accurate in the upper tail.
template <class Dist>
double from_normal(const Dist& dist, double z) {
  constexpr double tiny = std::numeric_limits<double>::min();
  if (z <= 0.0) return boost::math::quantile(dist, std::max(normal_cdf(z), tiny));
  return boost::math::quantile(boost::math::complement(dist, std::max(normal_cdf(-z), tiny)));
}

template <class Features, class Latent>
SimulatedSample generate_with_retries(ScenarioId id, Index n, std::uint64_t seed, Index p,
                                      Features&& make_features, Latent&& make_latent) {
  if (n < 4) throw ValidationError(fmt::format("scenario sample size must be >= 4, got {}", n));
  const Vector truth = scenario_truth(id, p);
  for (int attempt = 0; attempt <= ScenarioConstants::max_retries; ++attempt) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(attempt);
    std::mt19937_64 rng(substream_seed(s, kFeatureStream));
    SimulatedSample out;
    out.features = make_features(rng);
    out.latent = make_latent(out.features, truth, substream_seed(s, kNoiseStream));
    out.label_seed = substream_seed(s, kLabelStream);
    out.labels = draw_labels(id, out.latent, out.label_seed);

    std::vector<Index> d_rows, h_rows;
    for (Index i = 0; i < n; ++i) (out.labels[static_cast<std::size_t>(i)] ? d_rows : h_rows).push_back(i);
    if (d_rows.empty() || h_rows.empty()) continue;

    out.data.diseased = out.features(d_rows, Eigen::all);
    out.data.healthy = out.features(h_rows, Eigen::all);
    out.data.feature_names = feature_names(out.features.cols());
    out.spec = ScenarioSpec{id, n, seed, truth, attempt + 1, id != ScenarioId::s1};
    return out;
  }
  throw ValidationError(fmt::format("scenario {} produced an empty class in {} attempts", to_string(id),
                                    ScenarioConstants::max_retries + 1));
}

}  // namespace

SimulatedSample generate_s1(Index n, std::uint64_t seed) {
  return generate_with_retries(
      ScenarioId::s1, n, seed, 10, [n](std::mt19937_64& rng) { return standard_normal(n, 10, rng); },
      [](const Matrix& t, const Vector& truth, std::uint64_t) -> Vector { return t * truth; });
}

SimulatedSample generate_s2(Index n, std::uint64_t seed, double copula_rho) {
  using C = ScenarioConstants;
  if (!(copula_rho > -1.0 / 3.0 && copula_rho < 1.0)) {
    throw ValidationError(fmt::format("copula correlation {} is not positive definite", copula_rho));
  }
  auto features = [n, copula_rho](std::mt19937_64& rng) {
    Matrix corr = Matrix::Constant(4, 4, copula_rho);
    corr.diagonal().setOnes();
    const Matrix lower = corr.llt().matrixL();
    Matrix t = standard_normal(n, 10, rng);
    const Matrix z = t.leftCols(4) * lower.transpose();
    const boost::math::chi_squared_distribution<double> chi2(C::chi2_df);
    const boost::math::gamma_distribution<double> gam(C::gamma_shape, C::gamma_scale);
    const boost::math::exponential_distribution<double> expo(C::exp_rate);
    const boost::math::students_t_distribution<double> stud(C::t_df);
    for (Index i = 0; i < n; ++i) {
      t(i, 0) = from_normal(chi2, z(i, 0));
      t(i, 1) = from_normal(gam, z(i, 1));
      t(i, 2) = from_normal(expo, z(i, 2));
      t(i, 3) = from_normal(stud, z(i, 3));
    }
    return t;
  };
  return generate_with_retries(ScenarioId::s2, n, seed, 10, features,
                               [](const Matrix& t, const Vector& truth, std::uint64_t noise_seed) {
                                 return noisy_standardized(t * truth, noise_seed);
                               });
}

SimulatedSample generate_s3(Index n, std::uint64_t seed, Index p) {
  using C = ScenarioConstants;
  if (p < 10) throw ValidationError("scenario s3 needs at least 10 features");
  auto features = [n, p](std::mt19937_64& rng) {
    Matrix t = standard_normal(n, p, rng);
    const double innov = std::sqrt(1.0 - C::ar1_rho * C::ar1_rho);
    for (Index j = 1; j < p; ++j) t.col(j) = C::ar1_rho * t.col(j - 1) + innov * t.col(j);
    const Vector bump = C::perturb_amplitude * t.col(0).array().sin();
    for (Index j = 10; j < p; ++j) t.col(j) += bump;
    return t;
  };
  return generate_with_retries(ScenarioId::s3, n, seed, p, features,
                               [](const Matrix& t, const Vector& truth, std::uint64_t noise_seed) {
                                 return noisy_standardized(t * truth, noise_seed);
                               });
}

SimulatedSample generate(ScenarioId id, Index n, std::uint64_t seed, Index p) {
  switch (id) {
    case ScenarioId::s1: return generate_s1(n, seed);
    case ScenarioId::s2: return generate_s2(n, seed);
    case ScenarioId::s3: return generate_s3(n, seed, p);
  }
  throw ContractViolation("bad scenario id");
}

int worker_count(std::optional<int> requested) {
  if (requested) return std::max(1, *requested);
  if (const char* env = std::getenv("YOUDEN_NAPG_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

constexpr std::uint64_t kSplitStream = 1000;
constexpr std::uint64_t kFitStream = 1001;

ReplicationOutcome run_one(ScenarioId scenario, Index n, int rep, double pi, Method method,
                           std::uint64_t seed, const ReplicationOptions& options) {
  ReplicationOutcome out;
  out.rep = rep;
  try {
    const std::uint64_t rep_seed = substream_seed(seed, static_cast<std::uint64_t>(rep));
    SimulatedSample sample = generate(scenario, n, rep_seed, options.p);
    const auto [train, test] = split_train_test(sample.data, 0.5, substream_seed(rep_seed, kSplitStream));
    const std::uint64_t fit_seed = substream_seed(rep_seed, kFitStream);

    FitResult fitted;
    if (method == Method::ours) {
      FitOptions fo = options.fit;
      fo.seed = fit_seed;
      fitted = fit(train, pi, fo);
    } else if (options.fit.lambda) {
      fitted = lasso_logistic_fit_fixed(train, *options.fit.lambda, pi, options.fit.solver).fit;
    } else {
      fitted = lasso_logistic_fit(train, options.fit.lambda_grid, pi, options.fit.folds, fit_seed,
                                  options.fit.solver)
                   .fit;
    }
    out.rule = fitted.rule;
    out.lambda_selected = fitted.lambda_selected;
    out.invariant_violations = fitted.invariant_violations;
    out.max_final_residual = fitted.final_residual;
    out.train = evaluate(fitted.rule, train, pi, sample.spec.true_omega);
    out.test = evaluate(fitted.rule, test, pi, sample.spec.true_omega);
    if (options.keep_samples) out.sample = std::move(sample);
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

}  // namespace

ReplicationSummary run_replications(ScenarioId scenario, Index n, int reps, double pi, Method method,
                                    std::uint64_t seed, const ReplicationOptions& options) {
  if (reps < 1) throw ValidationError("reps must be >= 1");
  if (!(pi > 0.0 && pi < 1.0)) throw ValidationError(fmt::format("pi must lie in (0,1), got {}", pi));

  ReplicationSummary summary;
  summary.scenario = scenario;
  summary.sample_size = n;
  summary.pi = pi;
  summary.method = method;
  summary.outcomes.resize(static_cast<std::size_t>(reps));

  const int workers = std::min(worker_count(options.threads), reps);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int r = next++; r < reps; r = next++) {
      summary.outcomes[static_cast<std::size_t>(r)] = run_one(scenario, n, r, pi, method, seed, options);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  double train_j = 0.0, test_j = 0.0, det = 0.0, shr = 0.0;
  int det_n = 0, shr_n = 0;
  for (const auto& o : summary.outcomes) {
    if (!o.ok) {
      ++summary.failures;
      continue;
    }
    ++summary.reps_ok;
    summary.invariant_violations += o.invariant_violations;
    train_j += o.train.weighted_youden;
    test_j += o.test.weighted_youden;
    if (o.test.detection_rate) {
      det += *o.test.detection_rate;
      ++det_n;
    }
    if (o.test.shrinkage_accuracy) {
      shr += *o.test.shrinkage_accuracy;
      ++shr_n;
    }
  }
  if (summary.reps_ok > 0) {
    summary.mean_train_J = train_j / summary.reps_ok;
    summary.mean_test_J = test_j / summary.reps_ok;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  summary.detection_rate = det_n > 0 ? det / det_n : nan;
  summary.shrinkage_accuracy = shr_n > 0 ? shr / shr_n : nan;
  return summary;
}

void write_summary_csv(const std::vector<ReplicationSummary>& rows, std::ostream& out) {
  out << "sample_size,pi,method,mean_train_J,mean_test_J,detection_rate,shrinkage_accuracy,reps_ok\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{},{}\n", r.sample_size, r.pi, to_string(r.method),
                       r.mean_train_J, r.mean_test_J, r.detection_rate, r.shrinkage_accuracy,
                       r.reps_ok);
  }
}

void write_summary_csv(const std::vector<ReplicationSummary>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
  write_summary_csv(rows, out);
}

std::string scenario_description_json(ScenarioId id, Index n, std::uint64_t seed, Index p) {
  using C = ScenarioConstants;
  const Vector truth = scenario_truth(id, id == ScenarioId::s3 ? p : 10);
  nlohmann::ordered_json j;
  j["scenario"] = to_string(id);
  j["n_total"] = n;
  j["seed"] = seed;
  j["p"] = truth.size();
  j["true_omega"] = std::vector<double>(truth.data(), truth.data() + truth.size());
  j["stand_in_constants"] = id != ScenarioId::s1;
  switch (id) {
    case ScenarioId::s1:
      j["features"] = "iid N(0,1)";
      j["link"] = "logistic(omega0^T T), zero intercept";
      break;
    case ScenarioId::s2:
      j["features"] = fmt::format(
          "Gaussian copula (rho={}) with marginals chi2({}), Gamma({}, {}), Exp({}), t({}); six iid N(0,1)",
          C::copula_rho, C::chi2_df, C::gamma_shape, C::gamma_scale, C::exp_rate, C::t_df);
      break;
    case ScenarioId::s3:
      j["features"] = fmt::format("AR(1) Gaussian (rho={}); columns 11..p get +{}*sin(T1)", C::ar1_rho,
                                  C::perturb_amplitude);
      break;
  }
  if (id != ScenarioId::s1) {
    j["link"] = fmt::format("G(z + e), z standardized omega0^T T, e ~ N(0,{}^2), G(u)={}*sigma({}u)+{}*Phi(u-{})",
                            C::noise_sd, C::link_mix, C::link_slope, 1.0 - C::link_mix, C::link_shift);
    j["note"] = "link, noise, copula/AR parameters and perturbation are this library's stand-ins";
  }
  j["empty_class_retries"] = C::max_retries;
  return j.dump(2);
}

}  // namespace youden
