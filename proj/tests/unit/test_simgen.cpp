#include <cmath>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "doctest.h"
#include "oracles.hpp"
#include "youden_napg/simgen.hpp"

using namespace youden;

namespace {

std::vector<double> column(const Matrix& m, Index j) {
  return {m.col(j).data(), m.col(j).data() + m.rows()};
}

bool same_sample(const SimulatedSample& a, const SimulatedSample& b) {
  return a.features == b.features && a.labels == b.labels && a.latent == b.latent &&
         a.data.diseased == b.data.diseased && a.data.healthy == b.data.healthy;
}

}  // namespace

TEST_SUITE("simgen") {
  TEST_CASE("scenario truths") {
    Vector s1(10), s2(10);
    s1 << 4, 0, 6, 0, 0, 7, 0, 8, 0, 0;
    s2 << -5, -4, -4.5, 3.5, 0, 0, 0, 0, 0, 0;
    CHECK(scenario_truth(ScenarioId::s1) == s1);
    CHECK(scenario_truth(ScenarioId::s2) == s2);
    const Vector s3 = scenario_truth(ScenarioId::s3);
    CHECK(s3.size() == 500);
    CHECK(s3.tail(490) == Vector::Zero(490));
    CHECK(s3(0) == -5.0);
    CHECK(s3(9) == 0.5);
    CHECK_THROWS_AS(parse_scenario("s4"), ValidationError);
    CHECK(parse_method("lasso-logistic") == Method::lasso_logistic);
  }

  TEST_CASE("scenario 1: zero score gives even odds and classes balance") {
    CHECK(logistic(0.0) == 0.5);
    const SimulatedSample s = generate_s1(100000, 99);
    const double share = static_cast<double>(s.data.n_diseased()) / 100000.0;
    CHECK(std::abs(share - 0.5) <= 0.01);
    CHECK(s.features.cols() == 10);
    CHECK(s.spec.attempts == 1);
    CHECK(!s.spec.stand_in_constants);
  }

  TEST_CASE("generators are deterministic in the seed") {
    for (ScenarioId id : {ScenarioId::s1, ScenarioId::s2, ScenarioId::s3}) {
      const SimulatedSample a = generate(id, 300, 17, 40);
      const SimulatedSample b = generate(id, 300, 17, 40);
      const SimulatedSample c = generate(id, 300, 18, 40);
      CHECK(same_sample(a, b));
      CHECK(!same_sample(a, c));
      CHECK(a.data.n_diseased() + a.data.n_healthy() == 300);
    }
  }

  TEST_CASE("scenario 2 marginals match their analytic distributions without dependence") {
    using C = ScenarioConstants;
    const SimulatedSample s = generate_s2(10000, 5, 0.0);
    const boost::math::chi_squared_distribution<double> chi2(C::chi2_df);
    const boost::math::gamma_distribution<double> gam(C::gamma_shape, C::gamma_scale);
    const boost::math::exponential_distribution<double> expo(C::exp_rate);
    const boost::math::students_t_distribution<double> stud(C::t_df);
    CHECK(oracle::ks_distance(column(s.features, 0), [&](double x) { return boost::math::cdf(chi2, x); }) <= 0.02);
    CHECK(oracle::ks_distance(column(s.features, 1), [&](double x) { return boost::math::cdf(gam, x); }) <= 0.02);
    CHECK(oracle::ks_distance(column(s.features, 2), [&](double x) { return boost::math::cdf(expo, x); }) <= 0.02);
    CHECK(oracle::ks_distance(column(s.features, 3), [&](double x) { return boost::math::cdf(stud, x); }) <= 0.02);
    for (Index j = 4; j < 10; ++j) {
      CHECK(oracle::ks_distance(column(s.features, j), [](double x) { return oracle::phi_cdf(x); }) <= 0.02);
    }
    CHECK(s.spec.stand_in_constants);
  }

  TEST_CASE("scenario 2 copula induces dependence among the first four markers") {
    const SimulatedSample s = generate_s2(10000, 6);
    CHECK(oracle::sample_correlation(s.features.col(0), s.features.col(1)) > 0.2);
    CHECK(std::abs(oracle::sample_correlation(s.features.col(0), s.features.col(5))) < 0.05);
  }

  TEST_CASE("asymmetric link is increasing") {
    double prev = asymmetric_link(-10.0);
    bool increasing = true;
    for (int i = 1; i <= 2000; ++i) {
      const double u = -10.0 + 0.01 * i;
      const double g = asymmetric_link(u);
      increasing = increasing && g > prev;
      prev = g;
    }
    CHECK(increasing);
    CHECK(asymmetric_link(-10.0) > 0.0);
    CHECK(asymmetric_link(10.0) < 1.0);
    // Asymmetric about zero.
    CHECK(std::abs(asymmetric_link(1.0) + asymmetric_link(-1.0) - 1.0) > 1e-3);
  }

  TEST_CASE("scenario 3: AR(1) structure, dimension and support") {
    const SimulatedSample s = generate_s3(10000, 8);
    CHECK(s.features.cols() == 500);
    CHECK(s.spec.true_omega.size() == 500);
    for (Index j = 0; j + 1 < 10; ++j) {
      CHECK(std::abs(oracle::sample_correlation(s.features.col(j), s.features.col(j + 1)) - 0.5) <= 0.03);
    }
    for (Index j = 0; j < 500; ++j) CHECK((s.spec.true_omega(j) != 0.0) == (j < 10));
    CHECK(generate_s3(50, 1, 75).features.cols() == 75);
    CHECK_THROWS_AS(generate_s3(50, 1, 9), ValidationError);
  }

  TEST_CASE("labels depend on the features only through the link") {
    for (ScenarioId id : {ScenarioId::s1, ScenarioId::s2, ScenarioId::s3}) {
      const SimulatedSample s = generate(id, 500, 44, 30);
      CHECK(draw_labels(id, s.latent, s.label_seed) == s.labels);
      if (id == ScenarioId::s1) CHECK((s.latent - s.features * s.spec.true_omega).norm() == 0.0);
    }
  }

  TEST_CASE("too-small samples are rejected") {
    CHECK_THROWS_AS(generate_s1(3, 0), ValidationError);
    CHECK_THROWS_AS(generate_s2(10, 0, 1.5), ValidationError);
  }

  TEST_CASE("substreams differ across indices and seeds") {
    CHECK(substream_seed(1, 0) != substream_seed(1, 1));
    CHECK(substream_seed(1, 0) != substream_seed(2, 0));
    CHECK(substream_seed(1, 0) == substream_seed(1, 0));
  }

  TEST_CASE("one replication reproduces a single fit") {
    ReplicationOptions ro;
    ro.fit.lambda = 0.1;
    ro.fit.solver.max_iter = 1000;
    ro.keep_samples = true;
    ro.threads = 1;
    const ReplicationSummary summary = run_replications(ScenarioId::s1, 300, 1, 0.5, Method::ours, 77, ro);
    REQUIRE(summary.reps_ok == 1);
    const ReplicationOutcome& o = summary.outcomes.front();
    REQUIRE(o.sample);

    const std::uint64_t rep_seed = substream_seed(77, 0);
    const SimulatedSample sample = generate_s1(300, rep_seed);
    CHECK(same_sample(sample, *o.sample));
    const auto [train, test] = split_train_test(sample.data, 0.5, substream_seed(rep_seed, 1000));
    const FitResult single = fit(train, 0.5, ro.fit);
    CHECK(single.rule.omega == o.rule.omega);
    CHECK(single.rule.cutoff == o.rule.cutoff);
    const EvalMetrics m = evaluate(single.rule, test, 0.5, sample.spec.true_omega);
    CHECK(summary.mean_test_J == m.weighted_youden);
    CHECK(summary.detection_rate == *m.detection_rate);
    CHECK(summary.shrinkage_accuracy == *m.shrinkage_accuracy);
    CHECK(summary.mean_train_J == evaluate(single.rule, train, 0.5).weighted_youden);
  }

  TEST_CASE("replications are independent of the worker count") {
    ReplicationOptions ro;
    ro.fit.lambda = 0.1;
    ro.fit.solver.max_iter = 300;
    ro.threads = 1;
    const ReplicationSummary a = run_replications(ScenarioId::s1, 200, 3, 0.5, Method::ours, 5, ro);
    ro.threads = 3;
    const ReplicationSummary b = run_replications(ScenarioId::s1, 200, 3, 0.5, Method::ours, 5, ro);
    CHECK(a.mean_test_J == b.mean_test_J);
    CHECK(a.mean_train_J == b.mean_train_J);
    for (int r = 0; r < 3; ++r) CHECK(a.outcomes[r].rule.omega == b.outcomes[r].rule.omega);
    CHECK(a.outcomes[0].rule.omega != a.outcomes[1].rule.omega);
  }

  TEST_CASE("summary CSV layout and scenario sidecar") {
    ReplicationSummary s;
    s.sample_size = 400;
    s.mean_test_J = 0.9;
    s.reps_ok = 2;
    std::ostringstream out;
    write_summary_csv({s}, out);
    const std::string text = out.str();
    CHECK(text.rfind("sample_size,pi,method,mean_train_J,mean_test_J,detection_rate,shrinkage_accuracy,reps_ok\n", 0) == 0);
    CHECK(text.find("400,0.5,ours,0,0.9,0,0,2\n") != std::string::npos);
    CHECK(scenario_description_json(ScenarioId::s2, 100, 1, 10).find("\"stand_in_constants\": true") != std::string::npos);
    CHECK(scenario_description_json(ScenarioId::s1, 100, 1, 10).find("\"stand_in_constants\": false") != std::string::npos);
    CHECK(worker_count(3) == 3);
    CHECK(worker_count(0) == 1);
  }
}
