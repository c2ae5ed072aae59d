// youden-napg: simulate, fit, cv, eval and bench from the command line.
//
// Exit codes: 0 success, 1 runtime or data error, 2 usage error.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "youden_napg/baseline.hpp"
#include "youden_napg/objective.hpp"
#include "youden_napg/penalty.hpp"
#include "youden_napg/pipeline.hpp"
#include "youden_napg/serialize.hpp"
#include "youden_napg/simgen.hpp"
#include "youden_napg/solver.hpp"

namespace fs = std::filesystem;
using namespace youden;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverFlags {
  std::string solver = "napg-poly";
  int max_iter = SolverConfig{}.max_iter;
  double tol = SolverConfig{}.tol_residual;
  double eta = SolverConfig{}.eta;
  double delta = SolverConfig{}.delta;
  double tau1 = SolverConfig{}.tau1;
  double tau2 = SolverConfig{}.tau2;

  void add(CLI::App* cmd) {
    cmd->add_option("--solver", solver, "napg-poly | napg-backtracking | papg")
        ->check(CLI::IsMember({"napg-poly", "napg-backtracking", "papg", "napg_poly",
                               "napg_backtracking"}))
        ->capture_default_str();
    cmd->add_option("--max-iter", max_iter, "Iteration cap")->capture_default_str();
    cmd->add_option("--tol", tol, "Stationarity residual tolerance")->capture_default_str();
    cmd->add_option("--eta", eta, "Nonmonotone averaging weight")->capture_default_str();
    cmd->add_option("--delta", delta, "Line-search decrease constant")->capture_default_str();
    cmd->add_option("--tau1", tau1, "Lower safeguard factor")->capture_default_str();
    cmd->add_option("--tau2", tau2, "Upper safeguard factor")->capture_default_str();
  }

  SolverConfig config() const {
    SolverConfig c;
    c.variant = parse_solver_variant(solver);
    c.max_iter = max_iter;
    c.tol_residual = tol;
    c.eta = eta;
    c.delta = delta;
    c.tau1 = tau1;
    c.tau2 = tau2;
    try {
      c.validate();
    } catch (const ValidationError& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

struct DataFlags {
  std::string data;
  std::string label_column = "label";
  std::string positive_label = "1";

  void add(CLI::App* cmd, bool required = true) {
    auto* opt = cmd->add_option("--data", data, "CSV with a header row and a label column");
    if (required) opt->required();
    cmd->add_option("--label-column", label_column, "Name of the label column")->capture_default_str();
    cmd->add_option("--positive-label", positive_label, "Label value marking diseased rows")
        ->capture_default_str();
  }

  BiomarkerDataset load(const std::string& path) const {
    return load_dataset(path, label_column, positive_label);
  }
};

struct ModelFlags {
  double pi = 0.5;
  std::optional<double> lambda;
  std::vector<double> lambda_grid = default_lambda_grid();
  int folds = 5;
  std::optional<double> bandwidth;
  std::string method = "ours";
  std::uint64_t seed = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--pi", pi, "Sensitivity weight in (0,1)")->capture_default_str();
    cmd->add_option("--lambda", lambda, "Fixed penalty level (skips cross-validation)");
    cmd->add_option("--lambda-grid", lambda_grid, "Comma-separated candidate penalty levels")
        ->delimiter(',');
    cmd->add_option("--folds", folds, "Cross-validation folds")->capture_default_str();
    cmd->add_option("--bandwidth", bandwidth, "Smoothing bandwidth (default (n1 n0)^-0.1)");
    cmd->add_option("--method", method, "ours | lasso-logistic")
        ->check(CLI::IsMember({"ours", "lasso-logistic", "lasso_logistic"}))
        ->capture_default_str();
    cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
  }

  void check() const {
    if (!(pi > 0.0 && pi < 1.0)) throw UsageError(fmt::format("--pi must lie in (0,1), got {}", pi));
    if (lambda && !(*lambda >= 0.0)) throw UsageError("--lambda must be non-negative");
    if (lambda_grid.empty()) throw UsageError("--lambda-grid is empty");
    for (double l : lambda_grid) {
      if (!(l >= 0.0)) throw UsageError(fmt::format("invalid --lambda-grid entry {}", l));
    }
    if (folds < 2) throw UsageError("--folds must be at least 2");
    if (bandwidth && !(*bandwidth > 0.0)) throw UsageError("--bandwidth must be positive");
  }

  FitOptions options(const SolverConfig& solver) const {
    FitOptions fo;
    fo.lambda = lambda;
    fo.lambda_grid = lambda_grid;
    fo.folds = folds;
    fo.seed = seed;
    fo.bandwidth = bandwidth;
    fo.solver = solver;
    return fo;
  }
};

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
  out << text;
}

std::string join(const Vector& v) {
  return fmt::format("{}", fmt::join(std::vector<double>(v.data(), v.data() + v.size()), ", "));
}

void print_metrics(const char* label, const EvalMetrics& m) {
  fmt::print("{}: J={:.6f} Se={:.6f} Sp={:.6f} nonzero={}\n", label, m.weighted_youden, m.sensitivity,
             m.specificity, m.nonzero_count);
}

FitResult run_fit(const BiomarkerDataset& train, const ModelFlags& model, const SolverConfig& solver) {
  if (parse_method(model.method) == Method::ours) return fit(train, model.pi, model.options(solver));
  if (model.lambda) return lasso_logistic_fit_fixed(train, *model.lambda, model.pi, solver).fit;
  return lasso_logistic_fit(train, model.lambda_grid, model.pi, model.folds, model.seed, solver).fit;
}

// ---- simulate ----

struct SimulateCmd {
  std::string scenario;
  std::vector<Index> sizes;
  int reps = 1;
  Index p = ScenarioConstants::s3_features;
  bool no_datasets = false;
  std::string out_dir = ".";
  ModelFlags model;
  SolverFlags solver;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("simulate", "Run Monte Carlo replications of a scenario");
    cmd->add_option("--scenario", scenario, "s1 | s2 | s3")
        ->required()
        ->check(CLI::IsMember({"s1", "s2", "s3"}));
    cmd->add_option("--n", sizes, "Total sample size(s), comma-separated")->required()->delimiter(',');
    cmd->add_option("--reps", reps, "Replications per sample size")->capture_default_str();
    cmd->add_option("--p", p, "Number of markers (s3 only)")->capture_default_str();
    cmd->add_flag("--no-datasets", no_datasets, "Skip writing the per-replication dataset CSVs");
    cmd->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    model.add(cmd);
    solver.add(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    model.check();
    if (reps < 1) throw UsageError("--reps must be >= 1");
    for (Index n : sizes) {
      if (n < 4) throw UsageError(fmt::format("--n must be >= 4, got {}", n));
    }
    if (p < 10) throw UsageError("--p must be >= 10");
    const ScenarioId id = parse_scenario(scenario);
    const SolverConfig config = solver.config();
    const fs::path dir = prepare_out_dir(out_dir);

    ReplicationOptions ro;
    ro.fit = model.options(config);
    ro.p = p;
    ro.keep_samples = !no_datasets;

    std::vector<ReplicationSummary> rows;
    for (Index n : sizes) {
      ReplicationSummary s = run_replications(id, n, reps, model.pi, parse_method(model.method), model.seed, ro);
      if (!no_datasets) {
        fs::create_directories(dir / "datasets");
        for (const auto& o : s.outcomes) {
          if (!o.sample) continue;
          write_dataset(o.sample->data,
                        (dir / "datasets" / fmt::format("{}_n{}_rep{:03}.csv", scenario, n, o.rep)).string());
        }
      }
      for (const auto& o : s.outcomes) {
        if (!o.ok) std::cerr << fmt::format("replication {} (n={}) failed: {}\n", o.rep, n, o.error);
      }
      fmt::print("{} n={} {}: mean train J={:.4f} mean test J={:.4f} detection={:.4f} shrinkage={:.4f} ok={}/{}\n",
                 scenario, n, to_string(s.method), s.mean_train_J, s.mean_test_J, s.detection_rate,
                 s.shrinkage_accuracy, s.reps_ok, reps);
      s.outcomes.clear();
      rows.push_back(std::move(s));
    }
    write_summary_csv(rows, (dir / "summary.csv").string());
    write_text(dir / "scenario.json",
               scenario_description_json(id, sizes.front(), model.seed, id == ScenarioId::s3 ? p : 10) + "\n");
    for (const auto& r : rows) {
      if (r.reps_ok == 0) throw std::runtime_error("every replication failed");
    }
  }
};

// ---- fit ----

struct FitCmd {
  DataFlags data;
  std::string test_path;
  std::string out_dir = ".";
  ModelFlags model;
  SolverFlags solver;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("fit", "Fit a combination rule to a CSV dataset");
    data.add(cmd);
    cmd->add_option("--test", test_path, "Optional test CSV (same columns)");
    cmd->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    model.add(cmd);
    solver.add(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    model.check();
    const SolverConfig config = solver.config();
    const BiomarkerDataset train = data.load(data.data);
    std::optional<BiomarkerDataset> test;
    if (!test_path.empty()) test = data.load(test_path);

    const FitResult result = run_fit(train, model, config);
    std::optional<EvalMetrics> test_metrics;
    if (test) test_metrics = evaluate(result.rule, *test, model.pi);

    const fs::path dir = prepare_out_dir(out_dir);
    write_text(dir / "fit_result.json", fit_result_json(result, test_metrics) + "\n");
    write_trace_csv((dir / "trace.csv").string(), result.trace);

    fmt::print("method={} lambda={} h={}\n", result.method, result.lambda_selected,
               result.bandwidth ? fmt::format("{}", *result.bandwidth) : std::string("n/a"));
    fmt::print("omega=[{}]\ncutoff={}\n", join(result.rule.omega), result.rule.cutoff);
    if (result.degenerate) fmt::print("warning: all weights are zero; the rule is degenerate\n");
    print_metrics("train", result.train_metrics);
    if (test_metrics) print_metrics("test", *test_metrics);
  }
};

// ---- cv ----

struct CvCmd {
  DataFlags data;
  std::string out_dir = ".";
  ModelFlags model;
  SolverFlags solver;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("cv", "Cross-validate the penalty level");
    data.add(cmd);
    cmd->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    model.add(cmd);
    solver.add(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    model.check();
    const SolverConfig config = solver.config();
    const BiomarkerDataset train = data.load(data.data);
    std::vector<CvRow> table;
    double lambda_star = 0.0;
    if (parse_method(model.method) == Method::ours) {
      const CvResult cv = cross_validate(train, model.pi, model.lambda_grid, model.folds, model.seed,
                                         model.options(config));
      table = cv.table;
      lambda_star = cv.lambda_star;
    } else {
      const auto r = lasso_logistic_fit(train, model.lambda_grid, model.pi, model.folds, model.seed, config);
      table = r.fit.cv_table;
      lambda_star = r.fit.lambda_selected;
    }
    const fs::path dir = prepare_out_dir(out_dir);
    std::ostringstream csv;
    csv << "lambda,mean_validation_youden\n";
    for (const auto& row : table) csv << fmt::format("{},{}\n", row.lambda, row.mean_validation_youden);
    write_text(dir / "cv.csv", csv.str());
    std::cout << csv.str();
    fmt::print("lambda_star={}\n", lambda_star);
  }
};

// ---- eval ----

struct EvalCmd {
  DataFlags data;
  std::string rule_path;
  std::optional<double> pi;
  std::string out_dir;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("eval", "Evaluate a fitted rule on a CSV dataset");
    data.add(cmd);
    cmd->add_option("--rule", rule_path, "fit_result.json written by fit")->required();
    cmd->add_option("--pi", pi, "Sensitivity weight (default: the value stored in the rule)");
    cmd->add_option("--out-dir", out_dir, "Write eval.json here");
    cmd->callback([this] { run(); });
  }

  void run() {
    std::ifstream in(rule_path);
    if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", rule_path));
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(fmt::format("'{}' is not valid JSON: {}", rule_path, e.what()));
    }
    const auto weights = j.at("omega").get<std::vector<double>>();
    RulePoint rule{Eigen::Map<const Vector>(weights.data(), static_cast<Index>(weights.size())),
                   j.at("cutoff").get<double>()};
    const double weight = pi.value_or(j.at("pi").get<double>());
    if (!(weight > 0.0 && weight < 1.0)) throw UsageError(fmt::format("--pi must lie in (0,1), got {}", weight));

    const BiomarkerDataset test = data.load(data.data);
    if (test.n_features() != rule.omega.size()) {
      throw ValidationError(fmt::format("rule has {} weights but the data has {} markers", rule.omega.size(),
                                        test.n_features()));
    }
    const EvalMetrics m = evaluate(rule, test, weight);
    nlohmann::ordered_json out;
    out["pi"] = weight;
    out["weighted_youden"] = m.weighted_youden;
    out["sensitivity"] = m.sensitivity;
    out["specificity"] = m.specificity;
    out["nonzero_count"] = m.nonzero_count;
    const std::string text = out.dump(2) + "\n";
    std::cout << text;
    if (!out_dir.empty()) write_text(prepare_out_dir(out_dir) / "eval.json", text);
  }
};

// ---- bench ----

struct BenchCmd {
  DataFlags data;
  std::string scenario = "s1";
  Index n = 400;
  Index p = ScenarioConstants::s3_features;
  std::uint64_t seed = 7;
  double pi = 0.5;
  double lambda = 0.1;
  std::optional<double> bandwidth;
  double report_residual = 1e-4;
  std::string out_dir = ".";
  SolverFlags solver;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("bench", "Compare the three solvers on one instance");
    data.add(cmd, false);
    cmd->add_option("--scenario", scenario, "Scenario used when --data is absent")
        ->check(CLI::IsMember({"s1", "s2", "s3"}))
        ->capture_default_str();
    cmd->add_option("--n", n, "Scenario sample size")->capture_default_str();
    cmd->add_option("--p", p, "Number of markers (s3 only)")->capture_default_str();
    cmd->add_option("--seed", seed, "Scenario seed")->capture_default_str();
    cmd->add_option("--pi", pi, "Sensitivity weight in (0,1)")->capture_default_str();
    cmd->add_option("--lambda", lambda, "Penalty level")->capture_default_str();
    cmd->add_option("--bandwidth", bandwidth, "Smoothing bandwidth (default (n1 n0)^-0.1)");
    cmd->add_option("--report-residual", report_residual,
                    "Residual level at which gradient counts are reported")
        ->capture_default_str();
    cmd->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    solver.add(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    if (!(pi > 0.0 && pi < 1.0)) throw UsageError(fmt::format("--pi must lie in (0,1), got {}", pi));
    if (!(lambda >= 0.0)) throw UsageError("--lambda must be non-negative");
    if (n < 4) throw UsageError("--n must be >= 4");
    const SolverConfig base = solver.config();
    const BiomarkerDataset instance =
        data.data.empty() ? generate(parse_scenario(scenario), n, seed, p).data : data.load(data.data);

    HyperParams hyper;
    hyper.pi = pi;
    hyper.bandwidth = bandwidth.value_or(default_bandwidth(instance.n_diseased(), instance.n_healthy()));
    hyper.lambda1 = lambda;
    try {
      hyper.validate();
    } catch (const ValidationError& e) {
      throw UsageError(e.what());
    }
    const ObjectiveContext ctx(instance, pi, hyper.bandwidth);
    const SmoothedYoudenProblem problem(ctx, hyper);
    const Vector init = initialize(instance, hyper).stacked();

    const fs::path dir = prepare_out_dir(out_dir);
    std::ostringstream combined;
    combined << "solver,iter,f_value,residual,cum_grad_evals\n";
    for (SolverVariant v : {SolverVariant::napg_poly, SolverVariant::napg_backtracking, SolverVariant::papg}) {
      SolverConfig config = base;
      config.variant = v;
      const SolveResult r = solve(problem, init, config);
      const std::string name = to_string(v);
      write_trace_csv((dir / fmt::format("trace_{}.csv", name)).string(), r.trace);
      std::optional<long> reached;
      for (const auto& rec : r.trace.records) {
        combined << fmt::format("{},{},{},{},{}\n", name, rec.iter, rec.f_value, rec.residual, rec.cum_grad_evals);
        if (!reached && rec.residual <= report_residual) reached = rec.cum_grad_evals;
      }
      fmt::print("{}: iterations={} F={:.10g} residual={:.3e} stop={} grad_evals_to_{:g}={}\n", name,
                 r.iterations, r.value, r.residual, to_string(r.reason), report_residual,
                 reached ? fmt::format("{}", *reached) : std::string("not reached"));
    }
    write_text(dir / "bench_long.csv", combined.str());
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse biomarker combination by maximizing a smoothed weighted Youden index"};
  app.require_subcommand(1);
  SimulateCmd simulate;
  FitCmd fit_cmd;
  CvCmd cv;
  EvalCmd eval;
  BenchCmd bench;
  simulate.add(app);
  fit_cmd.add(app);
  cv.add(app);
  eval.add(app);
  bench.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IngestionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
