#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "youden_napg/baseline.hpp"
#include "youden_napg/objective.hpp"
#include "youden_napg/penalty.hpp"
#include "youden_napg/pipeline.hpp"
#include "youden_napg/serialize.hpp"
#include "youden_napg/simgen.hpp"
#include "youden_napg/solver.hpp"

namespace py = pybind11;
using namespace youden;

namespace {

py::dict metrics_dict(const EvalMetrics& m) {
  py::dict d;
  d["weighted_youden"] = m.weighted_youden;
  d["sensitivity"] = m.sensitivity;
  d["specificity"] = m.specificity;
  d["nonzero_count"] = m.nonzero_count;
  d["detection_rate"] = m.detection_rate;
  d["shrinkage_accuracy"] = m.shrinkage_accuracy;
  return d;
}

py::dict trace_dict(const SolverTrace& trace) {
  std::vector<int> iter;
  std::vector<double> f, residual, step;
  std::vector<long> f_evals, grad_evals;
  std::vector<std::string> branch;
  for (const auto& r : trace.records) {
    iter.push_back(r.iter);
    f.push_back(r.f_value);
    residual.push_back(r.residual);
    f_evals.push_back(r.cum_f_evals);
    grad_evals.push_back(r.cum_grad_evals);
    step.push_back(r.step);
    branch.push_back(to_string(r.branch));
  }
  py::dict d;
  d["solver"] = to_string(trace.variant);
  d["iter"] = iter;
  d["f_value"] = f;
  d["residual"] = residual;
  d["cum_f_evals"] = f_evals;
  d["cum_grad_evals"] = grad_evals;
  d["step"] = step;
  d["branch"] = branch;
  d["invariant_violations"] = trace.invariant_violations;
  return d;
}

py::dict fit_dict(const FitResult& r) {
  py::dict d;
  d["method"] = r.method;
  d["omega"] = r.rule.omega;
  d["cutoff"] = r.rule.cutoff;
  d["lambda"] = r.lambda_selected;
  d["pi"] = r.pi;
  d["h"] = r.bandwidth;
  d["degenerate"] = r.degenerate;
  d["termination"] = to_string(r.termination);
  d["iterations"] = r.iterations;
  d["final_residual"] = r.final_residual;
  d["invariant_violations"] = r.invariant_violations;
  d["metrics"] = metrics_dict(r.train_metrics);
  py::list table;
  for (const auto& row : r.cv_table) table.append(py::make_tuple(row.lambda, row.mean_validation_youden));
  d["cv_table"] = table;
  d["json"] = fit_result_json(r);
  return d;
}

SolverConfig solver_config(const std::string& solver, int max_iter, double tol) {
  SolverConfig c;
  c.variant = parse_solver_variant(solver);
  c.max_iter = max_iter;
  c.tol_residual = tol;
  c.validate();
  return c;
}

BiomarkerDataset dataset(const Matrix& diseased, const Matrix& healthy) {
  return make_dataset(diseased, healthy);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sparse biomarker combination by maximizing a smoothed weighted Youden index";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
  py::register_exception<IngestionError>(m, "IngestionError", PyExc_ValueError);

  m.def("default_lambda_grid", &default_lambda_grid);
  m.def("default_bandwidth", &default_bandwidth, py::arg("n_diseased"), py::arg("n_healthy"));
  m.def("normal_cdf", &normal_cdf, py::arg("x"));

  m.def(
      "load_dataset",
      [](const std::string& path, const std::string& label_column, const std::string& positive_label) {
        const BiomarkerDataset d = load_dataset(path, label_column, positive_label);
        return py::make_tuple(d.diseased, d.healthy, d.feature_names);
      },
      py::arg("path"), py::arg("label_column") = "label", py::arg("positive_label") = "1",
      "Returns (diseased, healthy, feature_names).");

  m.def(
      "smooth_f",
      [](const Matrix& diseased, const Matrix& healthy, const Vector& omega, double cutoff, double pi,
         double h) {
        const BiomarkerDataset d = dataset(diseased, healthy);
        return smooth_f(RulePoint{omega, cutoff}, ObjectiveContext(d, pi, h));
      },
      py::arg("diseased"), py::arg("healthy"), py::arg("omega"), py::arg("cutoff"), py::arg("pi"),
      py::arg("h"));

  m.def(
      "smooth_grad",
      [](const Matrix& diseased, const Matrix& healthy, const Vector& omega, double cutoff, double pi,
         double h) {
        const BiomarkerDataset d = dataset(diseased, healthy);
        return smooth_grad(RulePoint{omega, cutoff}, ObjectiveContext(d, pi, h));
      },
      py::arg("diseased"), py::arg("healthy"), py::arg("omega"), py::arg("cutoff"), py::arg("pi"),
      py::arg("h"), "Gradient stacked as (d/d omega, d/d c).");

  m.def("scad_value", [](double x, double lambda, double a) { return scad_value(x, {lambda, a}); },
        py::arg("x"), py::arg("lam"), py::arg("a") = 3.7);
  m.def("scad_prox", [](double x, double step, double lambda, double a) { return scad_prox(x, step, {lambda, a}); },
        py::arg("x"), py::arg("step"), py::arg("lam"), py::arg("a") = 3.7);

  m.def(
      "best_cutoff_scan",
      [](const std::vector<double>& diseased_scores, const std::vector<double>& healthy_scores, double pi) {
        const CutoffScan s = best_cutoff_scan(diseased_scores, healthy_scores, pi);
        return py::make_tuple(s.cutoff, s.youden);
      },
      py::arg("diseased_scores"), py::arg("healthy_scores"), py::arg("pi"), "Returns (cutoff, J).");

  m.def(
      "evaluate",
      [](const Vector& omega, double cutoff, const Matrix& diseased, const Matrix& healthy, double pi,
         std::optional<Vector> truth) {
        return metrics_dict(evaluate(RulePoint{omega, cutoff}, dataset(diseased, healthy), pi, truth));
      },
      py::arg("omega"), py::arg("cutoff"), py::arg("diseased"), py::arg("healthy"), py::arg("pi"),
      py::arg("truth") = py::none());

  m.def(
      "fit",
      [](const Matrix& diseased, const Matrix& healthy, double pi, std::optional<double> lambda,
         std::optional<std::vector<double>> lambda_grid, int folds, std::uint64_t seed,
         std::optional<double> bandwidth, const std::string& solver, int max_iter, double tol) {
        FitOptions fo;
        fo.lambda = lambda;
        if (lambda_grid) fo.lambda_grid = *lambda_grid;
        fo.folds = folds;
        fo.seed = seed;
        fo.bandwidth = bandwidth;
        fo.solver = solver_config(solver, max_iter, tol);
        const BiomarkerDataset d = dataset(diseased, healthy);
        FitResult r;
        {
          py::gil_scoped_release release;
          r = fit(d, pi, fo);
        }
        return fit_dict(r);
      },
      py::arg("diseased"), py::arg("healthy"), py::arg("pi") = 0.5, py::arg("lam") = py::none(),
      py::arg("lambda_grid") = py::none(), py::arg("folds") = 5, py::arg("seed") = 0,
      py::arg("bandwidth") = py::none(), py::arg("solver") = "napg-poly", py::arg("max_iter") = 5000,
      py::arg("tol") = 1e-6);

  m.def(
      "lasso_logistic_fit",
      [](const Matrix& diseased, const Matrix& healthy, double pi, std::optional<double> lambda,
         std::optional<std::vector<double>> lambda_grid, int folds, std::uint64_t seed) {
        const BiomarkerDataset d = dataset(diseased, healthy);
        const std::vector<double> grid = lambda_grid.value_or(default_lambda_grid());
        LassoLogisticResult r;
        {
          py::gil_scoped_release release;
          r = lambda ? lasso_logistic_fit_fixed(d, *lambda, pi) : lasso_logistic_fit(d, grid, pi, folds, seed);
        }
        py::dict out = fit_dict(r.fit);
        out["coefficients"] = r.model.coefficients;
        out["intercept"] = r.model.intercept;
        return out;
      },
      py::arg("diseased"), py::arg("healthy"), py::arg("pi") = 0.5, py::arg("lam") = py::none(),
      py::arg("lambda_grid") = py::none(), py::arg("folds") = 5, py::arg("seed") = 0);

  m.def(
      "generate",
      [](const std::string& scenario, Index n, std::uint64_t seed, Index p) {
        const SimulatedSample s = generate(parse_scenario(scenario), n, seed, p);
        py::dict d;
        d["diseased"] = s.data.diseased;
        d["healthy"] = s.data.healthy;
        d["features"] = s.features;
        d["labels"] = s.labels;
        d["latent"] = s.latent;
        d["true_omega"] = s.spec.true_omega;
        d["attempts"] = s.spec.attempts;
        return d;
      },
      py::arg("scenario"), py::arg("n"), py::arg("seed"), py::arg("p") = ScenarioConstants::s3_features);

  m.def(
      "run_replications",
      [](const std::string& scenario, Index n, int reps, double pi, const std::string& method,
         std::uint64_t seed, std::optional<double> lambda, std::optional<int> threads) {
        ReplicationOptions ro;
        ro.fit.lambda = lambda;
        ro.threads = threads;
        ReplicationSummary s;
        {
          py::gil_scoped_release release;
          s = run_replications(parse_scenario(scenario), n, reps, pi, parse_method(method), seed, ro);
        }
        py::dict d;
        d["sample_size"] = s.sample_size;
        d["pi"] = s.pi;
        d["method"] = to_string(s.method);
        d["mean_train_J"] = s.mean_train_J;
        d["mean_test_J"] = s.mean_test_J;
        d["detection_rate"] = s.detection_rate;
        d["shrinkage_accuracy"] = s.shrinkage_accuracy;
        d["reps_ok"] = s.reps_ok;
        d["failures"] = s.failures;
        d["invariant_violations"] = s.invariant_violations;
        return d;
      },
      py::arg("scenario"), py::arg("n"), py::arg("reps"), py::arg("pi") = 0.5, py::arg("method") = "ours",
      py::arg("seed") = 0, py::arg("lam") = py::none(), py::arg("threads") = py::none());

  m.def(
      "bench",
      [](const Matrix& diseased, const Matrix& healthy, double pi, double lambda,
         std::optional<double> bandwidth, int max_iter, double tol) {
        const BiomarkerDataset d = dataset(diseased, healthy);
        HyperParams hyper;
        hyper.pi = pi;
        hyper.bandwidth = bandwidth.value_or(default_bandwidth(d.n_diseased(), d.n_healthy()));
        hyper.lambda1 = lambda;
        hyper.validate();
        const ObjectiveContext ctx(d, pi, hyper.bandwidth);
        const SmoothedYoudenProblem problem(ctx, hyper);
        const Vector init = initialize(d, hyper).stacked();
        py::dict out;
        for (const char* name : {"napg-poly", "napg-backtracking", "papg"}) {
          const SolveResult r = solve(problem, init, solver_config(name, max_iter, tol));
          out[py::str(to_string(r.trace.variant))] = trace_dict(r.trace);
        }
        return out;
      },
      py::arg("diseased"), py::arg("healthy"), py::arg("pi") = 0.5, py::arg("lam") = 0.1,
      py::arg("bandwidth") = py::none(), py::arg("max_iter") = 5000, py::arg("tol") = 1e-6,
      "Runs the three solvers from one initialization; returns their traces keyed by solver name.");
}
