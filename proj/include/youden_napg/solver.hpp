#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "youden_napg/composite.hpp"
#include "youden_napg/penalty.hpp"

namespace youden {

enum class SolverVariant { napg_poly, napg_backtracking, papg };

enum class StepBranch {
  initial,       // row 0: the starting point
  u_branch,      // v_{k+1} = u_{k+1} passed the nonmonotone test
  z_branch_u,    // z-search ran, u_{k+1} still had the lower objective
  z_branch_z,    // z-search ran and z_{k+1} was kept
  z_branch_keep, // both searches exhausted without a valid point; v_k retained
  papg_step,
  papg_restart,
};

enum class Termination { residual, f_stagnation, max_iter };

std::string to_string(SolverVariant v);
std::string to_string(StepBranch b);
std::string to_string(Termination t);
SolverVariant parse_solver_variant(const std::string& name);

struct SolverConfig {
  double eta = 0.8;
  double delta = 1e-4;
  double c1 = 1e-4;
  double tau1 = 0.1;
  double tau2 = 0.9;
  double alpha_min = 1e-10;
  double alpha_max = 1e10;
  int max_iter = 5000;
  int max_ls_iter = 30;
  double tol_residual = 1e-6;
  double tol_f_rel = 1e-10;
  int stagnation_window = 5;
  SolverVariant variant = SolverVariant::napg_poly;
  double fixed_step = 1.0;
  /// Keep every accepted point and search anchor in the trace.
  bool record_points = false;

  void validate() const;
};

/// One backtracking search as it happened.
struct LineSearchLog {
  std::vector<double> trial_steps;
  double accepted_step = 0.0;
  double accepted_value = 0.0;
  double dist_sq = 0.0;  // ||candidate - anchor||^2
  bool exhausted = false;
  Vector anchor;  // filled when record_points is set
  Vector point;
};

struct TraceRecord {
  int iter = 0;
  double f_value = 0.0;  // F(v_{k+1})
  double residual = 0.0;
  long cum_f_evals = 0;
  long cum_grad_evals = 0;
  double step = 0.0;
  StepBranch branch = StepBranch::initial;
  double c_avg = 0.0;  // c_{k+1}
  double q = 1.0;      // q_{k+1}
  double t = 1.0;      // t_{k+1}
  double anchor_value = 0.0;  // F(w_k)
  double c_prev = 0.0;        // c_k used by the acceptance tests
  std::optional<LineSearchLog> u_search;
  std::optional<LineSearchLog> z_search;
};

struct SolverTrace {
  SolverVariant variant = SolverVariant::napg_poly;
  std::vector<TraceRecord> records;
  int invariant_violations = 0;
  int exhausted_searches = 0;
};

/// Alternating Barzilai-Borwein step: odd parity |s's|/|s'r|, even |s'r|/|r'r|,
/// clamped to [alpha_min, alpha_max]; a zero denominator yields alpha_min.
double bb_step(std::span<const double> s, std::span<const double> r, int parity,
               const SolverConfig& config);
double bb_step(const Vector& s, const Vector& r, int parity, const SolverConfig& config);

/// Minimizer of the quadratic through h(0), h'(0) and h(alpha1).
double quadratic_interpolation_step(double h0, double dh0, double alpha1, double h1);
/// Minimizer of the cubic through h(0), h'(0), h(alpha1) and h(alpha2).
double cubic_interpolation_step(double h0, double dh0, double alpha1, double h1, double alpha2,
                                double h2);

enum class BacktrackRule { polynomial, halving };

using AcceptTest = std::function<bool(const Vector& candidate, double value, double step)>;

/// h(alpha) <= h(0) - c1 * alpha * ||G_alpha(anchor)||^2.
AcceptTest sufficient_decrease_test(const Vector& anchor, double f_anchor, double c1);

struct LineSearchResult {
  double step = 0.0;
  Vector point;
  double value = 0.0;
  int f_evals = 0;
  bool exhausted = false;
  std::vector<double> trial_steps;
};

/// Backtracking over candidates prox_{alpha g}(anchor - alpha grad). After a
/// failure the next trial comes from the quadratic (first failure) or cubic
/// model of h, with h'(0) ~ -||G_alpha||^2, safeguarded into
/// [tau1 alpha, tau2 alpha]. The halving rule multiplies by 0.5 instead.
/// On exhaustion the lowest-value candidate is returned with `exhausted` set.
LineSearchResult poly_linesearch(const CompositeObjective& problem, const Vector& anchor,
                                 const Vector& grad_anchor, double f_anchor, double alpha0,
                                 const AcceptTest& accept, const SolverConfig& config,
                                 BacktrackRule rule = BacktrackRule::polynomial);

/// Iteration state of the nonmonotone APG method.
struct SolverState {
  int k = 1;
  Vector v, v_prev, u;
  Vector w_prev, grad_w_prev;
  double t = 1.0, t_prev = 0.0;
  double c_avg = 0.0;
  double q = 1.0;
  double f_v = 0.0;
  Vector grad_v;  // gradient at v_k, computed for the residual
  double residual = 0.0;
  double f_sum = 0.0;  // sum of F(v_1..v_k)
  long f_evals = 0;
  long grad_evals = 0;
};

class NapgSolver {
 public:
  NapgSolver(const CompositeObjective& problem, SolverConfig config);

  SolverState initialize(const Vector& v1, SolverTrace* trace = nullptr) const;
  /// Advances the state by one outer iteration and returns its trace record.
  TraceRecord iterate(SolverState& state, SolverTrace* trace = nullptr) const;

  const SolverConfig& config() const { return config_; }

 private:
  BacktrackRule rule() const;
  void refresh_residual(SolverState& state) const;

  const CompositeObjective& problem_;
  SolverConfig config_;
};

struct SolveResult {
  Vector point;  // the certified iterate on a residual stop, otherwise the lowest-F iterate seen
  double value = 0.0;
  double residual = 0.0;
  SolverTrace trace;
  Termination reason = Termination::max_iter;
  int iterations = 0;
};

/// Runs the variant selected in config.
SolveResult solve(const CompositeObjective& problem, const Vector& init,
                  const SolverConfig& config);
SolveResult solve_backtracking(const CompositeObjective& problem, const Vector& init,
                               SolverConfig config);
SolveResult solve_papg(const CompositeObjective& problem, const Vector& init,
                       SolverConfig config);

SolveResult solve(const RulePoint& init, const ObjectiveContext& ctx, const HyperParams& hyper,
                  const SolverConfig& config);

/// Re-checks F(v_k) <= c_k <= A_k on a nonmonotone trace. Returns the number
/// of offending rows.
int count_chain_violations(const SolverTrace& trace, double slack = 1e-9);

/// iter,f_value,residual,cum_f_evals,cum_grad_evals,step,branch
void write_trace_csv(std::ostream& out, const SolverTrace& trace);
void write_trace_csv(const std::string& path, const SolverTrace& trace);

}  // namespace youden
