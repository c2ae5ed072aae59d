#include "youden_napg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include <fmt/format.h>

namespace youden {

std::string to_string(SolverVariant v) {
  switch (v) {
    case SolverVariant::napg_poly: return "napg_poly";
    case SolverVariant::napg_backtracking: return "napg_backtracking";
    case SolverVariant::papg: return "papg";
  }
  return "unknown";
}

std::string to_string(StepBranch b) {
  switch (b) {
    case StepBranch::initial: return "initial";
    case StepBranch::u_branch: return "u-branch";
    case StepBranch::z_branch_u: return "z-branch-u";
    case StepBranch::z_branch_z: return "z-branch-z";
    case StepBranch::z_branch_keep: return "z-branch-keep";
    case StepBranch::papg_step: return "papg-step";
    case StepBranch::papg_restart: return "papg-restart";
  }
  return "unknown";
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::residual: return "residual";
    case Termination::f_stagnation: return "f_stagnation";
    case Termination::max_iter: return "max_iter";
  }
  return "unknown";
}

SolverVariant parse_solver_variant(const std::string& name) {
  if (name == "napg_poly" || name == "napg-poly") return SolverVariant::napg_poly;
  if (name == "napg_backtracking" || name == "napg-backtracking") {
    return SolverVariant::napg_backtracking;
  }
  if (name == "papg") return SolverVariant::papg;
  throw ValidationError(fmt::format("unknown solver '{}'", name));
}

void SolverConfig::validate() const {
  if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("eta must lie in [0,1]");
  if (!(delta > 0.0)) throw ValidationError("delta must be positive");
  if (!(c1 > 0.0 && c1 < 1.0)) throw ValidationError("c1 must lie in (0,1)");
  if (!(tau1 > 0.0 && tau1 <= tau2 && tau2 < 1.0)) {
    throw ValidationError("safeguard bounds need 0 < tau1 <= tau2 < 1");
  }
  if (!(alpha_min > 0.0 && alpha_min <= alpha_max)) {
    throw ValidationError("step caps need 0 < alpha_min <= alpha_max");
  }
  if (max_iter < 0 || max_ls_iter < 1) throw ValidationError("iteration caps must be positive");
  if (!(tol_residual >= 0.0) || !(tol_f_rel >= 0.0)) {
    throw ValidationError("tolerances must be non-negative");
  }
  if (stagnation_window < 1) throw ValidationError("stagnation window must be positive");
  if (!(fixed_step > 0.0)) throw ValidationError("fixed step must be positive");
}

double bb_step(std::span<const double> s, std::span<const double> r, int parity,
               const SolverConfig& config) {
  if (s.size() != r.size()) throw ContractViolation("bb_step: s and r differ in length");
  double ss = 0.0, sr = 0.0, rr = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    ss += s[i] * s[i];
    sr += s[i] * r[i];
    rr += r[i] * r[i];
  }
  double num = 0.0, den = 0.0;
  if (parity % 2 != 0) {
    num = std::abs(ss);
    den = std::abs(sr);
  } else {
    num = std::abs(sr);
    den = std::abs(rr);
  }
  if (den == 0.0) return config.alpha_min;
  const double alpha = num / den;
  if (!std::isfinite(alpha)) return config.alpha_max;
  return std::clamp(alpha, config.alpha_min, config.alpha_max);
}

double bb_step(const Vector& s, const Vector& r, int parity, const SolverConfig& config) {
  return bb_step(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())),
                 std::span<const double>(r.data(), static_cast<std::size_t>(r.size())), parity,
                 config);
}

double quadratic_interpolation_step(double h0, double dh0, double alpha1, double h1) {
  return -dh0 * alpha1 * alpha1 / (2.0 * (h1 - h0 - dh0 * alpha1));
}

double cubic_interpolation_step(double h0, double dh0, double alpha1, double h1, double alpha2,
                                double h2) {
  if (alpha1 == alpha2) return quadratic_interpolation_step(h0, dh0, alpha1, h1);
  const double d1 = h1 - h0 - dh0 * alpha1;
  const double d2 = h2 - h0 - dh0 * alpha2;
  const double a1sq = alpha1 * alpha1;
  const double a2sq = alpha2 * alpha2;
  const double scale = 1.0 / (alpha1 - alpha2);
  const double a = scale * (d1 / a1sq - d2 / a2sq);
  const double b = scale * (-alpha2 * d1 / a1sq + alpha1 * d2 / a2sq);
  const double disc = b * b - 3.0 * a * dh0;
  if (disc < 0.0) return quadratic_interpolation_step(h0, dh0, alpha1, h1);
  const double root = std::sqrt(disc);
  // Same root as (-b + sqrt(disc)) / (3a), without cancellation when b > 0
  // and well defined when a == 0.
  if (b > 0.0) return -dh0 / (b + root);
  if (a == 0.0) return quadratic_interpolation_step(h0, dh0, alpha1, h1);
  return (-b + root) / (3.0 * a);
}

AcceptTest sufficient_decrease_test(const Vector& anchor, double f_anchor, double c1) {
  return [anchor, f_anchor, c1](const Vector& candidate, double value, double step) {
    const double gsq = (anchor - candidate).squaredNorm() / (step * step);
    return value <= f_anchor - c1 * step * gsq;
  };
}

LineSearchResult poly_linesearch(const CompositeObjective& problem, const Vector& anchor,
                                 const Vector& grad_anchor, double f_anchor, double alpha0,
                                 const AcceptTest& accept, const SolverConfig& config,
                                 BacktrackRule rule) {
  if (!std::isfinite(f_anchor)) throw ContractViolation("line search anchor has non-finite F");
  if (!(alpha0 > 0.0)) throw ContractViolation("line search needs a positive initial step");

  LineSearchResult result;
  double alpha = alpha0;
  double prev_alpha = 0.0;
  double prev_value = 0.0;
  bool have_best = false;

  for (int i = 0; i < config.max_ls_iter; ++i) {
    Vector candidate = problem.prox(anchor - alpha * grad_anchor, alpha);
    const double value = problem.value(candidate);
    ++result.f_evals;
    result.trial_steps.push_back(alpha);
    const bool finite = std::isfinite(value);

    if (finite && accept(candidate, value, alpha)) {
      result.step = alpha;
      result.point = std::move(candidate);
      result.value = value;
      result.exhausted = false;
      return result;
    }
    if (!have_best || (finite && !(value >= result.value))) {
      result.step = alpha;
      result.point = candidate;
      result.value = value;
      have_best = true;
    }

    double proposal = 0.0;
    if (rule == BacktrackRule::halving) {
      alpha *= 0.5;
      continue;
    }
    if (!finite) {
      proposal = config.tau1 * alpha;
    } else {
      const double dh0 = -(anchor - candidate).squaredNorm() / (alpha * alpha);
      proposal = i == 0 ? quadratic_interpolation_step(f_anchor, dh0, alpha, value)
                        : cubic_interpolation_step(f_anchor, dh0, alpha, value, prev_alpha,
                                                   prev_value);
      if (std::isnan(proposal)) proposal = config.tau1 * alpha;
    }
    prev_alpha = alpha;
    prev_value = value;
    alpha = std::min(std::max(proposal, config.tau1 * alpha), config.tau2 * alpha);
  }
  result.exhausted = true;
  return result;
}

NapgSolver::NapgSolver(const CompositeObjective& problem, SolverConfig config)
    : problem_(problem), config_(config) {
  config_.validate();
}

BacktrackRule NapgSolver::rule() const {
  return config_.variant == SolverVariant::napg_backtracking ? BacktrackRule::halving
                                                             : BacktrackRule::polynomial;
}

void NapgSolver::refresh_residual(SolverState& state) const {
  // Monitoring gradient: not counted until the z-branch consumes it.
  state.grad_v = problem_.smooth_gradient(state.v);
  state.residual = stationarity_residual(problem_, state.v, state.grad_v);
}

SolverState NapgSolver::initialize(const Vector& v1, SolverTrace* trace) const {
  if (v1.size() != problem_.dimension()) throw ContractViolation("initial point has wrong size");
  if (!v1.allFinite()) throw ContractViolation("initial point must be finite");
  SolverState s;
  s.k = 1;
  s.v = v1;
  s.v_prev = v1;
  s.u = v1;
  s.w_prev = v1;
  s.t = 1.0;
  s.t_prev = 0.0;
  s.f_v = problem_.smooth_value_and_gradient(v1, s.grad_w_prev) + problem_.nonsmooth_value(v1);
  s.f_evals = 1;
  s.grad_evals = 1;
  s.grad_v = s.grad_w_prev;
  s.residual = stationarity_residual(problem_, s.v, s.grad_v);
  s.c_avg = s.f_v;
  s.q = 1.0;
  s.f_sum = s.f_v;
  if (trace) {
    trace->variant = config_.variant;
    TraceRecord rec;
    rec.iter = 0;
    rec.f_value = s.f_v;
    rec.residual = s.residual;
    rec.cum_f_evals = s.f_evals;
    rec.cum_grad_evals = s.grad_evals;
    rec.branch = StepBranch::initial;
    rec.c_avg = s.c_avg;
    rec.q = s.q;
    rec.t = s.t;
    rec.anchor_value = s.f_v;
    rec.c_prev = s.c_avg;
    trace->records.push_back(std::move(rec));
  }
  return s;
}

namespace {

LineSearchLog make_log(const LineSearchResult& ls, const Vector& anchor, bool record_points) {
  LineSearchLog log;
  log.trial_steps = ls.trial_steps;
  log.accepted_step = ls.step;
  log.accepted_value = ls.value;
  log.dist_sq = (ls.point - anchor).squaredNorm();
  log.exhausted = ls.exhausted;
  if (record_points) {
    log.anchor = anchor;
    log.point = ls.point;
  }
  return log;
}

}  // namespace

TraceRecord NapgSolver::iterate(SolverState& s, SolverTrace* trace) const {
  const double delta = config_.delta;
  const double c_k = s.c_avg;

  const Vector w = s.v + (s.t_prev / s.t) * (s.u - s.v) + ((s.t_prev - 1.0) / s.t) * (s.v - s.v_prev);
  Vector grad_w;
  const double f_w = problem_.smooth_value_and_gradient(w, grad_w) + problem_.nonsmooth_value(w);
  ++s.grad_evals;
  ++s.f_evals;

  const double alpha_y = bb_step(w - s.w_prev, grad_w - s.grad_w_prev, s.k, config_);
  const AcceptTest accept_u = [&](const Vector& cand, double value, double) {
    const double d2 = (cand - w).squaredNorm();
    return value <= f_w - delta * d2 || value <= c_k - delta * d2;
  };
  LineSearchResult ls_u = poly_linesearch(problem_, w, grad_w, f_w, alpha_y, accept_u, config_, rule());
  s.f_evals += ls_u.f_evals;

  TraceRecord rec;
  rec.anchor_value = f_w;
  rec.c_prev = c_k;
  rec.u_search = make_log(ls_u, w, config_.record_points);
  int exhausted = ls_u.exhausted ? 1 : 0;

  Vector v_next;
  double f_next = 0.0;
  const double du = (ls_u.point - w).squaredNorm();
  if (std::isfinite(ls_u.value) && ls_u.value <= c_k - delta * du) {
    v_next = ls_u.point;
    f_next = ls_u.value;
    rec.branch = StepBranch::u_branch;
    rec.step = ls_u.step;
  } else {
    ++s.grad_evals;  // grad f(v_k), cached from the residual computation
    const double alpha_x = bb_step(s.v - s.w_prev, s.grad_v - s.grad_w_prev, s.k, config_);
    const Vector& v_k = s.v;
    const AcceptTest accept_z = [&](const Vector& cand, double value, double) {
      return value <= c_k - delta * (cand - v_k).squaredNorm();
    };
    LineSearchResult ls_z =
        poly_linesearch(problem_, s.v, s.grad_v, s.f_v, alpha_x, accept_z, config_, rule());
    s.f_evals += ls_z.f_evals;
    rec.z_search = make_log(ls_z, s.v, config_.record_points);
    exhausted += ls_z.exhausted ? 1 : 0;

    if (ls_u.value <= ls_z.value) {
      v_next = ls_u.point;
      f_next = ls_u.value;
      rec.branch = StepBranch::z_branch_u;
      rec.step = ls_u.step;
    } else {
      v_next = ls_z.point;
      f_next = ls_z.value;
      rec.branch = StepBranch::z_branch_z;
      rec.step = ls_z.step;
    }
    if (!(f_next <= c_k)) {
      v_next = s.v;
      f_next = s.f_v;
      rec.branch = StepBranch::z_branch_keep;
      rec.step = 0.0;
    }
  }

  const double t_next = (std::sqrt(4.0 * s.t * s.t + 1.0) + 1.0) / 2.0;
  const double q_next = config_.eta * s.q + 1.0;
  const double c_next = (config_.eta * s.q * s.c_avg + f_next) / q_next;

  s.v_prev = std::move(s.v);
  s.v = std::move(v_next);
  s.u = std::move(ls_u.point);
  s.w_prev = w;
  s.grad_w_prev = std::move(grad_w);
  s.t_prev = s.t;
  s.t = t_next;
  s.q = q_next;
  s.c_avg = c_next;
  s.f_v = f_next;
  s.f_sum += f_next;
  ++s.k;
  refresh_residual(s);

  rec.iter = s.k - 1;
  rec.f_value = s.f_v;
  rec.residual = s.residual;
  rec.cum_f_evals = s.f_evals;
  rec.cum_grad_evals = s.grad_evals;
  rec.c_avg = s.c_avg;
  rec.q = s.q;
  rec.t = s.t;

  if (trace) {
    const double avg = s.f_sum / static_cast<double>(s.k);
    constexpr double slack = 1e-9;
    if (s.f_v > s.c_avg + slack || s.c_avg > avg + slack) ++trace->invariant_violations;
    trace->exhausted_searches += exhausted;
    trace->records.push_back(rec);
  }
  return rec;
}

namespace {

struct StopMonitor {
  const SolverConfig& config;
  int stagnant = 0;

  // Returns a reason to stop after a step from f_old to f_new, if any.
  std::optional<Termination> check(double f_old, double f_new, double residual) {
    if (residual <= config.tol_residual) return Termination::residual;
    if (std::abs(f_new - f_old) <= config.tol_f_rel * std::max(1.0, std::abs(f_old))) {
      if (++stagnant >= config.stagnation_window) return Termination::f_stagnation;
    } else {
      stagnant = 0;
    }
    return std::nullopt;
  }
};

SolveResult solve_napg(const CompositeObjective& problem, const Vector& init,
                       const SolverConfig& config) {
  const NapgSolver solver(problem, config);
  SolveResult out;
  SolverState state = solver.initialize(init, &out.trace);
  out.point = state.v;
  out.value = state.f_v;
  out.residual = state.residual;
  if (state.residual <= config.tol_residual) {
    out.reason = Termination::residual;
    return out;
  }
  StopMonitor monitor{config};
  out.reason = Termination::max_iter;
  for (int it = 0; it < config.max_iter; ++it) {
    const double f_old = state.f_v;
    solver.iterate(state, &out.trace);
    out.iterations = it + 1;
    if (state.f_v < out.value) {
      out.point = state.v;
      out.value = state.f_v;
      out.residual = state.residual;
    }
    if (auto reason = monitor.check(f_old, state.f_v, state.residual)) {
      out.reason = *reason;
      if (out.reason == Termination::residual) {
        // Return the certified stationary point rather than an earlier, slightly lower one.
        out.point = state.v;
        out.value = state.f_v;
        out.residual = state.residual;
      }
      break;
    }
  }
  return out;
}

}  // namespace

SolveResult solve_papg(const CompositeObjective& problem, const Vector& init, SolverConfig config) {
  config.variant = SolverVariant::papg;
  config.validate();
  if (init.size() != problem.dimension()) throw ContractViolation("initial point has wrong size");
  if (!init.allFinite()) throw ContractViolation("initial point must be finite");

  const double step = config.fixed_step;
  SolveResult out;
  out.trace.variant = SolverVariant::papg;

  Vector v = init;
  Vector v_prev = init;
  double t = 1.0, t_prev = 0.0;
  Vector grad;
  double f_v = problem.smooth_value_and_gradient(v, grad) + problem.nonsmooth_value(v);
  long f_evals = 1, grad_evals = 1;
  double residual = stationarity_residual(problem, v, grad);

  auto push = [&](int iter, StepBranch branch) {
    TraceRecord rec;
    rec.iter = iter;
    rec.f_value = f_v;
    rec.residual = residual;
    rec.cum_f_evals = f_evals;
    rec.cum_grad_evals = grad_evals;
    rec.step = iter == 0 ? 0.0 : step;
    rec.branch = branch;
    rec.c_avg = f_v;
    rec.q = 1.0;
    rec.t = t;
    rec.anchor_value = f_v;
    rec.c_prev = f_v;
    out.trace.records.push_back(std::move(rec));
  };
  push(0, StepBranch::initial);
  out.point = v;
  out.value = f_v;
  out.residual = residual;
  if (residual <= config.tol_residual) {
    out.reason = Termination::residual;
    return out;
  }

  StopMonitor monitor{config};
  out.reason = Termination::max_iter;
  for (int it = 0; it < config.max_iter; ++it) {
    const double f_old = f_v;
    const Vector y = v + ((t_prev - 1.0) / t) * (v - v_prev);
    const Vector grad_y = problem.smooth_gradient(y);
    ++grad_evals;
    Vector x = problem.prox(y - step * grad_y, step);
    const double f_x = problem.value(x);
    ++f_evals;

    StepBranch branch = StepBranch::papg_step;
    if (!(f_x <= f_v)) {
      // Monotone restart: drop the momentum and stay at v_k.
      branch = StepBranch::papg_restart;
      v_prev = v;
      t_prev = 0.0;
      t = 1.0;
    } else {
      v_prev = std::move(v);
      v = std::move(x);
      f_v = f_x;
      const double t_next = (std::sqrt(4.0 * t * t + 1.0) + 1.0) / 2.0;
      t_prev = t;
      t = t_next;
      residual = stationarity_residual(problem, v, problem.smooth_gradient(v));
    }
    push(it + 1, branch);
    out.iterations = it + 1;
    if (f_v < out.value) {
      out.point = v;
      out.value = f_v;
      out.residual = residual;
    }
    if (auto reason = monitor.check(f_old, f_v, residual)) {
      out.reason = *reason;
      break;
    }
  }
  return out;
}

SolveResult solve_backtracking(const CompositeObjective& problem, const Vector& init,
                               SolverConfig config) {
  config.variant = SolverVariant::napg_backtracking;
  return solve_napg(problem, init, config);
}

SolveResult solve(const CompositeObjective& problem, const Vector& init,
                  const SolverConfig& config) {
  switch (config.variant) {
    case SolverVariant::papg: return solve_papg(problem, init, config);
    case SolverVariant::napg_backtracking: return solve_backtracking(problem, init, config);
    case SolverVariant::napg_poly: break;
  }
  return solve_napg(problem, init, config);
}

SolveResult solve(const RulePoint& init, const ObjectiveContext& ctx, const HyperParams& hyper,
                  const SolverConfig& config) {
  const SmoothedYoudenProblem problem(ctx, hyper);
  return solve(problem, init.stacked(), config);
}

int count_chain_violations(const SolverTrace& trace, double slack) {
  int bad = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const TraceRecord& r = trace.records[i];
    sum += r.f_value;
    const double avg = sum / static_cast<double>(i + 1);
    if (r.f_value > r.c_avg + slack || r.c_avg > avg + slack) ++bad;
  }
  return bad;
}

void write_trace_csv(std::ostream& out, const SolverTrace& trace) {
  out << "iter,f_value,residual,cum_f_evals,cum_grad_evals,step,branch\n";
  for (const TraceRecord& r : trace.records) {
    out << fmt::format("{},{},{},{},{},{},{}\n", r.iter, r.f_value, r.residual, r.cum_f_evals,
                       r.cum_grad_evals, r.step, to_string(r.branch));
  }
}

void write_trace_csv(const std::string& path, const SolverTrace& trace) {
  std::ofstream out(path);
  if (!out) throw ValidationError(fmt::format("cannot write '{}'", path));
  write_trace_csv(out, trace);
}

}  // namespace youden
