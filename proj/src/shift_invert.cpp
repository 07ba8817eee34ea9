#include "sicd/shift_invert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sicd {

void SIConfig::validate() const {
  if (!(delta_tilde > 0.0 && delta_tilde <= 1.0)) {
    throw std::invalid_argument("delta_tilde must lie in (0, 1]");
  }
  if (!(c2 > 0.0 && c2 <= 1.0)) throw std::invalid_argument("c2 must lie in (0, 1]");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (max_total_passes < 0.0) throw std::invalid_argument("total pass budget must be >= 0");
  if (max_outer_iterations == 0) throw std::invalid_argument("outer iteration cap must be >= 1");
}

Schedule compute_schedule(std::size_t d, const SIConfig& config) {
  if (d < 2) throw std::invalid_argument("schedule needs d >= 2");
  Schedule s;
  s.m1 = config.m1 > 0 ? config.m1
                       : static_cast<std::size_t>(std::ceil(8.0 * std::log(16.0 * static_cast<double>(d))));
  // 32 * 10^(2 m1 + 1) / dt^(2 m1), evaluated in log10
  const double m = static_cast<double>(s.m1);
  const double log_ratio = std::log10(32.0) + (2.0 * m + 1.0) - 2.0 * m * std::log10(config.delta_tilde);
  if (log_ratio >= std::log10(Schedule::kMaxRatio)) {
    s.phase1_ratio = Schedule::kMaxRatio;
    s.truncated = true;
  } else {
    s.phase1_ratio = std::pow(10.0, log_ratio);
  }
  s.probe_ratio = 1024.0 / (config.delta_tilde * config.delta_tilde);
  return s;
}

std::size_t phase2_steps(double g0, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const double steps = 0.5 * std::log(g0 * g0 / epsilon) / std::log(9.0 / 7.0);
  return std::max<std::size_t>(1, steps > 0.0 ? static_cast<std::size_t>(std::ceil(steps)) : 0);
}

double phase2_ratio(double g0) { return 100.0 * std::max(g0, 1.0); }

double g0_upper_estimate(std::size_t d, double lambda_f, double rayleigh) {
  const double gap = lambda_f - rayleigh;
  if (!(gap > 0.0)) throw std::invalid_argument("G0 estimate needs lambda_f above the Rayleigh quotient");
  return std::sqrt(lambda_f * static_cast<double>(d) / gap);
}

namespace {

void require_unit(const Vector& w) {
  if (!(std::abs(w.norm() - 1.0) <= 1e-12)) throw std::invalid_argument("vector is not unit norm");
}

double exact_curvature(const SymmetricOperator& a, const Vector& w, double lambda) {
  return lambda - w.dot(a.apply(w));
}

struct WarmSolve {
  SolverState state;
  double curvature_in = 0;
};

/// Solves (lambda I - A) x = w from the warm start w / curvature.
WarmSolve warm_solve(const SymmetricOperator& a, const Vector& w, double lambda,
                     const SolveOptions& options, double mu_floor,
                     std::optional<double> curvature) {
  WarmSolve out;
  std::uint64_t extra = 0;
  double c = curvature.value_or(0.0);
  if (!curvature || !std::isfinite(c) || c <= 0.0) {
    c = exact_curvature(a, w, lambda);
    extra = a.dim();
  }
  if (!(c > 0.0)) {
    throw std::runtime_error(
        "shift fell below the top eigenvalue; the Phase I solves were too inexact for this "
        "subproblem budget");
  }
  const ShiftedProblem problem = make_shifted_problem(a, lambda, w, std::max(c, mu_floor));
  out.state = solve(problem, options, w / c);
  out.state.updates += extra;
  out.curvature_in = c;
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Shared state of one run: cost accounting, seeds and the pass budget.
class Runner {
 public:
  Runner(const SymmetricOperator& a, const SIConfig& config, RunTrace* trace)
      : a_(a), config_(config) {
    config.validate();
    if (trace == nullptr) {
      local_.emplace("si-" + std::string(to_string(config.solver)), a);
      trace_ = &*local_;
    } else {
      trace_ = trace;
    }
  }

  RunTrace& trace() { return *trace_; }
  double mu_floor() const { return config_.delta_tilde / 8.0; }

  bool out_of_budget() const {
    return config_.max_total_passes > 0.0 && trace_->passes() >= config_.max_total_passes;
  }

  SolveOptions options(const Budget& budget, double lambda) {
    SolveOptions o;
    o.kind = config_.solver;
    o.budget = budget;
    o.seed = splitmix64(config_.seed ^ splitmix64(++solves_));
    // the run assumes spectral radius <= 1, so rho_d >= -1
    o.agd_smoothness = config_.agd_smoothness.value_or(lambda - std::max(-1.0, a_.lower_bound()));
    return o;
  }

  double initial_curvature(const Vector& w, double lambda) {
    trace_->charge(a_.dim());
    return exact_curvature(a_, w, lambda);
  }

  PowerStep power_step(const Vector& w, double lambda, const Budget& budget, double curvature) {
    PowerStep step = inexact_power_step(a_, w, lambda, options(budget, lambda), mu_floor(), curvature);
    trace_->charge(step.updates);
    trace_->record(step.w);
    return step;
  }

  /// The eigenvalue probe: approximately M w, left unnormalized.
  Vector probe(const Vector& w, double lambda, const Budget& budget, double curvature) {
    WarmSolve ws = warm_solve(a_, w, lambda, options(budget, lambda), mu_floor(), curvature);
    trace_->charge(ws.state.updates);
    return std::move(ws.state.x);
  }

 private:
  const SymmetricOperator& a_;
  const SIConfig& config_;
  std::optional<RunTrace> local_;
  RunTrace* trace_ = nullptr;
  std::uint64_t solves_ = 0;
};

Phase1Result run_phase1(Runner& run, const SymmetricOperator& a, const SIConfig& config,
                        const Vector& w0, double curvature0) {
  const bool theory = config.mode == ScheduleMode::theory;
  const Schedule sched = compute_schedule(a.dim(), config);
  const std::size_t m1 = sched.m1;
  const Budget step_budget = theory ? Budget::ratio(sched.phase1_ratio) : config.subproblem_budget;
  const Budget probe_budget = theory ? Budget::ratio(sched.probe_ratio) : config.subproblem_budget;

  Phase1Result r;
  r.m1 = m1;
  r.w = w0;
  r.lambda_f = 1.0 + config.delta_tilde;
  r.curvature = curvature0;
  double best = r.lambda_f;

  for (std::size_t s = 1;; ++s) {
    if (s > config.max_outer_iterations) {
      throw PhaseOneError("phase I did not settle within " +
                              std::to_string(config.max_outer_iterations) + " outer iterations",
                          best);
    }
    const double lambda_prev = r.lambda_f;
    for (std::size_t t = 0; t < m1; ++t) {
      if (run.out_of_budget()) {
        r.budget_exhausted = true;
        return r;
      }
      PowerStep step = run.power_step(r.w, lambda_prev, step_budget, r.curvature);
      r.w = std::move(step.w);
      r.curvature = step.curvature;
    }
    if (run.out_of_budget()) {
      r.budget_exhausted = true;
      return r;
    }
    const Vector u = run.probe(r.w, lambda_prev, probe_budget, r.curvature);
    PhaseIRecord rec;
    rec.s = s;
    rec.lambda_prev = lambda_prev;
    rec.w_dot_u = r.w.dot(u);
    rec.delta_s = estimate_delta(r.w, u, config.sigma_lower());
    rec.lambda = lambda_prev - rec.delta_s / 2.0;
    r.history.push_back(rec);

    r.lambda_f = rec.lambda;
    r.curvature += rec.lambda - lambda_prev;
    best = std::min(best, r.lambda_f);
    if (rec.delta_s <= config.delta_tilde) return r;
  }
}

void run_phase2(Runner& run, const SymmetricOperator& a, const SIConfig& config, double lambda_f,
                EigResult& out, double curvature) {
  const bool theory = config.mode == ScheduleMode::theory;
  const double rayleigh = lambda_f - curvature;
  const double g0 = g0_upper_estimate(a.dim(), lambda_f, std::min(rayleigh, lambda_f - run.mu_floor()));
  const Budget budget = theory ? Budget::ratio(phase2_ratio(g0)) : config.subproblem_budget;

  // experiment mode with a pass budget runs until the budget is spent
  const bool until_budget = !theory && config.m2 == 0 && config.max_total_passes > 0.0;
  const std::size_t m2 = config.m2 > 0 ? config.m2 : phase2_steps(g0, config.epsilon);

  out.lambda_f = lambda_f;
  std::size_t steps = 0;
  while (until_budget || steps < m2) {
    if (run.out_of_budget()) {
      out.budget_exhausted = !until_budget;
      break;
    }
    PowerStep step = run.power_step(out.w, lambda_f, budget, curvature);
    out.w = std::move(step.w);
    curvature = step.curvature;
    ++steps;
  }
  out.m2 = steps;
}

void finish(const SymmetricOperator& a, EigResult& out, RunTrace& trace) {
  for (Eigen::Index i = 0; i < out.w.size(); ++i) {
    if (out.w[i] != 0.0) {
      if (out.w[i] < 0.0) out.w = -out.w;
      break;
    }
  }
  const Vector aw = a.apply(out.w);
  out.rayleigh = out.w.dot(aw);
  out.residual = (aw - out.rayleigh * out.w).norm();
  out.trace = trace.take();
}

}  // namespace

Vector warm_start_vector(const Vector& w_prev, const ShiftedProblem& problem) {
  require_unit(w_prev);
  const double c = w_prev.dot(problem.hessian_apply(w_prev));
  if (!(c > 0.0)) throw std::invalid_argument("shifted matrix is not positive along w_prev");
  return w_prev / c;
}

PowerStep inexact_power_step(const SymmetricOperator& a, const Vector& w, double lambda,
                             const SolveOptions& options, double mu_floor,
                             std::optional<double> curvature) {
  require_unit(w);
  WarmSolve ws = warm_solve(a, w, lambda, options, mu_floor, curvature);
  const SolverState& st = ws.state;
  const double norm = st.x.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw std::runtime_error("power step produced a zero vector");

  PowerStep step;
  step.w = st.x / norm;
  step.updates = st.updates;
  step.budget_capped = st.budget_capped;
  // x^T H x from the maintained gradient: H x = g + y
  step.curvature = st.x.dot(st.g + w) / (norm * norm);
  if (!std::isfinite(step.curvature) || step.curvature <= 0.0) {
    step.curvature = exact_curvature(a, step.w, lambda);
    step.updates += a.dim();
  }
  return step;
}

double estimate_delta(const Vector& w, const Vector& u, double sigma_lower) {
  const double excess = w.dot(u) - sigma_lower / 8.0;
  if (!(excess > 0.0)) throw std::runtime_error("probe too inaccurate");
  return 0.5 / excess;
}

Phase1Result phase1_locate(const SymmetricOperator& a, const SIConfig& config, const Vector& w0,
                           RunTrace* trace) {
  require_unit(w0);
  Runner run(a, config, trace);
  const double c0 = run.initial_curvature(w0, 1.0 + config.delta_tilde);
  return run_phase1(run, a, config, w0, c0);
}

EigResult phase2_refine(const SymmetricOperator& a, double lambda_f, const Vector& w,
                        const SIConfig& config, RunTrace* trace,
                        std::optional<double> curvature) {
  require_unit(w);
  Runner run(a, config, trace);
  const double c = curvature ? *curvature : run.initial_curvature(w, lambda_f);
  EigResult out;
  out.w = w;
  run_phase2(run, a, config, lambda_f, out, c);
  finish(a, out, run.trace());
  return out;
}

EigResult run_si(const SymmetricOperator& a, const SIConfig& config, std::optional<Vector> w0) {
  const std::size_t d = a.dim();
  Vector start = w0 ? *w0 : random_unit_vector(d, config.seed);
  if (static_cast<std::size_t>(start.size()) != d) throw std::invalid_argument("w0 has wrong length");
  require_unit(start);

  Runner run(a, config, nullptr);
  run.trace().record(start);
  const double c0 = run.initial_curvature(start, 1.0 + config.delta_tilde);
  Phase1Result p1 = run_phase1(run, a, config, start, c0);

  EigResult out;
  out.w = std::move(p1.w);
  out.lambda_f = p1.lambda_f;
  out.phase1_outer_iters = p1.history.size();
  out.phase1_history = std::move(p1.history);
  out.m1 = p1.m1;
  if (p1.budget_exhausted) {
    out.budget_exhausted = true;
  } else {
    run_phase2(run, a, config, p1.lambda_f, out, p1.curvature);
  }
  finish(a, out, run.trace());
  return out;
}

}  // namespace sicd
