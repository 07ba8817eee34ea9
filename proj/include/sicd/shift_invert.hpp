#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sicd/least_squares.hpp"
#include "sicd/linalg.hpp"
#include "sicd/trace.hpp"

namespace sicd {

enum class ScheduleMode {
  /// Fixed pass budget per subproblem; Phase II runs until the pass budget
  /// is spent, or for m2 steps when there is no budget.
  experiment,
  /// Error-ratio budgets and m1, m2 from the convergence analysis.
  theory,
};

struct SIConfig {
  double delta_tilde = 1e-4;
  double c2 = 1.0;
  double epsilon = 1e-4;
  std::size_t m1 = 0;  // 0: ceil(8 ln(16 d))
  std::size_t m2 = 0;  // 0: estimated after Phase I
  Solver solver = Solver::gsl;
  ScheduleMode mode = ScheduleMode::experiment;
  Budget subproblem_budget = Budget::passes(4);
  double max_total_passes = 0;  // 0: unlimited
  std::uint64_t seed = 0;
  std::optional<double> agd_smoothness;
  std::size_t max_outer_iterations = 200;

  double sigma_lower() const { return 1.0 + (1.0 - c2) / c2 * delta_tilde; }
  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

struct Schedule {
  std::size_t m1 = 0;
  double phase1_ratio = 0;
  double probe_ratio = 0;
  /// The Phase-I ratio overflowed and was clamped to kMaxRatio.
  bool truncated = false;

  static constexpr double kMaxRatio = 1e300;
};

/// Theory-mode schedule with xi_01^2 taken as 1/d.
Schedule compute_schedule(std::size_t d, const SIConfig& config);
/// ceil(1/2 log_{9/7}(g0^2 / epsilon)), at least 1.
std::size_t phase2_steps(double g0, double epsilon);
/// 100 max(g0, 1)
double phase2_ratio(double g0);
/// sqrt(lambda_f d / (lambda_f - rayleigh)); an estimate of the initial
/// Phase-II potential for a random start.
double g0_upper_estimate(std::size_t d, double lambda_f, double rayleigh);

/// w_prev / (w_prev^T (lambda I - A) w_prev). Throws on non-unit input.
Vector warm_start_vector(const Vector& w_prev, const ShiftedProblem& problem);

struct PowerStep {
  Vector w;
  /// w^T (lambda I - A) w for the returned w.
  double curvature = 0;
  std::uint64_t updates = 0;
  bool budget_capped = false;
};

/// One inexact step w <- normalize((lambda I - A)^{-1} w). `curvature` is
/// w^T (lambda I - A) w when the caller already knows it; otherwise it is
/// computed with one charged matvec. The solver sees
/// mu_hat = max(curvature, mu_floor).
PowerStep inexact_power_step(const SymmetricOperator& a, const Vector& w, double lambda,
                             const SolveOptions& options, double mu_floor,
                             std::optional<double> curvature = std::nullopt);

/// 1/2 / (w^T u - sigma_lower / 8). Throws when w^T u <= sigma_lower / 8.
double estimate_delta(const Vector& w, const Vector& u, double sigma_lower);

struct PhaseIRecord {
  std::size_t s = 0;
  double lambda_prev = 0;
  double delta_s = 0;
  double lambda = 0;
  double w_dot_u = 0;
};

struct Phase1Result {
  double lambda_f = 0;
  Vector w;
  double curvature = 0;  // w^T (lambda_f I - A) w
  std::vector<PhaseIRecord> history;
  std::size_t m1 = 0;
  bool budget_exhausted = false;
};

class PhaseOneError : public std::runtime_error {
 public:
  PhaseOneError(const std::string& what, double best_lambda)
      : std::runtime_error(what), best_lambda_(best_lambda) {}
  double best_lambda() const noexcept { return best_lambda_; }

 private:
  double best_lambda_;
};

/// Repeat-until loop locating a shift a constant multiple of the gap above
/// the top eigenvalue. Rows are appended to `trace` after each power step
/// when it is non-null.
Phase1Result phase1_locate(const SymmetricOperator& a, const SIConfig& config, const Vector& w0,
                           RunTrace* trace = nullptr);

struct EigResult {
  Vector w;
  double rayleigh = 0;
  double lambda_f = 0;
  std::vector<TraceRecord> trace;
  std::size_t phase1_outer_iters = 0;
  std::vector<PhaseIRecord> phase1_history;
  /// ||A w - rayleigh w||
  double residual = 0;
  std::size_t m1 = 0;
  std::size_t m2 = 0;
  bool budget_exhausted = false;
};

/// Power steps at the fixed shift lambda_f. `curvature` as for
/// inexact_power_step.
EigResult phase2_refine(const SymmetricOperator& a, double lambda_f, const Vector& w,
                        const SIConfig& config, RunTrace* trace = nullptr,
                        std::optional<double> curvature = std::nullopt);

/// Both phases from w0, or from random_unit_vector(d, seed) when w0 is
/// absent. The method label in the trace is "si-<solver>".
EigResult run_si(const SymmetricOperator& a, const SIConfig& config,
                 std::optional<Vector> w0 = std::nullopt);

}  // namespace sicd
