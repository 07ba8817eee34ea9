#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

#include "sicd/linalg.hpp"

namespace sicd {

/// f(x) = 1/2 x^T (lambda I - A) x - y^T x together with the smoothness
/// constants coordinate methods need. Holds a reference to the operator.
class ShiftedProblem {
 public:
  const SymmetricOperator& matrix() const { return *matrix_; }
  std::size_t dim() const { return matrix_->dim(); }
  double lambda() const { return lambda_; }
  const Vector& y() const { return y_; }

  /// L_i = lambda - A[ii]
  const Vector& lip() const { return lip_; }
  double lip_mean() const { return lip_mean_; }
  double lip_max() const { return lip_max_; }
  double lip_sqrt_sum() const { return lip_sqrt_sum_; }
  /// Strong-convexity estimate used by stopping rules and acceleration.
  double mu_hat() const { return mu_hat_; }

  /// (lambda I - A) x - y, by a full matvec.
  Vector gradient(const Vector& x) const;
  double objective(const Vector& x) const;
  /// (lambda I - A) v
  Vector hessian_apply(const Vector& v) const;

 private:
  friend ShiftedProblem make_shifted_problem(const SymmetricOperator&, double, Vector, double);
  ShiftedProblem() = default;

  const SymmetricOperator* matrix_ = nullptr;
  double lambda_ = 0;
  Vector y_;
  Vector lip_;
  double lip_mean_ = 0;
  double lip_max_ = 0;
  double lip_sqrt_sum_ = 0;
  double mu_hat_ = 0;
};

/// Throws std::invalid_argument naming the first index with lambda <= A[ii].
ShiftedProblem make_shifted_problem(const SymmetricOperator& matrix, double lambda, Vector y,
                                    double mu_hat);

/// Iterate with its maintained gradient g = (lambda I - A) x - y.
struct SolverState {
  Vector x;
  Vector g;
  std::uint64_t updates = 0;
  bool budget_capped = false;

  double passes() const { return static_cast<double>(updates) / static_cast<double>(x.size()); }
};

/// Starts a state at x0, computing its gradient with one matvec.
SolverState make_state(const ShiftedProblem& problem, const Vector& x0);

/// f at the state's iterate, from the maintained gradient: 1/2 x^T (g - y).
double objective(const SolverState& state, const ShiftedProblem& problem);

/// ||g_maintained - g_recomputed|| / max(||g_recomputed||, tiny).
double gradient_drift(const SolverState& state, const ShiftedProblem& problem);

/// ||g||^2 / (2 mu_hat); an upper bound on f(x) - f* when mu_hat <= mu.
double suboptimality_bound(const SolverState& state, const ShiftedProblem& problem);

class Budget {
 public:
  enum class Mode { fixed_passes, target_ratio };

  /// Hard cap on passes (coordinate updates / d) for ratio-mode solves.
  static constexpr double kMaxPasses = 200.0;

  static Budget passes(double passes);
  /// Stop once suboptimality_bound <= initial bound / ratio.
  static Budget ratio(double ratio);

  Mode mode() const { return mode_; }
  double fixed_passes() const { return value_; }
  double target_ratio() const { return value_; }

 private:
  Budget(Mode mode, double value) : mode_(mode), value_(value) {}
  Mode mode_;
  double value_;
};

enum class CoordKind { gsl, cyclic, random, acdm };

struct CoordRule {
  CoordKind kind = CoordKind::gsl;
  std::uint64_t seed = 0;
};

/// Per-solve selection state: the rule plus its random engine.
class CoordinateSelector {
 public:
  explicit CoordinateSelector(CoordRule rule);
  std::size_t next(const SolverState& state, const ShiftedProblem& problem);

 private:
  CoordRule rule_;
  std::mt19937_64 rng_;
};

/// argmax_i |g_i| / sqrt(L_i); the lowest index wins ties.
std::size_t select_gsl(const Vector& g, const Vector& lip);

std::size_t select_coordinate(const SolverState& state, const ShiftedProblem& problem,
                              CoordinateSelector& selector);

/// Exact minimization along coordinate j; returns the step delta.
double cd_update(SolverState& state, const ShiftedProblem& problem, std::size_t j);

/// Coordinate descent with the gsl, cyclic or random rule.
SolverState solve_cd(const ShiftedProblem& problem, CoordRule rule, const Budget& budget,
                     const Vector& x0);

/// Accelerated randomized coordinate descent with sampling p_i ~ sqrt(L_i).
SolverState solve_acdm(const ShiftedProblem& problem, const Budget& budget, const Vector& x0,
                       std::uint64_t seed);

/// Nesterov's method for strongly convex quadratics. One iteration counts as
/// one pass. `smoothness` defaults to lambda - matrix().lower_bound().
SolverState solve_agd(const ShiftedProblem& problem, const Budget& budget, const Vector& x0,
                      std::optional<double> smoothness = std::nullopt);

/// Reference solve: dense Cholesky up to kDenseLimit, conjugate gradient beyond.
/// Charged one pass per matvec-equivalent of work.
SolverState solve_exact(const ShiftedProblem& problem, const Vector& x0);

enum class Solver { gsl, cyclic, random, acdm, agd, exact };

std::string_view to_string(Solver s);
Solver solver_from_string(std::string_view name);

struct SolveOptions {
  Solver kind = Solver::gsl;
  Budget budget = Budget::passes(4);
  std::uint64_t seed = 0;
  std::optional<double> agd_smoothness;
};

SolverState solve(const ShiftedProblem& problem, const SolveOptions& options, const Vector& x0);

}  // namespace sicd
