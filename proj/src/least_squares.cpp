#include "sicd/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

#include "sicd/spectrum.hpp"

namespace sicd {

ShiftedProblem make_shifted_problem(const SymmetricOperator& matrix, double lambda, Vector y,
                                    double mu_hat) {
  const std::size_t d = matrix.dim();
  if (static_cast<std::size_t>(y.size()) != d) {
    throw std::invalid_argument("target length does not match matrix dimension");
  }
  if (!(mu_hat > 0.0)) throw std::invalid_argument("mu_hat must be positive");

  ShiftedProblem p;
  p.matrix_ = &matrix;
  p.lambda_ = lambda;
  p.y_ = std::move(y);
  p.mu_hat_ = mu_hat;
  p.lip_.resize(static_cast<Eigen::Index>(d));
  double sum = 0.0, sqrt_sum = 0.0, max = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double li = lambda - matrix.diagonal(i);
    if (!(li > 0.0)) {
      throw std::invalid_argument("shift " + std::to_string(lambda) +
                                  " does not exceed diagonal entry " + std::to_string(i));
    }
    p.lip_[static_cast<Eigen::Index>(i)] = li;
    sum += li;
    sqrt_sum += std::sqrt(li);
    max = std::max(max, li);
  }
  p.lip_mean_ = sum / static_cast<double>(d);
  p.lip_max_ = max;
  p.lip_sqrt_sum_ = sqrt_sum;
  return p;
}

Vector ShiftedProblem::hessian_apply(const Vector& v) const {
  return lambda_ * v - matrix_->apply(v);
}

Vector ShiftedProblem::gradient(const Vector& x) const { return hessian_apply(x) - y_; }

double ShiftedProblem::objective(const Vector& x) const {
  return 0.5 * x.dot(hessian_apply(x)) - y_.dot(x);
}

SolverState make_state(const ShiftedProblem& problem, const Vector& x0) {
  if (static_cast<std::size_t>(x0.size()) != problem.dim()) {
    throw std::invalid_argument("initial point has wrong length");
  }
  if (!x0.allFinite()) throw std::invalid_argument("initial point is not finite");
  return SolverState{x0, problem.gradient(x0), 0, false};
}

double objective(const SolverState& state, const ShiftedProblem& problem) {
  return 0.5 * state.x.dot(state.g - problem.y());
}

double gradient_drift(const SolverState& state, const ShiftedProblem& problem) {
  const Vector exact = problem.gradient(state.x);
  const double scale = std::max(exact.norm(), std::numeric_limits<double>::min());
  return (state.g - exact).norm() / scale;
}

double suboptimality_bound(const SolverState& state, const ShiftedProblem& problem) {
  return state.g.squaredNorm() / (2.0 * problem.mu_hat());
}

Budget Budget::passes(double passes) {
  if (!(passes > 0.0)) throw std::invalid_argument("pass budget must be positive");
  return {Mode::fixed_passes, passes};
}

Budget Budget::ratio(double ratio) {
  if (!(ratio > 1.0)) throw std::invalid_argument("error ratio must exceed 1");
  return {Mode::target_ratio, ratio};
}

// ---------------------------------------------------------------------------

CoordinateSelector::CoordinateSelector(CoordRule rule) : rule_(rule), rng_(rule.seed) {}

std::size_t CoordinateSelector::next(const SolverState& state, const ShiftedProblem& problem) {
  const std::size_t d = problem.dim();
  switch (rule_.kind) {
    case CoordKind::gsl:
      return select_gsl(state.g, problem.lip());
    case CoordKind::cyclic:
      return static_cast<std::size_t>(state.updates % d);
    case CoordKind::random:
      return std::uniform_int_distribution<std::size_t>(0, d - 1)(rng_);
    case CoordKind::acdm:
      break;
  }
  throw std::invalid_argument("acdm sampling is internal to solve_acdm");
}

std::size_t select_gsl(const Vector& g, const Vector& lip) {
  // compare squared scores to skip the square roots
  std::size_t best = 0;
  double best_score = -1.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double score = g[i] * g[i] / lip[i];
    if (score > best_score) {
      best_score = score;
      best = static_cast<std::size_t>(i);
    }
  }
  return best;
}

std::size_t select_coordinate(const SolverState& state, const ShiftedProblem& problem,
                              CoordinateSelector& selector) {
  return selector.next(state, problem);
}

double cd_update(SolverState& state, const ShiftedProblem& problem, std::size_t j) {
  const auto k = static_cast<Eigen::Index>(j);
  const double delta = -state.g[k] / problem.lip()[k];
  state.x[k] += delta;
  problem.matrix().add_column(j, -delta, state.g);
  state.g[k] += problem.lambda() * delta;
  ++state.updates;
  return delta;
}

namespace {

std::uint64_t updates_for(double passes, std::size_t d) {
  return static_cast<std::uint64_t>(std::ceil(passes * static_cast<double>(d) - 1e-9));
}

std::uint64_t ratio_cap(std::size_t d) { return updates_for(Budget::kMaxPasses, d); }

/// Runs `step` in chunks of one pass until the ratio target or the cap.
template <typename Step, typename Bound>
void run_ratio_mode(SolverState& state, double ratio, std::size_t chunk, std::uint64_t cap,
                    Step&& step, Bound&& bound) {
  const double target = bound() / ratio;
  if (bound() <= target) return;
  while (true) {
    const std::uint64_t n = std::min<std::uint64_t>(chunk, cap - state.updates);
    for (std::uint64_t t = 0; t < n; ++t) step();
    if (bound() <= target) return;
    if (state.updates >= cap) {
      state.budget_capped = true;
      return;
    }
  }
}

}  // namespace

SolverState solve_cd(const ShiftedProblem& problem, CoordRule rule, const Budget& budget,
                     const Vector& x0) {
  if (rule.kind == CoordKind::acdm) return solve_acdm(problem, budget, x0, rule.seed);

  SolverState state = make_state(problem, x0);
  CoordinateSelector selector(rule);
  const std::size_t d = problem.dim();
  auto step = [&] { cd_update(state, problem, selector.next(state, problem)); };

  if (budget.mode() == Budget::Mode::fixed_passes) {
    const std::uint64_t n = updates_for(budget.fixed_passes(), d);
    while (state.updates < n) step();
  } else {
    run_ratio_mode(state, budget.target_ratio(), d, ratio_cap(d), step,
                   [&] { return suboptimality_bound(state, problem); });
  }
  return state;
}

// ---------------------------------------------------------------------------
//
// The accelerated method keeps three sequences:
//   x' = tau z + (1 - tau) y
//   y' = x' - (1 / L_i) grad_i f(x') e_i
//   z' = (z + eta sigma x' - (eta / p_i) grad_i f(x') e_i) / (1 + eta sigma)
// The linear part maps (y, z) through a fixed 2x2 stochastic matrix, so
// (y, z) = C (u, v) with u, v stored vectors and C a scalar 2x2 matrix.
// Each step multiplies C and touches one entry of u and v, keeping
// H u and H v (H = lambda I - A) current with one column scan each.

namespace {

struct Mat2 {
  double a = 1, b = 0, c = 0, d = 1;  // [[a, b], [c, d]]

  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  double det() const { return a * d - b * c; }
};

class AcdmIterate {
 public:
  AcdmIterate(const ShiftedProblem& problem, const Vector& x0)
      : problem_(problem), u_(x0), v_(x0) {
    hu_ = problem.hessian_apply(x0);
    hv_ = hu_;
  }

  /// One accelerated step on coordinate i.
  void step(std::size_t i, double tau, double eta_sigma, double z_scale, const Mat2& b) {
    const auto k = static_cast<Eigen::Index>(i);
    const double cu = tau * c_.c + (1.0 - tau) * c_.a;
    const double cv = tau * c_.d + (1.0 - tau) * c_.b;
    const double gi = cu * hu_[k] + cv * hv_[k] - problem_.y()[k];

    c_ = b * c_;
    const double sy = -gi / problem_.lip()[k];
    const double sz = -z_scale * gi / (1.0 + eta_sigma);
    const double det = c_.det();
    const double du = (c_.d * sy - c_.b * sz) / det;
    const double dv = (-c_.c * sy + c_.a * sz) / det;
    bump(u_, hu_, i, du);
    bump(v_, hv_, i, dv);
    if (std::abs(c_.det()) < 1e-8) rebase();
  }

  /// Materializes y and z into u and v and resets C to the identity.
  void rebase() {
    Vector y = c_.a * u_ + c_.b * v_;
    Vector z = c_.c * u_ + c_.d * v_;
    Vector hy = c_.a * hu_ + c_.b * hv_;
    Vector hz = c_.c * hu_ + c_.d * hv_;
    u_ = std::move(y);
    v_ = std::move(z);
    hu_ = std::move(hy);
    hv_ = std::move(hz);
    c_ = Mat2{};
  }

  /// Valid right after rebase(): the y sequence and its gradient.
  const Vector& y() const { return u_; }
  Vector y_gradient() const { return hu_ - problem_.y(); }

 private:
  void bump(Vector& vec, Vector& hvec, std::size_t i, double delta) {
    if (delta == 0.0) return;
    const auto k = static_cast<Eigen::Index>(i);
    vec[k] += delta;
    problem_.matrix().add_column(i, -delta, hvec);
    hvec[k] += problem_.lambda() * delta;
  }

  const ShiftedProblem& problem_;
  Vector u_, v_, hu_, hv_;
  Mat2 c_;
};

}  // namespace

SolverState solve_acdm(const ShiftedProblem& problem, const Budget& budget, const Vector& x0,
                       std::uint64_t seed) {
  SolverState start = make_state(problem, x0);
  const std::size_t d = problem.dim();
  const double sigma = problem.mu_hat();
  const double s = problem.lip_sqrt_sum();
  const double tau = 2.0 / (1.0 + std::sqrt(4.0 * s * s / sigma + 1.0));
  const double eta = 1.0 / (tau * s * s);
  const double eta_sigma = eta * sigma;
  const Mat2 b{1.0 - tau, tau, eta_sigma * (1.0 - tau) / (1.0 + eta_sigma),
               (1.0 + eta_sigma * tau) / (1.0 + eta_sigma)};

  std::vector<double> weights(d);
  for (std::size_t i = 0; i < d; ++i) weights[i] = std::sqrt(problem.lip()[static_cast<Eigen::Index>(i)]);
  std::discrete_distribution<std::size_t> sample(weights.begin(), weights.end());
  std::mt19937_64 rng(seed);

  AcdmIterate it(problem, x0);
  SolverState state{x0, start.g, 0, false};
  std::uint64_t since_rebase = 0;
  auto step = [&] {
    const std::size_t i = sample(rng);
    // eta / p_i = eta * S / sqrt(L_i)
    const double z_scale = eta * s / weights[i];
    it.step(i, tau, eta_sigma, z_scale, b);
    ++state.updates;
    if (++since_rebase == d) {
      it.rebase();
      since_rebase = 0;
    }
  };
  auto sync = [&] {
    it.rebase();
    since_rebase = 0;
    state.x = it.y();
    state.g = it.y_gradient();
  };

  if (budget.mode() == Budget::Mode::fixed_passes) {
    const std::uint64_t n = updates_for(budget.fixed_passes(), d);
    while (state.updates < n) step();
  } else {
    run_ratio_mode(state, budget.target_ratio(), d, ratio_cap(d), step, [&] {
      sync();
      return suboptimality_bound(state, problem);
    });
  }
  sync();

  // y is not monotone; never hand back something worse than the start
  if (objective(state, problem) > objective(start, problem)) {
    start.updates = state.updates;
    start.budget_capped = state.budget_capped;
    return start;
  }
  return state;
}

// ---------------------------------------------------------------------------

SolverState solve_agd(const ShiftedProblem& problem, const Budget& budget, const Vector& x0,
                      std::optional<double> smoothness) {
  SolverState state = make_state(problem, x0);
  const std::size_t d = problem.dim();
  const double big_l = smoothness.value_or(problem.lambda() - problem.matrix().lower_bound());
  if (!(big_l > 0.0)) throw std::invalid_argument("smoothness estimate must be positive");
  const double q = std::min(1.0, problem.mu_hat() / big_l);
  const double momentum = (1.0 - std::sqrt(q)) / (1.0 + std::sqrt(q));

  // x: reported iterate, yk: extrapolated point; H x and H yk carried along
  Vector hx = state.g + problem.y();
  Vector yk = state.x;
  Vector hy = hx;
  auto step = [&] {
    const Vector grad = hy - problem.y();
    const Vector hgrad = problem.hessian_apply(grad);
    Vector x_next = yk - grad / big_l;
    Vector hx_next = hy - hgrad / big_l;
    yk = x_next + momentum * (x_next - state.x);
    hy = hx_next + momentum * (hx_next - hx);
    state.x = std::move(x_next);
    hx = std::move(hx_next);
    state.g = hx - problem.y();
    state.updates += d;
  };

  if (budget.mode() == Budget::Mode::fixed_passes) {
    const auto iters = static_cast<std::uint64_t>(std::ceil(budget.fixed_passes() - 1e-9));
    for (std::uint64_t t = 0; t < iters; ++t) step();
  } else {
    // chunk = 1 iteration (d updates)
    run_ratio_mode(state, budget.target_ratio(), 1, ratio_cap(d), step,
                   [&] { return suboptimality_bound(state, problem); });
  }
  return state;
}

// ---------------------------------------------------------------------------

namespace {

SolverState solve_cg(const ShiftedProblem& problem, const Vector& x0) {
  SolverState state = make_state(problem, x0);
  const std::size_t d = problem.dim();
  const double y_norm = std::max(problem.y().norm(), std::numeric_limits<double>::min());
  Vector r = -state.g;
  Vector p = r;
  double rr = r.squaredNorm();
  const std::size_t max_iter = 20 * d + 100;
  for (std::size_t it = 0; it < max_iter && std::sqrt(rr) > 1e-14 * y_norm; ++it) {
    const Vector hp = problem.hessian_apply(p);
    const double alpha = rr / p.dot(hp);
    state.x += alpha * p;
    r -= alpha * hp;
    const double rr_next = r.squaredNorm();
    p = r + (rr_next / rr) * p;
    rr = rr_next;
    state.updates += d;
  }
  state.g = problem.gradient(state.x);
  return state;
}

}  // namespace

SolverState solve_exact(const ShiftedProblem& problem, const Vector& x0) {
  const std::size_t d = problem.dim();
  if (d > kDenseLimit) return solve_cg(problem, x0);

  Eigen::MatrixXd h = -to_dense(problem.matrix());
  h.diagonal().array() += problem.lambda();
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("shifted matrix is not positive definite");
  }
  SolverState state = make_state(problem, x0);
  state.x = llt.solve(problem.y());
  state.g = problem.gradient(state.x);
  state.updates = static_cast<std::uint64_t>(d) * d;
  return state;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Solver s) {
  switch (s) {
    case Solver::gsl: return "gsl";
    case Solver::cyclic: return "cyclic";
    case Solver::random: return "random";
    case Solver::acdm: return "acdm";
    case Solver::agd: return "agd";
    case Solver::exact: return "exact";
  }
  return "?";
}

Solver solver_from_string(std::string_view name) {
  for (Solver s : {Solver::gsl, Solver::cyclic, Solver::random, Solver::acdm, Solver::agd,
                   Solver::exact}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown solver '" + std::string(name) + "'");
}

SolverState solve(const ShiftedProblem& problem, const SolveOptions& options, const Vector& x0) {
  switch (options.kind) {
    case Solver::gsl:
      return solve_cd(problem, {CoordKind::gsl, options.seed}, options.budget, x0);
    case Solver::cyclic:
      return solve_cd(problem, {CoordKind::cyclic, options.seed}, options.budget, x0);
    case Solver::random:
      return solve_cd(problem, {CoordKind::random, options.seed}, options.budget, x0);
    case Solver::acdm:
      return solve_acdm(problem, options.budget, x0, options.seed);
    case Solver::agd:
      return solve_agd(problem, options.budget, x0, options.agd_smoothness);
    case Solver::exact:
      return solve_exact(problem, x0);
  }
  throw std::invalid_argument("unknown solver");
}

}  // namespace sicd
