#include <doctest.h>

#include "oracle.hpp"
#include "sicd/least_squares.hpp"
#include "sicd/spectrum.hpp"

using namespace sicd;

namespace {

// lambda I - A = diag(0.5, 0.2)
ShiftedProblem diagonal_problem(const SymmetricMatrix& a, Vector y, double mu = 0.2) {
  return make_shifted_problem(a, 1.0, std::move(y), mu);
}

struct RandomProblem {
  SymmetricMatrix a;
  double lambda;
  Vector y;
  double mu;
};

/// Well-posed shifted problem: lambda sits `gap` above the top eigenvalue.
RandomProblem random_problem(std::size_t d, std::uint64_t seed, double gap = 0.05) {
  RandomProblem p{oracle::random_sparse(d, 0.2, seed), 0.0, random_unit_vector(d, seed + 100), 0.0};
  const auto eig = oracle::jacobi(oracle::dense(p.a));
  p.lambda = eig.values[0] + gap;
  p.mu = gap;
  return p;
}

}  // namespace

TEST_CASE("shifted problem constants") {
  const auto a = oracle::diag({0.5, 0.8});
  const auto p = diagonal_problem(a, Vector::Zero(2));
  CHECK(p.lip()[0] == doctest::Approx(0.5));
  CHECK(p.lip()[1] == doctest::Approx(0.2));
  CHECK(p.lip_mean() == doctest::Approx(0.35).epsilon(1e-12));
  CHECK(p.lip_max() == doctest::Approx(0.5));

  const auto b = oracle::diag({0.75, 0.75});
  CHECK(make_shifted_problem(b, 1.0, Vector::Zero(2), 1.0).lip_sqrt_sum() == doctest::Approx(1.0));
}

TEST_CASE("shifted problem rejects a shift at or below the diagonal") {
  const auto a = oracle::diag({1.0, 0.2});
  try {
    make_shifted_problem(a, 1.0, Vector::Zero(2), 0.1);
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("entry 0") != std::string::npos);
  }
  CHECK_THROWS(make_shifted_problem(oracle::diag({0.5}), 1.0, Vector::Zero(1), 0.0));
  CHECK_THROWS(make_shifted_problem(oracle::diag({0.5}), 1.0, Vector::Zero(2), 0.1));
}

TEST_CASE("gsl selection") {
  const Vector g = (Vector(2) << 3.0, -4.0).finished();
  const Vector lip = (Vector(2) << 1.0, 4.0).finished();
  CHECK(select_gsl(g, lip) == 0);
  // exact tie goes to the lowest index
  CHECK(select_gsl((Vector(3) << 2.0, -2.0, 2.0).finished(), Vector::Ones(3)) == 0);
  CHECK(select_gsl((Vector(3) << 0.0, 1.0, -1.0).finished(), Vector::Ones(3)) == 1);
}

TEST_CASE("cyclic selection follows the update count") {
  const auto a = oracle::diag({0.1, 0.2, 0.3});
  const auto p = make_shifted_problem(a, 1.0, Vector::Ones(3), 0.5);
  SolverState s = make_state(p, Vector::Zero(3));
  s.updates = 5;
  CoordinateSelector sel({CoordKind::cyclic, 0});
  CHECK(select_coordinate(s, p, sel) == 2);
}

TEST_CASE("random selection is deterministic per seed") {
  const auto a = oracle::random_sparse(25, 0.2, 1);
  const auto p = make_shifted_problem(a, 10.0, Vector::Ones(25), 1.0);
  const SolverState s = make_state(p, Vector::Zero(25));
  CoordinateSelector s1({CoordKind::random, 42}), s2({CoordKind::random, 42}), s3({CoordKind::random, 43});
  std::vector<std::size_t> a1, a2, a3;
  for (int i = 0; i < 50; ++i) {
    a1.push_back(s1.next(s, p));
    a2.push_back(s2.next(s, p));
    a3.push_back(s3.next(s, p));
  }
  CHECK(a1 == a2);
  CHECK(a1 != a3);
}

TEST_CASE("cd_update on a decoupled coordinate") {
  const auto a = oracle::diag({0.5, 0.8});
  const auto p = diagonal_problem(a, Vector::Unit(2, 0));
  SolverState s = make_state(p, Vector::Zero(2));
  CHECK(s.g[0] == doctest::Approx(-1.0));
  const double delta = cd_update(s, p, 0);
  CHECK(delta == doctest::Approx(2.0));
  CHECK(s.x[0] == doctest::Approx(2.0));
  CHECK(s.x[1] == 0.0);
  CHECK(std::abs(s.g[0]) < 1e-15);
  CHECK(s.g[1] == 0.0);
  CHECK(s.updates == 1);
}

TEST_CASE("repeating a coordinate gives a zero step") {
  const auto rp = random_problem(15, 4);
  const auto p = make_shifted_problem(rp.a, rp.lambda, rp.y, rp.mu);
  SolverState s = make_state(p, Vector::Zero(15));
  cd_update(s, p, 6);
  CHECK(std::abs(cd_update(s, p, 6)) <= 1e-15);
}

TEST_CASE("maintained gradient stays accurate") {
  const auto rp = random_problem(30, 5);
  const auto p = make_shifted_problem(rp.a, rp.lambda, rp.y, rp.mu);
  SolverState s = make_state(p, Vector::Zero(30));
  CoordinateSelector sel({CoordKind::random, 1});
  for (int t = 0; t < 300; ++t) cd_update(s, p, sel.next(s, p));
  CHECK(gradient_drift(s, p) <= 1e-9);
}

TEST_CASE("objective never increases under coordinate steps") {
  for (CoordKind kind : {CoordKind::gsl, CoordKind::cyclic, CoordKind::random}) {
    const auto rp = random_problem(25, 6);
    const auto dense = oracle::dense(rp.a);
    const auto p = make_shifted_problem(rp.a, rp.lambda, rp.y, rp.mu);
    SolverState s = make_state(p, Vector::Zero(25));
    CoordinateSelector sel({kind, 3});
    double f = oracle::objective(dense, rp.lambda, rp.y, s.x);
    for (int t = 0; t < 500; ++t) {
      cd_update(s, p, sel.next(s, p));
      const double next = oracle::objective(dense, rp.lambda, rp.y, s.x);
      CHECK(next <= f + 1e-14);
      f = next;
    }
  }
}

TEST_CASE("one pass solves a diagonal problem exactly") {
  const auto a = oracle::diag({0.5, 0.8});
  const auto p = diagonal_problem(a, Vector::Ones(2));
  for (CoordKind kind : {CoordKind::gsl, CoordKind::cyclic}) {
    const SolverState s = solve_cd(p, {kind, 0}, Budget::passes(1), Vector::Zero(2));
    CHECK(s.updates == 2);
    CHECK(s.x[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(s.x[1] == doctest::Approx(5.0).epsilon(1e-15));
  }
}

TEST_CASE("fixed budgets run exactly ceil(passes * d) updates") {
  const auto rp = random_problem(7, 2);
  const auto p = make_shifted_problem(rp.a, rp.lambda, rp.y, rp.mu);
  CHECK(solve_cd(p, {CoordKind::random, 0}, Budget::passes(1.5), Vector::Zero(7)).updates == 11);
  CHECK(solve_cd(p, {CoordKind::gsl, 0}, Budget::passes(4), Vector::Zero(7)).updates == 28);
  CHECK(solve_acdm(p, Budget::passes(2), Vector::Zero(7), 0).updates == 14);
  CHECK(solve_agd(p, Budget::passes(3), Vector::Zero(7)).updates == 21);
}

TEST_CASE("gsl converges to the direct solve") {
  const auto rp = random_problem(50, 9, 0.5);
  const auto p = make_shifted_problem(rp.a, rp.lambda, rp.y, rp.mu);
  const Vector xstar = oracle::shifted_solve(oracle::dense(rp.a), rp.lambda, rp.y);
  const SolverState s = solve_cd(p, {CoordKind::gsl, 0}, Budget::passes(50), Vector::Zero(50));
  CHECK((s.x - xstar).norm() <= 1e-8);
}

TEST_CASE("objective decreases pass by pass for every rule") {
  const auto rp = random_problem(30, 10);
  const auto p = make_shifted_problem(rp.a, rp.lambda, rp.y, rp.mu);
  for (CoordKind kind : {CoordKind::gsl, CoordKind::cyclic, CoordKind::random}) {
    Vector x = Vector::Zero(30);
    double f = p.objective(x);
    for (int k = 0; k < 10; ++k) {
      const SolverState s = solve_cd(p, {kind, static_cast<std::uint64_t>(k)}, Budget::passes(1), x);
      CHECK(objective(s, p) <= f + 1e-14);
      f = objective(s, p);
      x = s.x;
    }
  }
}

TEST_CASE("gsl converges linearly") {
  const auto rp = random_problem(40, 12, 0.3);
  const auto p = make_shifted_problem(rp.a, rp.lambda, rp.y, rp.mu);
  const double fstar = p.objective(oracle::shifted_solve(oracle::dense(rp.a), rp.lambda, rp.y));
  std::vector<double> logs;
  Vector x = Vector::Zero(40);
  for (int k = 0; k <= 20; ++k) {
    logs.push_back(std::log(p.objective(x) - fstar));
    x = solve_cd(p, {CoordKind::gsl, 0}, Budget::passes(1), x).x;
  }
  // average decrement over passes 2..20, and every decrement within 10% of positive
  const double avg = (logs[2] - logs[20]) / 18.0;
  CHECK(avg > 0.0);
  for (int k = 2; k < 20; ++k) CHECK(logs[static_cast<std::size_t>(k)] - logs[static_cast<std::size_t>(k + 1)] > 0.1 * avg);
}

TEST_CASE("ratio budget stops on the bound or the cap") {
  const auto rp = random_problem(30, 13, 0.2);
  const auto p = make_shifted_problem(rp.a, rp.lambda, rp.y, rp.mu);
  const SolverState start = make_state(p, Vector::Zero(30));
  const double b0 = suboptimality_bound(start, p);
  const SolverState s = solve_cd(p, {CoordKind::gsl, 0}, Budget::ratio(1e6), Vector::Zero(30));
  CHECK_FALSE(s.budget_capped);
  CHECK(suboptimality_bound(s, p) <= b0 / 1e6);

  // a tiny mu_hat inflates the target beyond reach within the cap
  const auto hard = make_shifted_problem(rp.a, rp.lambda, rp.y, 1e-300);
  const SolverState c = solve_cd(hard, {CoordKind::cyclic, 0}, Budget::ratio(1e300), Vector::Zero(30));
  CHECK(c.passes() <= Budget::kMaxPasses);
  CHECK((c.budget_capped || suboptimality_bound(c, hard) == 0.0));
  CHECK_THROWS(Budget::ratio(1.0));
  CHECK_THROWS(Budget::passes(0.0));
}

TEST_CASE("acdm on the diagonal problem") {
  const auto a = oracle::diag({0.5, 0.8});
  const auto p = diagonal_problem(a, Vector::Ones(2));
  const SolverState s = solve_acdm(p, Budget::passes(200), Vector::Zero(2), 1);
  CHECK((s.x - Vector((Vector(2) << 2.0, 5.0).finished())).norm() <= 1e-6);
}

TEST_CASE("acdm is deterministic and never worse than its start") {
  const auto rp = random_problem(30, 14, 0.01);
  const auto p = make_shifted_problem(rp.a, rp.lambda, rp.y, 0.5);  // deliberately poor mu_hat
  const Vector x0 = rp.y;
  const SolverState s1 = solve_acdm(p, Budget::passes(3), x0, 7);
  const SolverState s2 = solve_acdm(p, Budget::passes(3), x0, 7);
  CHECK(s1.x == s2.x);
  CHECK(p.objective(s1.x) <= p.objective(x0) + 1e-14);
  CHECK(gradient_drift(s1, p) <= 1e-9);
}

TEST_CASE("acdm converges to the direct solve") {
  const auto rp = random_problem(40, 15, 0.1);
  const auto p = make_shifted_problem(rp.a, rp.lambda, rp.y, rp.mu);
  const Vector xstar = oracle::shifted_solve(oracle::dense(rp.a), rp.lambda, rp.y);
  const SolverState s = solve_acdm(p, Budget::passes(200), Vector::Zero(40), 3);
  CHECK((s.x - xstar).norm() <= 1e-6);
}

TEST_CASE("agd on the diagonal problem") {
  const auto a = oracle::diag({0.5, 0.8});
  const auto p = diagonal_problem(a, Vector::Ones(2));
  const Vector xstar = (Vector(2) << 2.0, 5.0).finished();
  const SolverState s = solve_agd(p, Budget::passes(50), Vector::Zero(2));
  CHECK((s.x - xstar).norm() <= 1e-8);
  const SolverState fixed = solve_agd(p, Budget::passes(20), xstar);
  CHECK((fixed.x - xstar).norm() <= 1e-10);
}

TEST_CASE("agd makes early progress") {
  const auto rp = random_problem(50, 16, 0.05);
  const auto p = make_shifted_problem(rp.a, rp.lambda, rp.y, rp.mu);
  const SolverState s = solve_agd(p, Budget::passes(5), Vector::Zero(50));
  CHECK(p.objective(s.x) < p.objective(Vector::Zero(50)));
  CHECK_THROWS(solve_agd(p, Budget::passes(5), Vector::Zero(50), -1.0));
}

TEST_CASE("suboptimality bound") {
  const auto a = oracle::diag({0.5, 0.8});
  const auto p = diagonal_problem(a, Vector::Ones(2));
  const SolverState s = make_state(p, Vector::Zero(2));
  CHECK(suboptimality_bound(s, p) == doctest::Approx(5.0));
  const double fstar = p.objective((Vector(2) << 2.0, 5.0).finished());
  CHECK(fstar == doctest::Approx(-3.5));
  CHECK(suboptimality_bound(s, p) >= objective(s, p) - fstar);

  const SolverState done = solve_cd(p, {CoordKind::gsl, 0}, Budget::passes(1), Vector::Zero(2));
  CHECK(suboptimality_bound(done, p) == 0.0);

  // monotone under exact coordinate steps on a diagonal problem
  const auto b = oracle::diag({0.1, 0.3, 0.6, 0.2});
  const auto q = make_shifted_problem(b, 1.0, Vector::Ones(4), 0.4);
  SolverState t = make_state(q, Vector::Zero(4));
  double prev = suboptimality_bound(t, q);
  for (std::size_t j = 0; j < 4; ++j) {
    cd_update(t, q, j);
    CHECK(suboptimality_bound(t, q) <= prev);
    prev = suboptimality_bound(t, q);
  }
}

TEST_CASE("suboptimality bound dominates the true gap along solver paths") {
  const auto rp = random_problem(30, 17, 0.1);
  const auto dense = oracle::dense(rp.a);
  const double mu = oracle::jacobi(-dense + rp.lambda * Eigen::MatrixXd::Identity(30, 30)).values.minCoeff();
  const auto p = make_shifted_problem(rp.a, rp.lambda, rp.y, mu);
  const double fstar = oracle::objective(dense, rp.lambda, rp.y, oracle::shifted_solve(dense, rp.lambda, rp.y));
  SolverState s = make_state(p, Vector::Zero(30));
  CoordinateSelector sel({CoordKind::random, 4});
  for (int t = 0; t < 600; ++t) {
    cd_update(s, p, sel.next(s, p));
    CHECK(suboptimality_bound(s, p) >= oracle::objective(dense, rp.lambda, rp.y, s.x) - fstar - 1e-12);
  }
}

TEST_CASE("exact solver and dispatcher") {
  const auto rp = random_problem(20, 18);
  const auto p = make_shifted_problem(rp.a, rp.lambda, rp.y, rp.mu);
  const Vector xstar = oracle::shifted_solve(oracle::dense(rp.a), rp.lambda, rp.y);
  CHECK((solve_exact(p, Vector::Zero(20)).x - xstar).norm() <= 1e-9);
  for (Solver s : {Solver::gsl, Solver::cyclic, Solver::random, Solver::acdm, Solver::agd, Solver::exact}) {
    CHECK(solver_from_string(to_string(s)) == s);
  }
  CHECK_THROWS(solver_from_string("lanczos"));
}

TEST_CASE("solvers run on a deflated operator") {
  const auto a = oracle::with_spectrum({0.9, 0.6, 0.4, 0.3, 0.1}, 3);
  const auto spec = dense_spectrum(a);
  const DeflatedOperator op(a, spec.leading());
  // the deflated top eigenvalue is 0.6
  const auto p = make_shifted_problem(op, 0.7, random_unit_vector(5, 2), 0.1);
  const Vector xstar = oracle::shifted_solve(oracle::dense(op), 0.7, p.y());
  const SolverState s = solve_cd(p, {CoordKind::gsl, 0}, Budget::passes(200), Vector::Zero(5));
  CHECK((s.x - xstar).norm() <= 1e-8);
}
