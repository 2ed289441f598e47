#include <sstream>

#include "doctest.h"
#include "oracles.h"
#include "persuasion/errors.h"
#include "persuasion/lp.h"
#include "persuasion/rng.h"

using namespace persuasion;

namespace {

LinearProgram random_lp(CounterRng& rng, int n, int m, bool unit_box) {
  LinearProgram lp;
  std::vector<double> x0(n);
  for (int j = 0; j < n; ++j) {
    const double upper = unit_box ? 1.0 : 1.0 + 2 * rng.uniform();
    x0[j] = upper * rng.uniform();
    lp.add_variable(2 * rng.uniform() - 1, 0.0, upper);
  }
  int equalities = 0;
  for (int i = 0; i < m; ++i) {
    std::vector<std::pair<int, double>> terms;
    double act = 0;
    for (int j = 0; j < n; ++j) {
      if (rng.uniform() < 0.3 && !(j == n - 1 && terms.empty())) continue;
      const double a = 2 * rng.uniform() - 1;
      terms.emplace_back(j, a);
      act += a * x0[j];
    }
    const double roll = rng.uniform();
    // Keep fewer equalities than variables so the vertex oracle applies.
    if (roll < 0.15 && equalities + 1 < n) {
      ++equalities;
      lp.add_constraint(terms, Relation::kEqual, act);
    } else if (roll < 0.6) {
      lp.add_constraint(terms, Relation::kLessEqual, act + 0.5 * rng.uniform());
    } else {
      lp.add_constraint(terms, Relation::kGreaterEqual, act - 0.5 * rng.uniform());
    }
  }
  return lp;
}

}  // namespace

TEST_CASE("max x s.t. x <= 1") {
  LinearProgram lp;
  const int x = lp.add_variable(1.0);
  lp.add_constraint({{x, 1.0}}, Relation::kLessEqual, 1.0);
  const LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.primal[0] == doctest::Approx(1.0));
  CHECK(sol.objective == doctest::Approx(1.0));
  CHECK(sol.duals[0] == doctest::Approx(1.0));
}

TEST_CASE("contradictory bounds are infeasible") {
  LinearProgram lp;
  const int x = lp.add_variable(1.0);
  lp.add_constraint({{x, 1.0}}, Relation::kGreaterEqual, 2.0);
  lp.add_constraint({{x, 1.0}}, Relation::kLessEqual, 1.0);
  CHECK(solve_lp(lp).status == LpStatus::kInfeasible);
}

TEST_CASE("unbounded direction is reported") {
  LinearProgram lp;
  const int x = lp.add_variable(1.0);
  const int y = lp.add_variable(0.0);
  lp.add_constraint({{x, 1.0}, {y, -1.0}}, Relation::kLessEqual, 1.0);
  CHECK(solve_lp(lp).status == LpStatus::kUnbounded);
}

TEST_CASE("degenerate corner") {
  LinearProgram lp;
  const int x = lp.add_variable(1.0);
  const int y = lp.add_variable(1.0);
  lp.add_constraint({{x, 1.0}, {y, 1.0}}, Relation::kLessEqual, 1.0);
  lp.add_constraint({{x, 1.0}}, Relation::kLessEqual, 1.0);
  lp.add_constraint({{y, 1.0}}, Relation::kLessEqual, 1.0);
  const LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(1.0));
  CHECK(check_solution(lp, sol).within(kFeasibilityTolerance, kDualityGapTolerance));
}

TEST_CASE("lower bounds, upper bounds and equality rows") {
  LinearProgram lp;
  const int x = lp.add_variable(-1.0, 1.0, 4.0);
  const int y = lp.add_variable(2.0, -2.0, 3.0);
  lp.add_constraint({{x, 1.0}, {y, 1.0}}, Relation::kEqual, 3.0);
  const LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  // y as large as possible subject to x >= 1 -> y = 2, x = 1.
  CHECK(sol.primal[x] == doctest::Approx(1.0));
  CHECK(sol.primal[y] == doctest::Approx(2.0));
  CHECK(sol.objective == doctest::Approx(3.0));
  CHECK(check_solution(lp, sol).within(kFeasibilityTolerance, kDualityGapTolerance));
}

TEST_CASE("redundant equality rows") {
  LinearProgram lp;
  const int x = lp.add_variable(1.0, 0.0, 5.0);
  const int y = lp.add_variable(1.0, 0.0, 5.0);
  lp.add_constraint({{x, 1.0}, {y, 1.0}}, Relation::kEqual, 2.0);
  lp.add_constraint({{x, 2.0}, {y, 2.0}}, Relation::kEqual, 4.0);
  const LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(2.0));
  CHECK(check_solution(lp, sol).within(kFeasibilityTolerance, kDualityGapTolerance));
}

TEST_CASE("check_solution reports a perturbed primal") {
  LinearProgram lp;
  const int x = lp.add_variable(1.0);
  lp.add_constraint({{x, 1.0}}, Relation::kLessEqual, 1.0);
  LpSolution sol = solve_lp(lp);
  sol.primal[0] += 1e-3;
  CHECK(check_solution(lp, sol).primal_infeasibility == doctest::Approx(1e-3));
}

TEST_CASE("check_solution on a hand-built optimal pair") {
  LinearProgram lp;
  const int x = lp.add_variable(1.0);
  lp.add_constraint({{x, 1.0}}, Relation::kLessEqual, 1.0);
  LpSolution sol;
  sol.status = LpStatus::kOptimal;
  sol.primal = {1.0};
  sol.duals = {1.0};
  const auto report = check_solution(lp, sol);
  CHECK(report.duality_gap == 0.0);
  CHECK(report.primal_infeasibility == 0.0);
  CHECK(report.complementary_slackness == 0.0);
}

TEST_CASE("random small LPs match vertex enumeration") {
  CounterRng rng(2024, 0);
  int checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 5);
    const int m = 1 + static_cast<int>(rng.next_u64() % 6);
    LinearProgram lp = random_lp(rng, n, m, false);
    const auto oracle = testing::vertex_enumeration_optimum(lp);
    REQUIRE(oracle.has_value());  // x0 is feasible and the box is bounded
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::kOptimal);
    CHECK(std::abs(sol.objective - *oracle) <= 1e-6);
    const auto report = check_solution(lp, sol);
    CHECK(report.within(kFeasibilityTolerance, kDualityGapTolerance));
    CHECK(report.dual_objective >= sol.objective - 1e-9);  // weak duality
    ++checked;
  }
  CHECK(checked == 500);
}

TEST_CASE("larger random LPs carry an optimality certificate") {
  CounterRng rng(77, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 5 + static_cast<int>(rng.next_u64() % 26);
    const int m = 5 + static_cast<int>(rng.next_u64() % 26);
    LinearProgram lp = random_lp(rng, n, m, trial % 2 == 0);
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::kOptimal);
    const auto report = check_solution(lp, sol);
    CHECK(report.primal_infeasibility <= kFeasibilityTolerance);
    CHECK(report.dual_infeasibility <= kFeasibilityTolerance);
    CHECK(report.duality_gap <= kDualityGapTolerance);
  }
}

TEST_CASE("identical inputs give identical solutions") {
  CounterRng rng(5, 0);
  const LinearProgram lp = random_lp(rng, 20, 15, false);
  const LpSolution a = solve_lp(lp);
  const LpSolution b = solve_lp(lp);
  CHECK(a.primal == b.primal);
  CHECK(a.duals == b.duals);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("invalid model is rejected") {
  LinearProgram lp;
  lp.add_variable(1.0);
  lp.add_constraint({{3, 1.0}}, Relation::kLessEqual, 1.0);
  CHECK_THROWS_AS(solve_lp(lp), std::invalid_argument);
}

TEST_CASE("iteration cap surfaces as a solver failure") {
  CounterRng rng(9, 0);
  const LinearProgram lp = random_lp(rng, 20, 15, false);
  DenseSimplexSolver::Options options;
  options.max_iterations = 1;
  CHECK_THROWS_AS(DenseSimplexSolver(options).solve(lp), SolverFailure);
}

TEST_CASE("text dump lists every section") {
  LinearProgram lp;
  const int x = lp.add_variable(1.0, 0.0, 2.0);
  lp.set_variable_name(x, "phi_0");
  lp.add_constraint({{x, -1.0}}, Relation::kGreaterEqual, -1.0);
  std::ostringstream out;
  write_lp_text(lp, out);
  const std::string text = out.str();
  CHECK(text.find("Maximize") != std::string::npos);
  CHECK(text.find("Subject To") != std::string::npos);
  CHECK(text.find("- 1 phi_0 >= -1") != std::string::npos);
  CHECK(text.find("0 <= phi_0 <= 2") != std::string::npos);
  CHECK(text.find("End") != std::string::npos);
}
