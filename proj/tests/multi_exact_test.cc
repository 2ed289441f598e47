#include "doctest.h"
#include "oracles.h"
#include "persuasion/errors.h"
#include "persuasion/multi_exact.h"
#include "persuasion/rng.h"

using namespace persuasion;

namespace {

MultiReceiverInstance tiny(int n, int d) {
  MultiReceiverInstance inst;
  inst.prior.mu.assign(d, 1.0 / d);
  inst.num_receivers = n;
  inst.types_per_receiver.assign(n, 1);
  inst.u_recv.assign(n, {std::vector<std::vector<double>>(d, {0.0, 1.0})});
  std::vector<std::vector<double>> v(d, std::vector<double>(n, 1.0 / n));
  inst.f = SenderSetFunction(n, AdditiveFunction{v}, FunctionClass::kSubmodular);
  inst.type_dist = {{std::vector<int>(n, 0), 1.0}};
  return inst;
}

MultiReceiverInstance random_small(int seed) {
  const SetFunctionFamily families[] = {SetFunctionFamily::kCoverage, SetFunctionFamily::kTable,
                                        SetFunctionFamily::kAnonymousConvex,
                                        SetFunctionFamily::kAdditive};
  MultiGeneratorOptions options;
  options.max_profiles = 6;
  return generate_multi(seed, 1 + seed % 5, 1 + seed % 2, 1 + seed % 3, families[seed % 4], options);
}

}  // namespace

TEST_CASE("full LP dimensions") {
  const auto inst = tiny(2, 1);
  const LinearProgram lp = build_full_lp(inst);
  CHECK(lp.num_variables() == 4 + 2);
  CHECK(lp.num_constraints() == 7);
  CHECK(lp5_constraint_count(inst) == 7);
}

TEST_CASE("constraint count formula matches the builder") {
  for (int seed = 0; seed < 30; ++seed) {
    const auto inst = random_small(seed);
    CHECK(lp5_constraint_count(inst) == build_full_lp(inst).num_constraints());
  }
  auto inst = tiny(2, 1);
  const long base = lp5_constraint_count(inst);
  auto doubled = tiny(2, 2);
  // consistency 2 -> 4 and normalization 1 -> 2; other rows unchanged.
  CHECK(lp5_constraint_count(doubled) == base + 3);
}

TEST_CASE("consistency rows and objective coefficients") {
  const auto inst = generate_multi(4, 3, 2, 2, SetFunctionFamily::kCoverage);
  const LinearProgram lp = build_full_lp(inst);
  const Lp5Layout at(inst);
  const int first = at.num_fixed_variables();
  for (int p = 0; p < inst.support_size(); ++p) {
    for (int t = 0; t < inst.num_states(); ++t) {
      for (int r = 0; r < 3; ++r) {
        const auto& row = lp.constraint(at.consistency_row(p, r, t));
        CHECK(row.relation == Relation::kEqual);
        int plus = 0;
        for (const auto& [j, a] : row.terms) {
          if (j == at.x(r, inst.type_dist[p].types[r], t)) {
            CHECK(a == -1.0);
          } else {
            const Subset s = static_cast<Subset>((j - first) % 8);
            CHECK(contains(s, r));
            CHECK(a == 1.0);
            ++plus;
          }
        }
        CHECK(plus == 4);
      }
      for (Subset s = 0; s < 8; ++s) {
        const int j = first + (p * inst.num_states() + t) * 8 + static_cast<int>(s);
        CHECK(lp.variable(j).objective ==
              doctest::Approx(inst.prior.mu[t] * inst.type_dist[p].prob * inst.f.value(t, s)));
      }
    }
  }
}

TEST_CASE("obedient receivers with a single state get the full set") {
  const auto inst = tiny(3, 1);
  const SenderStrategy s = solve_exact(inst);
  CHECK(s.value == doctest::Approx(inst.f.value(0, full_set(3))));
}

TEST_CASE("exact solutions satisfy every constraint family") {
  for (int seed = 0; seed < 25; ++seed) {
    const auto inst = random_small(seed);
    const SenderStrategy s = solve_exact(inst);
    CHECK(check_strategy(inst, s).max() <= 1e-6);
    CHECK(s.value >= -1e-9);
  }
}

TEST_CASE("without types the menu LP is classical private persuasion") {
  for (int seed = 0; seed < 10; ++seed) {
    const auto inst = generate_multi(seed, 1 + seed % 4, 1, 1 + seed % 3, SetFunctionFamily::kCoverage);
    CHECK(std::abs(solve_exact(inst).value - testing::private_persuasion_value(inst)) <= 1e-6);
  }
}

TEST_CASE("pricing oracle fixtures") {
  const SenderSetFunction anon(3, AnonymousFunction{{{0.0, 0.2, 0.5, 0.6}}}, FunctionClass::kAnonymous);
  const PricingResult r = pricing_oracle(anon, 0, {-0.1, 0.05, -0.3}, OracleMode::kAnonymous);
  CHECK(r.set == 0b011);
  CHECK(r.value == doctest::Approx(0.45));
  const auto brute = testing::brute_force_pricing(anon, 0, {-0.1, 0.05, -0.3});
  CHECK(brute.first == 0b011);

  const PricingResult none = pricing_oracle(anon, 0, {-1.0, -1.5, -2.0}, OracleMode::kBruteForce);
  CHECK(none.set == 0);
  CHECK(none.value == 0.0);

  const SenderSetFunction add(3, AdditiveFunction{{{0.2, 0.3, 0.5}}}, FunctionClass::kSubmodular);
  const PricingResult a = pricing_oracle(add, 0, {-0.3, 0.1, -0.4}, OracleMode::kAdditive);
  CHECK(a.set == 0b110);
  CHECK(a.value == doctest::Approx(0.5));
}

TEST_CASE("oracle modes must match the function variant") {
  const SenderSetFunction add(2, AdditiveFunction{{{0.5, 0.5}}}, FunctionClass::kSubmodular);
  CHECK_THROWS_AS(pricing_oracle(add, 0, {0, 0}, OracleMode::kAnonymous), std::invalid_argument);
  CHECK(default_oracle_mode(add) == OracleMode::kAdditive);
}

TEST_CASE("closed-form oracles agree with brute force") {
  CounterRng rng(31, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 10;
    const auto anon = generate_multi(trial, n, 1, 1, SetFunctionFamily::kAnonymousConvex);
    const auto add = generate_multi(trial, n, 1, 1, SetFunctionFamily::kAdditive);
    std::vector<double> w(n);
    for (double& x : w) x = 2 * rng.uniform() - 1.2;
    const auto a = pricing_oracle(anon.f, 0, w, OracleMode::kAnonymous);
    const auto a_ref = testing::brute_force_pricing(anon.f, 0, w);
    CHECK(a.set == a_ref.first);
    CHECK(std::abs(a.value - a_ref.second) <= 1e-12);
    const auto b = pricing_oracle(add.f, 0, w, OracleMode::kAdditive);
    const auto b_ref = testing::brute_force_pricing(add.f, 0, w);
    CHECK(b.set == b_ref.first);
    CHECK(std::abs(b.value - b_ref.second) <= 1e-12);
  }
}

TEST_CASE("column generation matches the explicit LP") {
  for (int seed = 0; seed < 20; ++seed) {
    const auto inst = random_small(seed);
    const auto result = run_column_generation(inst, OracleMode::kBruteForce);
    const SenderStrategy exact = solve_exact(inst);
    CHECK(std::abs(result.strategy.value - exact.value) <= 1e-6);
    CHECK(check_strategy(inst, result.strategy).max() <= 1e-6);
    for (std::size_t i = 1; i < result.master_values.size(); ++i) {
      CHECK(result.master_values[i] >= result.master_values[i - 1] - 1e-9);
    }
    // No column prices out at termination.
    for (int p = 0; p < inst.support_size(); ++p) {
      for (int t = 0; t < inst.num_states(); ++t) {
        const double scale = inst.prior.mu[t] * inst.type_dist[p].prob;
        std::vector<double> w(inst.num_receivers);
        for (int r = 0; r < inst.num_receivers; ++r) w[r] = -result.consistency_duals[p][r][t] / scale;
        const auto best = testing::brute_force_pricing(inst.f, t, w);
        CHECK(scale * best.second - result.normalization_duals[p][t] <= 1e-6);
      }
    }
  }
}

TEST_CASE("generated seed 3 with three receivers agrees across methods") {
  const auto inst = generate_multi(3, 3, 2, 2, SetFunctionFamily::kCoverage);
  CHECK(std::abs(solve_exact(inst).value -
                 solve_column_generation(inst, OracleMode::kBruteForce).value) <= 1e-6);
}

TEST_CASE("a single receiver needs no generated columns") {
  const auto inst = generate_multi(8, 1, 2, 2, SetFunctionFamily::kAdditive);
  const auto result = run_column_generation(inst, OracleMode::kAdditive);
  CHECK(result.iterations == 1);
  long total = 0;
  for (const auto& per_profile : result.columns) {
    for (const auto& cols : per_profile) total += static_cast<long>(cols.size());
  }
  CHECK(total == result.initial_columns);
}

TEST_CASE("anonymous column generation at ten receivers") {
  MultiGeneratorOptions options;
  options.max_profiles = 4;
  const auto inst = generate_multi(12, 10, 2, 2, SetFunctionFamily::kAnonymousConvex, options);
  const auto result = run_column_generation(inst, OracleMode::kAnonymous);
  CHECK(result.master_values.back() >= result.master_values.front() - 1e-9);
  for (const auto& per_profile : result.columns) {
    for (const auto& cols : per_profile) CHECK(cols.size() <= 300);
  }
  CHECK(check_strategy(inst, result.strategy).max() <= 1e-6);
}

TEST_CASE("explicit LP refuses more than twelve receivers") {
  const auto inst = generate_multi(1, 13, 1, 1, SetFunctionFamily::kAdditive);
  CHECK_THROWS_AS(build_full_lp(inst), CapacityError);
}

TEST_CASE("strategy documents round trip") {
  const auto inst = random_small(7);
  const SenderStrategy s = solve_exact(inst);
  const SenderStrategy back = strategy_from_json(inst, strategy_to_json(inst, s));
  CHECK(back.value == s.value);
  CHECK(back.marginals.x == s.marginals.x);
  for (int p = 0; p < inst.support_size(); ++p) CHECK(back.joint.phi[p] == s.joint.phi[p]);
}

TEST_CASE("residuals detect perturbations") {
  const auto inst = random_small(9);
  SenderStrategy s = solve_exact(inst);
  s.joint.phi[0][0][0].prob += 1e-3;
  CHECK(check_strategy(inst, s).normalization == doctest::Approx(1e-3).epsilon(1e-3));
}
