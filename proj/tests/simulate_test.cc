#include <cmath>

#include "doctest.h"
#include "persuasion/parallel.h"
#include "persuasion/simulate.h"

using namespace persuasion;

namespace {

SingleReceiverInstance prosecutor() {
  SingleReceiverInstance inst;
  inst.prior.mu = {0.7, 0.3};
  inst.num_actions = 2;
  inst.num_types = 1;
  inst.lambda = {1.0};
  inst.u_recv = {{{1.0, 0.0}, {0.0, 1.0}}};
  inst.u_send = {{0.0, 1.0}, {0.0, 1.0}};
  return inst;
}

MultiReceiverInstance random_small(int seed) {
  const SetFunctionFamily families[] = {SetFunctionFamily::kCoverage, SetFunctionFamily::kTable,
                                        SetFunctionFamily::kAnonymousConvex, SetFunctionFamily::kAdditive};
  MultiGeneratorOptions options;
  options.max_profiles = 6;
  return generate_multi(seed, 1 + seed % 4, 1 + seed % 3, 1 + seed % 3, families[seed % 4], options);
}

// One receiver, two states; a0 is right in state 0 and a1 in state 1.
MultiReceiverInstance matching(int types) {
  MultiReceiverInstance inst;
  inst.prior.mu = {0.5, 0.5};
  inst.num_receivers = 1;
  inst.types_per_receiver = {types};
  inst.u_recv = {std::vector<std::vector<std::vector<double>>>(types, {{1.0, 0.0}, {0.0, 1.0}})};
  inst.f = SenderSetFunction(1, AdditiveFunction{{{1.0}, {1.0}}}, FunctionClass::kSubmodular);
  for (int k = 0; k < types; ++k) inst.type_dist.push_back({{k}, 1.0 / types});
  return inst;
}

}  // namespace

TEST_CASE("single receiver simulation matches the menu value") {
  const auto inst = prosecutor();
  const auto sol = solve_optimal_menu(inst);
  const auto report = simulate_interaction(inst, sol.menu, 1'000'000, 1);
  CHECK(std::abs(report.empirical_value - sol.value) <= 4 * report.std_error + 1e-9);
  CHECK(report.truthful_rate == 1.0);
  for (int seed = 0; seed < 5; ++seed) {
    const auto g = generate_single(seed, 2 + seed % 2, 2 + seed % 2, 1 + seed % 3);
    const auto s = solve_optimal_menu(g);
    const auto r = simulate_interaction(g, s.menu, 200'000, seed);
    CHECK(std::abs(r.empirical_value - s.value) <= 4 * r.std_error + 1e-9);
    CHECK(r.truthful_rate == 1.0);
    CHECK(r.zero_probability_branches == 0);
  }
}

TEST_CASE("multi receiver simulation matches the LP value") {
  for (int seed = 0; seed < 8; ++seed) {
    const auto inst = random_small(seed);
    const auto s = solve_exact(inst);
    const auto r = simulate_interaction(inst, s, seed == 0 ? 1'000'000 : 200'000, seed);
    CHECK(std::abs(r.empirical_value - s.value) <= 4 * r.std_error + 1e-9);
    CHECK(r.truthful_rate == 1.0);
    for (double rate : r.truthful_by_group) CHECK(rate == 1.0);
  }
}

TEST_CASE("simulation is reproducible and independent of threads") {
  const auto inst = random_small(5);
  const auto s = solve_exact(inst);
  set_thread_limit(1);
  const auto a = simulate_interaction(inst, s, 50'000, 7);
  set_thread_limit(4);
  const auto b = simulate_interaction(inst, s, 50'000, 7);
  set_thread_limit(0);
  const auto c = simulate_interaction(inst, s, 50'000, 7);
  CHECK(a.empirical_value == b.empirical_value);
  CHECK(a.std_error == b.std_error);
  CHECK(simulation_to_json(a) == simulation_to_json(c));
  const auto other = simulate_interaction(inst, s, 50'000, 8);
  CHECK(other.empirical_value != a.empirical_value);
}

TEST_CASE("best report") {
  const auto inst = matching(2);
  const auto s = solve_exact(inst);
  for (int k = 0; k < 2; ++k) CHECK(best_report(inst, s.marginals, 0, k) == k);

  // Menu 1 reveals the state and menu 0 is a coin flip.
  MarginalMenus menus;
  menus.x = {{{0.5, 0.5}, {0.0, 1.0}}};
  CHECK(report_utility(inst, menus, 0, 0, 1) == doctest::Approx(1.0));
  CHECK(report_utility(inst, menus, 0, 0, 0) == doctest::Approx(0.5));
  CHECK(best_report(inst, menus, 0, 0) == 1);

  // A type that takes a1 whatever it hears is indifferent, so it stays truthful.
  auto eager = matching(2);
  eager.u_recv[0][0] = {{0.0, 1.0}, {0.0, 1.0}};
  MarginalMenus more;
  more.x = {{{0.2, 0.3}, {0.9, 0.8}}};
  CHECK(best_report(eager, more, 0, 0) == 0);

  const auto single = matching(1);
  MarginalMenus only;
  only.x = {{{0.3, 0.6}}};
  CHECK(best_report(single, only, 0, 0) == 0);
}

TEST_CASE("residual reports") {
  const auto inst = random_small(6);
  const auto s = solve_exact(inst);
  CHECK(residual_report(inst, s).max() <= 1e-6);
  auto bumped = s;
  bumped.joint.phi[0][0][0].prob += 1e-3;
  CHECK(residual_report(inst, bumped).families.at("normalization") == doctest::Approx(1e-3).epsilon(1e-3));

  const auto single = prosecutor();
  CHECK(residual_report(single, solve_optimal_menu(single).menu).max() <= 1e-6);

  // Recommending a1 always in state 0 and half the time in state 1: the a1
  // signal leaves the receiver 0.5 * (0 - 1) + 0.5 * 0.5 * 1 = -0.25 short.
  const auto m = matching(1);
  SenderStrategy bad;
  bad.marginals.x = {{{1.0, 0.5}}};
  bad.joint.phi = {{{{1, 1.0}}, {{0, 0.5}, {1, 0.5}}}};
  CHECK(residual_report(m, bad).families.at("persuasiveness") == doctest::Approx(0.25));
}

TEST_CASE("aggregate residuals") {
  MultiGeneratorOptions options;
  options.product_types = true;
  const auto inst = generate_multi(3, 2, 2, 2, SetFunctionFamily::kCoverage, options);
  const auto agg = solve_aggregate(inst);
  const auto report = residual_report(inst, agg);
  CHECK(report.max() <= 1e-6);
  CHECK(residuals_to_json(report).at("families").size() == 5);
}
