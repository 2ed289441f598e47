#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "persuasion/errors.h"
#include "persuasion/instance.h"

using namespace persuasion;
using nlohmann::json;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("persuasion_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json small_single_doc() {
  return json::parse(R"({
    "kind": "single", "prior": [0.7, 0.3], "actions": 2, "types": 1, "lambda": [1.0],
    "u_recv": [[[1.0, 0.0], [0.0, 1.0]]], "u_send": [[0.0, 1.0], [0.0, 1.0]]
  })");
}

}  // namespace

TEST_CASE("well-formed single-receiver document loads with its dimensions") {
  const auto inst = std::get<SingleReceiverInstance>(instance_from_json(small_single_doc()));
  CHECK(inst.num_states() == 2);
  CHECK(inst.num_actions == 2);
  CHECK(inst.num_types == 1);
  CHECK(inst.u_send[1][1] == 1.0);
}

TEST_CASE("boundary prior is rejected") {
  json doc = small_single_doc();
  doc["prior"] = {1.0, 0.0};
  try {
    instance_from_json(doc);
    FAIL("expected rejection");
  } catch (const InvalidInstance& e) {
    CHECK(std::string(e.what()).find("prior not interior") != std::string::npos);
  }
}

TEST_CASE("payoff outside the unit interval is rejected") {
  json doc = small_single_doc();
  doc["u_recv"][0][0][0] = 1.5;
  try {
    instance_from_json(doc);
    FAIL("expected rejection");
  } catch (const InvalidInstance& e) {
    CHECK(std::string(e.what()).find("payoff out of [0,1]") != std::string::npos);
  }
}

TEST_CASE("malformed documents surface as parse failures") {
  json doc = small_single_doc();
  doc.erase("lambda");
  CHECK_THROWS_AS(instance_from_json(doc), InvalidInstance);
  CHECK_THROWS_AS(instance_from_json(json{{"kind", "triple"}}), InvalidInstance);
  const std::string path = temp_path("broken.json");
  std::ofstream(path) << "{ not json";
  CHECK_THROWS_AS(load_instance(path), InvalidInstance);
}

TEST_CASE("multi-receiver invariants are enforced") {
  MultiReceiverInstance inst = generate_multi(1, 3, 2, 2, SetFunctionFamily::kCoverage);
  SUBCASE("probabilities must sum to one") {
    inst.type_dist[0].prob += 0.1;
    CHECK_THROWS_AS(validate(inst), InvalidInstance);
  }
  SUBCASE("profiles must be distinct") {
    if (inst.type_dist.size() >= 2) {
      inst.type_dist[1].types = inst.type_dist[0].types;
      CHECK_THROWS_AS(validate(inst), InvalidInstance);
    }
  }
  SUBCASE("profile entries must be in range") {
    inst.type_dist[0].types[0] = 5;
    CHECK_THROWS_AS(validate(inst), InvalidInstance);
  }
  SUBCASE("table functions must be normalized and monotone") {
    MultiReceiverInstance t = generate_multi(1, 2, 1, 1, SetFunctionFamily::kTable);
    auto table = std::get<TableFunction>(t.f.data());
    table.values[0][1] = 0.0;
    table.values[0][3] = 0.0;
    table.values[0][2] = 0.5;  // f({0,1}) < f({1})
    t.f = SenderSetFunction(2, table, FunctionClass::kGeneral);
    CHECK_THROWS_AS(validate(t), InvalidInstance);
  }
}

TEST_CASE("save then load is the identity and byte-stable") {
  const Instance single = generate_single(11, 3, 3, 2);
  const Instance multi = generate_multi(5, 4, 2, 2, SetFunctionFamily::kTable);
  const Instance coverage = generate_multi(6, 3, 2, 2, SetFunctionFamily::kCoverage);
  for (const Instance& inst : {single, multi, coverage}) {
    const std::string a = temp_path("roundtrip_a.json");
    const std::string b = temp_path("roundtrip_b.json");
    save_instance(inst, a);
    const Instance loaded = load_instance(a);
    CHECK(loaded == inst);
    save_instance(loaded, b);
    CHECK(slurp(a) == slurp(b));
  }
  const auto& table = std::get<TableFunction>(std::get<MultiReceiverInstance>(multi).f.data());
  const auto loaded = std::get<MultiReceiverInstance>(load_instance(temp_path("roundtrip_a.json")));
  (void)loaded;
  CHECK(table.values[0].size() == 16);
}

TEST_CASE("writing to an unwritable path is an I/O error") {
  CHECK_THROWS_AS(save_instance(generate_single(1, 2, 2, 2), "/nonexistent-dir/x/instance.json"),
                  IoError);
}

TEST_CASE("single generator is deterministic and keeps the prior interior") {
  CHECK(generate_single(7, 2, 2, 2) == generate_single(7, 2, 2, 2));
  std::set<std::string> distinct;
  for (int seed = 0; seed < 10; ++seed) distinct.insert(to_json(generate_single(seed, 2, 2, 2)).dump());
  CHECK(distinct.size() == 10);
}

TEST_CASE("generated instances satisfy their invariants across 1000 seeds") {
  const SetFunctionFamily families[] = {SetFunctionFamily::kAdditive, SetFunctionFamily::kCoverage,
                                        SetFunctionFamily::kAnonymousConcave,
                                        SetFunctionFamily::kAnonymousConvex, SetFunctionFamily::kTable};
  for (int seed = 0; seed < 1000; ++seed) {
    const auto single = generate_single(seed, 1 + seed % 4, 1 + seed % 3, 1 + seed % 5);
    CHECK_NOTHROW(validate(single));
    for (double p : single.prior.mu) CHECK(p > 0);
    const auto multi = generate_multi(seed, 1 + seed % 5, 1 + seed % 3, 1 + seed % 3, families[seed % 5]);
    CHECK_NOTHROW(validate(multi));
    CHECK(multi.type_dist.size() <= 16);
  }
}

TEST_CASE("multi generator is deterministic and respects the table cap") {
  CHECK(generate_multi(3, 4, 2, 2, SetFunctionFamily::kCoverage) ==
        generate_multi(3, 4, 2, 2, SetFunctionFamily::kCoverage));
  CHECK_THROWS_AS(generate_multi(3, 13, 1, 1, SetFunctionFamily::kTable), CapacityError);
}

TEST_CASE("product-form generation lists every profile with product probabilities") {
  MultiGeneratorOptions options;
  options.product_types = true;
  const auto inst = generate_multi(4, 3, 2, 2, SetFunctionFamily::kCoverage, options);
  REQUIRE(inst.type_marginals.has_value());
  CHECK(inst.type_dist.size() == 8);
  CHECK_NOTHROW(validate(inst));
}

TEST_CASE("generated families classify as expected") {
  const auto coverage = generate_multi(2, 5, 1, 2, SetFunctionFamily::kCoverage);
  const auto convex = generate_multi(2, 4, 1, 2, SetFunctionFamily::kAnonymousConvex);
  const auto concave = generate_multi(2, 4, 1, 2, SetFunctionFamily::kAnonymousConcave);
  for (int t = 0; t < 2; ++t) {
    CHECK(classify_set_function(coverage.f, t).submodular);
    CHECK(classify_set_function(coverage.f, t).monotone);
    CHECK(classify_set_function(convex.f, t).supermodular);
    CHECK(classify_set_function(convex.f, t).anonymous);
    CHECK(classify_set_function(concave.f, t).submodular);
  }
}

TEST_CASE("additive functions are modular") {
  const SenderSetFunction f(2, AdditiveFunction{{{0.3, 0.7}}}, FunctionClass::kSubmodular);
  const auto c = classify_set_function(f, 0);
  CHECK(c.submodular);
  CHECK(c.supermodular);
  CHECK(c.monotone);
  CHECK_FALSE(c.anonymous);
}

TEST_CASE("convex anonymous function on two receivers") {
  // Pairs ({0},{1}): f(empty) + f(both) = 1 > f({0}) + f({1}) = 0.5.
  const SenderSetFunction f(2, AnonymousFunction{{{0.0, 0.25, 1.0}}}, FunctionClass::kAnonymous);
  const auto c = classify_set_function(f, 0);
  CHECK(c.supermodular);
  CHECK_FALSE(c.submodular);
  CHECK(c.anonymous);
}

TEST_CASE("overlapping coverage is strictly submodular") {
  CoverageState state{{0.5, 0.3, 0.2}, {{0, 1}, {1, 2}}};
  const SenderSetFunction f(2, CoverageFunction{{state}}, FunctionClass::kSubmodular);
  // f({0}) + f({1}) = 0.8 + 0.5 > f(both) = 1.0.
  CHECK(f.value(0, 3) == doctest::Approx(1.0));
  const auto c = classify_set_function(f, 0);
  CHECK(c.submodular);
  CHECK_FALSE(c.supermodular);
}

TEST_CASE("random additive functions always classify as modular") {
  for (int seed = 0; seed < 50; ++seed) {
    const auto inst = generate_multi(seed, 1 + seed % 8, 1, 1, SetFunctionFamily::kAdditive);
    const auto c = classify_set_function(inst.f, 0, 1e-12);
    CHECK(c.submodular);
    CHECK(c.supermodular);
  }
}

TEST_CASE("exhaustive classification refuses large receiver sets") {
  const SenderSetFunction f(13, AdditiveFunction{{std::vector<double>(13, 1.0 / 13)}},
                            FunctionClass::kSubmodular);
  CHECK_THROWS_AS(classify_set_function(f, 0), CapacityError);
}
