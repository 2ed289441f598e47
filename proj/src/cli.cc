#include "persuasion/cli.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "persuasion/errors.h"
#include "persuasion/independent_types.h"
#include "persuasion/instance.h"
#include "persuasion/multi_exact.h"
#include "persuasion/parallel.h"
#include "persuasion/rng.h"
#include "persuasion/simulate.h"
#include "persuasion/single_receiver.h"
#include "persuasion/submodular_approx.h"

namespace persuasion {

using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string instance;
  std::string output;
  std::string format = "structured";
  int threads = 0;
  std::uint64_t seed = 0;

  // gen
  std::string kind = "multi";
  int states = 2;
  int actions = 2;
  int types = 2;
  int receivers = 3;
  std::string family = "coverage";
  int profiles = 16;
  bool product = false;

  // solvers
  std::string mode;
  std::string oracle;
  double tol = 1e-9;
  double epsilon = 0.05;
  int q = 0;
  double delta = 0.05;
  double iota = 0.05;
  std::string derivatives = "exact";
  long samples = 0;
  std::string trace;
  bool baseline = false;

  // recover, simulate, verify
  std::string strategy;
  std::string aggregate;
  std::vector<int> profile;
  double verify_tol = 1e-6;
};

struct Outcome {
  json doc;
  double value = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  int code = kExitOk;
};

MultiReceiverInstance load_multi(const std::string& path) {
  Instance inst = load_instance(path);
  if (auto* m = std::get_if<MultiReceiverInstance>(&inst)) return std::move(*m);
  throw InvalidInstance(path + ": expected a multi-receiver instance");
}

SingleReceiverInstance load_single(const std::string& path) {
  Instance inst = load_instance(path);
  if (auto* s = std::get_if<SingleReceiverInstance>(&inst)) return std::move(*s);
  throw InvalidInstance(path + ": expected a single-receiver instance");
}

Outcome cmd_gen(const RunConfig& c) {
  Outcome o;
  if (c.kind == "single") {
    o.doc = to_json(generate_single(c.seed, c.states, c.actions, c.types));
  } else {
    MultiGeneratorOptions options;
    options.max_profiles = c.profiles;
    options.product_types = c.product;
    o.doc = to_json(generate_multi(c.seed, c.receivers, c.types, c.states, family_from_string(c.family), options));
  }
  return o;
}

Outcome cmd_validate(const RunConfig& c) {
  const Instance inst = load_instance(c.instance);
  Outcome o;
  o.doc = {{"kind", "validation"}, {"valid", true}};
  if (const auto* m = std::get_if<MultiReceiverInstance>(&inst)) {
    o.doc["instance_kind"] = "multi";
    o.doc["receivers"] = m->num_receivers;
    o.doc["profiles"] = m->support_size();
    o.doc["lp_rows"] = lp5_constraint_count(*m);
    if (m->num_receivers <= kMaxTableReceivers) {
      json classes = json::array();
      for (int t = 0; t < m->num_states(); ++t) {
        const auto k = classify_set_function(m->f, t);
        classes.push_back({{"theta", t},
                           {"monotone", k.monotone},
                           {"submodular", k.submodular},
                           {"supermodular", k.supermodular},
                           {"anonymous", k.anonymous}});
      }
      o.doc["classification"] = classes;
    }
  } else {
    o.doc["instance_kind"] = "single";
  }
  return o;
}

Outcome cmd_solve_single(const RunConfig& c) {
  const auto inst = load_single(c.instance);
  const MenuSolution sol = solve_optimal_menu(inst);
  Outcome o;
  o.doc = menu_to_json(sol);
  if (c.baseline) o.doc["baseline_value"] = solve_no_menu_baseline(inst);
  o.value = sol.value;
  o.residual = check_menu(inst, sol.menu).max();
  return o;
}

std::string default_mode(const MultiReceiverInstance& inst) {
  if (inst.num_receivers <= 8) return "exact";
  if (inst.num_receivers <= kMaxEnumerationReceivers || inst.f.declared_class() != FunctionClass::kSubmodular) {
    if (oracle_available(inst.f, default_oracle_mode(inst.f))) return "colgen";
  }
  if (inst.f.declared_class() == FunctionClass::kSubmodular) return "submodular";
  throw CapacityError("no solver mode handles this instance size");
}

Outcome cmd_solve_multi(const RunConfig& c, std::ostream& err) {
  const auto inst = load_multi(c.instance);
  const std::string mode = c.mode.empty() ? default_mode(inst) : c.mode;
  if (!c.oracle.empty() && mode != "colgen") throw UsageError("--oracle applies to --mode colgen only");
  Outcome o;
  SenderStrategy strategy;
  json extra;
  if (mode == "exact") {
    strategy = solve_exact(inst);
  } else if (mode == "colgen") {
    const OracleMode oracle = c.oracle.empty() ? default_oracle_mode(inst.f) : oracle_mode_from_string(c.oracle);
    if (!oracle_available(inst.f, oracle)) {
      throw CapacityError("oracle " + std::string(to_string(oracle)) + " is not available for this function");
    }
    const auto result = run_column_generation(inst, oracle, c.tol);
    strategy = result.strategy;
    extra = {{"oracle", to_string(oracle)},
             {"iterations", result.iterations},
             {"initial_columns", result.initial_columns},
             {"master_values", result.master_values}};
  } else if (mode == "submodular") {
    ApproxParams params;
    params.q = c.q;
    params.delta = c.delta;
    params.iota = c.iota;
    params.derivative_mode = derivative_mode_from_string(c.derivatives);
    params.samples = c.samples;
    params.sample_seed = derive_seed(c.seed, "submodular");
    const auto result = solve_submodular(inst, c.epsilon, params);
    strategy = result.strategy;
    extra = trace_to_json(result.trace);
    for (const auto& w : result.trace.warnings) err << "warning: " << w << "\n";
    if (!c.trace.empty()) write_json_file(extra, c.trace);
  } else {
    throw UsageError("unknown mode '" + mode + "'");
  }
  o.doc = strategy_to_json(inst, strategy);
  o.doc["mode"] = mode;
  if (mode == "colgen") o.doc["column_generation"] = extra;
  if (mode == "submodular") o.doc["trace"] = extra;
  o.value = strategy.value;
  o.residual = check_strategy(inst, strategy).max();
  return o;
}

Outcome cmd_solve_independent(const RunConfig& c) {
  const auto inst = load_multi(c.instance);
  const auto agg = solve_aggregate(inst);
  Outcome o;
  o.doc = aggregate_to_json(agg);
  if (c.baseline) o.doc["report"] = report_to_json(evaluate_independent(inst, agg));
  o.value = agg.value;
  o.residual = residual_report(inst, agg).max();
  return o;
}

Outcome cmd_recover(const RunConfig& c) {
  const auto inst = load_multi(c.instance);
  const auto agg = aggregate_from_json(inst, read_json_file(c.aggregate));
  const auto phi = recover_profile_scheme(inst, agg, c.profile);
  Outcome o;
  o.value = profile_scheme_value(inst, phi);
  o.doc = profile_scheme_to_json(c.profile, o.value, phi);
  o.residual = profile_scheme_residual(inst, agg, c.profile, phi);
  return o;
}

Outcome cmd_simulate(const RunConfig& c) {
  const Instance inst = load_instance(c.instance);
  const json doc = read_json_file(c.strategy);
  Outcome o;
  SimulationReport report;
  if (const auto* s = std::get_if<SingleReceiverInstance>(&inst)) {
    report = simulate_interaction(*s, menu_from_json(doc).menu, c.samples, c.seed);
  } else {
    const auto& m = std::get<MultiReceiverInstance>(inst);
    report = simulate_interaction(m, strategy_from_json(m, doc), c.samples, c.seed);
  }
  o.doc = simulation_to_json(report);
  o.value = report.empirical_value;
  return o;
}

Outcome cmd_verify(const RunConfig& c) {
  const Instance inst = load_instance(c.instance);
  const json doc = read_json_file(c.strategy);
  const std::string kind = doc.value("kind", "");
  ResidualReport report;
  double value = 0;
  if (kind == "single_menu") {
    const auto menu = menu_from_json(doc);
    report = residual_report(std::get<SingleReceiverInstance>(inst), menu.menu);
    value = evaluate_menu(std::get<SingleReceiverInstance>(inst), menu.menu).value;
  } else if (kind == "multi_strategy") {
    const auto& m = std::get<MultiReceiverInstance>(inst);
    const auto s = strategy_from_json(m, doc);
    report = residual_report(m, s);
    value = strategy_value(m, s.joint);
  } else if (kind == "independent_aggregate") {
    const auto& m = std::get<MultiReceiverInstance>(inst);
    const auto agg = aggregate_from_json(m, doc);
    report = residual_report(m, agg);
    value = profile_scheme_value(m, agg.phi);
  } else {
    throw InvalidInstance("kind: cannot verify a document of kind '" + kind + "'");
  }
  Outcome o;
  o.doc = residuals_to_json(report);
  o.doc["tolerance"] = c.verify_tol;
  o.doc["passed"] = report.max() <= c.verify_tol;
  o.value = value;
  o.residual = report.max();
  if (report.max() > c.verify_tol) o.code = kExitInvalid;
  return o;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void print_summary(std::ostream& os, const RunConfig& c, const std::string& command, const Outcome& o,
                   double seconds) {
  if (c.format == "csv-summary") {
    os << "command,value,residual_max,runtime_s\n"
       << command << "," << format_number(o.value) << "," << format_number(o.residual) << ","
       << format_number(seconds) << "\n";
    return;
  }
  os << command;
  if (!std::isnan(o.value)) os << " value=" << format_number(o.value);
  if (!std::isnan(o.residual)) os << " residual_max=" << format_number(o.residual);
  os << " runtime_s=" << format_number(seconds) << "\n";
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian persuasion with private types: solvers, simulation and verification"};
  app.require_subcommand(1);
  // Global options may follow the subcommand.
  app.fallthrough();
  RunConfig c;
  app.add_option("--threads", c.threads, "worker cap (default: PERSUASION_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--format", c.format, "summary format")->check(CLI::IsMember({"structured", "csv-summary"}));

  auto add_instance = [&](CLI::App* sub) {
    sub->add_option("--instance", c.instance, "instance document")->required()->check(CLI::ExistingFile);
  };
  auto add_output = [&](CLI::App* sub) { sub->add_option("-o,--output", c.output, "output document"); };

  auto* gen = app.add_subcommand("gen", "generate a random instance");
  gen->add_option("--kind", c.kind)->check(CLI::IsMember({"single", "multi"}));
  gen->add_option("--seed", c.seed);
  gen->add_option("--states", c.states)->check(CLI::PositiveNumber);
  gen->add_option("--actions", c.actions)->check(CLI::Range(2, 64));
  gen->add_option("--types", c.types)->check(CLI::PositiveNumber);
  gen->add_option("--receivers", c.receivers)->check(CLI::Range(1, 63));
  gen->add_option("--family", c.family)
      ->check(CLI::IsMember({"additive", "coverage", "anonymous-concave", "anonymous-convex", "table"}));
  auto* profiles = gen->add_option("--profiles", c.profiles, "support size of the type distribution")
                       ->check(CLI::PositiveNumber);
  gen->add_flag("--product", c.product, "product-form type distribution")->excludes(profiles);
  add_output(gen);

  auto* validate_cmd = app.add_subcommand("validate", "check an instance document");
  add_instance(validate_cmd);
  add_output(validate_cmd);

  auto* single = app.add_subcommand("solve-single", "optimal menu for one receiver");
  add_instance(single);
  add_output(single);
  single->add_flag("--baseline", c.baseline, "also solve the scheme without type reports");

  auto* multi = app.add_subcommand("solve-multi", "optimal or approximate joint strategy");
  add_instance(multi);
  add_output(multi);
  multi->add_option("--mode", c.mode)->check(CLI::IsMember({"exact", "colgen", "submodular"}));
  multi->add_option("--oracle", c.oracle)->check(CLI::IsMember({"bruteforce", "anonymous", "additive"}));
  multi->add_option("--tol", c.tol, "reduced-cost tolerance")->check(CLI::PositiveNumber);
  multi->add_option("--epsilon", c.epsilon)->check(CLI::PositiveNumber);
  multi->add_option("--q", c.q, "block count override")->check(CLI::PositiveNumber);
  multi->add_option("--delta", c.delta)->check(CLI::Range(1e-6, 1.0));
  multi->add_option("--iota", c.iota)->check(CLI::PositiveNumber);
  multi->add_option("--derivatives", c.derivatives)->check(CLI::IsMember({"exact", "sampled"}));
  multi->add_option("--samples", c.samples, "samples per sampled estimate")->check(CLI::PositiveNumber);
  multi->add_option("--seed", c.seed);
  multi->add_option("--trace", c.trace, "write the approximation trace here");

  auto* indep = app.add_subcommand("solve-independent", "aggregate LP for independent types");
  add_instance(indep);
  add_output(indep);
  indep->add_flag("--report", c.baseline, "recover every profile and report the gap");

  auto* recover = app.add_subcommand("recover", "scheme for one reported profile");
  add_instance(recover);
  add_output(recover);
  recover->add_option("--aggregate", c.aggregate)->required()->check(CLI::ExistingFile);
  recover->add_option("--profile", c.profile, "one type per receiver")->required()->delimiter(',');

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo run of the protocol");
  add_instance(simulate);
  add_output(simulate);
  simulate->add_option("--strategy", c.strategy)->required()->check(CLI::ExistingFile);
  c.samples = 100000;
  simulate->add_option("--samples", c.samples)->check(CLI::PositiveNumber);
  simulate->add_option("--seed", c.seed);

  auto* verify = app.add_subcommand("verify", "constraint residuals of a solution document");
  add_instance(verify);
  add_output(verify);
  verify->add_option("--strategy", c.strategy)->required()->check(CLI::ExistingFile);
  verify->add_option("--tol", c.verify_tol)->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }
  // The simulate default does not apply to solve-multi.
  if (multi->parsed() && multi->count("--samples") == 0) c.samples = 0;

  const CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  if (c.threads > 0) set_thread_limit(c.threads);
  const auto start = std::chrono::steady_clock::now();
  try {
    Outcome o;
    if (command == "gen") o = cmd_gen(c);
    else if (command == "validate") o = cmd_validate(c);
    else if (command == "solve-single") o = cmd_solve_single(c);
    else if (command == "solve-multi") o = cmd_solve_multi(c, err);
    else if (command == "solve-independent") o = cmd_solve_independent(c);
    else if (command == "recover") o = cmd_recover(c);
    else if (command == "simulate") o = cmd_simulate(c);
    else o = cmd_verify(c);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.output.empty()) {
      out << o.doc.dump(2) << "\n";
      print_summary(err, c, command, o, seconds);
    } else {
      write_json_file(o.doc, c.output);
      print_summary(out, c, command, o, seconds);
    }
    return o.code;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidInstance& e) {
    err << "invalid: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const CapacityError& e) {
    err << "too large: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const IoError& e) {
    err << "io: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::bad_variant_access&) {
    err << "invalid: strategy document does not match the instance kind\n";
    return kExitInvalid;
  } catch (const SolverFailure& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitSolver;
  }
}

int run_command(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_command(args, std::cout, std::cerr);
}

}  // namespace persuasion
