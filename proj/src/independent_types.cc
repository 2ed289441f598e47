#include "persuasion/independent_types.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "persuasion/errors.h"
#include "persuasion/lp.h"
#include "persuasion/parallel.h"

namespace persuasion {

using nlohmann::json;

namespace {

const std::vector<std::vector<double>>& product_marginals(const MultiReceiverInstance& inst) {
  if (!inst.type_marginals) {
    throw InvalidInstance("type_marginals: independent types need a product type distribution");
  }
  return *inst.type_marginals;
}

void check_table_size(const MultiReceiverInstance& inst) {
  if (inst.num_receivers > kMaxTableReceivers) {
    throw CapacityError("independent types need n <= " + std::to_string(kMaxTableReceivers));
  }
}

// Adds one variable per (theta, subset) and returns the first index.
int add_subset_variables(const MultiReceiverInstance& inst, LinearProgram& lp) {
  const int first = lp.num_variables();
  const Subset count = Subset{1} << inst.num_receivers;
  for (int t = 0; t < inst.num_states(); ++t) {
    for (Subset s = 0; s < count; ++s) lp.add_variable(inst.prior.mu[t] * inst.f.value(t, s));
  }
  return first;
}

std::vector<std::vector<JointEntry>> read_subsets(const MultiReceiverInstance& inst,
                                                  const std::vector<double>& primal, int first) {
  const Subset count = Subset{1} << inst.num_receivers;
  std::vector<std::vector<JointEntry>> phi(inst.num_states());
  int j = first;
  for (int t = 0; t < inst.num_states(); ++t) {
    for (Subset s = 0; s < count; ++s) {
      const double v = primal[j++];
      if (v > 0) phi[t].push_back({s, std::min(v, 1.0)});
    }
  }
  return phi;
}

void check_profile(const MultiReceiverInstance& inst, const std::vector<int>& profile) {
  if (static_cast<int>(profile.size()) != inst.num_receivers) {
    throw std::invalid_argument("profile has " + std::to_string(profile.size()) + " entries, expected " +
                                std::to_string(inst.num_receivers));
  }
  for (int r = 0; r < inst.num_receivers; ++r) {
    if (profile[r] < 0 || profile[r] >= inst.types_per_receiver[r]) {
      throw std::invalid_argument("profile entry " + std::to_string(r) + " out of range");
    }
  }
}

json phi_to_json(const std::vector<std::vector<JointEntry>>& phi) {
  json out = json::array();
  for (std::size_t t = 0; t < phi.size(); ++t) {
    json entries = json::array();
    for (const auto& e : phi[t]) entries.push_back({{"mask", e.mask}, {"prob", e.prob}});
    out.push_back({{"theta", t}, {"entries", entries}});
  }
  return out;
}

}  // namespace

AggregateScheme solve_aggregate(const MultiReceiverInstance& inst) {
  const auto& lambda = product_marginals(inst);
  check_table_size(inst);
  const int n = inst.num_receivers;
  const int d = inst.num_states();
  const Lp5Layout at(inst);
  LinearProgram lp = build_marginal_polytope(inst);
  const int first = add_subset_variables(inst, lp);
  const Subset count = Subset{1} << n;
  for (int t = 0; t < d; ++t) {
    for (int r = 0; r < n; ++r) {
      std::vector<std::pair<int, double>> terms;
      for (Subset s = 0; s < count; ++s) {
        if (contains(s, r)) terms.emplace_back(first + t * static_cast<int>(count) + static_cast<int>(s), 1.0);
      }
      for (int k = 0; k < inst.types_per_receiver[r]; ++k) {
        if (lambda[r][k] != 0) terms.emplace_back(at.x(r, k, t), -lambda[r][k]);
      }
      lp.add_constraint(std::move(terms), Relation::kEqual, 0.0);
    }
  }
  for (int t = 0; t < d; ++t) {
    std::vector<std::pair<int, double>> terms;
    for (Subset s = 0; s < count; ++s) terms.emplace_back(first + t * static_cast<int>(count) + static_cast<int>(s), 1.0);
    lp.add_constraint(std::move(terms), Relation::kEqual, 1.0);
  }
  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::kInfeasible) throw InvalidInstance("aggregate LP is infeasible");
  if (sol.status != LpStatus::kOptimal) {
    throw SolverFailure(std::string("aggregate LP returned ") + to_string(sol.status));
  }
  AggregateScheme out;
  out.marginals.x.resize(n);
  for (int r = 0; r < n; ++r) {
    out.marginals.x[r].assign(inst.types_per_receiver[r], std::vector<double>(d));
    for (int k = 0; k < inst.types_per_receiver[r]; ++k) {
      for (int t = 0; t < d; ++t) out.marginals.x[r][k][t] = std::clamp(sol.primal[at.x(r, k, t)], 0.0, 1.0);
    }
  }
  out.phi = read_subsets(inst, sol.primal, first);
  out.value = profile_scheme_value(inst, out.phi);
  return out;
}

double profile_scheme_value(const MultiReceiverInstance& inst, const std::vector<std::vector<JointEntry>>& phi) {
  double total = 0;
  for (int t = 0; t < inst.num_states(); ++t) {
    double v = 0;
    for (const auto& e : phi[t]) v += e.prob * inst.f.value(t, e.mask);
    total += inst.prior.mu[t] * v;
  }
  return total;
}

std::vector<std::vector<JointEntry>> recover_profile_scheme(const MultiReceiverInstance& inst,
                                                            const AggregateScheme& aggregate,
                                                            const std::vector<int>& profile) {
  check_table_size(inst);
  check_profile(inst, profile);
  const int n = inst.num_receivers;
  const Subset count = Subset{1} << n;
  LinearProgram lp;
  const int first = add_subset_variables(inst, lp);
  for (int t = 0; t < inst.num_states(); ++t) {
    const int base = first + t * static_cast<int>(count);
    for (int r = 0; r < n; ++r) {
      std::vector<std::pair<int, double>> terms;
      for (Subset s = 0; s < count; ++s) {
        if (contains(s, r)) terms.emplace_back(base + static_cast<int>(s), 1.0);
      }
      lp.add_constraint(std::move(terms), Relation::kEqual, aggregate.marginals.x[r][profile[r]][t]);
    }
    std::vector<std::pair<int, double>> terms;
    for (Subset s = 0; s < count; ++s) terms.emplace_back(base + static_cast<int>(s), 1.0);
    lp.add_constraint(std::move(terms), Relation::kEqual, 1.0);
  }
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal) {
    throw SolverFailure(std::string("recovery LP returned ") + to_string(sol.status) +
                        "; the aggregate marginals are inconsistent");
  }
  return read_subsets(inst, sol.primal, first);
}

IndependentReport evaluate_independent(const MultiReceiverInstance& inst, const AggregateScheme& aggregate) {
  const auto& lambda = product_marginals(inst);
  long expansion = 1;
  for (int r = 0; r < inst.num_receivers; ++r) {
    expansion *= inst.types_per_receiver[r];
    if (expansion > kMaxExpandedProfiles) {
      throw CapacityError("product expansion exceeds " + std::to_string(kMaxExpandedProfiles) + " profiles");
    }
  }
  IndependentReport out;
  out.aggregate_value = aggregate.value;
  std::vector<int> types(inst.num_receivers, 0);
  for (long i = 0; i < expansion; ++i) {
    double p = 1;
    for (int r = 0; r < inst.num_receivers; ++r) p *= lambda[r][types[r]];
    if (p > 0) out.profiles.push_back({types, p, 0.0});
    int r = 0;
    while (r < inst.num_receivers && ++types[r] == inst.types_per_receiver[r]) types[r++] = 0;
  }
  parallel_for(out.profiles.size(), [&](std::size_t i) {
    out.profiles[i].value = profile_scheme_value(inst, recover_profile_scheme(inst, aggregate, out.profiles[i].types));
  });
  for (const auto& p : out.profiles) out.mixture_value += p.prob * p.value;
  out.gap = out.aggregate_value - out.mixture_value;
  return out;
}

double AggregateResiduals::max() const { return std::max({consistency, normalization, bounds, marginals}); }

AggregateResiduals check_aggregate(const MultiReceiverInstance& inst, const AggregateScheme& aggregate) {
  const auto& lambda = product_marginals(inst);
  AggregateResiduals out;
  out.marginals = check_marginals(inst, aggregate.marginals).max();
  for (int t = 0; t < inst.num_states(); ++t) {
    double total = 0;
    for (const auto& e : aggregate.phi[t]) {
      total += e.prob;
      out.bounds = std::max({out.bounds, -e.prob, e.prob - 1});
    }
    out.normalization = std::max(out.normalization, std::abs(total - 1));
    for (int r = 0; r < inst.num_receivers; ++r) {
      double lhs = 0;
      for (const auto& e : aggregate.phi[t]) lhs += contains(e.mask, r) ? e.prob : 0;
      double rhs = 0;
      for (int k = 0; k < inst.types_per_receiver[r]; ++k) rhs += lambda[r][k] * aggregate.marginals.x[r][k][t];
      out.consistency = std::max(out.consistency, std::abs(lhs - rhs));
    }
  }
  return out;
}

double profile_scheme_residual(const MultiReceiverInstance& inst, const AggregateScheme& aggregate,
                               const std::vector<int>& profile,
                               const std::vector<std::vector<JointEntry>>& phi) {
  double worst = 0;
  for (int t = 0; t < inst.num_states(); ++t) {
    double total = 0;
    for (const auto& e : phi[t]) total += e.prob;
    worst = std::max(worst, std::abs(total - 1));
    for (int r = 0; r < inst.num_receivers; ++r) {
      double m = 0;
      for (const auto& e : phi[t]) m += contains(e.mask, r) ? e.prob : 0;
      worst = std::max(worst, std::abs(m - aggregate.marginals.x[r][profile[r]][t]));
    }
  }
  return worst;
}

json aggregate_to_json(const AggregateScheme& aggregate) {
  return {{"kind", "independent_aggregate"},
          {"value", aggregate.value},
          {"x", aggregate.marginals.x},
          {"phi", phi_to_json(aggregate.phi)}};
}

AggregateScheme aggregate_from_json(const MultiReceiverInstance& inst, const json& doc) {
  try {
    if (doc.at("kind").get<std::string>() != "independent_aggregate") {
      throw InvalidInstance("kind: expected \"independent_aggregate\"");
    }
    AggregateScheme out;
    out.value = doc.at("value").get<double>();
    out.marginals.x = doc.at("x").get<std::vector<std::vector<std::vector<double>>>>();
    if (static_cast<int>(out.marginals.x.size()) != inst.num_receivers) {
      throw InvalidInstance("x: receiver dimension mismatch");
    }
    for (int r = 0; r < inst.num_receivers; ++r) {
      if (static_cast<int>(out.marginals.x[r].size()) != inst.types_per_receiver[r]) {
        throw InvalidInstance("x: type dimension mismatch");
      }
      for (const auto& row : out.marginals.x[r]) {
        if (static_cast<int>(row.size()) != inst.num_states()) throw InvalidInstance("x: state dimension mismatch");
      }
    }
    out.phi.assign(inst.num_states(), {});
    for (const auto& block : doc.at("phi")) {
      const int t = block.at("theta").get<int>();
      if (t < 0 || t >= inst.num_states()) throw InvalidInstance("phi: theta out of range");
      for (const auto& e : block.at("entries")) {
        out.phi[t].push_back({e.at("mask").get<Subset>(), e.at("prob").get<double>()});
      }
    }
    return out;
  } catch (const json::exception& e) {
    throw InvalidInstance(std::string("aggregate document: ") + e.what());
  }
}

json profile_scheme_to_json(const std::vector<int>& profile, double value,
                            const std::vector<std::vector<JointEntry>>& phi) {
  return {{"kind", "profile_scheme"}, {"profile", profile}, {"value", value}, {"phi", phi_to_json(phi)}};
}

json report_to_json(const IndependentReport& report) {
  json profiles = json::array();
  for (const auto& p : report.profiles) {
    profiles.push_back({{"profile", p.types}, {"prob", p.prob}, {"value", p.value}});
  }
  return {{"kind", "independent_report"},
          {"aggregate_value", report.aggregate_value},
          {"mixture_value", report.mixture_value},
          {"gap", report.gap},
          {"profiles", profiles}};
}

}  // namespace persuasion
