#include "persuasion/multi_exact.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "persuasion/errors.h"
#include "persuasion/parallel.h"

namespace persuasion {

using nlohmann::json;

double strategy_value(const MultiReceiverInstance& inst, const JointScheme& joint) {
  double total = 0;
  for (int p = 0; p < inst.support_size(); ++p) {
    for (int t = 0; t < inst.num_states(); ++t) {
      double v = 0;
      for (const JointEntry& e : joint.phi[p][t]) v += e.prob * inst.f.value(t, e.mask);
      total += inst.prior.mu[t] * inst.type_dist[p].prob * v;
    }
  }
  return total;
}

Lp5Layout::Lp5Layout(const MultiReceiverInstance& inst)
    : n_(inst.num_receivers),
      d_(inst.num_states()),
      p_(inst.support_size()),
      types_(inst.types_per_receiver) {
  int next = 0;
  for (int r = 0; r < n_; ++r) {
    x_offset_.push_back(next);
    next += types_[r] * d_;
  }
  for (int r = 0; r < n_; ++r) {
    l_offset_.push_back(next);
    next += types_[r] * (types_[r] - 1) * 2;
  }
  fixed_vars_ = next;
  int rows = p_ * n_ * d_;
  for (int r = 0; r < n_; ++r) {
    const int m = types_[r];
    rows += 5 * m * (m - 1) + 2 * m;
  }
  norm_offset_ = rows;
}

int Lp5Layout::l(int r, int k, int k_other, int action) const {
  const int m = types_[r];
  const int pair = k * (m - 1) + (k_other < k ? k_other : k_other - 1);
  return l_offset_[r] + pair * 2 + action;
}

long lp5_constraint_count(const MultiReceiverInstance& inst) {
  const long p = inst.support_size();
  const long n = inst.num_receivers;
  const long d = inst.num_states();
  long rows = p * n * d + p * d;
  for (int m : inst.types_per_receiver) rows += 5L * m * (m - 1) + 2L * m;
  return rows;
}

namespace {

using Terms = std::vector<std::pair<int, double>>;

double prior_expectation(const MultiReceiverInstance& inst, int r, int k, int action) {
  double v = 0;
  for (int t = 0; t < inst.num_states(); ++t) v += inst.prior.mu[t] * inst.u_recv[r][k][t][action];
  return v;
}

// Rows of every family except the column entries; relation and rhs per row.
struct RowSkeleton {
  std::vector<Terms> terms;
  std::vector<Relation> relation;
  std::vector<double> rhs;
};

// IC, best-response bounds and persuasiveness over the marginal variables.
void append_marginal_rows(const MultiReceiverInstance& inst, const Lp5Layout& at, RowSkeleton& rows) {
  const int n = inst.num_receivers;
  const int d = inst.num_states();
  const auto& mu = inst.prior.mu;
  auto add = [&](Terms terms, Relation rel, double rhs) {
    rows.terms.push_back(std::move(terms));
    rows.relation.push_back(rel);
    rows.rhs.push_back(rhs);
  };
  for (int r = 0; r < n; ++r) {
    const int m = inst.types_per_receiver[r];
    const auto& u = inst.u_recv[r];
    for (int k = 0; k < m; ++k) {
      for (int k2 = 0; k2 < m; ++k2) {
        if (k2 == k) continue;
        // Truthful obedient utility covers both best-response terms.
        Terms terms;
        for (int t = 0; t < d; ++t) terms.emplace_back(at.x(r, k, t), mu[t] * (u[k][t][1] - u[k][t][0]));
        terms.emplace_back(at.l(r, k, k2, 1), -1.0);
        terms.emplace_back(at.l(r, k, k2, 0), -1.0);
        add(std::move(terms), Relation::kGreaterEqual, -prior_expectation(inst, r, k, 0));
      }
    }
    for (int k = 0; k < m; ++k) {
      for (int k2 = 0; k2 < m; ++k2) {
        if (k2 == k) continue;
        for (int a = 0; a < 2; ++a) {
          Terms terms{{at.l(r, k, k2, 1), 1.0}};
          for (int t = 0; t < d; ++t) terms.emplace_back(at.x(r, k2, t), -mu[t] * u[k][t][a]);
          add(std::move(terms), Relation::kGreaterEqual, 0.0);
        }
        for (int a = 0; a < 2; ++a) {
          Terms terms{{at.l(r, k, k2, 0), 1.0}};
          for (int t = 0; t < d; ++t) terms.emplace_back(at.x(r, k2, t), mu[t] * u[k][t][a]);
          add(std::move(terms), Relation::kGreaterEqual, prior_expectation(inst, r, k, a));
        }
      }
    }
    for (int k = 0; k < m; ++k) {
      Terms follow1;
      Terms follow0;
      for (int t = 0; t < d; ++t) {
        const double gain = mu[t] * (u[k][t][1] - u[k][t][0]);
        if (gain != 0) {
          follow1.emplace_back(at.x(r, k, t), gain);
          follow0.emplace_back(at.x(r, k, t), gain);
        }
      }
      add(std::move(follow1), Relation::kGreaterEqual, 0.0);
      // (1 - x)(u0 - u1) >= 0  <=>  x (u1 - u0) >= sum (u1 - u0)
      add(std::move(follow0), Relation::kGreaterEqual,
          prior_expectation(inst, r, k, 1) - prior_expectation(inst, r, k, 0));
    }
  }
}

RowSkeleton fixed_rows(const MultiReceiverInstance& inst, const Lp5Layout& at) {
  RowSkeleton rows;
  for (int p = 0; p < inst.support_size(); ++p) {
    for (int r = 0; r < inst.num_receivers; ++r) {
      for (int t = 0; t < inst.num_states(); ++t) {
        rows.terms.push_back({{at.x(r, inst.type_dist[p].types[r], t), -1.0}});
        rows.relation.push_back(Relation::kEqual);
        rows.rhs.push_back(0.0);
      }
    }
  }
  append_marginal_rows(inst, at, rows);
  for (int p = 0; p < inst.support_size(); ++p) {
    for (int t = 0; t < inst.num_states(); ++t) {
      rows.terms.emplace_back();
      rows.relation.push_back(Relation::kEqual);
      rows.rhs.push_back(1.0);
    }
  }
  return rows;
}

void add_fixed_variables(const MultiReceiverInstance& inst, const Lp5Layout& at, LinearProgram& lp) {
  for (int r = 0; r < inst.num_receivers; ++r) {
    for (int k = 0; k < inst.types_per_receiver[r]; ++k) {
      for (int t = 0; t < inst.num_states(); ++t) lp.add_variable(0.0, 0.0, 1.0);
    }
  }
  while (lp.num_variables() < at.num_fixed_variables()) lp.add_variable(0.0);
}

void check_capacity(const MultiReceiverInstance& inst) {
  if (inst.num_receivers > kMaxTableReceivers) {
    throw CapacityError("explicit LP needs n <= " + std::to_string(kMaxTableReceivers));
  }
}

SenderStrategy extract_strategy(const MultiReceiverInstance& inst, const Lp5Layout& at,
                                const std::vector<std::vector<std::vector<Subset>>>& columns,
                                const std::vector<double>& primal) {
  SenderStrategy out;
  out.marginals.x.resize(inst.num_receivers);
  for (int r = 0; r < inst.num_receivers; ++r) {
    out.marginals.x[r].assign(inst.types_per_receiver[r], std::vector<double>(inst.num_states()));
    for (int k = 0; k < inst.types_per_receiver[r]; ++k) {
      for (int t = 0; t < inst.num_states(); ++t) {
        out.marginals.x[r][k][t] = std::clamp(primal[at.x(r, k, t)], 0.0, 1.0);
      }
    }
  }
  int j = at.num_fixed_variables();
  out.joint.phi.resize(inst.support_size());
  for (int p = 0; p < inst.support_size(); ++p) {
    out.joint.phi[p].resize(inst.num_states());
    for (int t = 0; t < inst.num_states(); ++t) {
      auto& entries = out.joint.phi[p][t];
      for (Subset s : columns[p][t]) {
        const double v = primal[j++];
        if (v > 0) entries.push_back({s, std::min(v, 1.0)});
      }
      std::sort(entries.begin(), entries.end(),
                [](const JointEntry& a, const JointEntry& b) { return a.mask < b.mask; });
    }
  }
  out.value = strategy_value(inst, out.joint);
  return out;
}

Subset prior_response_set(const MultiReceiverInstance& inst, int profile) {
  Subset s = 0;
  for (int r = 0; r < inst.num_receivers; ++r) {
    const int k = inst.type_dist[profile].types[r];
    if (prior_expectation(inst, r, k, 1) >= prior_expectation(inst, r, k, 0)) s |= Subset{1} << r;
  }
  return s;
}

PricingResult brute_force_dense(const std::vector<double>& values, int n,
                                 const std::vector<double>& w) {
  const Subset count = Subset{1} << n;
  std::vector<double> total(count);
  std::vector<double> wsum(count, 0.0);
  double best = -kInfinity;
  for (Subset s = 0; s < count; ++s) {
    if (s != 0) {
      const int low = std::countr_zero(s);
      wsum[s] = wsum[s & (s - 1)] + w[low];
    }
    total[s] = values[s] + wsum[s];
    best = std::max(best, total[s]);
  }
  for (Subset s = 0; s < count; ++s) {
    if (total[s] >= best - 1e-12) return {s, total[s]};
  }
  return {0, total[0]};
}

}  // namespace

LinearProgram build_restricted_lp(const MultiReceiverInstance& inst,
                                  const std::vector<std::vector<std::vector<Subset>>>& columns) {
  const Lp5Layout at(inst);
  RowSkeleton rows = fixed_rows(inst, at);
  LinearProgram lp;
  add_fixed_variables(inst, at, lp);
  for (int p = 0; p < inst.support_size(); ++p) {
    const double lambda = inst.type_dist[p].prob;
    for (int t = 0; t < inst.num_states(); ++t) {
      const double weight = inst.prior.mu[t] * lambda;
      for (Subset s : columns[p][t]) {
        const int j = lp.add_variable(weight * inst.f.value(t, s));
        for (int r = 0; r < inst.num_receivers; ++r) {
          if (contains(s, r)) rows.terms[at.consistency_row(p, r, t)].emplace_back(j, 1.0);
        }
        rows.terms[at.normalization_row(p, t)].emplace_back(j, 1.0);
      }
    }
  }
  for (std::size_t i = 0; i < rows.terms.size(); ++i) {
    lp.add_constraint(std::move(rows.terms[i]), rows.relation[i], rows.rhs[i]);
  }
  return lp;
}

LinearProgram build_marginal_polytope(const MultiReceiverInstance& inst) {
  const Lp5Layout at(inst);
  RowSkeleton rows;
  append_marginal_rows(inst, at, rows);
  LinearProgram lp;
  add_fixed_variables(inst, at, lp);
  for (std::size_t i = 0; i < rows.terms.size(); ++i) {
    lp.add_constraint(std::move(rows.terms[i]), rows.relation[i], rows.rhs[i]);
  }
  return lp;
}

LinearProgram build_full_lp(const MultiReceiverInstance& inst) {
  check_capacity(inst);
  std::vector<Subset> all(Subset{1} << inst.num_receivers);
  std::iota(all.begin(), all.end(), Subset{0});
  const std::vector<std::vector<std::vector<Subset>>> columns(
      inst.support_size(), std::vector<std::vector<Subset>>(inst.num_states(), all));
  return build_restricted_lp(inst, columns);
}

SenderStrategy solve_exact(const MultiReceiverInstance& inst) {
  check_capacity(inst);
  std::vector<Subset> all(Subset{1} << inst.num_receivers);
  std::iota(all.begin(), all.end(), Subset{0});
  const std::vector<std::vector<std::vector<Subset>>> columns(
      inst.support_size(), std::vector<std::vector<Subset>>(inst.num_states(), all));
  const LpSolution sol = solve_lp(build_restricted_lp(inst, columns));
  if (sol.status != LpStatus::kOptimal) {
    throw SolverFailure(std::string("multi-receiver LP returned ") + to_string(sol.status));
  }
  return extract_strategy(inst, Lp5Layout(inst), columns, sol.primal);
}

std::string_view to_string(OracleMode mode) {
  switch (mode) {
    case OracleMode::kBruteForce:
      return "bruteforce";
    case OracleMode::kAnonymous:
      return "anonymous";
    case OracleMode::kAdditive:
      return "additive";
  }
  return "bruteforce";
}

OracleMode oracle_mode_from_string(std::string_view s) {
  if (s == "bruteforce") return OracleMode::kBruteForce;
  if (s == "anonymous") return OracleMode::kAnonymous;
  if (s == "additive") return OracleMode::kAdditive;
  throw std::invalid_argument("unknown oracle mode: " + std::string(s));
}

bool oracle_available(const SenderSetFunction& f, OracleMode mode) {
  switch (mode) {
    case OracleMode::kBruteForce:
      return f.num_receivers() <= kMaxEnumerationReceivers;
    case OracleMode::kAnonymous:
      return std::holds_alternative<AnonymousFunction>(f.data());
    case OracleMode::kAdditive:
      return std::holds_alternative<AdditiveFunction>(f.data());
  }
  return false;
}

OracleMode default_oracle_mode(const SenderSetFunction& f) {
  if (std::holds_alternative<AnonymousFunction>(f.data())) return OracleMode::kAnonymous;
  if (std::holds_alternative<AdditiveFunction>(f.data())) return OracleMode::kAdditive;
  return OracleMode::kBruteForce;
}

PricingResult pricing_oracle(const SenderSetFunction& f, int theta, const std::vector<double>& w,
                             OracleMode mode) {
  const int n = f.num_receivers();
  if (static_cast<int>(w.size()) != n) throw std::invalid_argument("weight vector size mismatch");
  if (!oracle_available(f, mode)) {
    throw std::invalid_argument(std::string("oracle ") + std::string(to_string(mode)) +
                                " not available for " + std::string(f.variant_name()) +
                                " function with n = " + std::to_string(n));
  }
  switch (mode) {
    case OracleMode::kBruteForce:
      return brute_force_dense(f.dense_values(theta), n, w);
    case OracleMode::kAnonymous: {
      const auto& g = std::get<AnonymousFunction>(f.data()).g[theta];
      std::vector<int> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return w[a] > w[b]; });
      std::vector<double> totals(n + 1);
      std::vector<Subset> sets(n + 1, 0);
      double prefix = 0;
      totals[0] = g[0];
      for (int c = 1; c <= n; ++c) {
        prefix += w[order[c - 1]];
        sets[c] = sets[c - 1] | (Subset{1} << order[c - 1]);
        totals[c] = g[c] + prefix;
      }
      const double best = *std::max_element(totals.begin(), totals.end());
      PricingResult out{~Subset{0}, best};
      for (int c = 0; c <= n; ++c) {
        if (totals[c] >= best - 1e-12 && sets[c] < out.set) out = {sets[c], totals[c]};
      }
      return out;
    }
    case OracleMode::kAdditive: {
      const auto& v = std::get<AdditiveFunction>(f.data()).values[theta];
      PricingResult out;
      for (int r = 0; r < n; ++r) {
        if (v[r] + w[r] > 0) {
          out.set |= Subset{1} << r;
          out.value += v[r] + w[r];
        }
      }
      return out;
    }
  }
  return {};
}

ColumnGenerationResult run_column_generation(const MultiReceiverInstance& inst, OracleMode mode,
                                             double tol) {
  validate(inst);
  if (!oracle_available(inst.f, mode)) {
    throw std::invalid_argument(std::string("oracle ") + std::string(to_string(mode)) +
                                " not available for this instance");
  }
  const int n = inst.num_receivers;
  const int d = inst.num_states();
  const int P = inst.support_size();
  const Lp5Layout at(inst);

  ColumnGenerationResult out;
  out.columns.assign(P, std::vector<std::vector<Subset>>(d));
  for (int p = 0; p < P; ++p) {
    const Subset prior_set = prior_response_set(inst, p);
    for (int t = 0; t < d; ++t) {
      auto& cols = out.columns[p][t];
      cols = {0, full_set(n), prior_set};
      std::sort(cols.begin(), cols.end());
      cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
      out.initial_columns += static_cast<long>(cols.size());
    }
  }

  // Dense tables make brute-force pricing a single pass per call.
  std::vector<std::vector<double>> dense;
  if (mode == OracleMode::kBruteForce) {
    dense.resize(d);
    parallel_for(d, [&](std::size_t t) { dense[t] = inst.f.dense_values(static_cast<int>(t)); });
  }

  const long cap = 10L * P * d * (1L << std::min(n, kMaxEnumerationReceivers));
  LpSolution sol;
  while (true) {
    if (++out.iterations > cap) throw SolverFailure("column generation iteration cap exceeded");
    sol = solve_lp(build_restricted_lp(inst, out.columns));
    if (sol.status != LpStatus::kOptimal) {
      throw SolverFailure(std::string("restricted master returned ") + to_string(sol.status));
    }
    out.master_values.push_back(sol.objective);

    std::vector<Subset> candidate(static_cast<std::size_t>(P) * d, 0);
    std::vector<char> admit(candidate.size(), 0);
    parallel_for(candidate.size(), [&](std::size_t idx) {
      const int p = static_cast<int>(idx) / d;
      const int t = static_cast<int>(idx) % d;
      const double scale = inst.prior.mu[t] * inst.type_dist[p].prob;
      std::vector<double> w(n);
      for (int r = 0; r < n; ++r) w[r] = -sol.duals[at.consistency_row(p, r, t)] / scale;
      const PricingResult best = mode == OracleMode::kBruteForce
                                     ? brute_force_dense(dense[t], n, w)
                                     : pricing_oracle(inst.f, t, w, mode);
      const double reduced = scale * best.value - sol.duals[at.normalization_row(p, t)];
      const auto& cols = out.columns[p][t];
      if (reduced > tol && !std::binary_search(cols.begin(), cols.end(), best.set)) {
        candidate[idx] = best.set;
        admit[idx] = 1;
      }
    });
    bool added = false;
    for (std::size_t idx = 0; idx < candidate.size(); ++idx) {
      if (!admit[idx]) continue;
      auto& cols = out.columns[idx / d][idx % d];
      cols.insert(std::lower_bound(cols.begin(), cols.end(), candidate[idx]), candidate[idx]);
      added = true;
    }
    if (!added) break;
  }

  out.consistency_duals.assign(P, std::vector<std::vector<double>>(n, std::vector<double>(d)));
  out.normalization_duals.assign(P, std::vector<double>(d));
  for (int p = 0; p < P; ++p) {
    for (int t = 0; t < d; ++t) {
      out.normalization_duals[p][t] = sol.duals[at.normalization_row(p, t)];
      for (int r = 0; r < n; ++r) out.consistency_duals[p][r][t] = sol.duals[at.consistency_row(p, r, t)];
    }
  }
  out.strategy = extract_strategy(inst, at, out.columns, sol.primal);
  return out;
}

SenderStrategy solve_column_generation(const MultiReceiverInstance& inst, OracleMode mode,
                                       double tol) {
  return run_column_generation(inst, mode, tol).strategy;
}

double StrategyResiduals::max() const {
  return std::max({consistency, ic, persuasiveness, normalization, bounds, value});
}

StrategyResiduals check_marginals(const MultiReceiverInstance& inst, const MarginalMenus& menus) {
  StrategyResiduals out;
  const int d = inst.num_states();
  const auto& mu = inst.prior.mu;
  for (int r = 0; r < inst.num_receivers; ++r) {
    const int m = inst.types_per_receiver[r];
    const auto& u = inst.u_recv[r];
    for (int k = 0; k < m; ++k) {
      for (int t = 0; t < d; ++t) {
        const double x = menus.x[r][k][t];
        out.bounds = std::max({out.bounds, -x, x - 1});
      }
    }
    for (int k = 0; k < m; ++k) {
      // utility[k2][signal][action] for true type k facing scheme k2.
      auto utility = [&](int k2, int signal, int action) {
        double v = 0;
        for (int t = 0; t < d; ++t) {
          const double x = menus.x[r][k2][t];
          v += mu[t] * (signal == 1 ? x : 1 - x) * u[k][t][action];
        }
        return v;
      };
      const double truthful = utility(k, 1, 1) + utility(k, 0, 0);
      out.persuasiveness = std::max({out.persuasiveness, utility(k, 1, 0) - utility(k, 1, 1),
                                     utility(k, 0, 1) - utility(k, 0, 0)});
      for (int k2 = 0; k2 < m; ++k2) {
        if (k2 == k) continue;
        const double deviation = std::max(utility(k2, 1, 0), utility(k2, 1, 1)) +
                                 std::max(utility(k2, 0, 0), utility(k2, 0, 1));
        out.ic = std::max(out.ic, deviation - truthful);
      }
    }
  }
  return out;
}

StrategyResiduals check_strategy(const MultiReceiverInstance& inst, const SenderStrategy& strategy) {
  StrategyResiduals out = check_marginals(inst, strategy.marginals);
  const int n = inst.num_receivers;
  for (int p = 0; p < inst.support_size(); ++p) {
    for (int t = 0; t < inst.num_states(); ++t) {
      double sum = 0;
      std::vector<double> marginal(n, 0.0);
      for (const JointEntry& e : strategy.joint.phi[p][t]) {
        out.bounds = std::max({out.bounds, -e.prob, e.prob - 1});
        sum += e.prob;
        for (int r = 0; r < n; ++r) {
          if (contains(e.mask, r)) marginal[r] += e.prob;
        }
      }
      out.normalization = std::max(out.normalization, std::abs(sum - 1));
      for (int r = 0; r < n; ++r) {
        const int k = inst.type_dist[p].types[r];
        out.consistency =
            std::max(out.consistency, std::abs(marginal[r] - strategy.marginals.x[r][k][t]));
      }
    }
  }
  out.value = std::abs(strategy.value - strategy_value(inst, strategy.joint));
  return out;
}

json strategy_to_json(const MultiReceiverInstance& inst, const SenderStrategy& strategy) {
  json doc;
  doc["kind"] = "multi_strategy";
  doc["value"] = strategy.value;
  doc["marginals"] = strategy.marginals.x;
  json joint = json::array();
  for (int p = 0; p < inst.support_size(); ++p) {
    for (int t = 0; t < inst.num_states(); ++t) {
      json entries = json::array();
      for (const JointEntry& e : strategy.joint.phi[p][t]) {
        entries.push_back({{"mask", e.mask}, {"prob", e.prob}});
      }
      joint.push_back({{"profile", inst.type_dist[p].types}, {"theta", t}, {"entries", entries}});
    }
  }
  doc["joint"] = std::move(joint);
  return doc;
}

SenderStrategy strategy_from_json(const MultiReceiverInstance& inst, const json& doc) {
  try {
    if (doc.at("kind").get<std::string>() != "multi_strategy") {
      throw InvalidInstance("kind: expected \"multi_strategy\"");
    }
    SenderStrategy out;
    out.value = doc.at("value").get<double>();
    out.marginals.x = doc.at("marginals").get<std::vector<std::vector<std::vector<double>>>>();
    if (static_cast<int>(out.marginals.x.size()) != inst.num_receivers) {
      throw InvalidInstance("marginals: receiver dimension mismatch");
    }
    for (int r = 0; r < inst.num_receivers; ++r) {
      if (static_cast<int>(out.marginals.x[r].size()) != inst.types_per_receiver[r]) {
        throw InvalidInstance("marginals: type dimension mismatch");
      }
      for (const auto& row : out.marginals.x[r]) {
        if (static_cast<int>(row.size()) != inst.num_states()) {
          throw InvalidInstance("marginals: state dimension mismatch");
        }
      }
    }
    std::map<std::vector<int>, int> index;
    for (int p = 0; p < inst.support_size(); ++p) index[inst.type_dist[p].types] = p;
    out.joint.phi.assign(inst.support_size(),
                         std::vector<std::vector<JointEntry>>(inst.num_states()));
    for (const json& block : doc.at("joint")) {
      const auto it = index.find(block.at("profile").get<std::vector<int>>());
      if (it == index.end()) throw InvalidInstance("joint: profile not in the type support");
      const int t = block.at("theta").get<int>();
      if (t < 0 || t >= inst.num_states()) throw InvalidInstance("joint: theta out of range");
      for (const json& e : block.at("entries")) {
        out.joint.phi[it->second][t].push_back({e.at("mask").get<Subset>(), e.at("prob").get<double>()});
      }
    }
    return out;
  } catch (const json::exception& e) {
    throw InvalidInstance(std::string("parse failure: ") + e.what());
  }
}

}  // namespace persuasion
