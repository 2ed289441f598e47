#include "persuasion/simulate.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "persuasion/parallel.h"
#include "persuasion/rng.h"

namespace persuasion {

namespace {

constexpr long kBlock = 1024;

// Running moments of one block of samples; merged pairwise.
struct Moments {
  double count = 0;
  double mean = 0;
  double m2 = 0;
  double truthful = 0;
  std::vector<double> group_truthful;
  std::vector<double> group_seen;
  long zero_branches = 0;

  void add(double v) {
    count += 1;
    const double delta = v - mean;
    mean += delta / count;
    m2 += delta * (v - mean);
  }
};

Moments merge(const Moments& a, const Moments& b) {
  if (a.count == 0) return b;
  if (b.count == 0) return a;
  Moments out;
  out.count = a.count + b.count;
  const double delta = b.mean - a.mean;
  out.mean = a.mean + delta * b.count / out.count;
  out.m2 = a.m2 + b.m2 + delta * delta * a.count * b.count / out.count;
  out.truthful = a.truthful + b.truthful;
  out.group_truthful = a.group_truthful;
  out.group_seen = a.group_seen;
  for (std::size_t i = 0; i < b.group_truthful.size(); ++i) {
    out.group_truthful[i] += b.group_truthful[i];
    out.group_seen[i] += b.group_seen[i];
  }
  out.zero_branches = a.zero_branches + b.zero_branches;
  return out;
}

Moments merge_range(const std::vector<Moments>& blocks, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return blocks[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return merge(merge_range(blocks, lo, mid), merge_range(blocks, mid, hi));
}

// Runs sample(i, moments) over fixed blocks, so the result does not depend
// on the number of threads.
SimulationReport run_blocks(long samples, std::size_t groups,
                            const std::function<void(long, Moments&)>& sample) {
  if (samples <= 0) throw std::invalid_argument("samples must be positive");
  const std::size_t blocks = static_cast<std::size_t>((samples + kBlock - 1) / kBlock);
  std::vector<Moments> partial(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    Moments m;
    m.group_truthful.assign(groups, 0.0);
    m.group_seen.assign(groups, 0.0);
    const long end = std::min<long>(samples, static_cast<long>(b + 1) * kBlock);
    for (long i = static_cast<long>(b) * kBlock; i < end; ++i) sample(i, m);
    partial[b] = std::move(m);
  });
  const Moments all = merge_range(partial, 0, blocks);
  SimulationReport out;
  out.samples = samples;
  out.empirical_value = all.mean;
  out.std_error = samples > 1 ? std::sqrt(all.m2 / (all.count - 1) / all.count) : 0.0;
  out.truthful_rate = all.truthful / all.count;
  out.truthful_by_group.resize(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    out.truthful_by_group[g] = all.group_seen[g] > 0 ? all.group_truthful[g] / all.group_seen[g] : 1.0;
  }
  out.zero_probability_branches = all.zero_branches;
  return out;
}

// Receiver of true type k acting on a recommendation whose state weights
// are w[theta]: best action, ties to the recommended one.
int multi_response(const MultiReceiverInstance& inst, int r, int k, const std::vector<double>& w,
                   int recommended = 1) {
  double u0 = 0;
  double u1 = 0;
  for (int t = 0; t < inst.num_states(); ++t) {
    u0 += w[t] * inst.u_recv[r][k][t][0];
    u1 += w[t] * inst.u_recv[r][k][t][1];
  }
  const double tol = kTieTolerance * std::max({1.0, std::abs(u0), std::abs(u1)});
  if (std::abs(u1 - u0) <= tol) return recommended;
  return u1 > u0 ? 1 : 0;
}

std::vector<double> signal_weights(const MultiReceiverInstance& inst, const MarginalMenus& menus, int r,
                                   int k_reported, int signal) {
  std::vector<double> w(inst.num_states());
  for (int t = 0; t < inst.num_states(); ++t) {
    const double x = menus.x[r][k_reported][t];
    w[t] = inst.prior.mu[t] * (signal == 1 ? x : 1 - x);
  }
  return w;
}

double total(const std::vector<double>& w) {
  double s = 0;
  for (double v : w) s += v;
  return s;
}

}  // namespace

double report_utility(const MultiReceiverInstance& inst, const MarginalMenus& menus, int r, int k,
                      int k_reported) {
  double u = 0;
  for (int s = 0; s < 2; ++s) {
    const auto w = signal_weights(inst, menus, r, k_reported, s);
    const int b = multi_response(inst, r, k, w, s);
    for (int t = 0; t < inst.num_states(); ++t) u += w[t] * inst.u_recv[r][k][t][b];
  }
  return u;
}

int best_report(const MultiReceiverInstance& inst, const MarginalMenus& menus, int r, int k) {
  const int m = inst.types_per_receiver[r];
  std::vector<double> u(m);
  for (int k2 = 0; k2 < m; ++k2) u[k2] = report_utility(inst, menus, r, k, k2);
  const double top = *std::max_element(u.begin(), u.end());
  if (u[k] >= top - kTieTolerance) return k;
  int report = -1;
  double best_a1 = -1;
  for (int k2 = 0; k2 < m; ++k2) {
    if (u[k2] < top - kTieTolerance) continue;
    const double a1 = total(signal_weights(inst, menus, r, k2, 1));
    if (report < 0 || a1 > best_a1 + kTieTolerance) {
      report = k2;
      best_a1 = a1;
    }
  }
  return report;
}

int best_report(const SingleReceiverInstance& inst, const SignalingMenu& menu, int k) {
  return evaluate_menu(inst, menu).reported_type[k];
}

SimulationReport simulate_interaction(const SingleReceiverInstance& inst, const SignalingMenu& menu,
                                      long samples, std::uint64_t seed) {
  const int m = inst.num_types;
  const int d = inst.num_states();
  const int l = inst.num_actions;
  const auto evaluation = evaluate_menu(inst, menu);
  // response[k][k_reported][a]; -1 marks a zero-probability recommendation.
  std::vector<std::vector<std::vector<int>>> response(m, std::vector<std::vector<int>>(m, std::vector<int>(l, -1)));
  for (int k2 = 0; k2 < m; ++k2) {
    for (int a = 0; a < l; ++a) {
      double p = 0;
      for (int t = 0; t < d; ++t) p += inst.prior.mu[t] * menu.phi[k2][t][a];
      if (p <= 1e-12) continue;
      const Posterior xi = posterior_of_signal(inst, menu.phi[k2], a);
      for (int k = 0; k < m; ++k) response[k][k2][a] = best_response(inst, k, xi);
    }
  }
  const Posterior prior{inst.prior.mu};
  std::vector<int> prior_action(m);
  for (int k = 0; k < m; ++k) prior_action[k] = best_response(inst, k, prior);
  const std::uint64_t key = derive_seed(seed, "simulate-single");
  return run_blocks(samples, m, [&](long i, Moments& acc) {
    CounterRng rng(key, static_cast<std::uint64_t>(i));
    const int t = rng.categorical(inst.prior.mu);
    const int k = rng.categorical(inst.lambda);
    const int k2 = evaluation.reported_type[k];
    const int a = rng.categorical(menu.phi[k2][t]);
    int b = response[k][k2][a];
    if (b < 0) {
      ++acc.zero_branches;
      b = prior_action[k];
    }
    acc.add(inst.u_send[t][b]);
    acc.group_seen[k] += 1;
    if (k2 == k) {
      acc.truthful += 1;
      acc.group_truthful[k] += 1;
    }
  });
}

SimulationReport simulate_interaction(const MultiReceiverInstance& inst, const SenderStrategy& strategy,
                                      long samples, std::uint64_t seed) {
  const int n = inst.num_receivers;
  const int d = inst.num_states();
  const auto& menus = strategy.marginals;
  std::vector<std::vector<int>> report(n);
  // action[r][k][k_reported][signal]; -1 marks a zero-probability branch.
  std::vector<std::vector<std::vector<std::array<int, 2>>>> action(n);
  std::vector<std::vector<int>> prior_action(n);
  for (int r = 0; r < n; ++r) {
    const int m = inst.types_per_receiver[r];
    action[r].assign(m, std::vector<std::array<int, 2>>(m, {-1, -1}));
    for (int k = 0; k < m; ++k) {
      report[r].push_back(best_report(inst, menus, r, k));
      prior_action[r].push_back(multi_response(inst, r, k, inst.prior.mu));
      for (int k2 = 0; k2 < m; ++k2) {
        for (int s = 0; s < 2; ++s) {
          const auto w = signal_weights(inst, menus, r, k2, s);
          if (total(w) > 1e-12) action[r][k][k2][s] = multi_response(inst, r, k, w, s);
        }
      }
    }
  }
  std::map<std::vector<int>, int> index;
  std::vector<double> profile_probs;
  for (int p = 0; p < inst.support_size(); ++p) {
    index[inst.type_dist[p].types] = p;
    profile_probs.push_back(inst.type_dist[p].prob);
  }
  std::vector<std::vector<std::vector<double>>> atom_probs(inst.support_size(), std::vector<std::vector<double>>(d));
  for (int p = 0; p < inst.support_size(); ++p) {
    for (int t = 0; t < d; ++t) {
      for (const auto& e : strategy.joint.phi[p][t]) atom_probs[p][t].push_back(e.prob);
    }
  }
  const std::uint64_t key = derive_seed(seed, "simulate-multi");
  return run_blocks(samples, n, [&](long i, Moments& acc) {
    CounterRng rng(key, static_cast<std::uint64_t>(i));
    const int t = rng.categorical(inst.prior.mu);
    const auto& types = inst.type_dist[rng.categorical(profile_probs)].types;
    std::vector<int> reported(n);
    bool all_truthful = true;
    for (int r = 0; r < n; ++r) {
      reported[r] = report[r][types[r]];
      acc.group_seen[r] += 1;
      if (reported[r] == types[r]) {
        acc.group_truthful[r] += 1;
      } else {
        all_truthful = false;
      }
    }
    Subset recommended = 0;
    const auto it = index.find(reported);
    if (it != index.end()) {
      const auto& entries = strategy.joint.phi[it->second][t];
      if (!entries.empty()) recommended = entries[rng.categorical(atom_probs[it->second][t])].mask;
    } else {
      // No joint scheme for this reported profile: recommend independently
      // from the marginals.
      for (int r = 0; r < n; ++r) {
        if (rng.uniform() < menus.x[r][reported[r]][t]) recommended |= Subset{1} << r;
      }
    }
    Subset acting = 0;
    for (int r = 0; r < n; ++r) {
      int b = action[r][types[r]][reported[r]][contains(recommended, r) ? 1 : 0];
      if (b < 0) {
        ++acc.zero_branches;
        b = prior_action[r][types[r]];
      }
      if (b == 1) acting |= Subset{1} << r;
    }
    acc.add(inst.f.value(t, acting));
    if (all_truthful) acc.truthful += 1;
  });
}

double ResidualReport::max() const {
  double worst = 0;
  for (const auto& [name, v] : families) worst = std::max(worst, v);
  return worst;
}

ResidualReport residual_report(const SingleReceiverInstance& inst, const SignalingMenu& menu) {
  const MenuResiduals r = check_menu(inst, menu);
  return {{{"ic", r.ic}, {"persuasiveness", r.persuasiveness}, {"row_sum", r.row_sum}, {"bounds", r.bounds}}};
}

ResidualReport residual_report(const MultiReceiverInstance& inst, const SenderStrategy& strategy) {
  const StrategyResiduals r = check_strategy(inst, strategy);
  return {{{"consistency", r.consistency},
           {"ic", r.ic},
           {"persuasiveness", r.persuasiveness},
           {"normalization", r.normalization},
           {"bounds", r.bounds}}};
}

ResidualReport residual_report(const MultiReceiverInstance& inst, const AggregateScheme& aggregate) {
  const StrategyResiduals m = check_marginals(inst, aggregate.marginals);
  const AggregateResiduals a = check_aggregate(inst, aggregate);
  return {{{"consistency", a.consistency},
           {"ic", m.ic},
           {"persuasiveness", m.persuasiveness},
           {"normalization", a.normalization},
           {"bounds", std::max(a.bounds, m.bounds)}}};
}

nlohmann::json simulation_to_json(const SimulationReport& report) {
  return {{"kind", "simulation"},
          {"samples", report.samples},
          {"empirical_value", report.empirical_value},
          {"std_error", report.std_error},
          {"truthful_rate", report.truthful_rate},
          {"truthful_by_group", report.truthful_by_group},
          {"zero_probability_branches", report.zero_probability_branches}};
}

nlohmann::json residuals_to_json(const ResidualReport& report) {
  nlohmann::json families = nlohmann::json::object();
  for (const auto& [name, v] : report.families) families[name] = v;
  return {{"kind", "residuals"}, {"families", families}, {"max", report.max()}};
}

}  // namespace persuasion
