#include "persuasion/single_receiver.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "persuasion/errors.h"

namespace persuasion {

using nlohmann::json;

Posterior posterior_of_signal(const SingleReceiverInstance& inst,
                              const std::vector<std::vector<double>>& scheme, int signal) {
  const int d = inst.num_states();
  double total = 0;
  for (int t = 0; t < d; ++t) total += inst.prior.mu[t] * scheme[t][signal];
  if (total <= 1e-12) throw std::domain_error("signal has zero probability");
  Posterior out;
  out.xi.resize(d);
  for (int t = 0; t < d; ++t) out.xi[t] = inst.prior.mu[t] * scheme[t][signal] / total;
  return out;
}

int best_response(const SingleReceiverInstance& inst, int type, const Posterior& xi) {
  const int d = inst.num_states();
  const int l = inst.num_actions;
  std::vector<double> recv(l, 0.0);
  std::vector<double> send(l, 0.0);
  for (int a = 0; a < l; ++a) {
    for (int t = 0; t < d; ++t) {
      recv[a] += xi.xi[t] * inst.u_recv[type][t][a];
      send[a] += xi.xi[t] * inst.u_send[t][a];
    }
  }
  const double top = *std::max_element(recv.begin(), recv.end());
  int best = -1;
  for (int a = 0; a < l; ++a) {
    if (recv[a] < top - kTieTolerance) continue;
    if (best < 0 || send[a] > send[best] + kTieTolerance) best = a;
  }
  return best;
}

DirectMenuLayout direct_menu_layout(const SingleReceiverInstance& inst) {
  return {inst.num_types, inst.num_states(), inst.num_actions};
}

LinearProgram build_direct_menu_lp(const SingleReceiverInstance& inst) {
  const DirectMenuLayout at = direct_menu_layout(inst);
  const int m = at.num_types;
  const int d = at.num_states;
  const int l = at.num_actions;
  const auto& mu = inst.prior.mu;

  LinearProgram lp;
  for (int k = 0; k < m; ++k) {
    for (int t = 0; t < d; ++t) {
      for (int a = 0; a < l; ++a) {
        lp.add_variable(inst.lambda[k] * mu[t] * inst.u_send[t][a], 0.0, 1.0);
      }
    }
  }
  for (int j = at.num_phi(); j < at.num_variables(); ++j) lp.add_variable(0.0);

  // Truthful utility must cover the best-response utility of every misreport.
  for (int k = 0; k < m; ++k) {
    for (int k2 = 0; k2 < m; ++k2) {
      if (k2 == k) continue;
      std::vector<std::pair<int, double>> terms;
      for (int a = 0; a < l; ++a) {
        for (int t = 0; t < d; ++t) terms.emplace_back(at.phi(k, t, a), mu[t] * inst.u_recv[k][t][a]);
      }
      for (int a = 0; a < l; ++a) terms.emplace_back(at.l(k, k2, a), -1.0);
      lp.add_constraint(std::move(terms), Relation::kGreaterEqual, 0.0);
    }
  }
  for (int k = 0; k < m; ++k) {
    for (int k2 = 0; k2 < m; ++k2) {
      if (k2 == k) continue;
      for (int a = 0; a < l; ++a) {
        for (int a2 = 0; a2 < l; ++a2) {
          std::vector<std::pair<int, double>> terms{{at.l(k, k2, a), 1.0}};
          for (int t = 0; t < d; ++t) {
            terms.emplace_back(at.phi(k2, t, a), -mu[t] * inst.u_recv[k][t][a2]);
          }
          lp.add_constraint(std::move(terms), Relation::kGreaterEqual, 0.0);
        }
      }
    }
  }
  // Obedience of each type to its own scheme.
  for (int k = 0; k < m; ++k) {
    for (int a = 0; a < l; ++a) {
      for (int a2 = 0; a2 < l; ++a2) {
        std::vector<std::pair<int, double>> terms;
        for (int t = 0; t < d; ++t) {
          const double c = mu[t] * (inst.u_recv[k][t][a] - inst.u_recv[k][t][a2]);
          if (c != 0) terms.emplace_back(at.phi(k, t, a), c);
        }
        lp.add_constraint(std::move(terms), Relation::kGreaterEqual, 0.0);
      }
    }
  }
  for (int k = 0; k < m; ++k) {
    for (int t = 0; t < d; ++t) {
      std::vector<std::pair<int, double>> terms;
      for (int a = 0; a < l; ++a) terms.emplace_back(at.phi(k, t, a), 1.0);
      lp.add_constraint(std::move(terms), Relation::kEqual, 1.0);
    }
  }
  return lp;
}

MenuSolution solve_optimal_menu(const SingleReceiverInstance& inst) {
  const LinearProgram lp = build_direct_menu_lp(inst);
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal) {
    // Any constant uninformative menu is feasible, so this is numerical.
    throw SolverFailure(std::string("direct menu LP returned ") + to_string(sol.status));
  }
  const DirectMenuLayout at = direct_menu_layout(inst);
  MenuSolution out;
  out.value = sol.objective;
  out.menu.phi.assign(at.num_types, std::vector<std::vector<double>>(
                                        at.num_states, std::vector<double>(at.num_actions)));
  for (int k = 0; k < at.num_types; ++k) {
    for (int t = 0; t < at.num_states; ++t) {
      for (int a = 0; a < at.num_actions; ++a) {
        out.menu.phi[k][t][a] = std::clamp(sol.primal[at.phi(k, t, a)], 0.0, 1.0);
      }
    }
  }
  return out;
}

MenuEvaluation evaluate_menu(const SingleReceiverInstance& inst, const SignalingMenu& menu,
                             double tol) {
  const int m = inst.num_types;
  const int d = inst.num_states();
  const int l = inst.num_actions;
  const auto& mu = inst.prior.mu;
  MenuEvaluation out;
  out.receiver_utility.assign(m, std::vector<double>(m, 0.0));
  out.sender_utility.assign(m, std::vector<double>(m, 0.0));
  for (int k2 = 0; k2 < m; ++k2) {
    const auto& scheme = menu.phi[k2];
    for (int a = 0; a < l; ++a) {
      double p = 0;
      for (int t = 0; t < d; ++t) p += mu[t] * scheme[t][a];
      if (p <= 1e-12) continue;
      const Posterior xi = posterior_of_signal(inst, scheme, a);
      for (int k = 0; k < m; ++k) {
        const int b = best_response(inst, k, xi);
        for (int t = 0; t < d; ++t) {
          const double w = mu[t] * scheme[t][a];
          out.receiver_utility[k][k2] += w * inst.u_recv[k][t][b];
          out.sender_utility[k][k2] += w * inst.u_send[t][b];
        }
      }
    }
  }
  out.reported_type.resize(m);
  for (int k = 0; k < m; ++k) {
    const auto& u = out.receiver_utility[k];
    const double top = *std::max_element(u.begin(), u.end());
    int report = k;
    if (u[k] < top - tol) {
      report = -1;
      for (int k2 = 0; k2 < m; ++k2) {
        if (u[k2] < top - tol) continue;
        if (report < 0 || out.sender_utility[k][k2] > out.sender_utility[k][report] + tol) {
          report = k2;
        }
      }
    }
    out.reported_type[k] = report;
    out.value += inst.lambda[k] * out.sender_utility[k][report];
  }
  return out;
}

double MenuResiduals::max() const { return std::max({ic, persuasiveness, row_sum, bounds}); }

MenuResiduals check_menu(const SingleReceiverInstance& inst, const SignalingMenu& menu) {
  const int m = inst.num_types;
  const int d = inst.num_states();
  const int l = inst.num_actions;
  const auto& mu = inst.prior.mu;
  MenuResiduals out;
  for (int k = 0; k < m; ++k) {
    for (int t = 0; t < d; ++t) {
      double sum = 0;
      for (int a = 0; a < l; ++a) {
        const double p = menu.phi[k][t][a];
        out.bounds = std::max({out.bounds, -p, p - 1});
        sum += p;
      }
      out.row_sum = std::max(out.row_sum, std::abs(sum - 1));
    }
  }
  // weight[k2][a][a2] = sum_t mu_t phi^{k2}_t(a) u^k_t(a2), built per k.
  for (int k = 0; k < m; ++k) {
    std::vector<std::vector<std::vector<double>>> weight(
        m, std::vector<std::vector<double>>(l, std::vector<double>(l, 0.0)));
    for (int k2 = 0; k2 < m; ++k2) {
      for (int a = 0; a < l; ++a) {
        for (int a2 = 0; a2 < l; ++a2) {
          for (int t = 0; t < d; ++t) weight[k2][a][a2] += mu[t] * menu.phi[k2][t][a] * inst.u_recv[k][t][a2];
        }
      }
    }
    double truthful = 0;
    for (int a = 0; a < l; ++a) {
      truthful += weight[k][a][a];
      for (int a2 = 0; a2 < l; ++a2) {
        out.persuasiveness = std::max(out.persuasiveness, weight[k][a][a2] - weight[k][a][a]);
      }
    }
    for (int k2 = 0; k2 < m; ++k2) {
      if (k2 == k) continue;
      double deviation = 0;
      for (int a = 0; a < l; ++a) {
        deviation += *std::max_element(weight[k2][a].begin(), weight[k2][a].end());
      }
      out.ic = std::max(out.ic, deviation - truthful);
    }
  }
  return out;
}

LinearProgram build_no_menu_baseline_lp(const SingleReceiverInstance& inst) {
  const int m = inst.num_types;
  const int d = inst.num_states();
  const int l = inst.num_actions;
  long signals = 1;
  for (int k = 0; k < m; ++k) {
    signals *= l;
    if (signals > kMaxBaselineSignals) {
      throw CapacityError("baseline needs actions^types <= " + std::to_string(kMaxBaselineSignals));
    }
  }
  const auto& mu = inst.prior.mu;
  auto action_of = [&](long signal, int k) {
    for (int i = 0; i < k; ++i) signal /= l;
    return static_cast<int>(signal % l);
  };
  LinearProgram lp;
  for (int t = 0; t < d; ++t) {
    for (long s = 0; s < signals; ++s) {
      double c = 0;
      for (int k = 0; k < m; ++k) c += inst.lambda[k] * inst.u_send[t][action_of(s, k)];
      lp.add_variable(mu[t] * c, 0.0, 1.0);
    }
  }
  auto var = [&](int t, long s) { return static_cast<int>(t * signals + s); };
  // The receiver observes the whole tuple, so every type must obey its
  // component given the tuple.
  for (long s = 0; s < signals; ++s) {
    for (int k = 0; k < m; ++k) {
      const int a = action_of(s, k);
      for (int a2 = 0; a2 < l; ++a2) {
        if (a2 == a) continue;
        std::vector<std::pair<int, double>> terms;
        for (int t = 0; t < d; ++t) {
          const double c = mu[t] * (inst.u_recv[k][t][a] - inst.u_recv[k][t][a2]);
          if (c != 0) terms.emplace_back(var(t, s), c);
        }
        lp.add_constraint(std::move(terms), Relation::kGreaterEqual, 0.0);
      }
    }
  }
  for (int t = 0; t < d; ++t) {
    std::vector<std::pair<int, double>> terms;
    for (long s = 0; s < signals; ++s) terms.emplace_back(var(t, s), 1.0);
    lp.add_constraint(std::move(terms), Relation::kEqual, 1.0);
  }
  return lp;
}

double solve_no_menu_baseline(const SingleReceiverInstance& inst) {
  const LpSolution sol = solve_lp(build_no_menu_baseline_lp(inst));
  if (sol.status != LpStatus::kOptimal) {
    throw SolverFailure(std::string("baseline LP returned ") + to_string(sol.status));
  }
  return sol.objective;
}

json menu_to_json(const MenuSolution& solution) {
  json doc;
  doc["kind"] = "single_menu";
  doc["value"] = solution.value;
  doc["phi"] = solution.menu.phi;
  return doc;
}

MenuSolution menu_from_json(const json& doc) {
  try {
    if (doc.at("kind").get<std::string>() != "single_menu") {
      throw InvalidInstance("kind: expected \"single_menu\"");
    }
    MenuSolution out;
    out.value = doc.at("value").get<double>();
    out.menu.phi = doc.at("phi").get<std::vector<std::vector<std::vector<double>>>>();
    return out;
  } catch (const json::exception& e) {
    throw InvalidInstance(std::string("parse failure: ") + e.what());
  }
}

}  // namespace persuasion
