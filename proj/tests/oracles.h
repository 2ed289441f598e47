#pragma once

// Test-only reference computations. Nothing here calls into the solvers
// under test except where a function says so explicitly.

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "persuasion/instance.h"
#include "persuasion/lp.h"

namespace persuasion::testing {

// Solves A x = b (n x n) by Gaussian elimination with partial pivoting.
inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> a,
                                                       std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int i = col + 1; i < n; ++i) {
      if (std::abs(a[i][col]) > std::abs(a[piv][col])) piv = i;
    }
    if (std::abs(a[piv][col]) < 1e-10) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (int i = 0; i < n; ++i) {
      if (i == col) continue;
      const double f = a[i][col] / a[col][col];
      if (f == 0) continue;
      for (int j = col; j < n; ++j) a[i][j] -= f * a[col][j];
      b[i] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

// Exhaustive vertex enumeration for a bounded LP (all variable bounds
// finite). Returns nullopt when no feasible vertex exists.
inline std::optional<double> vertex_enumeration_optimum(const LinearProgram& lp, double tol = 1e-8) {
  const int n = lp.num_variables();
  struct Plane {
    std::vector<double> a;
    double b;
  };
  std::vector<Plane> equalities;
  std::vector<Plane> candidates;
  for (const auto& c : lp.constraints()) {
    Plane p{std::vector<double>(n, 0.0), c.rhs};
    for (const auto& [j, a] : c.terms) p.a[j] += a;
    (c.relation == Relation::kEqual ? equalities : candidates).push_back(p);
  }
  for (int j = 0; j < n; ++j) {
    Plane lo{std::vector<double>(n, 0.0), lp.variable(j).lower};
    lo.a[j] = 1;
    Plane hi{std::vector<double>(n, 0.0), lp.variable(j).upper};
    hi.a[j] = 1;
    candidates.push_back(lo);
    candidates.push_back(hi);
  }
  const int need = n - static_cast<int>(equalities.size());
  if (need < 0) return std::nullopt;  // not used by the tests
  std::optional<double> best;
  std::vector<int> pick(need);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == need) {
      std::vector<std::vector<double>> a;
      std::vector<double> b;
      for (const auto& e : equalities) {
        a.push_back(e.a);
        b.push_back(e.b);
      }
      for (int idx : pick) {
        a.push_back(candidates[idx].a);
        b.push_back(candidates[idx].b);
      }
      auto x = solve_square(a, b);
      if (!x) return;
      for (int j = 0; j < n; ++j) {
        if ((*x)[j] < lp.variable(j).lower - tol || (*x)[j] > lp.variable(j).upper + tol) return;
      }
      for (int i = 0; i < lp.num_constraints(); ++i) {
        const auto& c = lp.constraint(i);
        const double act = lp.row_activity(i, *x);
        if (c.relation == Relation::kLessEqual && act > c.rhs + tol) return;
        if (c.relation == Relation::kGreaterEqual && act < c.rhs - tol) return;
        if (c.relation == Relation::kEqual && std::abs(act - c.rhs) > tol) return;
      }
      const double v = lp.objective_value(*x);
      if (!best || v > *best) best = v;
      return;
    }
    for (int i = start; i < static_cast<int>(candidates.size()); ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

// Brute-force maximization of f_theta(R) + sum_{r in R} w_r: the smallest
// mask whose value is within 1e-12 of the maximum.
inline std::pair<Subset, double> brute_force_pricing(const SenderSetFunction& f, int theta,
                                                     const std::vector<double>& w) {
  const int n = f.num_receivers();
  std::vector<double> total(Subset{1} << n);
  double best = -1e300;
  for (Subset s = 0; s < total.size(); ++s) {
    double v = f.value(theta, s);
    for (int r = 0; r < n; ++r) {
      if (contains(s, r)) v += w[r];
    }
    total[s] = v;
    best = std::max(best, v);
  }
  for (Subset s = 0; s < total.size(); ++s) {
    if (total[s] >= best - 1e-12) return {s, total[s]};
  }
  return {0, total[0]};
}

// Classical private persuasion without types: one joint scheme over subsets
// per state with per-receiver obedience only. Requires one type each.
inline double private_persuasion_value(const MultiReceiverInstance& inst) {
  const int n = inst.num_receivers;
  const int d = inst.num_states();
  const Subset count = Subset{1} << n;
  LinearProgram lp;
  for (int t = 0; t < d; ++t) {
    for (Subset s = 0; s < count; ++s) lp.add_variable(inst.prior.mu[t] * inst.f.value(t, s), 0, 1);
  }
  auto var = [&](int t, Subset s) { return static_cast<int>(t * count + s); };
  for (int r = 0; r < n; ++r) {
    const auto& u = inst.u_recv[r][0];
    std::vector<std::pair<int, double>> play1;
    std::vector<std::pair<int, double>> play0;
    for (int t = 0; t < d; ++t) {
      const double gain = inst.prior.mu[t] * (u[t][1] - u[t][0]);
      for (Subset s = 0; s < count; ++s) {
        if (contains(s, r)) {
          play1.emplace_back(var(t, s), gain);
        } else {
          play0.emplace_back(var(t, s), -gain);
        }
      }
    }
    lp.add_constraint(play1, Relation::kGreaterEqual, 0.0);
    lp.add_constraint(play0, Relation::kGreaterEqual, 0.0);
  }
  for (int t = 0; t < d; ++t) {
    std::vector<std::pair<int, double>> terms;
    for (Subset s = 0; s < count; ++s) terms.emplace_back(var(t, s), 1.0);
    lp.add_constraint(terms, Relation::kEqual, 1.0);
  }
  return solve_lp(lp).objective;
}

// Multilinear extension straight from its definition.
inline double multilinear_by_definition(const SenderSetFunction& f, int theta,
                                        const std::vector<double>& z) {
  const int n = f.num_receivers();
  double total = 0;
  for (Subset s = 0; s < (Subset{1} << n); ++s) {
    double p = 1;
    for (int r = 0; r < n; ++r) p *= contains(s, r) ? z[r] : 1 - z[r];
    total += p * f.value(theta, s);
  }
  return total;
}

// Value of the two-state persuasion problem by concavification: the
// sender's value as a function of the posterior on state 1, with receiver
// tie-breaking in the sender's favor, concavified over a fine grid plus the
// exact receiver indifference points.
inline double two_state_concavification(const SingleReceiverInstance& inst) {
  const auto& u = inst.u_recv[0];
  const auto& us = inst.u_send;
  const int l = inst.num_actions;
  std::vector<double> points{0.0, 1.0};
  for (int a = 0; a < l; ++a) {
    for (int b = a + 1; b < l; ++b) {
      // p * (u[1][a]-u[1][b]) + (1-p) * (u[0][a]-u[0][b]) = 0
      const double d0 = u[0][a] - u[0][b];
      const double d1 = u[1][a] - u[1][b];
      if (std::abs(d1 - d0) > 1e-15) {
        const double p = d0 / (d0 - d1);
        if (p > 0 && p < 1) points.push_back(p);
      }
    }
  }
  for (int i = 1; i < 1000; ++i) points.push_back(i / 1000.0);
  auto value_at = [&](double p) {
    double best_recv = -1;
    for (int a = 0; a < l; ++a) best_recv = std::max(best_recv, (1 - p) * u[0][a] + p * u[1][a]);
    double best_send = -1;
    for (int a = 0; a < l; ++a) {
      const double r = (1 - p) * u[0][a] + p * u[1][a];
      if (r >= best_recv - 1e-12) best_send = std::max(best_send, (1 - p) * us[0][a] + p * us[1][a]);
    }
    return best_send;
  };
  const double prior = inst.prior.mu[1];
  // With two states the concave closure at the prior is attained by at most
  // two posteriors on either side.
  double best = value_at(prior);
  for (double lo : points) {
    if (lo > prior) continue;
    for (double hi : points) {
      if (hi < prior || hi == lo) continue;
      const double w = (prior - lo) / (hi - lo);
      best = std::max(best, (1 - w) * value_at(lo) + w * value_at(hi));
    }
  }
  return best;
}

}  // namespace persuasion::testing
