#pragma once

#include <vector>

#include "json.hpp"
#include "persuasion/instance.h"
#include "persuasion/lp.h"

namespace persuasion {

// Receiver tie sets are formed within this tolerance.
inline constexpr double kTieTolerance = 1e-9;

/// A menu of direct schemes: phi[k][theta][a] is the probability of
/// recommending action a in state theta to a receiver who reported type k.
struct SignalingMenu {
  std::vector<std::vector<std::vector<double>>> phi;

  int num_types() const { return static_cast<int>(phi.size()); }
};

struct Posterior {
  std::vector<double> xi;
};

// Bayes update for signal s of a single scheme phi[theta][s]. Throws
// std::domain_error when the signal has (numerically) zero probability.
Posterior posterior_of_signal(const SingleReceiverInstance& inst,
                              const std::vector<std::vector<double>>& scheme, int signal);

// Receiver k's action at posterior xi: best for the receiver, ties (within
// kTieTolerance) broken for the sender, then by lowest index.
int best_response(const SingleReceiverInstance& inst, int type, const Posterior& xi);

// Variable layout of the direct-menu LP.
struct DirectMenuLayout {
  int num_types = 0;
  int num_states = 0;
  int num_actions = 0;

  int phi(int k, int theta, int a) const { return (k * num_states + theta) * num_actions + a; }
  int num_phi() const { return num_types * num_states * num_actions; }
  // l^{k,k'}_a for k != k'.
  int l(int k, int k_other, int a) const {
    const int pair = k * (num_types - 1) + (k_other < k ? k_other : k_other - 1);
    return num_phi() + pair * num_actions + a;
  }
  int num_variables() const { return num_phi() + num_types * (num_types - 1) * num_actions; }
};

// Builds the LP over direct persuasive menus with truthful-report
// constraints linearized through the auxiliary l variables. Row groups, in
// order: IC aggregation (k != k'), l lower bounds (k != k', a, a'),
// persuasiveness (k, a, a'), row sums (k, theta).
LinearProgram build_direct_menu_lp(const SingleReceiverInstance& inst);
DirectMenuLayout direct_menu_layout(const SingleReceiverInstance& inst);

struct MenuSolution {
  SignalingMenu menu;
  double value = 0;
};

MenuSolution solve_optimal_menu(const SingleReceiverInstance& inst);

struct MenuEvaluation {
  double value = 0;
  std::vector<int> reported_type;
  // receiver_utility[k][k']: utility of true type k reporting k'.
  std::vector<std::vector<double>> receiver_utility;
  // sender_utility[k][k']: sender's expected utility in the same event.
  std::vector<std::vector<double>> sender_utility;
};

// Plays the reporting game against the menu with full best responses.
MenuEvaluation evaluate_menu(const SingleReceiverInstance& inst, const SignalingMenu& menu,
                             double tol = kTieTolerance);

struct MenuResiduals {
  double ic = 0;
  double persuasiveness = 0;
  double row_sum = 0;
  double bounds = 0;

  double max() const;
};

MenuResiduals check_menu(const SingleReceiverInstance& inst, const SignalingMenu& menu);

// Optimal single direct scheme without type reporting: one signal per
// action profile (one action per type), obedient for every type at once.
// Requires actions^types <= kMaxBaselineSignals.
inline constexpr long kMaxBaselineSignals = 4096;
double solve_no_menu_baseline(const SingleReceiverInstance& inst);
LinearProgram build_no_menu_baseline_lp(const SingleReceiverInstance& inst);

nlohmann::json menu_to_json(const MenuSolution& solution);
MenuSolution menu_from_json(const nlohmann::json& doc);

}  // namespace persuasion
