#pragma once

#include <string_view>
#include <vector>

#include "json.hpp"
#include "persuasion/instance.h"
#include "persuasion/lp.h"

namespace persuasion {

/// x[r][k][theta]: probability that receiver r, having reported type k, is
/// recommended a1 in state theta.
struct MarginalMenus {
  std::vector<std::vector<std::vector<double>>> x;
};

struct JointEntry {
  Subset mask = 0;
  double prob = 0;
  bool operator==(const JointEntry&) const = default;
};

/// Sparse distribution over the set of receivers recommended a1, indexed
/// [profile][theta] with profiles in the order of the instance's type_dist.
struct JointScheme {
  std::vector<std::vector<std::vector<JointEntry>>> phi;
};

struct SenderStrategy {
  MarginalMenus marginals;
  JointScheme joint;
  double value = 0;
};

// Expected sender utility of the joint scheme.
double strategy_value(const MultiReceiverInstance& inst, const JointScheme& joint);

// Row and column bookkeeping for the multi-receiver LP over a chosen set of
// subset columns per (profile, state).
class Lp5Layout {
 public:
  explicit Lp5Layout(const MultiReceiverInstance& inst);

  int num_receivers() const { return n_; }
  int num_states() const { return d_; }
  int support_size() const { return p_; }

  // Variables in the order x, l, then subset columns.
  int x(int r, int k, int theta) const { return x_offset_[r] + k * d_ + theta; }
  int l(int r, int k, int k_other, int action) const;
  int num_fixed_variables() const { return fixed_vars_; }

  int consistency_row(int profile, int r, int theta) const { return (profile * n_ + r) * d_ + theta; }
  int normalization_row(int profile, int theta) const { return norm_offset_ + profile * d_ + theta; }
  int num_rows() const { return norm_offset_ + p_ * d_; }

 private:
  int n_ = 0;
  int d_ = 0;
  int p_ = 0;
  std::vector<int> types_;
  std::vector<int> x_offset_;
  std::vector<int> l_offset_;
  int fixed_vars_ = 0;
  int norm_offset_ = 0;
};

// Constraint rows emitted by build_full_lp, from the dimensions alone.
long lp5_constraint_count(const MultiReceiverInstance& inst);

// columns[profile][theta] lists the subsets admitted as variables. Column
// variables follow the fixed ones in (profile, theta, listed order).
LinearProgram build_restricted_lp(const MultiReceiverInstance& inst,
                                  const std::vector<std::vector<std::vector<Subset>>>& columns);

// Only the marginal variables (x and l) with the IC, best-response and
// persuasiveness rows; the building block of the relaxed program.
LinearProgram build_marginal_polytope(const MultiReceiverInstance& inst);

// Every subset as a column. Requires n <= kMaxTableReceivers.
LinearProgram build_full_lp(const MultiReceiverInstance& inst);

SenderStrategy solve_exact(const MultiReceiverInstance& inst);

enum class OracleMode { kBruteForce, kAnonymous, kAdditive };

std::string_view to_string(OracleMode mode);
OracleMode oracle_mode_from_string(std::string_view s);

struct PricingResult {
  Subset set = 0;
  double value = 0;
};

// max over R of f_theta(R) + sum_{r in R} w_r; ties go to the smallest mask.
PricingResult pricing_oracle(const SenderSetFunction& f, int theta, const std::vector<double>& w,
                             OracleMode mode);

// Oracle used when none is requested: the closed forms for anonymous and
// additive functions, brute force otherwise (n <= kMaxEnumerationReceivers).
OracleMode default_oracle_mode(const SenderSetFunction& f);
bool oracle_available(const SenderSetFunction& f, OracleMode mode);

struct ColumnGenerationResult {
  SenderStrategy strategy;
  int iterations = 0;
  // Master objective after each solve.
  std::vector<double> master_values;
  // Final duals of the consistency rows [profile][r][theta] and of the
  // normalization rows [profile][theta].
  std::vector<std::vector<std::vector<double>>> consistency_duals;
  std::vector<std::vector<double>> normalization_duals;
  std::vector<std::vector<std::vector<Subset>>> columns;
  long initial_columns = 0;
};

ColumnGenerationResult run_column_generation(const MultiReceiverInstance& inst, OracleMode mode,
                                             double tol = 1e-9);
SenderStrategy solve_column_generation(const MultiReceiverInstance& inst, OracleMode mode,
                                       double tol = 1e-9);

struct StrategyResiduals {
  double consistency = 0;
  double ic = 0;
  double persuasiveness = 0;
  double normalization = 0;
  double bounds = 0;
  double value = 0;

  double max() const;
};

// Residuals of the marginal menus alone: IC with explicit best responses
// and persuasiveness.
StrategyResiduals check_marginals(const MultiReceiverInstance& inst, const MarginalMenus& menus);
StrategyResiduals check_strategy(const MultiReceiverInstance& inst, const SenderStrategy& strategy);

nlohmann::json strategy_to_json(const MultiReceiverInstance& inst, const SenderStrategy& strategy);
SenderStrategy strategy_from_json(const MultiReceiverInstance& inst, const nlohmann::json& doc);

}  // namespace persuasion
