#pragma once

#include <vector>

#include "json.hpp"
#include "persuasion/instance.h"
#include "persuasion/multi_exact.h"

namespace persuasion {

// Largest product expansion enumerated by evaluate_independent.
inline constexpr long kMaxExpandedProfiles = 4096;

/// One distribution over subsets per state, shared by all type profiles,
/// together with the per-type marginal menus.
struct AggregateScheme {
  MarginalMenus marginals;
  // phi[theta], sparse, sorted by mask.
  std::vector<std::vector<JointEntry>> phi;
  double value = 0;
};

// Requires type_marginals and n <= kMaxTableReceivers.
AggregateScheme solve_aggregate(const MultiReceiverInstance& inst);

// Best scheme for one reported profile whose marginals match the aggregate
// menus. Returns phi[theta].
std::vector<std::vector<JointEntry>> recover_profile_scheme(const MultiReceiverInstance& inst,
                                                            const AggregateScheme& aggregate,
                                                            const std::vector<int>& profile);

double profile_scheme_value(const MultiReceiverInstance& inst,
                            const std::vector<std::vector<JointEntry>>& phi);

struct ProfileRecovery {
  std::vector<int> types;
  double prob = 0;
  double value = 0;
};

struct IndependentReport {
  double aggregate_value = 0;
  double mixture_value = 0;
  // aggregate - mixture
  double gap = 0;
  std::vector<ProfileRecovery> profiles;
};

IndependentReport evaluate_independent(const MultiReceiverInstance& inst, const AggregateScheme& aggregate);

struct AggregateResiduals {
  double consistency = 0;
  double normalization = 0;
  double bounds = 0;
  double marginals = 0;

  double max() const;
};

AggregateResiduals check_aggregate(const MultiReceiverInstance& inst, const AggregateScheme& aggregate);

// Largest violation of the marginal and normalization rows for one profile.
double profile_scheme_residual(const MultiReceiverInstance& inst, const AggregateScheme& aggregate,
                               const std::vector<int>& profile,
                               const std::vector<std::vector<JointEntry>>& phi);

nlohmann::json aggregate_to_json(const AggregateScheme& aggregate);
AggregateScheme aggregate_from_json(const MultiReceiverInstance& inst, const nlohmann::json& doc);
nlohmann::json profile_scheme_to_json(const std::vector<int>& profile, double value,
                                      const std::vector<std::vector<JointEntry>>& phi);
nlohmann::json report_to_json(const IndependentReport& report);

}  // namespace persuasion
