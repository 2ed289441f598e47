#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "persuasion/independent_types.h"
#include "persuasion/instance.h"
#include "persuasion/multi_exact.h"
#include "persuasion/single_receiver.h"

namespace persuasion {

struct SimulationReport {
  long samples = 0;
  double empirical_value = 0;
  double std_error = 0;
  // Fraction of samples in which every receiver reported truthfully.
  double truthful_rate = 0;
  // Single receiver: per true type. Multiple receivers: per receiver.
  std::vector<double> truthful_by_group;
  // Recommendations whose probability under the reported scheme was zero.
  long zero_probability_branches = 0;
};

SimulationReport simulate_interaction(const SingleReceiverInstance& inst, const SignalingMenu& menu,
                                      long samples, std::uint64_t seed);
SimulationReport simulate_interaction(const MultiReceiverInstance& inst, const SenderStrategy& strategy,
                                      long samples, std::uint64_t seed);

// Receiver r of true type k: the report maximizing expected utility under the
// marginal menus, ties to the truth, then to more a1 recommendations, then
// to the lowest index.
int best_report(const MultiReceiverInstance& inst, const MarginalMenus& menus, int r, int k);
int best_report(const SingleReceiverInstance& inst, const SignalingMenu& menu, int k);

// Expected utility of receiver r with true type k reporting k_reported.
double report_utility(const MultiReceiverInstance& inst, const MarginalMenus& menus, int r, int k,
                      int k_reported);

struct ResidualReport {
  std::map<std::string, double> families;
  double max() const;
};

ResidualReport residual_report(const SingleReceiverInstance& inst, const SignalingMenu& menu);
ResidualReport residual_report(const MultiReceiverInstance& inst, const SenderStrategy& strategy);
ResidualReport residual_report(const MultiReceiverInstance& inst, const AggregateScheme& aggregate);

nlohmann::json simulation_to_json(const SimulationReport& report);
nlohmann::json residuals_to_json(const ResidualReport& report);

}  // namespace persuasion
