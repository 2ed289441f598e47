#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "persuasion/instance.h"
#include "persuasion/multi_exact.h"

namespace persuasion {

enum class DerivativeMode { kExact, kSampled };

std::string_view to_string(DerivativeMode mode);
DerivativeMode derivative_mode_from_string(std::string_view s);

struct SampledEstimate {
  double mean = 0;
  double std_error = 0;
};

// F_theta(z) = sum_R f_theta(R) prod_{r in R} z_r prod_{r not in R} (1 - z_r).
// Exact mode enumerates all subsets (n <= kMaxTableReceivers); sampled mode
// averages `samples` draws of R, deterministic in `seed`.
double multilinear_value(const SenderSetFunction& f, int theta, const std::vector<double>& z,
                         DerivativeMode mode = DerivativeMode::kExact, long samples = 0,
                         std::uint64_t seed = 0);
SampledEstimate multilinear_value_sampled(const SenderSetFunction& f, int theta,
                                          const std::vector<double>& z, long samples,
                                          std::uint64_t seed);

// Component r is E[f(R + r) - f(R)] with R drawn from z over the others.
std::vector<double> multilinear_gradient(const SenderSetFunction& f, int theta,
                                         const std::vector<double>& z,
                                         DerivativeMode mode = DerivativeMode::kExact,
                                         long samples = 0, std::uint64_t seed = 0);

struct ApproxParams {
  double epsilon = 0.05;
  // 0 picks ceil(beta / (epsilon / 2)), capped at max_q.
  int q = 0;
  int max_q = 512;
  double delta = 0.05;
  double iota = 0.05;
  DerivativeMode derivative_mode = DerivativeMode::kExact;
  std::uint64_t sample_seed = 0;
  // Samples per sampled estimate; 0 uses the Hoeffding count from iota.
  long samples = 0;

  // Throws std::invalid_argument naming the bad field.
  void validate() const;
};

struct FractionalSolution {
  int q = 0;
  MarginalMenus marginals;
  // y[profile][theta][j][r]
  std::vector<std::vector<std::vector<std::vector<double>>>> y;
  double value = 0;
  std::vector<double> step_objective;
};

// Block count used when params.q is 0, and whether the cap was hit.
int default_block_count(const MultiReceiverInstance& inst, const ApproxParams& params,
                        bool* capped = nullptr);

// Samples per derivative estimate in sampled rounding.
long hoeffding_samples(const MultiReceiverInstance& inst, int q, double iota);

FractionalSolution continuous_greedy(const MultiReceiverInstance& inst, const ApproxParams& params);

// Objective of a fractional point: sum mu lambda (1/q) sum_j F(y^j).
double fractional_value(const MultiReceiverInstance& inst, const FractionalSolution& frac,
                        const ApproxParams& params = {});

// Largest violation of the relaxed consistency rows, the [0, 1] bounds and
// the marginal constraints.
double fractional_residual(const MultiReceiverInstance& inst, const FractionalSolution& frac);

struct RoundingDetail {
  SenderStrategy strategy;
  double value_before_repair = 0;
  // Slots that were not binary after rounding, over all (profile, theta).
  long dropped_slots = 0;
};

RoundingDetail round_solution_detail(const MultiReceiverInstance& inst,
                                     const FractionalSolution& frac, const ApproxParams& params);
SenderStrategy round_solution(const MultiReceiverInstance& inst, const FractionalSolution& frac,
                              const ApproxParams& params);

// One Algorithm-1 pass on a single receiver column whose slots are already
// sorted by decreasing derivative.
std::vector<double> round_column(const std::vector<double>& sorted_column);

// Adds receivers to atoms (largest first, splitting the last) until every
// marginal reaches its target. phi is modified in place.
void repair_marginals(std::vector<JointEntry>& phi, const std::vector<double>& target);

SenderStrategy quniform_from_exact(const MultiReceiverInstance& inst, const SenderStrategy& exact,
                                   int q);

struct SubmodularTrace {
  int q = 0;
  long beta = 0;
  double delta = 0;
  long samples = 0;
  std::vector<double> greedy_objective;
  double fractional_value = 0;
  double rounding_loss_bound = 0;
  double value_before_repair = 0;
  double value = 0;
  std::vector<std::string> warnings;
};

struct SubmodularResult {
  SenderStrategy strategy;
  SubmodularTrace trace;
};

SubmodularResult solve_submodular(const MultiReceiverInstance& inst, double epsilon,
                                  ApproxParams params = {});

nlohmann::json trace_to_json(const SubmodularTrace& trace);

}  // namespace persuasion
