#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace persuasion {

// A set of receivers, one bit per receiver.
using Subset = std::uint64_t;

constexpr bool contains(Subset set, int r) { return (set >> r) & 1U; }
constexpr Subset full_set(int n) { return n >= 64 ? ~Subset{0} : (Subset{1} << n) - 1; }

inline constexpr double kProbabilityTolerance = 1e-9;
// Largest receiver count for which a dense subset table is materialized.
inline constexpr int kMaxTableReceivers = 12;
inline constexpr int kMaxEnumerationReceivers = 16;

struct StatePrior {
  std::vector<double> mu;

  int num_states() const { return static_cast<int>(mu.size()); }
  bool operator==(const StatePrior&) const = default;
};

struct SingleReceiverInstance {
  StatePrior prior;
  int num_actions = 0;
  int num_types = 0;
  std::vector<double> lambda;
  // u_recv[k][theta][a]
  std::vector<std::vector<std::vector<double>>> u_recv;
  // u_send[theta][a]
  std::vector<std::vector<double>> u_send;

  int num_states() const { return prior.num_states(); }
  bool operator==(const SingleReceiverInstance&) const = default;
};

enum class FunctionClass { kSubmodular, kSupermodular, kAnonymous, kGeneral };

std::string_view to_string(FunctionClass c);
FunctionClass function_class_from_string(std::string_view s);

// f_theta(R) stored as values[theta][R].
struct TableFunction {
  std::vector<std::vector<double>> values;
  bool operator==(const TableFunction&) const = default;
};

// f_theta(R) = g[theta][|R|].
struct AnonymousFunction {
  std::vector<std::vector<double>> g;
  bool operator==(const AnonymousFunction&) const = default;
};

struct CoverageState {
  std::vector<double> item_weights;
  // covers[r] lists the items receiver r covers.
  std::vector<std::vector<int>> covers;
  bool operator==(const CoverageState&) const = default;
};

// f_theta(R) = total weight of items covered by some r in R.
struct CoverageFunction {
  std::vector<CoverageState> states;
  bool operator==(const CoverageFunction&) const = default;
};

// f_theta(R) = sum over r in R of values[theta][r].
struct AdditiveFunction {
  std::vector<std::vector<double>> values;
  bool operator==(const AdditiveFunction&) const = default;
};

class SenderSetFunction {
 public:
  using Variant =
      std::variant<TableFunction, AnonymousFunction, CoverageFunction, AdditiveFunction>;

  SenderSetFunction() = default;
  SenderSetFunction(int num_receivers, Variant data, FunctionClass declared);

  int num_receivers() const { return num_receivers_; }
  int num_states() const;
  FunctionClass declared_class() const { return declared_; }
  const Variant& data() const { return data_; }
  std::string_view variant_name() const;

  double value(int theta, Subset set) const;

  // All 2^n values for one state; requires n <= kMaxEnumerationReceivers.
  std::vector<double> dense_values(int theta) const;

  bool operator==(const SenderSetFunction&) const = default;

 private:
  int num_receivers_ = 0;
  Variant data_;
  FunctionClass declared_ = FunctionClass::kGeneral;
};

struct TypeProfile {
  std::vector<int> types;
  double prob = 0;
  bool operator==(const TypeProfile&) const = default;
};

struct MultiReceiverInstance {
  StatePrior prior;
  int num_receivers = 0;
  std::vector<int> types_per_receiver;
  // u_recv[r][k][theta][a], a in {0, 1}
  std::vector<std::vector<std::vector<std::vector<double>>>> u_recv;
  SenderSetFunction f;
  std::vector<TypeProfile> type_dist;
  // Present when the type distribution is a product of these per-receiver
  // marginals (type_dist is then the product expansion).
  std::optional<std::vector<std::vector<double>>> type_marginals;

  int num_states() const { return prior.num_states(); }
  int support_size() const { return static_cast<int>(type_dist.size()); }
  bool operator==(const MultiReceiverInstance&) const = default;
};

using Instance = std::variant<SingleReceiverInstance, MultiReceiverInstance>;

// Invariant checks. Throw InvalidInstance naming the offending field.
void validate(const StatePrior& prior);
void validate(const SingleReceiverInstance& inst);
void validate(const SenderSetFunction& f);
void validate(const MultiReceiverInstance& inst);

struct SetFunctionClassification {
  bool monotone = false;
  bool submodular = false;
  bool supermodular = false;
  bool anonymous = false;
};

// Brute force over all subset pairs. Requires n <= kMaxTableReceivers.
SetFunctionClassification classify_set_function(const SenderSetFunction& f, int theta,
                                                 double tol = 1e-12);

enum class SetFunctionFamily { kAdditive, kCoverage, kAnonymousConcave, kAnonymousConvex, kTable };

std::string_view to_string(SetFunctionFamily family);
SetFunctionFamily family_from_string(std::string_view s);

SingleReceiverInstance generate_single(std::uint64_t seed, int num_states, int num_actions,
                                       int num_types);

struct MultiGeneratorOptions {
  int max_profiles = 16;
  // Emit a product-form type distribution (all profiles, with marginals).
  bool product_types = false;
};

MultiReceiverInstance generate_multi(std::uint64_t seed, int num_receivers,
                                     int types_per_receiver, int num_states,
                                     SetFunctionFamily family,
                                     const MultiGeneratorOptions& options = {});

// Builds the product-form multi instance from per-receiver type marginals,
// dropping zero-probability profiles.
MultiReceiverInstance with_product_types(MultiReceiverInstance base,
                                         const std::vector<std::vector<double>>& marginals);

nlohmann::json to_json(const SingleReceiverInstance& inst);
nlohmann::json to_json(const MultiReceiverInstance& inst);
nlohmann::json to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& doc);

Instance load_instance(const std::string& path);
void save_instance(const Instance& inst, const std::string& path);

// Shared helpers for reading and writing documents.
nlohmann::json read_json_file(const std::string& path);
void write_json_file(const nlohmann::json& doc, const std::string& path);

}  // namespace persuasion
