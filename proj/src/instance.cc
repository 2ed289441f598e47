#include "persuasion/instance.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "persuasion/errors.h"
#include "persuasion/rng.h"

namespace persuasion {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& reason) {
  throw InvalidInstance(field + ": " + reason);
}

void check_probability_vector(const std::vector<double>& p, const std::string& field) {
  if (p.empty()) fail(field, "empty distribution");
  double sum = 0;
  for (double v : p) {
    if (!std::isfinite(v)) fail(field, "non-finite probability");
    if (v < 0) fail(field, "negative probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance) fail(field, "probabilities do not sum to 1");
}

void check_payoff(double v, const std::string& field) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) fail(field, "payoff out of [0,1]");
}

double positive_floor(CounterRng& rng, double floor) { return std::max(rng.uniform(), floor); }

std::vector<double> normalized(std::vector<double> v) {
  const double sum = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= sum;
  return v;
}

}  // namespace

std::string_view to_string(FunctionClass c) {
  switch (c) {
    case FunctionClass::kSubmodular:
      return "submodular";
    case FunctionClass::kSupermodular:
      return "supermodular";
    case FunctionClass::kAnonymous:
      return "anonymous";
    case FunctionClass::kGeneral:
      return "general";
  }
  return "general";
}

FunctionClass function_class_from_string(std::string_view s) {
  if (s == "submodular") return FunctionClass::kSubmodular;
  if (s == "supermodular") return FunctionClass::kSupermodular;
  if (s == "anonymous") return FunctionClass::kAnonymous;
  if (s == "general") return FunctionClass::kGeneral;
  throw InvalidInstance("set_function.declared_class: unknown class '" + std::string(s) + "'");
}

std::string_view to_string(SetFunctionFamily family) {
  switch (family) {
    case SetFunctionFamily::kAdditive:
      return "additive";
    case SetFunctionFamily::kCoverage:
      return "coverage";
    case SetFunctionFamily::kAnonymousConcave:
      return "anonymous-concave";
    case SetFunctionFamily::kAnonymousConvex:
      return "anonymous-convex";
    case SetFunctionFamily::kTable:
      return "table";
  }
  return "table";
}

SetFunctionFamily family_from_string(std::string_view s) {
  if (s == "additive") return SetFunctionFamily::kAdditive;
  if (s == "coverage") return SetFunctionFamily::kCoverage;
  if (s == "anonymous-concave") return SetFunctionFamily::kAnonymousConcave;
  if (s == "anonymous-convex") return SetFunctionFamily::kAnonymousConvex;
  if (s == "table") return SetFunctionFamily::kTable;
  throw std::invalid_argument("unknown set-function family '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// SenderSetFunction

SenderSetFunction::SenderSetFunction(int num_receivers, Variant data, FunctionClass declared)
    : num_receivers_(num_receivers), data_(std::move(data)), declared_(declared) {}

int SenderSetFunction::num_states() const {
  return std::visit(
      [](const auto& d) -> int {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, TableFunction>) return static_cast<int>(d.values.size());
        if constexpr (std::is_same_v<T, AnonymousFunction>) return static_cast<int>(d.g.size());
        if constexpr (std::is_same_v<T, CoverageFunction>) return static_cast<int>(d.states.size());
        if constexpr (std::is_same_v<T, AdditiveFunction>) return static_cast<int>(d.values.size());
      },
      data_);
}

std::string_view SenderSetFunction::variant_name() const {
  switch (data_.index()) {
    case 0:
      return "table";
    case 1:
      return "anonymous";
    case 2:
      return "coverage";
    default:
      return "additive";
  }
}

double SenderSetFunction::value(int theta, Subset set) const {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, TableFunction>) {
          return d.values[theta][set];
        } else if constexpr (std::is_same_v<T, AnonymousFunction>) {
          return d.g[theta][std::popcount(set)];
        } else if constexpr (std::is_same_v<T, CoverageFunction>) {
          const CoverageState& state = d.states[theta];
          std::vector<char> covered(state.item_weights.size(), 0);
          for (int r = 0; r < num_receivers_; ++r) {
            if (!contains(set, r)) continue;
            for (int item : state.covers[r]) covered[item] = 1;
          }
          double total = 0;
          for (std::size_t i = 0; i < covered.size(); ++i) {
            if (covered[i]) total += state.item_weights[i];
          }
          return total;
        } else {
          double total = 0;
          for (int r = 0; r < num_receivers_; ++r) {
            if (contains(set, r)) total += d.values[theta][r];
          }
          return total;
        }
      },
      data_);
}

std::vector<double> SenderSetFunction::dense_values(int theta) const {
  if (num_receivers_ > kMaxEnumerationReceivers) {
    throw CapacityError("dense subset table needs n <= " +
                        std::to_string(kMaxEnumerationReceivers));
  }
  if (const auto* table = std::get_if<TableFunction>(&data_)) return table->values[theta];
  const Subset count = Subset{1} << num_receivers_;
  std::vector<double> out(count);
  for (Subset s = 0; s < count; ++s) out[s] = value(theta, s);
  return out;
}

// ---------------------------------------------------------------------------
// Validation

void validate(const StatePrior& prior) {
  if (prior.mu.empty()) fail("prior", "no states");
  for (double v : prior.mu) {
    if (!std::isfinite(v)) fail("prior", "non-finite probability");
    if (v <= 0) fail("prior", "prior not interior");
  }
  check_probability_vector(prior.mu, "prior");
}

void validate(const SingleReceiverInstance& inst) {
  validate(inst.prior);
  const int d = inst.num_states();
  if (inst.num_actions < 1) fail("actions", "need at least one action");
  if (inst.num_types < 1) fail("types", "need at least one type");
  if (static_cast<int>(inst.lambda.size()) != inst.num_types) fail("lambda", "size != types");
  check_probability_vector(inst.lambda, "lambda");
  if (static_cast<int>(inst.u_recv.size()) != inst.num_types) fail("u_recv", "size != types");
  for (int k = 0; k < inst.num_types; ++k) {
    if (static_cast<int>(inst.u_recv[k].size()) != d) fail("u_recv", "state dimension mismatch");
    for (const auto& row : inst.u_recv[k]) {
      if (static_cast<int>(row.size()) != inst.num_actions) {
        fail("u_recv", "action dimension mismatch");
      }
      for (double v : row) check_payoff(v, "u_recv");
    }
  }
  if (static_cast<int>(inst.u_send.size()) != d) fail("u_send", "state dimension mismatch");
  for (const auto& row : inst.u_send) {
    if (static_cast<int>(row.size()) != inst.num_actions) fail("u_send", "action dimension mismatch");
    for (double v : row) check_payoff(v, "u_send");
  }
}

void validate(const SenderSetFunction& f) {
  const int n = f.num_receivers();
  const std::string field = "set_function";
  if (n < 1 || n > 63) fail(field, "receiver count out of range");
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, TableFunction>) {
          if (n > kMaxTableReceivers) fail(field, "table variant needs n <= 12");
          const Subset count = Subset{1} << n;
          for (const auto& values : d.values) {
            if (values.size() != count) fail(field, "table needs 2^n entries per state");
            if (std::abs(values[0]) > 1e-12) fail(field, "f(empty) must be 0");
            for (Subset s = 0; s < count; ++s) {
              if (!std::isfinite(values[s]) || values[s] < 0 || values[s] > 1) {
                fail(field, "value out of [0,1]");
              }
              for (int r = 0; r < n; ++r) {
                if (!contains(s, r) && values[s | (Subset{1} << r)] < values[s] - 1e-12) {
                  fail(field, "not monotone non-decreasing");
                }
              }
            }
          }
        } else if constexpr (std::is_same_v<T, AnonymousFunction>) {
          for (const auto& g : d.g) {
            if (static_cast<int>(g.size()) != n + 1) fail(field, "anonymous needs n+1 entries");
            if (std::abs(g[0]) > 1e-12) fail(field, "f(empty) must be 0");
            for (int i = 0; i <= n; ++i) {
              if (!std::isfinite(g[i]) || g[i] < 0 || g[i] > 1) fail(field, "value out of [0,1]");
              if (i > 0 && g[i] < g[i - 1] - 1e-12) fail(field, "not monotone non-decreasing");
            }
          }
        } else if constexpr (std::is_same_v<T, CoverageFunction>) {
          for (const auto& state : d.states) {
            if (static_cast<int>(state.covers.size()) != n) fail(field, "covers needs n lists");
            for (double w : state.item_weights) {
              if (!std::isfinite(w) || w < 0) fail(field, "negative item weight");
            }
            std::vector<char> covered(state.item_weights.size(), 0);
            for (const auto& items : state.covers) {
              for (int item : items) {
                if (item < 0 || item >= static_cast<int>(state.item_weights.size())) {
                  fail(field, "covered item index out of range");
                }
                covered[item] = 1;
              }
            }
            double total = 0;
            for (std::size_t i = 0; i < covered.size(); ++i) {
              if (covered[i]) total += state.item_weights[i];
            }
            if (total > 1 + 1e-9) fail(field, "value out of [0,1]");
          }
        } else {
          for (const auto& values : d.values) {
            if (static_cast<int>(values.size()) != n) fail(field, "additive needs n values");
            double total = 0;
            for (double v : values) {
              if (!std::isfinite(v) || v < 0) fail(field, "not monotone non-decreasing");
              total += v;
            }
            if (total > 1 + 1e-9) fail(field, "value out of [0,1]");
          }
        }
      },
      f.data());
}

void validate(const MultiReceiverInstance& inst) {
  validate(inst.prior);
  const int n = inst.num_receivers;
  const int d = inst.num_states();
  if (n < 1 || n > 63) fail("receivers", "receiver count out of range");
  if (static_cast<int>(inst.types_per_receiver.size()) != n) fail("m_r", "size != receivers");
  for (int m : inst.types_per_receiver) {
    if (m < 1) fail("m_r", "every receiver needs at least one type");
  }
  if (static_cast<int>(inst.u_recv.size()) != n) fail("u_recv", "size != receivers");
  for (int r = 0; r < n; ++r) {
    if (static_cast<int>(inst.u_recv[r].size()) != inst.types_per_receiver[r]) {
      fail("u_recv", "type dimension mismatch");
    }
    for (const auto& per_type : inst.u_recv[r]) {
      if (static_cast<int>(per_type.size()) != d) fail("u_recv", "state dimension mismatch");
      for (const auto& row : per_type) {
        if (row.size() != 2) fail("u_recv", "binary actions expected");
        for (double v : row) check_payoff(v, "u_recv");
      }
    }
  }
  if (inst.f.num_receivers() != n) fail("set_function", "receiver count mismatch");
  if (inst.f.num_states() != d) fail("set_function", "state count mismatch");
  validate(inst.f);

  if (inst.type_dist.empty()) fail("type_dist", "empty support");
  double total = 0;
  std::set<std::vector<int>> seen;
  for (const auto& profile : inst.type_dist) {
    if (static_cast<int>(profile.types.size()) != n) fail("type_dist", "profile length != receivers");
    for (int r = 0; r < n; ++r) {
      if (profile.types[r] < 0 || profile.types[r] >= inst.types_per_receiver[r]) {
        fail("type_dist", "profile entry out of type range");
      }
    }
    if (!std::isfinite(profile.prob) || profile.prob <= 0) fail("type_dist", "non-positive probability");
    if (!seen.insert(profile.types).second) fail("type_dist", "duplicate profile");
    total += profile.prob;
  }
  if (std::abs(total - 1) > kProbabilityTolerance) fail("type_dist", "probabilities do not sum to 1");

  if (inst.type_marginals) {
    const auto& marginals = *inst.type_marginals;
    if (static_cast<int>(marginals.size()) != n) fail("type_marginals", "size != receivers");
    std::size_t positive_profiles = 1;
    for (int r = 0; r < n; ++r) {
      if (static_cast<int>(marginals[r].size()) != inst.types_per_receiver[r]) {
        fail("type_marginals", "type dimension mismatch");
      }
      check_probability_vector(marginals[r], "type_marginals");
      positive_profiles *= static_cast<std::size_t>(
          std::count_if(marginals[r].begin(), marginals[r].end(), [](double p) { return p > 0; }));
    }
    if (positive_profiles != inst.type_dist.size()) fail("type_dist", "not the product expansion");
    for (const auto& profile : inst.type_dist) {
      double p = 1;
      for (int r = 0; r < n; ++r) p *= marginals[r][profile.types[r]];
      if (std::abs(p - profile.prob) > kProbabilityTolerance) {
        fail("type_dist", "not the product expansion");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Classification

SetFunctionClassification classify_set_function(const SenderSetFunction& f, int theta, double tol) {
  const int n = f.num_receivers();
  if (n > kMaxTableReceivers) throw CapacityError("exhaustive classification needs n <= 12");
  const std::vector<double> v = f.dense_values(theta);
  const Subset count = Subset{1} << n;

  SetFunctionClassification out{true, true, true, true};
  std::vector<double> by_cardinality(n + 1, -1);
  for (Subset a = 0; a < count; ++a) {
    const int c = std::popcount(a);
    if (by_cardinality[c] < 0) {
      by_cardinality[c] = v[a];
    } else if (std::abs(by_cardinality[c] - v[a]) > tol) {
      out.anonymous = false;
    }
    for (Subset b = 0; b < count; ++b) {
      if ((a & b) == a && v[a] > v[b] + tol) out.monotone = false;
      const double lhs = v[a & b] + v[a | b];
      const double rhs = v[a] + v[b];
      if (lhs > rhs + tol) out.submodular = false;
      if (lhs < rhs - tol) out.supermodular = false;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generators

SingleReceiverInstance generate_single(std::uint64_t seed, int num_states, int num_actions,
                                       int num_types) {
  if (num_states < 1 || num_actions < 1 || num_types < 1) {
    throw std::invalid_argument("generate_single: dimensions must be >= 1");
  }
  CounterRng rng(derive_seed(seed, "generate_single"), 0);
  SingleReceiverInstance inst;
  inst.num_actions = num_actions;
  inst.num_types = num_types;
  std::vector<double> mu(num_states);
  for (double& p : mu) p = positive_floor(rng, 0.05);
  inst.prior.mu = normalized(std::move(mu));
  std::vector<double> lambda(num_types);
  for (double& p : lambda) p = positive_floor(rng, 0.05);
  inst.lambda = normalized(std::move(lambda));
  inst.u_recv.assign(num_types, std::vector<std::vector<double>>(
                                    num_states, std::vector<double>(num_actions)));
  for (auto& per_type : inst.u_recv) {
    for (auto& row : per_type) {
      for (double& u : row) u = rng.uniform();
    }
  }
  inst.u_send.assign(num_states, std::vector<double>(num_actions));
  for (auto& row : inst.u_send) {
    for (double& u : row) u = rng.uniform();
  }
  return inst;
}

namespace {

SenderSetFunction generate_set_function(CounterRng& rng, int n, int d, SetFunctionFamily family) {
  switch (family) {
    case SetFunctionFamily::kAdditive: {
      AdditiveFunction f;
      for (int t = 0; t < d; ++t) {
        std::vector<double> v(n);
        for (double& x : v) x = 0.05 + 0.95 * rng.uniform();
        f.values.push_back(normalized(std::move(v)));
      }
      return {n, f, FunctionClass::kSubmodular};
    }
    case SetFunctionFamily::kCoverage: {
      CoverageFunction f;
      const int items = std::max(2, 2 * n);
      for (int t = 0; t < d; ++t) {
        CoverageState state;
        state.item_weights.resize(items);
        for (double& w : state.item_weights) w = 0.1 + 0.9 * rng.uniform();
        state.covers.resize(n);
        std::vector<char> covered(items, 0);
        for (int r = 0; r < n; ++r) {
          for (int i = 0; i < items; ++i) {
            if (rng.uniform() < 0.35) state.covers[r].push_back(i);
          }
          if (state.covers[r].empty()) {
            state.covers[r].push_back(static_cast<int>(rng.next_u64() % items));
          }
          for (int i : state.covers[r]) covered[i] = 1;
        }
        double total = 0;
        for (int i = 0; i < items; ++i) {
          if (covered[i]) total += state.item_weights[i];
        }
        for (int i = 0; i < items; ++i) {
          state.item_weights[i] = covered[i] ? state.item_weights[i] / total : 0.0;
        }
        f.states.push_back(std::move(state));
      }
      return {n, f, FunctionClass::kSubmodular};
    }
    case SetFunctionFamily::kAnonymousConcave: {
      AnonymousFunction f;
      for (int t = 0; t < d; ++t) {
        std::vector<double> inc(n);
        for (double& x : inc) x = 0.05 + 0.95 * rng.uniform();
        std::sort(inc.begin(), inc.end(), std::greater<>());
        std::vector<double> g(n + 1, 0.0);
        for (int i = 0; i < n; ++i) g[i + 1] = g[i] + inc[i];
        const double top = g[n];
        for (double& x : g) x /= top;
        f.g.push_back(std::move(g));
      }
      return {n, f, FunctionClass::kAnonymous};
    }
    case SetFunctionFamily::kAnonymousConvex: {
      AnonymousFunction f;
      std::vector<double> g(n + 1);
      for (int i = 0; i <= n; ++i) g[i] = (static_cast<double>(i) / n) * (static_cast<double>(i) / n);
      f.g.assign(d, g);
      return {n, f, FunctionClass::kAnonymous};
    }
    case SetFunctionFamily::kTable: {
      if (n > kMaxTableReceivers) throw CapacityError("table family needs n <= 12");
      TableFunction f;
      const Subset count = Subset{1} << n;
      for (int t = 0; t < d; ++t) {
        std::vector<double> v(count, 0.0);
        for (Subset s = 1; s < count; ++s) {
          double base = 0;
          for (int r = 0; r < n; ++r) {
            if (contains(s, r)) base = std::max(base, v[s & ~(Subset{1} << r)]);
          }
          v[s] = base + rng.uniform() / n;
        }
        const double top = v[count - 1];
        for (double& x : v) x /= top;
        f.values.push_back(std::move(v));
      }
      return {n, f, FunctionClass::kGeneral};
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

MultiReceiverInstance generate_multi(std::uint64_t seed, int num_receivers,
                                     int types_per_receiver, int num_states,
                                     SetFunctionFamily family,
                                     const MultiGeneratorOptions& options) {
  if (num_receivers < 1 || num_receivers > 63 || types_per_receiver < 1 || num_states < 1) {
    throw std::invalid_argument("generate_multi: dimensions out of range");
  }
  if (family == SetFunctionFamily::kTable && num_receivers > kMaxTableReceivers) {
    throw CapacityError("table family needs n <= 12");
  }
  CounterRng rng(derive_seed(seed, "generate_multi"), 0);
  const int n = num_receivers;
  const int d = num_states;
  MultiReceiverInstance inst;
  inst.num_receivers = n;
  inst.types_per_receiver.assign(n, types_per_receiver);
  std::vector<double> mu(d);
  for (double& p : mu) p = positive_floor(rng, 0.05);
  inst.prior.mu = normalized(std::move(mu));
  inst.u_recv.assign(n, std::vector<std::vector<std::vector<double>>>(
                            types_per_receiver,
                            std::vector<std::vector<double>>(d, std::vector<double>(2))));
  for (auto& per_receiver : inst.u_recv) {
    for (auto& per_type : per_receiver) {
      for (auto& row : per_type) {
        for (double& u : row) u = rng.uniform();
      }
    }
  }
  inst.f = generate_set_function(rng, n, d, family);

  // Number of type profiles, saturating well above any cap we use.
  double total_profiles = std::pow(static_cast<double>(types_per_receiver), n);
  auto decode = [&](std::uint64_t index) {
    std::vector<int> types(n);
    for (int r = 0; r < n; ++r) {
      types[r] = static_cast<int>(index % types_per_receiver);
      index /= types_per_receiver;
    }
    return types;
  };

  if (options.product_types) {
    if (total_profiles > 4096) throw CapacityError("product type expansion needs <= 4096 profiles");
    std::vector<std::vector<double>> marginals(n);
    for (auto& m : marginals) {
      m.resize(types_per_receiver);
      for (double& p : m) p = positive_floor(rng, 0.05);
      m = normalized(std::move(m));
    }
    return with_product_types(std::move(inst), marginals);
  }

  const int count = static_cast<int>(
      std::min<double>(total_profiles, std::max(1, options.max_profiles)));
  std::set<std::vector<int>> chosen;
  if (total_profiles <= 4096) {
    std::vector<std::uint64_t> all(static_cast<std::size_t>(total_profiles));
    std::iota(all.begin(), all.end(), 0);
    for (int i = 0; i < count; ++i) {
      const std::size_t j = i + rng.next_u64() % (all.size() - i);
      std::swap(all[i], all[j]);
      chosen.insert(decode(all[i]));
    }
  } else {
    while (static_cast<int>(chosen.size()) < count) {
      std::vector<int> types(n);
      for (int& t : types) t = static_cast<int>(rng.next_u64() % types_per_receiver);
      chosen.insert(std::move(types));
    }
  }
  std::vector<double> probs(count);
  for (double& p : probs) p = positive_floor(rng, 0.05);
  probs = normalized(std::move(probs));
  int i = 0;
  for (const auto& types : chosen) inst.type_dist.push_back({types, probs[i++]});
  return inst;
}

MultiReceiverInstance with_product_types(MultiReceiverInstance base,
                                         const std::vector<std::vector<double>>& marginals) {
  const int n = base.num_receivers;
  base.type_dist.clear();
  std::vector<int> types(n, 0);
  while (true) {
    double p = 1;
    for (int r = 0; r < n; ++r) p *= marginals[r][types[r]];
    if (p > 0) base.type_dist.push_back({types, p});
    int r = 0;
    while (r < n && ++types[r] == base.types_per_receiver[r]) types[r++] = 0;
    if (r == n) break;
  }
  base.type_marginals = marginals;
  return base;
}

// ---------------------------------------------------------------------------
// Serialization

json to_json(const SingleReceiverInstance& inst) {
  json doc;
  doc["kind"] = "single";
  doc["prior"] = inst.prior.mu;
  doc["actions"] = inst.num_actions;
  doc["types"] = inst.num_types;
  doc["lambda"] = inst.lambda;
  doc["u_recv"] = inst.u_recv;
  doc["u_send"] = inst.u_send;
  return doc;
}

namespace {

json set_function_to_json(const SenderSetFunction& f) {
  json doc;
  doc["variant"] = f.variant_name();
  doc["declared_class"] = to_string(f.declared_class());
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, TableFunction>) {
          doc["data"] = d.values;
        } else if constexpr (std::is_same_v<T, AnonymousFunction>) {
          doc["data"] = d.g;
        } else if constexpr (std::is_same_v<T, CoverageFunction>) {
          json states = json::array();
          for (const auto& s : d.states) states.push_back({{"weights", s.item_weights}, {"covers", s.covers}});
          doc["data"] = states;
        } else {
          doc["data"] = d.values;
        }
      },
      f.data());
  return doc;
}

SenderSetFunction set_function_from_json(const json& doc, int n) {
  const std::string variant = doc.at("variant").get<std::string>();
  const FunctionClass declared = doc.contains("declared_class")
                                     ? function_class_from_string(doc.at("declared_class").get<std::string>())
                                     : FunctionClass::kGeneral;
  const json& data = doc.at("data");
  if (variant == "table") {
    return {n, TableFunction{data.get<std::vector<std::vector<double>>>()}, declared};
  }
  if (variant == "anonymous") {
    return {n, AnonymousFunction{data.get<std::vector<std::vector<double>>>()}, declared};
  }
  if (variant == "additive") {
    return {n, AdditiveFunction{data.get<std::vector<std::vector<double>>>()}, declared};
  }
  if (variant == "coverage") {
    CoverageFunction f;
    for (const auto& s : data) {
      f.states.push_back({s.at("weights").get<std::vector<double>>(),
                          s.at("covers").get<std::vector<std::vector<int>>>()});
    }
    return {n, f, declared};
  }
  throw InvalidInstance("set_function.variant: unknown variant '" + variant + "'");
}

}  // namespace

json to_json(const MultiReceiverInstance& inst) {
  json doc;
  doc["kind"] = "multi";
  doc["prior"] = inst.prior.mu;
  doc["receivers"] = inst.num_receivers;
  doc["m_r"] = inst.types_per_receiver;
  doc["u_recv"] = inst.u_recv;
  doc["set_function"] = set_function_to_json(inst.f);
  json dist = json::array();
  for (const auto& p : inst.type_dist) dist.push_back({{"profile", p.types}, {"prob", p.prob}});
  doc["type_dist"] = dist;
  if (inst.type_marginals) doc["type_marginals"] = *inst.type_marginals;
  return doc;
}

json to_json(const Instance& inst) {
  return std::visit([](const auto& i) { return to_json(i); }, inst);
}

Instance instance_from_json(const json& doc) {
  try {
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "single") {
      SingleReceiverInstance inst;
      inst.prior.mu = doc.at("prior").get<std::vector<double>>();
      validate(inst.prior);
      inst.num_actions = doc.at("actions").get<int>();
      inst.num_types = doc.at("types").get<int>();
      inst.lambda = doc.at("lambda").get<std::vector<double>>();
      inst.u_recv = doc.at("u_recv").get<std::vector<std::vector<std::vector<double>>>>();
      inst.u_send = doc.at("u_send").get<std::vector<std::vector<double>>>();
      validate(inst);
      return inst;
    }
    if (kind == "multi") {
      MultiReceiverInstance inst;
      inst.prior.mu = doc.at("prior").get<std::vector<double>>();
      validate(inst.prior);
      inst.num_receivers = doc.at("receivers").get<int>();
      inst.types_per_receiver = doc.at("m_r").get<std::vector<int>>();
      inst.u_recv =
          doc.at("u_recv").get<std::vector<std::vector<std::vector<std::vector<double>>>>>();
      inst.f = set_function_from_json(doc.at("set_function"), inst.num_receivers);
      for (const auto& entry : doc.at("type_dist")) {
        inst.type_dist.push_back(
            {entry.at("profile").get<std::vector<int>>(), entry.at("prob").get<double>()});
      }
      if (doc.contains("type_marginals")) {
        inst.type_marginals = doc.at("type_marginals").get<std::vector<std::vector<double>>>();
      }
      validate(inst);
      return inst;
    }
    throw InvalidInstance("kind: expected \"single\" or \"multi\"");
  } catch (const json::exception& e) {
    throw InvalidInstance(std::string("parse failure: ") + e.what());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInstance(std::string("parse failure: ") + e.what());
  }
}

void write_json_file(const json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << doc.dump(1) << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

Instance load_instance(const std::string& path) { return instance_from_json(read_json_file(path)); }

void save_instance(const Instance& inst, const std::string& path) {
  write_json_file(to_json(inst), path);
}

}  // namespace persuasion
