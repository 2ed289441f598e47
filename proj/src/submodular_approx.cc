#include "persuasion/submodular_approx.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "persuasion/errors.h"
#include "persuasion/lp.h"
#include "persuasion/parallel.h"
#include "persuasion/rng.h"

namespace persuasion {

namespace {

constexpr double kBinaryTolerance = 1e-12;

std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t v : parts) h = mix64(h ^ (v + 0x5851f42d4c957f2dULL));
  return h;
}

void check_point(const SenderSetFunction& f, int theta, const std::vector<double>& z) {
  if (static_cast<int>(z.size()) != f.num_receivers()) {
    throw std::invalid_argument("multilinear: point has wrong dimension");
  }
  if (theta < 0 || theta >= f.num_states()) throw std::invalid_argument("multilinear: bad state");
  for (double v : z) {
    if (!(v >= -1e-12 && v <= 1 + 1e-12)) throw std::invalid_argument("multilinear: point outside [0,1]");
  }
}

void check_exact_size(int n) {
  if (n > kMaxTableReceivers) {
    throw CapacityError("exact multilinear extension needs n <= " + std::to_string(kMaxTableReceivers));
  }
}

// Probability of every subset under independent inclusion z.
std::vector<double> subset_probabilities(const std::vector<double>& z) {
  const int n = static_cast<int>(z.size());
  std::vector<double> p(std::size_t{1} << n, 0.0);
  p[0] = 1.0;
  for (int r = 0; r < n; ++r) {
    const std::size_t half = std::size_t{1} << r;
    const double zr = std::clamp(z[r], 0.0, 1.0);
    for (std::size_t s = 0; s < half; ++s) {
      p[s | half] = p[s] * zr;
      p[s] *= 1 - zr;
    }
  }
  return p;
}

double exact_value(const std::vector<double>& table, const std::vector<double>& z) {
  const auto p = subset_probabilities(z);
  double total = 0;
  for (std::size_t s = 0; s < p.size(); ++s) total += p[s] * table[s];
  return total;
}

std::vector<double> exact_gradient(const std::vector<double>& table, const std::vector<double>& z) {
  const int n = static_cast<int>(z.size());
  const auto p = subset_probabilities(z);
  std::vector<double> g(n, 0.0);
  for (int r = 0; r < n; ++r) {
    const std::size_t bit = std::size_t{1} << r;
    double acc = 0;
    for (std::size_t s = 0; s < p.size(); ++s) {
      if (s & bit) continue;
      // Probability of s over the other receivers.
      acc += (p[s] + p[s | bit]) * (table[s | bit] - table[s]);
    }
    g[r] = acc;
  }
  return g;
}

Subset draw_subset(CounterRng& rng, const std::vector<double>& z) {
  Subset s = 0;
  for (std::size_t r = 0; r < z.size(); ++r) {
    if (rng.uniform() < z[r]) s |= Subset{1} << r;
  }
  return s;
}

std::vector<double> sampled_gradient(const SenderSetFunction& f, int theta, const std::vector<double>& z,
                                     long samples, std::uint64_t seed, int only = -1) {
  const int n = static_cast<int>(z.size());
  std::vector<double> g(n, 0.0);
  for (long i = 0; i < samples; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    const Subset s = draw_subset(rng, z);
    for (int r = 0; r < n; ++r) {
      if (only >= 0 && r != only) continue;
      const Subset bit = Subset{1} << r;
      g[r] += f.value(theta, s | bit) - f.value(theta, s & ~bit);
    }
  }
  for (double& v : g) v /= static_cast<double>(samples);
  return g;
}

// Evaluates F and its partials with a fixed mode, caching dense tables.
class Evaluator {
 public:
  Evaluator(const SenderSetFunction& f, DerivativeMode mode, long samples, std::uint64_t seed)
      : f_(f), mode_(mode), samples_(samples), seed_(seed) {
    if (mode_ == DerivativeMode::kExact) {
      check_exact_size(f.num_receivers());
      for (int t = 0; t < f.num_states(); ++t) tables_.push_back(f.dense_values(t));
    } else if (samples_ <= 0) {
      throw std::invalid_argument("sampled mode needs a positive sample count");
    }
  }

  double value(int theta, const std::vector<double>& z, std::uint64_t key) const {
    if (mode_ == DerivativeMode::kExact) return exact_value(tables_[theta], z);
    return multilinear_value_sampled(f_, theta, z, samples_, stream_key(seed_, {key, 1})).mean;
  }

  std::vector<double> gradient(int theta, const std::vector<double>& z, std::uint64_t key) const {
    if (mode_ == DerivativeMode::kExact) return exact_gradient(tables_[theta], z);
    return sampled_gradient(f_, theta, z, samples_, stream_key(seed_, {key, 2}));
  }

  double partial(int theta, const std::vector<double>& z, int r, std::uint64_t key) const {
    if (mode_ == DerivativeMode::kExact) {
      const auto& table = tables_[theta];
      const auto p = subset_probabilities(z);
      const std::size_t bit = std::size_t{1} << r;
      double acc = 0;
      for (std::size_t s = 0; s < p.size(); ++s) {
        if (!(s & bit)) acc += (p[s] + p[s | bit]) * (table[s | bit] - table[s]);
      }
      return acc;
    }
    return sampled_gradient(f_, theta, z, samples_, stream_key(seed_, {key, 3}), r)[r];
  }

 private:
  const SenderSetFunction& f_;
  DerivativeMode mode_;
  long samples_;
  std::uint64_t seed_;
  std::vector<std::vector<double>> tables_;
};

double weight(const MultiReceiverInstance& inst, int p, int t) {
  return inst.prior.mu[t] * inst.type_dist[p].prob;
}

double target_marginal(const MultiReceiverInstance& inst, const MarginalMenus& m, int p, int r, int t) {
  return m.x[r][inst.type_dist[p].types[r]][t];
}

std::vector<JointEntry> to_entries(const std::map<Subset, double>& atoms) {
  std::vector<JointEntry> out;
  for (const auto& [mask, prob] : atoms) {
    if (prob > 1e-15) out.push_back({mask, prob});
  }
  return out;
}

long greedy_steps(double delta) { return std::max<long>(1, std::lround(std::ceil(1.0 / delta - 1e-9))); }

MarginalMenus empty_menus(const MultiReceiverInstance& inst) {
  MarginalMenus m;
  m.x.resize(inst.num_receivers);
  for (int r = 0; r < inst.num_receivers; ++r) {
    m.x[r].assign(inst.types_per_receiver[r], std::vector<double>(inst.num_states(), 0.0));
  }
  return m;
}

void check_submodular_instance(const MultiReceiverInstance& inst) {
  if (inst.f.declared_class() != FunctionClass::kSubmodular) {
    throw InvalidInstance("submodular pipeline needs a set function declared submodular");
  }
  if (inst.num_receivers <= kMaxTableReceivers) {
    for (int t = 0; t < inst.num_states(); ++t) {
      const auto c = classify_set_function(inst.f, t, 1e-9);
      if (!c.monotone || !c.submodular) {
        throw InvalidInstance("set_function: state " + std::to_string(t) +
                              " is not monotone submodular");
      }
    }
  }
}

}  // namespace

std::string_view to_string(DerivativeMode mode) {
  return mode == DerivativeMode::kExact ? "exact" : "sampled";
}

DerivativeMode derivative_mode_from_string(std::string_view s) {
  if (s == "exact") return DerivativeMode::kExact;
  if (s == "sampled") return DerivativeMode::kSampled;
  throw std::invalid_argument("unknown derivative mode '" + std::string(s) + "'");
}

SampledEstimate multilinear_value_sampled(const SenderSetFunction& f, int theta,
                                          const std::vector<double>& z, long samples,
                                          std::uint64_t seed) {
  check_point(f, theta, z);
  if (samples <= 0) throw std::invalid_argument("sampled mode needs a positive sample count");
  double mean = 0;
  double m2 = 0;
  for (long i = 0; i < samples; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    const double v = f.value(theta, draw_subset(rng, z));
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  SampledEstimate out;
  out.mean = mean;
  if (samples > 1) {
    out.std_error = std::sqrt(m2 / static_cast<double>(samples - 1) / static_cast<double>(samples));
  }
  return out;
}

double multilinear_value(const SenderSetFunction& f, int theta, const std::vector<double>& z,
                         DerivativeMode mode, long samples, std::uint64_t seed) {
  check_point(f, theta, z);
  if (mode == DerivativeMode::kSampled) return multilinear_value_sampled(f, theta, z, samples, seed).mean;
  check_exact_size(f.num_receivers());
  return exact_value(f.dense_values(theta), z);
}

std::vector<double> multilinear_gradient(const SenderSetFunction& f, int theta,
                                         const std::vector<double>& z, DerivativeMode mode,
                                         long samples, std::uint64_t seed) {
  check_point(f, theta, z);
  if (mode == DerivativeMode::kSampled) {
    if (samples <= 0) throw std::invalid_argument("sampled mode needs a positive sample count");
    return sampled_gradient(f, theta, z, samples, seed);
  }
  check_exact_size(f.num_receivers());
  return exact_gradient(f.dense_values(theta), z);
}

void ApproxParams::validate() const {
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  if (!(delta > 0 && delta <= 1)) throw std::invalid_argument("delta must lie in (0, 1]");
  if (!(iota > 0)) throw std::invalid_argument("iota must be positive");
  if (q < 0) throw std::invalid_argument("q must be at least 1");
  if (max_q < 1) throw std::invalid_argument("max_q must be at least 1");
  if (samples < 0) throw std::invalid_argument("samples must be nonnegative");
}

int default_block_count(const MultiReceiverInstance& inst, const ApproxParams& params, bool* capped) {
  const double beta = static_cast<double>(lp5_constraint_count(inst));
  const double wanted = std::ceil(beta / (params.epsilon / 2) - 1e-9);
  const bool over = wanted > params.max_q;
  if (capped) *capped = over;
  return over ? params.max_q : std::max(1, static_cast<int>(wanted));
}

long hoeffding_samples(const MultiReceiverInstance& inst, int q, double iota) {
  const double n = inst.num_receivers;
  const double p = iota / (2.0 * inst.support_size() * inst.num_states() * q * n);
  const double sigma = 8.0 / (iota * iota) * n * n * std::log(2.0 / p);
  return std::max<long>(1, static_cast<long>(std::ceil(sigma)));
}

FractionalSolution continuous_greedy(const MultiReceiverInstance& inst, const ApproxParams& params) {
  params.validate();
  const int n = inst.num_receivers;
  const int d = inst.num_states();
  const int P = inst.support_size();
  FractionalSolution out;
  out.q = params.q > 0 ? params.q : default_block_count(inst, params);
  const long samples = params.derivative_mode == DerivativeMode::kSampled
                           ? (params.samples > 0 ? params.samples : hoeffding_samples(inst, out.q, params.iota))
                           : 0;
  const Evaluator eval(inst.f, params.derivative_mode, samples, derive_seed(params.sample_seed, "greedy"));
  const Lp5Layout at(inst);
  const LinearProgram base = build_marginal_polytope(inst);

  // Slots start equal and receive equal updates, so one row per
  // (profile, state) stands for all q slots.
  std::vector<std::vector<double>> z(static_cast<std::size_t>(P) * d, std::vector<double>(n, 0.0));
  std::vector<double> x_sum(at.num_fixed_variables(), 0.0);
  const long steps = greedy_steps(params.delta);
  const double step = 1.0 / static_cast<double>(steps);

  auto objective = [&](long tag) {
    std::vector<double> parts(z.size());
    parallel_for(z.size(), [&](std::size_t i) {
      const int p = static_cast<int>(i) / d;
      const int t = static_cast<int>(i) % d;
      parts[i] = weight(inst, p, t) * eval.value(t, z[i], static_cast<std::uint64_t>(tag * 1'000'003 + i));
    });
    double total = 0;
    for (double v : parts) total += v;
    return total;
  };

  for (long s = 0; s < steps; ++s) {
    std::vector<std::vector<double>> grad(z.size());
    parallel_for(z.size(), [&](std::size_t i) {
      grad[i] = eval.gradient(static_cast<int>(i) % d, z[i], static_cast<std::uint64_t>(s * 1'000'003 + i));
    });
    LinearProgram lp = base;
    for (int p = 0; p < P; ++p) {
      for (int t = 0; t < d; ++t) {
        const auto& g = grad[static_cast<std::size_t>(p) * d + t];
        for (int r = 0; r < n; ++r) {
          const int j = lp.add_variable(weight(inst, p, t) * std::max(0.0, g[r]), 0.0, 1.0);
          lp.add_constraint({{j, 1.0}, {at.x(r, inst.type_dist[p].types[r], t), -1.0}},
                            Relation::kLessEqual, 0.0);
        }
      }
    }
    const LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::kOptimal) {
      throw InvalidInstance(std::string("continuous greedy direction LP returned ") + to_string(sol.status));
    }
    for (int j = 0; j < at.num_fixed_variables(); ++j) x_sum[j] += step * sol.primal[j];
    int j = at.num_fixed_variables();
    for (auto& row : z) {
      for (double& v : row) v = std::clamp(v + step * std::clamp(sol.primal[j++], 0.0, 1.0), 0.0, 1.0);
    }
    out.step_objective.push_back(objective(steps + s));
  }

  out.marginals = empty_menus(inst);
  for (int r = 0; r < n; ++r) {
    for (int k = 0; k < inst.types_per_receiver[r]; ++k) {
      for (int t = 0; t < d; ++t) out.marginals.x[r][k][t] = std::clamp(x_sum[at.x(r, k, t)], 0.0, 1.0);
    }
  }
  out.y.assign(P, std::vector<std::vector<std::vector<double>>>(d));
  for (int p = 0; p < P; ++p) {
    for (int t = 0; t < d; ++t) {
      auto& row = z[static_cast<std::size_t>(p) * d + t];
      // Keep the relaxed consistency rows exact after clamping.
      for (int r = 0; r < n; ++r) row[r] = std::min(row[r], target_marginal(inst, out.marginals, p, r, t));
      out.y[p][t].assign(out.q, row);
    }
  }
  out.value = steps > 0 && !out.step_objective.empty() ? objective(3 * steps) : 0.0;
  return out;
}

double fractional_value(const MultiReceiverInstance& inst, const FractionalSolution& frac,
                        const ApproxParams& params) {
  const long samples = params.derivative_mode == DerivativeMode::kSampled
                           ? (params.samples > 0 ? params.samples : hoeffding_samples(inst, frac.q, params.iota))
                           : 0;
  const Evaluator eval(inst.f, params.derivative_mode, samples, derive_seed(params.sample_seed, "value"));
  double total = 0;
  for (int p = 0; p < inst.support_size(); ++p) {
    for (int t = 0; t < inst.num_states(); ++t) {
      std::map<std::vector<double>, long> rows;
      for (const auto& row : frac.y[p][t]) ++rows[row];
      double v = 0;
      std::uint64_t key = 0;
      for (const auto& [row, count] : rows) {
        v += static_cast<double>(count) * eval.value(t, row, stream_key(p, {static_cast<std::uint64_t>(t), key++}));
      }
      total += weight(inst, p, t) * v / frac.q;
    }
  }
  return total;
}

double fractional_residual(const MultiReceiverInstance& inst, const FractionalSolution& frac) {
  double worst = check_marginals(inst, frac.marginals).max();
  for (int p = 0; p < inst.support_size(); ++p) {
    for (int t = 0; t < inst.num_states(); ++t) {
      for (int r = 0; r < inst.num_receivers; ++r) {
        double sum = 0;
        for (const auto& row : frac.y[p][t]) {
          worst = std::max({worst, -row[r], row[r] - 1});
          sum += row[r];
        }
        worst = std::max(worst, sum / frac.q - target_marginal(inst, frac.marginals, p, r, t));
      }
    }
  }
  return std::max(worst, 0.0);
}

std::vector<double> round_column(const std::vector<double>& sorted_column) {
  double total = 0;
  for (double v : sorted_column) total += v;
  const int q = static_cast<int>(sorted_column.size());
  std::vector<double> out(q, 0.0);
  const int whole = std::min(q, static_cast<int>(std::floor(total + 1e-9)));
  for (int j = 0; j < whole; ++j) out[j] = 1.0;
  if (whole < q) {
    const double rest = total - whole;
    out[whole] = rest > 1e-9 ? rest : 0.0;
  }
  return out;
}

void repair_marginals(std::vector<JointEntry>& phi, const std::vector<double>& target) {
  std::map<Subset, double> atoms;
  for (const auto& e : phi) atoms[e.mask] += e.prob;
  for (std::size_t r = 0; r < target.size(); ++r) {
    const Subset bit = Subset{1} << r;
    double have = 0;
    for (const auto& [mask, prob] : atoms) {
      if (mask & bit) have += prob;
    }
    double deficit = target[r] - have;
    if (deficit <= kBinaryTolerance) continue;
    std::vector<std::pair<Subset, double>> order;
    for (const auto& [mask, prob] : atoms) {
      if (!(mask & bit) && prob > 0) order.emplace_back(mask, prob);
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    for (const auto& [mask, prob] : order) {
      if (deficit <= 0) break;
      const double move = std::min(prob, deficit);
      atoms[mask] -= move;
      atoms[mask | bit] += move;
      deficit -= move;
    }
  }
  phi = to_entries(atoms);
}

RoundingDetail round_solution_detail(const MultiReceiverInstance& inst, const FractionalSolution& frac,
                                     const ApproxParams& params) {
  const int n = inst.num_receivers;
  const int d = inst.num_states();
  const int P = inst.support_size();
  const int q = frac.q;
  const long samples = params.derivative_mode == DerivativeMode::kSampled
                           ? (params.samples > 0 ? params.samples : hoeffding_samples(inst, q, params.iota))
                           : 0;
  const Evaluator eval(inst.f, params.derivative_mode, samples, derive_seed(params.sample_seed, "rounding"));

  RoundingDetail out;
  out.strategy.marginals = frac.marginals;
  out.strategy.joint.phi.assign(P, std::vector<std::vector<JointEntry>>(d));
  std::vector<double> before(static_cast<std::size_t>(P) * d, 0.0);
  std::vector<long> dropped(static_cast<std::size_t>(P) * d, 0);

  parallel_for(static_cast<std::size_t>(P) * d, [&](std::size_t cell) {
    const int p = static_cast<int>(cell) / d;
    const int t = static_cast<int>(cell) % d;
    auto rows = frac.y[p][t];
    std::vector<double> target(n);
    for (int r = 0; r < n; ++r) target[r] = target_marginal(inst, frac.marginals, p, r, t);

    // Raise slots in increasing j until the consistency rows are tight.
    for (int r = 0; r < n; ++r) {
      double need = q * target[r];
      for (const auto& row : rows) need -= row[r];
      for (int j = 0; j < q && need > 0; ++j) {
        const double add = std::min(1.0 - rows[j][r], need);
        rows[j][r] += add;
        need -= add;
      }
    }

    for (int r = 0; r < n; ++r) {
      std::vector<double> e(q);
      std::map<std::vector<double>, double> seen;
      for (int j = 0; j < q; ++j) {
        auto it = seen.find(rows[j]);
        if (it == seen.end()) {
          const std::uint64_t key = stream_key(cell, {static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(j)});
          it = seen.emplace(rows[j], eval.partial(t, rows[j], r, key)).first;
        }
        // Quantized so that float noise does not split exact ties.
        e[j] = std::round(it->second * 1e12) / 1e12;
      }
      std::vector<int> order(q);
      for (int j = 0; j < q; ++j) order[j] = j;
      // Equal derivatives keep the slots that already hold more mass first.
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (e[a] != e[b]) return e[a] > e[b];
        return rows[a][r] > rows[b][r];
      });
      std::vector<double> column(q);
      for (int i = 0; i < q; ++i) column[i] = rows[order[i]][r];
      const auto rounded = round_column(column);
      for (int i = 0; i < q; ++i) rows[order[i]][r] = rounded[i];
    }

    std::map<Subset, double> atoms;
    long binary = 0;
    for (const auto& row : rows) {
      Subset mask = 0;
      bool ok = true;
      for (int r = 0; r < n && ok; ++r) {
        if (row[r] >= 1 - kBinaryTolerance) {
          mask |= Subset{1} << r;
        } else if (row[r] > kBinaryTolerance) {
          ok = false;
        }
      }
      if (!ok) continue;
      atoms[mask] += 1.0 / q;
      ++binary;
    }
    atoms[0] += static_cast<double>(q - binary) / q;
    dropped[cell] = q - binary;
    auto entries = to_entries(atoms);
    for (const auto& a : entries) before[cell] += a.prob * inst.f.value(t, a.mask);
    repair_marginals(entries, target);
    out.strategy.joint.phi[p][t] = std::move(entries);
  });

  for (int p = 0; p < P; ++p) {
    for (int t = 0; t < d; ++t) {
      out.value_before_repair += weight(inst, p, t) * before[static_cast<std::size_t>(p) * d + t];
      out.dropped_slots += dropped[static_cast<std::size_t>(p) * d + t];
    }
  }
  out.strategy.value = strategy_value(inst, out.strategy.joint);
  return out;
}

SenderStrategy round_solution(const MultiReceiverInstance& inst, const FractionalSolution& frac,
                              const ApproxParams& params) {
  return round_solution_detail(inst, frac, params).strategy;
}

SenderStrategy quniform_from_exact(const MultiReceiverInstance& inst, const SenderStrategy& exact, int q) {
  if (q < 1) throw std::invalid_argument("q must be at least 1");
  SenderStrategy out;
  out.marginals = exact.marginals;
  out.joint.phi.assign(inst.support_size(), std::vector<std::vector<JointEntry>>(inst.num_states()));
  for (int p = 0; p < inst.support_size(); ++p) {
    for (int t = 0; t < inst.num_states(); ++t) {
      const auto& src = exact.joint.phi[p][t];
      long support = 0;
      for (const auto& e : src) support += e.prob > 0;
      if (support > q) {
        throw std::invalid_argument("support of " + std::to_string(support) + " atoms exceeds q = " +
                                    std::to_string(q));
      }
      std::map<Subset, double> atoms;
      long used = 0;
      for (const auto& e : src) {
        const long copies = static_cast<long>(std::floor(q * e.prob + 1e-9));
        if (copies > 0) atoms[e.mask] += static_cast<double>(copies) / q;
        used += copies;
      }
      if (used < q) atoms[0] += static_cast<double>(q - used) / q;
      auto entries = to_entries(atoms);
      std::vector<double> target(inst.num_receivers);
      for (int r = 0; r < inst.num_receivers; ++r) target[r] = target_marginal(inst, exact.marginals, p, r, t);
      repair_marginals(entries, target);
      out.joint.phi[p][t] = std::move(entries);
    }
  }
  out.value = strategy_value(inst, out.joint);
  return out;
}

SubmodularResult solve_submodular(const MultiReceiverInstance& inst, double epsilon, ApproxParams params) {
  params.epsilon = epsilon;
  params.validate();
  check_submodular_instance(inst);
  SubmodularResult out;
  auto& trace = out.trace;
  trace.beta = lp5_constraint_count(inst);
  if (params.q == 0) {
    bool capped = false;
    params.q = default_block_count(inst, params, &capped);
    if (capped) {
      trace.warnings.push_back("q capped at " + std::to_string(params.max_q) + "; requested " +
                               std::to_string(static_cast<long>(std::ceil(trace.beta / (epsilon / 2)))));
    }
  }
  if (params.derivative_mode == DerivativeMode::kExact && inst.num_receivers > kMaxTableReceivers) {
    params.derivative_mode = DerivativeMode::kSampled;
    trace.warnings.push_back("more than " + std::to_string(kMaxTableReceivers) +
                             " receivers; using sampled derivatives");
  }
  params.delta = std::min(params.delta, epsilon / 2);
  if (params.derivative_mode == DerivativeMode::kSampled && params.samples == 0) {
    params.samples = hoeffding_samples(inst, params.q, params.iota);
  }
  trace.q = params.q;
  trace.delta = 1.0 / static_cast<double>(greedy_steps(params.delta));
  trace.samples = params.derivative_mode == DerivativeMode::kSampled ? params.samples : 0;

  const FractionalSolution frac = continuous_greedy(inst, params);
  const RoundingDetail rounded = round_solution_detail(inst, frac, params);
  trace.greedy_objective = frac.step_objective;
  trace.fractional_value = frac.value;
  trace.rounding_loss_bound = static_cast<double>(inst.num_receivers) / params.q +
                              (params.derivative_mode == DerivativeMode::kSampled ? params.iota : 0.0);
  trace.value_before_repair = rounded.value_before_repair;
  trace.value = rounded.strategy.value;
  out.strategy = rounded.strategy;
  return out;
}

nlohmann::json trace_to_json(const SubmodularTrace& trace) {
  return {{"q", trace.q},
          {"beta", trace.beta},
          {"delta", trace.delta},
          {"samples", trace.samples},
          {"greedy_objective", trace.greedy_objective},
          {"fractional_value", trace.fractional_value},
          {"rounding_loss_bound", trace.rounding_loss_bound},
          {"value_before_repair", trace.value_before_repair},
          {"value", trace.value},
          {"warnings", trace.warnings}};
}

}  // namespace persuasion
