#include "persuasion/lp.h"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <ostream>
#include <stdexcept>

#include "persuasion/errors.h"

namespace persuasion {

int LinearProgram::add_variable(double objective, double lower, double upper) {
  variables_.push_back({lower, upper, objective});
  return num_variables() - 1;
}

int LinearProgram::add_constraint(std::vector<std::pair<int, double>> terms, Relation relation,
                                  double rhs) {
  constraints_.push_back({std::move(terms), relation, rhs});
  return num_constraints() - 1;
}

void LinearProgram::set_variable_name(int j, std::string name) {
  if (static_cast<int>(variable_names_.size()) <= j) variable_names_.resize(j + 1);
  variable_names_[j] = std::move(name);
}

void LinearProgram::set_constraint_name(int i, std::string name) {
  if (static_cast<int>(constraint_names_.size()) <= i) constraint_names_.resize(i + 1);
  constraint_names_[i] = std::move(name);
}

std::string LinearProgram::variable_name(int j) const {
  if (j < static_cast<int>(variable_names_.size()) && !variable_names_[j].empty()) {
    return variable_names_[j];
  }
  return "x" + std::to_string(j);
}

std::string LinearProgram::constraint_name(int i) const {
  if (i < static_cast<int>(constraint_names_.size()) && !constraint_names_[i].empty()) {
    return constraint_names_[i];
  }
  return "c" + std::to_string(i);
}

void LinearProgram::validate() const {
  for (const Variable& v : variables_) {
    if (!std::isfinite(v.lower)) throw std::invalid_argument("variable lower bound must be finite");
    if (std::isnan(v.upper) || v.upper < v.lower) throw std::invalid_argument("bad variable bounds");
    if (!std::isfinite(v.objective)) throw std::invalid_argument("non-finite objective coefficient");
  }
  for (const Constraint& c : constraints_) {
    if (!std::isfinite(c.rhs)) throw std::invalid_argument("non-finite right-hand side");
    for (const auto& [j, a] : c.terms) {
      if (j < 0 || j >= num_variables()) throw std::invalid_argument("constraint references bad variable");
      if (!std::isfinite(a)) throw std::invalid_argument("non-finite constraint coefficient");
    }
  }
}

double LinearProgram::objective_value(const std::vector<double>& x) const {
  double total = 0;
  for (int j = 0; j < num_variables(); ++j) total += variables_[j].objective * x[j];
  return total;
}

double LinearProgram::row_activity(int i, const std::vector<double>& x) const {
  double total = 0;
  for (const auto& [j, a] : constraints_[i].terms) total += a * x[j];
  return total;
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal:
      return "optimal";
    case LpStatus::kInfeasible:
      return "infeasible";
    case LpStatus::kUnbounded:
      return "unbounded";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Dense simplex

namespace {

constexpr double kRatioTieTolerance = 1e-12;
constexpr double kHarrisSlack = 1e-9;

enum class ColumnKind { kStructural, kLogical, kArtificial };

class Tableau {
 public:
  Tableau(const LinearProgram& lp, const DenseSimplexSolver::Options& options)
      : lp_(lp), options_(options) {
    build();
  }

  LpSolution run() {
    LpSolution sol;
    if (num_artificial_ > 0) {
      std::vector<double> phase1(cols_, 0.0);
      for (int j = 0; j < cols_; ++j) {
        if (kind_[j] == ColumnKind::kArtificial) phase1[j] = -1;
      }
      const LpStatus s = optimize(phase1, /*bar_artificial=*/false);
      if (s != LpStatus::kOptimal) throw SolverFailure("phase 1 reported unbounded");
      double infeasibility = 0;
      for (int i = 0; i < rows_; ++i) {
        if (kind_[basis_[i]] == ColumnKind::kArtificial) infeasibility += std::max(beta_[i], 0.0);
      }
      if (infeasibility > kFeasibilityTolerance) {
        sol.status = LpStatus::kInfeasible;
        sol.iterations = iterations_;
        return sol;
      }
      drive_out_artificials();
    }
    std::vector<double> phase2(cols_, 0.0);
    for (int j = 0; j < n_; ++j) phase2[j] = lp_.variable(j).objective;
    const LpStatus s = optimize(phase2, /*bar_artificial=*/true);
    sol.iterations = iterations_;
    if (s == LpStatus::kUnbounded) {
      sol.status = LpStatus::kUnbounded;
      return sol;
    }
    sol.status = LpStatus::kOptimal;
    sol.primal.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) sol.primal[j] = lp_.variable(j).lower;
    std::vector<double> value(cols_, 0.0);
    for (int j = 0; j < cols_; ++j) {
      if (!is_basic_[j] && at_upper_[j]) value[j] = upper_[j];
    }
    for (int i = 0; i < rows_; ++i) value[basis_[i]] = beta_[i];
    for (int j = 0; j < n_; ++j) {
      double v = std::clamp(value[j], 0.0, upper_[j]);
      sol.primal[j] += v;
    }
    sol.objective = lp_.objective_value(sol.primal);
    sol.duals.assign(rows_, 0.0);
    for (int i = 0; i < rows_; ++i) {
      const int col = initial_basic_[i];
      double y = 0;
      for (int r = 0; r < rows_; ++r) y += phase2[basis_[r]] * at(r, col);
      sol.duals[i] = row_sign_[i] * y;
    }
    return sol;
  }

 private:
  double& at(int i, int j) { return tab_[static_cast<std::size_t>(i) * cols_ + j]; }
  double at(int i, int j) const { return tab_[static_cast<std::size_t>(i) * cols_ + j]; }

  void build() {
    n_ = lp_.num_variables();
    rows_ = lp_.num_constraints();
    // Shifted right-hand sides and row signs decide which rows need an
    // artificial column.
    std::vector<double> rhs(rows_);
    row_sign_.assign(rows_, 1);
    int logical = 0;
    for (int i = 0; i < rows_; ++i) {
      const auto& c = lp_.constraint(i);
      double b = c.rhs;
      for (const auto& [j, a] : c.terms) b -= a * lp_.variable(j).lower;
      rhs[i] = b;
      // Orient rows so that the logical column can start basic whenever
      // the origin satisfies the row.
      if (c.relation == Relation::kGreaterEqual ? b <= 0 : b < 0) row_sign_[i] = -1;
      if (c.relation != Relation::kEqual) ++logical;
    }
    std::vector<int> logical_col(rows_, -1);
    std::vector<bool> needs_artificial(rows_, false);
    int next = n_;
    for (int i = 0; i < rows_; ++i) {
      if (lp_.constraint(i).relation != Relation::kEqual) logical_col[i] = next++;
    }
    for (int i = 0; i < rows_; ++i) {
      const Relation rel = lp_.constraint(i).relation;
      const double logical_coef = rel == Relation::kLessEqual ? 1.0 : -1.0;
      const bool usable = rel != Relation::kEqual && logical_coef * row_sign_[i] > 0;
      if (!usable) {
        needs_artificial[i] = true;
        ++num_artificial_;
      }
    }
    cols_ = n_ + logical + num_artificial_;
    kind_.assign(cols_, ColumnKind::kStructural);
    upper_.assign(cols_, kInfinity);
    for (int j = 0; j < n_; ++j) upper_[j] = lp_.variable(j).upper - lp_.variable(j).lower;
    tab_.assign(static_cast<std::size_t>(rows_) * cols_, 0.0);
    beta_.assign(rows_, 0.0);
    basis_.assign(rows_, -1);
    initial_basic_.assign(rows_, -1);
    for (int i = 0; i < rows_; ++i) {
      const auto& c = lp_.constraint(i);
      for (const auto& [j, a] : c.terms) at(i, j) += row_sign_[i] * a;
      if (logical_col[i] >= 0) {
        const int s = logical_col[i];
        kind_[s] = ColumnKind::kLogical;
        at(i, s) = row_sign_[i] * (c.relation == Relation::kLessEqual ? 1.0 : -1.0);
        if (!needs_artificial[i]) basis_[i] = s;
      }
      if (needs_artificial[i]) {
        const int a = next++;
        kind_[a] = ColumnKind::kArtificial;
        at(i, a) = 1.0;
        basis_[i] = a;
      }
      initial_basic_[i] = basis_[i];
      beta_[i] = row_sign_[i] * rhs[i];
    }
    b0_ = beta_;
    is_basic_.assign(cols_, false);
    at_upper_.assign(cols_, false);
    for (int i = 0; i < rows_; ++i) is_basic_[basis_[i]] = true;
  }

  // Recomputes basic values from the inverse carried in the initial-basis
  // columns, discarding accumulated update error.
  void refresh_beta() {
    std::vector<double> b = b0_;
    for (int i = 0; i < rows_; ++i) {
      const double* row = &tab_[static_cast<std::size_t>(i) * cols_];
      double v = 0;
      for (int r = 0; r < rows_; ++r) v += row[initial_basic_[r]] * b0_[r];
      b[i] = v;
    }
    for (int j = 0; j < cols_; ++j) {
      if (is_basic_[j] || !at_upper_[j] || upper_[j] == 0) continue;
      for (int i = 0; i < rows_; ++i) b[i] -= at(i, j) * upper_[j];
    }
    beta_ = std::move(b);
  }

  void compute_reduced_costs(const std::vector<double>& cost) {
    z_ = cost;
    for (int i = 0; i < rows_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0) continue;
      const double* row = &tab_[static_cast<std::size_t>(i) * cols_];
      for (int j = 0; j < cols_; ++j) z_[j] -= cb * row[j];
    }
  }

  void pivot(int r, int q) {
    double* prow = &tab_[static_cast<std::size_t>(r) * cols_];
    const double inv = 1.0 / prow[q];
    nonzeros_.clear();
    for (int j = 0; j < cols_; ++j) {
      if (prow[j] != 0) {
        prow[j] *= inv;
        nonzeros_.push_back(j);
      }
    }
    prow[q] = 1.0;
    for (int i = 0; i < rows_; ++i) {
      if (i == r) continue;
      double* row = &tab_[static_cast<std::size_t>(i) * cols_];
      const double factor = row[q];
      if (factor == 0) continue;
      for (int j : nonzeros_) row[j] -= factor * prow[j];
      row[q] = 0.0;
    }
    const double zf = z_[q];
    if (zf != 0) {
      for (int j : nonzeros_) z_[j] -= zf * prow[j];
      z_[q] = 0.0;
    }
    is_basic_[basis_[r]] = false;
    basis_[r] = q;
    is_basic_[q] = true;
    at_upper_[q] = false;
  }

  bool eligible(int j, bool bar_artificial) const {
    if (is_basic_[j]) return false;
    if (bar_artificial && kind_[j] == ColumnKind::kArtificial) return false;
    if (upper_[j] <= 0) return false;
    return at_upper_[j] ? z_[j] < -kOptimalityTolerance : z_[j] > kOptimalityTolerance;
  }

  LpStatus optimize(const std::vector<double>& cost, bool bar_artificial) {
    compute_reduced_costs(cost);
    int degenerate_streak = 0;
    bool refreshed = false;
    long since_refresh = 0;
    while (true) {
      if (++iterations_ > options_.max_iterations) {
        throw SolverFailure("simplex iteration cap exceeded");
      }
      const bool bland = degenerate_streak >= options_.degenerate_streak_for_bland;
      int q = -1;
      double best = 0;
      for (int j = 0; j < cols_; ++j) {
        if (!eligible(j, bar_artificial)) continue;
        if (bland) {
          q = j;
          break;
        }
        if (std::abs(z_[j]) > best) {
          best = std::abs(z_[j]);
          q = j;
        }
      }
      if (q < 0) {
        if (refreshed) return LpStatus::kOptimal;
        refresh_beta();
        compute_reduced_costs(cost);
        refreshed = true;
        since_refresh = 0;
        continue;
      }
      if (++since_refresh >= options_.refresh_interval) {
        refresh_beta();
        compute_reduced_costs(cost);
        since_refresh = 0;
        continue;
      }

      const double dir = at_upper_[q] ? -1.0 : 1.0;
      // Two-pass (Harris) ratio test: bound the step with slightly relaxed
      // limits, then pick the largest pivot among the rows that block
      // within that bound. Bland mode keeps the textbook rule.
      auto ratio = [&](int i, double alpha, double slack) {
        if (alpha > options_.pivot_tolerance) return (std::max(beta_[i], 0.0) + slack) / alpha;
        if (alpha < -options_.pivot_tolerance && std::isfinite(upper_[basis_[i]])) {
          return (std::max(upper_[basis_[i]] - beta_[i], 0.0) + slack) / -alpha;
        }
        return kInfinity;
      };
      double t_best = upper_[q];
      int leave = -1;
      double leave_alpha = 0;
      if (bland) {
        for (int i = 0; i < rows_; ++i) {
          const double alpha = at(i, q) * dir;
          const double t = ratio(i, alpha, 0.0);
          if (!std::isfinite(t)) continue;
          if (t < t_best - kRatioTieTolerance ||
              (leave >= 0 && t <= t_best + kRatioTieTolerance && basis_[i] < basis_[leave])) {
            t_best = std::min(t, t_best);
            leave = i;
            leave_alpha = alpha;
          }
        }
      } else {
        double bound = upper_[q];
        for (int i = 0; i < rows_; ++i) bound = std::min(bound, ratio(i, at(i, q) * dir, kHarrisSlack));
        for (int i = 0; i < rows_; ++i) {
          const double alpha = at(i, q) * dir;
          const double t = ratio(i, alpha, 0.0);
          if (std::isfinite(t) && t <= bound && std::abs(alpha) > std::abs(leave_alpha)) {
            leave = i;
            leave_alpha = alpha;
          }
        }
        if (leave >= 0) {
          t_best = ratio(leave, leave_alpha, 0.0);
        } else {
          t_best = bound;
        }
      }
      if (leave < 0 && !std::isfinite(t_best)) {
        // Incremental reduced costs drift; confirm against a fresh pricing.
        if (!refreshed) {
          refresh_beta();
          compute_reduced_costs(cost);
          refreshed = true;
          continue;
        }
        return LpStatus::kUnbounded;
      }
      refreshed = false;

      const double step = dir * t_best;
      if (step != 0) {
        for (int i = 0; i < rows_; ++i) beta_[i] -= at(i, q) * step;
      }
      degenerate_streak = t_best <= kRatioTieTolerance ? degenerate_streak + 1 : 0;
      if (leave < 0) {
        at_upper_[q] = !at_upper_[q];
        continue;
      }
      const double entering_value = (at_upper_[q] ? upper_[q] : 0.0) + step;
      const int leaving = basis_[leave];
      const bool leaves_at_upper = leave_alpha < 0;
      pivot(leave, q);
      beta_[leave] = entering_value;
      at_upper_[leaving] = leaves_at_upper;
    }
  }

  void drive_out_artificials() {
    for (int r = 0; r < rows_; ++r) {
      if (kind_[basis_[r]] != ColumnKind::kArtificial) continue;
      int q = -1;
      double best = 1e-7;
      for (int j = 0; j < cols_; ++j) {
        if (is_basic_[j] || kind_[j] == ColumnKind::kArtificial || upper_[j] <= 0) continue;
        if (std::abs(at(r, j)) > best) {
          best = std::abs(at(r, j));
          q = j;
        }
      }
      if (q < 0) continue;  // redundant row; the artificial stays basic at 0
      const double delta = beta_[r] / at(r, q);
      const double entering_value = (at_upper_[q] ? upper_[q] : 0.0) + delta;
      for (int i = 0; i < rows_; ++i) beta_[i] -= at(i, q) * delta;
      const int leaving = basis_[r];
      pivot(r, q);
      beta_[r] = entering_value;
      at_upper_[leaving] = false;
    }
    for (int j = 0; j < cols_; ++j) {
      if (kind_[j] == ColumnKind::kArtificial) upper_[j] = 0.0;
    }
  }

  const LinearProgram& lp_;
  DenseSimplexSolver::Options options_;
  int n_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  int num_artificial_ = 0;
  long iterations_ = 0;
  std::vector<double> tab_;
  std::vector<double> beta_;
  std::vector<double> b0_;
  std::vector<double> z_;
  std::vector<double> upper_;
  std::vector<int> basis_;
  std::vector<int> initial_basic_;
  std::vector<int> row_sign_;
  std::vector<ColumnKind> kind_;
  std::vector<bool> is_basic_;
  std::vector<bool> at_upper_;
  std::vector<int> nonzeros_;
};

}  // namespace

LpSolution DenseSimplexSolver::solve(const LinearProgram& lp) const {
  lp.validate();
  auto certified = [&](const LpSolution& sol) {
    return sol.status == LpStatus::kOptimal &&
           check_solution(lp, sol).within(10 * kFeasibilityTolerance, kDualityGapTolerance);
  };
  LpSolution first;
  bool failed = false;
  try {
    first = Tableau(lp, options_).run();
    if (certified(first) || !options_.retry_on_failure) return first;
  } catch (const SolverFailure&) {
    if (!options_.retry_on_failure) throw;
    failed = true;
  }
  Options strict = options_;
  strict.pivot_tolerance = std::max(options_.pivot_tolerance, 1e-5);
  strict.refresh_interval = std::min<long>(options_.refresh_interval, 10);
  strict.degenerate_streak_for_bland = std::min(options_.degenerate_streak_for_bland, 10);
  const LpSolution second = Tableau(lp, strict).run();
  if (certified(second)) return second;
  if (!failed && second.status == first.status && first.status != LpStatus::kOptimal) return first;
  throw SolverFailure(std::string("simplex could not certify an answer (") +
                      to_string(second.status) + ")");
}

namespace {

std::mutex& solver_mutex() {
  static std::mutex m;
  return m;
}

std::shared_ptr<const LpSolver>& solver_slot() {
  static std::shared_ptr<const LpSolver> solver = std::make_shared<DenseSimplexSolver>();
  return solver;
}

}  // namespace

void set_default_solver(std::shared_ptr<const LpSolver> solver) {
  std::lock_guard lock(solver_mutex());
  solver_slot() = solver ? std::move(solver) : std::make_shared<DenseSimplexSolver>();
}

const LpSolver& default_solver() {
  std::lock_guard lock(solver_mutex());
  return *solver_slot();
}

LpSolution solve_lp(const LinearProgram& lp) { return default_solver().solve(lp); }

// ---------------------------------------------------------------------------
// Residuals

LpResidualReport check_solution(const LinearProgram& lp, const LpSolution& sol) {
  LpResidualReport report;
  const auto& x = sol.primal;
  const auto& y = sol.duals;
  for (int j = 0; j < lp.num_variables(); ++j) {
    const auto& v = lp.variable(j);
    report.primal_infeasibility = std::max({report.primal_infeasibility, v.lower - x[j], x[j] - v.upper});
  }
  std::vector<double> reduced(lp.num_variables());
  for (int j = 0; j < lp.num_variables(); ++j) reduced[j] = lp.variable(j).objective;
  double dual_objective = 0;
  for (int i = 0; i < lp.num_constraints(); ++i) {
    const auto& c = lp.constraint(i);
    const double activity = lp.row_activity(i, x);
    double violation = 0;
    double slack = 0;
    switch (c.relation) {
      case Relation::kLessEqual:
        violation = activity - c.rhs;
        slack = c.rhs - activity;
        report.dual_infeasibility = std::max(report.dual_infeasibility, -y[i]);
        break;
      case Relation::kGreaterEqual:
        violation = c.rhs - activity;
        slack = activity - c.rhs;
        report.dual_infeasibility = std::max(report.dual_infeasibility, y[i]);
        break;
      case Relation::kEqual:
        violation = std::abs(activity - c.rhs);
        break;
    }
    report.primal_infeasibility = std::max(report.primal_infeasibility, violation);
    report.complementary_slackness =
        std::max(report.complementary_slackness, std::abs(y[i] * slack));
    dual_objective += c.rhs * y[i];
    for (const auto& [j, a] : c.terms) reduced[j] -= y[i] * a;
  }
  for (int j = 0; j < lp.num_variables(); ++j) {
    const auto& v = lp.variable(j);
    const double d = reduced[j];
    if (d > 0) {
      if (std::isfinite(v.upper)) {
        dual_objective += v.upper * d;
        report.complementary_slackness =
            std::max(report.complementary_slackness, d * std::abs(v.upper - x[j]));
      } else {
        report.dual_infeasibility = std::max(report.dual_infeasibility, d);
      }
    } else if (d < 0) {
      dual_objective += v.lower * d;
      report.complementary_slackness =
          std::max(report.complementary_slackness, -d * std::abs(x[j] - v.lower));
    }
  }
  report.primal_infeasibility = std::max(report.primal_infeasibility, 0.0);
  report.dual_objective = dual_objective;
  report.duality_gap = std::abs(lp.objective_value(x) - dual_objective);
  return report;
}

void write_lp_text(const LinearProgram& lp, std::ostream& out) {
  auto term = [&](double a, int j, bool first) {
    if (a < 0) {
      out << " - " << -a << ' ' << lp.variable_name(j);
    } else {
      out << (first ? " " : " + ") << a << ' ' << lp.variable_name(j);
    }
  };
  out.precision(17);
  out << "Maximize\n obj:";
  bool first = true;
  for (int j = 0; j < lp.num_variables(); ++j) {
    if (lp.variable(j).objective == 0) continue;
    term(lp.variable(j).objective, j, first);
    first = false;
  }
  if (first) out << " 0 " << lp.variable_name(0);
  out << "\nSubject To\n";
  for (int i = 0; i < lp.num_constraints(); ++i) {
    const auto& c = lp.constraint(i);
    out << ' ' << lp.constraint_name(i) << ':';
    first = true;
    for (const auto& [j, a] : c.terms) {
      term(a, j, first);
      first = false;
    }
    if (first) out << " 0 " << lp.variable_name(0);
    const char* rel = c.relation == Relation::kLessEqual ? " <= "
                      : c.relation == Relation::kEqual   ? " = "
                                                         : " >= ";
    out << rel << c.rhs << '\n';
  }
  out << "Bounds\n";
  for (int j = 0; j < lp.num_variables(); ++j) {
    const auto& v = lp.variable(j);
    out << ' ' << v.lower << " <= " << lp.variable_name(j);
    if (std::isfinite(v.upper)) out << " <= " << v.upper;
    out << '\n';
  }
  out << "End\n";
}

}  // namespace persuasion
