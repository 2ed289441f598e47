#pragma once

#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace persuasion {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Solver tolerances.
inline constexpr double kFeasibilityTolerance = 1e-7;
inline constexpr double kOptimalityTolerance = 1e-9;
inline constexpr double kDualityGapTolerance = 1e-6;

enum class Relation { kLessEqual, kEqual, kGreaterEqual };

/// A maximization LP with bounded variables and sparse constraint rows.
class LinearProgram {
 public:
  struct Variable {
    double lower = 0;
    double upper = kInfinity;
    double objective = 0;
  };
  struct Constraint {
    std::vector<std::pair<int, double>> terms;
    Relation relation = Relation::kLessEqual;
    double rhs = 0;
  };

  int add_variable(double objective, double lower = 0, double upper = kInfinity);
  int add_constraint(std::vector<std::pair<int, double>> terms, Relation relation, double rhs);

  // Optional labels, used only by the text dump.
  void set_variable_name(int j, std::string name);
  void set_constraint_name(int i, std::string name);

  int num_variables() const { return static_cast<int>(variables_.size()); }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }
  const Variable& variable(int j) const { return variables_[j]; }
  Variable& mutable_variable(int j) { return variables_[j]; }
  const Constraint& constraint(int i) const { return constraints_[i]; }
  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  std::string variable_name(int j) const;
  std::string constraint_name(int i) const;

  // Throws std::invalid_argument on bad indices, non-finite data or
  // inconsistent bounds.
  void validate() const;

  double objective_value(const std::vector<double>& x) const;
  double row_activity(int i, const std::vector<double>& x) const;

 private:
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  std::vector<std::string> variable_names_;
  std::vector<std::string> constraint_names_;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

const char* to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> primal;
  // One price per constraint, oriented so that the reduced cost of column j
  // is c_j - sum_i dual[i] * a_ij. For a maximization, <= rows have
  // nonnegative prices and >= rows nonpositive ones.
  std::vector<double> duals;
  double objective = 0;
  int iterations = 0;
};

/// Seam for alternative backends. Implementations must be deterministic.
class LpSolver {
 public:
  virtual ~LpSolver() = default;
  virtual LpSolution solve(const LinearProgram& lp) const = 0;
};

// Dense-tableau bounded-variable primal simplex, two-phase.
class DenseSimplexSolver : public LpSolver {
 public:
  struct Options {
    // Hard cap on pivots; exceeding it throws SolverFailure.
    long max_iterations = 2'000'000;
    // Consecutive degenerate pivots before switching to Bland's rule.
    int degenerate_streak_for_bland = 50;
    // Smallest pivot magnitude accepted by the ratio test.
    double pivot_tolerance = 1e-7;
    // Pivots between recomputations of basic values and reduced costs.
    long refresh_interval = 100;
    // Re-solve with conservative settings when the first answer fails its
    // optimality certificate.
    bool retry_on_failure = true;
  };

  DenseSimplexSolver() = default;
  explicit DenseSimplexSolver(Options options) : options_(options) {}

  LpSolution solve(const LinearProgram& lp) const override;

 private:
  Options options_;
};

// Solves with the process-wide default solver (the dense simplex unless
// replaced with set_default_solver).
LpSolution solve_lp(const LinearProgram& lp);
void set_default_solver(std::shared_ptr<const LpSolver> solver);
const LpSolver& default_solver();

struct LpResidualReport {
  double primal_infeasibility = 0;
  double dual_infeasibility = 0;
  double duality_gap = 0;
  double complementary_slackness = 0;
  double dual_objective = 0;

  bool within(double feasibility_tol, double gap_tol) const {
    return primal_infeasibility <= feasibility_tol && dual_infeasibility <= feasibility_tol &&
           duality_gap <= gap_tol;
  }
};

// Recomputes feasibility and duality residuals directly from the model.
LpResidualReport check_solution(const LinearProgram& lp, const LpSolution& sol);

// CPLEX-style LP text layout (objective, rows, bounds) for cross-checking.
void write_lp_text(const LinearProgram& lp, std::ostream& out);

}  // namespace persuasion
