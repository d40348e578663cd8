#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace microplan {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, Equal, GreaterEqual };

enum class VarKind : std::uint8_t { Continuous, Binary };

struct SparseRow {
  std::vector<int> index;
  std::vector<double> value;

  void push(int j, double v) {
    if (v == 0.0) return;
    index.push_back(j);
    value.push_back(v);
  }
};

struct Constraint {
  SparseRow row;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
};

// Generic sparse mixed-integer linear program, minimization.
struct MilpModel {
  int num_vars = 0;
  std::vector<double> objective;  // dense, size num_vars
  std::vector<double> lower, upper;
  std::vector<VarKind> integrality;
  std::vector<Constraint> constraints;
  std::vector<std::string> names;  // optional diagnostics labels

  int add_var(double lo, double hi, double cost = 0.0,
              VarKind kind = VarKind::Continuous, std::string name = {});
  void add_constraint(SparseRow row, Relation rel, double rhs);

  // Structural sanity: indices in range, binaries within [0,1], finite
  // coefficients. Violations come back as messages; empty means well-formed.
  std::vector<std::string> structural_errors() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Optimal;
  std::vector<double> primal;       // per variable
  std::vector<double> dual;         // per constraint
  std::vector<double> reduced_cost; // per variable
  double objective_value = 0.0;
  double dual_objective = 0.0;
  double max_primal_residual = 0.0;  // constraint violation, scaled
  double max_dual_residual = 0.0;    // reduced-cost violation at optimality
  double max_bound_violation = 0.0;
  int iterations = 0;
  // Infeasible: row multipliers certifying an empty feasible set.
  std::vector<double> farkas;
  // Unbounded: improving ray in the primal variables.
  std::vector<double> ray;
  // Opaque basis snapshot for warm starts (one entry per variable + row).
  std::vector<std::uint8_t> basis;
};

struct LpOptions {
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  int max_iterations = 2'000'000;
  const std::vector<std::uint8_t>* warm_basis = nullptr;
};

LpSolution solve_lp(const MilpModel& model, const LpOptions& options = {});

enum class MilpStatus { Optimal, Infeasible, GapLimit, NodeLimit };

struct MilpSolution {
  MilpStatus status = MilpStatus::Infeasible;
  std::vector<double> incumbent;
  double objective_value = 0.0;
  double best_bound = 0.0;
  double gap = 0.0;  // relative
  std::int64_t nodes_explored = 0;
};

struct MilpOptions {
  double gap_tol = 1e-6;
  double int_tol = 1e-6;
  std::int64_t node_limit = 100'000;
  double time_limit_s = 0.0;  // 0 = none
  LpOptions lp;
  // Test/diagnostic hook invoked after every node LP solve.
  std::function<void(const MilpModel&, const LpSolution&, double best_bound)>
      node_inspector;
};

MilpSolution solve_milp(const MilpModel& model, const MilpOptions& options = {});

struct ResidualReport {
  double max_bound_violation = 0.0;
  double max_row_violation = 0.0;
  double max_integrality_violation = 0.0;
  bool pass = false;
};

ResidualReport check_solution(const MilpModel& model,
                              const std::vector<double>& point, double tol);

// CPLEX LP text format, for cross-checking against external solvers.
std::string write_lp_format(const MilpModel& model);

}  // namespace microplan
