#pragma once

#include <cstdint>
#include <vector>

#include "microplan/milp.hpp"

namespace microplan::detail {

// Variable status codes shared with LpSolution::basis snapshots.
enum VStat : std::uint8_t { kAtLower = 0, kAtUpper = 1, kBasic = 2, kFree = 3 };

// Computational form: min c'v  s.t.  A v_struct - v_slack = 0, lb <= v <= ub,
// where v = [structurals | row slacks]. Built once from a MilpModel; bounds
// may then be overridden per solve (branch-and-bound fixings).
struct CoreLp {
  int m = 0;        // rows
  int n = 0;        // structural columns
  // CSC of A
  std::vector<std::int64_t> col_start;
  std::vector<int> row_index;
  std::vector<double> value;
  std::vector<double> cost;    // size n + m (slack costs 0)
  std::vector<double> lb, ub;  // size n + m

  static CoreLp from_model(const MilpModel& model);
};

LpSolution solve_core(const CoreLp& lp, const LpOptions& options);

}  // namespace microplan::detail
