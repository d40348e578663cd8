#pragma once

#include <functional>
#include <vector>

namespace microplan::detail {

// Right-looking sparse LU with Markowitz pivot selection and threshold
// partial pivoting. Built for simplex bases: singleton-heavy, nearly
// triangular matrices factor with no fill.
class SparseLu {
 public:
  using ColumnFetch =
      std::function<void(int slot, std::vector<int>& rows, std::vector<double>& vals)>;

  // Factorizes the m x m matrix whose slot-th column is supplied by get_col.
  // Returns true on success. On failure, failed_slots()/failed_rows() name a
  // pairing of unpivoted columns and rows the caller can repair with slacks.
  bool factorize(int m, const ColumnFetch& get_col);

  void solve(std::vector<double>& b) const;             // B x = b (in place)
  void solve_transpose(std::vector<double>& b) const;   // B^T y = b (in place)

  const std::vector<int>& failed_slots() const { return failed_slots_; }
  const std::vector<int>& failed_rows() const { return failed_rows_; }

  std::size_t factor_entries() const { return l_idx_.size() + u_idx_.size(); }
  int dim() const { return m_; }

 private:
  int m_ = 0;
  // elimination steps, in pivot order
  std::vector<int> step_row_, step_col_;
  std::vector<double> step_piv_;
  std::vector<std::size_t> l_start_, u_start_;  // size steps+1
  std::vector<int> l_idx_;      // row indices of L multipliers
  std::vector<double> l_val_;
  std::vector<int> u_idx_;      // column slots of U entries
  std::vector<double> u_val_;
  std::vector<int> failed_slots_, failed_rows_;
};

}  // namespace microplan::detail
