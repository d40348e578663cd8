#include "sparse_lu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace microplan::detail {

namespace {

constexpr double kPivotThreshold = 0.1;   // relative to column max
constexpr double kDropTol = 1e-14;
constexpr int kMaxCandidates = 8;

struct WorkCol {
  std::vector<int> rows;
  std::vector<double> vals;
  double maxabs = 0.0;

  void recompute_max() {
    maxabs = 0.0;
    for (double v : vals) maxabs = std::max(maxabs, std::abs(v));
  }
};

}  // namespace

bool SparseLu::factorize(int m, const ColumnFetch& get_col) {
  m_ = m;
  step_row_.clear(); step_col_.clear(); step_piv_.clear();
  l_start_.assign(1, 0); u_start_.assign(1, 0);
  l_idx_.clear(); l_val_.clear(); u_idx_.clear(); u_val_.clear();
  failed_slots_.clear(); failed_rows_.clear();

  std::vector<WorkCol> cols(m);
  std::vector<std::vector<int>> row_cols(m);  // candidate columns per row (may go stale)
  std::vector<int> row_count(m, 0), col_count(m, 0);
  std::vector<char> row_active(m, 1), col_active(m, 1);

  {
    std::vector<int> rows;
    std::vector<double> vals;
    for (int j = 0; j < m; ++j) {
      rows.clear(); vals.clear();
      get_col(j, rows, vals);
      auto& c = cols[j];
      c.rows = rows;
      c.vals = vals;
      c.recompute_max();
      col_count[j] = int(c.rows.size());
      for (int r : c.rows) {
        ++row_count[r];
        row_cols[r].push_back(j);
      }
    }
  }

  // count buckets over columns, rebuilt lazily
  std::vector<std::vector<int>> bucket(m + 1);
  for (int j = 0; j < m; ++j) bucket[std::min(col_count[j], m)].push_back(j);

  std::vector<double> work(m, 0.0);
  std::vector<char> in_pivot(m, 0);

  auto entry_at = [&](int j, int r) -> double {
    const auto& c = cols[j];
    for (std::size_t k = 0; k < c.rows.size(); ++k)
      if (c.rows[k] == r) return c.vals[k];
    return 0.0;
  };

  for (int step = 0; step < m; ++step) {
    // pivot selection: scan column buckets in increasing count
    int best_row = -1, best_col = -1;
    long best_cost = -1;
    double best_val = 0.0;
    int examined = 0;
    for (int cnt = 1; cnt <= m && best_cost != 0; ++cnt) {
      auto& bk = bucket[cnt];
      std::size_t w = 0;
      for (std::size_t k = 0; k < bk.size(); ++k) {
        const int j = bk[k];
        if (!col_active[j] || col_count[j] != cnt) continue;  // stale
        bk[w++] = j;
        if (examined >= kMaxCandidates && best_cost >= 0) continue;
        ++examined;
        const auto& c = cols[j];
        const double thresh = kPivotThreshold * c.maxabs;
        for (std::size_t e = 0; e < c.rows.size(); ++e) {
          const int r = c.rows[e];
          const double v = c.vals[e];
          if (std::abs(v) < thresh || std::abs(v) < kDropTol) continue;
          const long cost = long(cnt - 1) * long(row_count[r] - 1);
          if (best_cost < 0 || cost < best_cost ||
              (cost == best_cost && std::abs(v) > std::abs(best_val))) {
            best_cost = cost; best_row = r; best_col = j; best_val = v;
          }
        }
      }
      bk.resize(w);
      if (best_cost == 0) break;
      // a later bucket cannot beat (cnt-1)*0 = 0 only via row singletons;
      // accept current best once cost is minimal for this count
      if (best_cost >= 0 && best_cost <= long(cnt - 1)) break;
    }
    if (best_col < 0) {
      // no eligible pivot: remaining active columns are (numerically) dependent
      for (int j = 0; j < m; ++j)
        if (col_active[j]) failed_slots_.push_back(j);
      for (int r = 0; r < m; ++r)
        if (row_active[r]) failed_rows_.push_back(r);
      return false;
    }

    const int pr = best_row, pc = best_col;
    const double piv = best_val;
    step_row_.push_back(pr);
    step_col_.push_back(pc);
    step_piv_.push_back(piv);

    // L multipliers from the pivot column
    auto& pcol = cols[pc];
    for (std::size_t e = 0; e < pcol.rows.size(); ++e) {
      const int r = pcol.rows[e];
      if (r == pr) continue;
      const double l = pcol.vals[e] / piv;
      l_idx_.push_back(r);
      l_val_.push_back(l);
      work[r] = l;
      in_pivot[r] = 1;
      --row_count[r];  // pivot column leaves the active pattern
    }
    l_start_.push_back(l_idx_.size());

    // update every other active column with an entry in the pivot row
    for (int j : row_cols[pr]) {
      if (!col_active[j] || j == pc) continue;
      auto& c = cols[j];
      double u = 0.0;
      std::size_t w = 0;
      bool had_pivot_row = false;
      // first pass: find the pivot-row entry
      for (std::size_t e = 0; e < c.rows.size(); ++e)
        if (c.rows[e] == pr) { u = c.vals[e]; had_pivot_row = true; break; }
      if (!had_pivot_row) continue;  // stale candidate
      u_idx_.push_back(j);
      u_val_.push_back(u);
      // subtract u * L-column, dropping the pivot-row entry
      for (std::size_t e = 0; e < c.rows.size(); ++e) {
        const int r = c.rows[e];
        if (r == pr) continue;
        double v = c.vals[e];
        if (in_pivot[r]) {
          v -= u * work[r];
          in_pivot[r] = 2;  // consumed marker
        }
        if (std::abs(v) < kDropTol) {
          --row_count[r];
          // remove from row_cols lazily
          continue;
        }
        c.rows[w] = r;
        c.vals[w] = v;
        ++w;
      }
      c.rows.resize(w);
      c.vals.resize(w);
      // fill-in: pivot-column rows not already present
      for (std::size_t e = 0; e < pcol.rows.size(); ++e) {
        const int r = pcol.rows[e];
        if (r == pr || in_pivot[r] != 1) {
          if (in_pivot[r] == 2) in_pivot[r] = 1;  // restore marker
          continue;
        }
        const double v = -u * work[r];
        if (std::abs(v) >= kDropTol) {
          c.rows.push_back(r);
          c.vals.push_back(v);
          ++row_count[r];
          row_cols[r].push_back(j);
        }
      }
      c.recompute_max();
      col_count[j] = int(c.rows.size());
      bucket[std::min(col_count[j], m)].push_back(j);
    }
    u_start_.push_back(u_idx_.size());

    // clear workspace
    for (std::size_t e = 0; e < pcol.rows.size(); ++e) {
      work[pcol.rows[e]] = 0.0;
      in_pivot[pcol.rows[e]] = 0;
    }
    col_active[pc] = 0;
    row_active[pr] = 0;
    col_count[pc] = 0;
    row_count[pr] = 0;
    pcol.rows.clear();
    pcol.vals.clear();
    row_cols[pr].clear();
  }
  return true;
}

void SparseLu::solve(std::vector<double>& b) const {
  const int K = int(step_row_.size());
  // forward elimination applied to the rhs
  for (int k = 0; k < K; ++k) {
    const double t = b[step_row_[k]];
    if (t != 0.0)
      for (std::size_t e = l_start_[k]; e < l_start_[k + 1]; ++e)
        b[l_idx_[e]] -= l_val_[e] * t;
  }
  // back substitution; unknowns live at column slots
  std::vector<double> x(m_, 0.0);
  for (int k = K - 1; k >= 0; --k) {
    double acc = b[step_row_[k]];
    for (std::size_t e = u_start_[k]; e < u_start_[k + 1]; ++e)
      acc -= u_val_[e] * x[u_idx_[e]];
    x[step_col_[k]] = acc / step_piv_[k];
  }
  b.swap(x);
}

void SparseLu::solve_transpose(std::vector<double>& b) const {
  const int K = int(step_row_.size());
  // U^T pass (forward over steps), unknowns indexed by pivot rows
  std::vector<double> y(m_, 0.0);
  for (int k = 0; k < K; ++k) {
    const double w = b[step_col_[k]] / step_piv_[k];
    y[step_row_[k]] = w;
    if (w != 0.0)
      for (std::size_t e = u_start_[k]; e < u_start_[k + 1]; ++e)
        b[u_idx_[e]] -= u_val_[e] * w;
  }
  // L^T pass in reverse
  for (int k = K - 1; k >= 0; --k) {
    double acc = 0.0;
    for (std::size_t e = l_start_[k]; e < l_start_[k + 1]; ++e)
      acc += l_val_[e] * y[l_idx_[e]];
    y[step_row_[k]] -= acc;
  }
  b.swap(y);
}

}  // namespace microplan::detail
