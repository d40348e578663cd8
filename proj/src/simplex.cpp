#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "microplan/errors.hpp"
#include "sparse_lu.hpp"

namespace microplan::detail {

namespace {

constexpr int kRefactorEvery = 100;
constexpr double kPivotTol = 1e-7;
constexpr int kStallLimit = 6000;

struct Eta {
  int pos = 0;       // basis slot that changed
  double pivot = 0;  // w[pos]
  std::vector<int> idx;
  std::vector<double> val;
};

class Simplex {
 public:
  Simplex(const CoreLp& lp, const LpOptions& opt) : lp_(lp), opt_(opt) {
    m_ = lp.m;
    n_ = lp.n;
    N_ = m_ + n_;
  }

  LpSolution run();

 private:
  const CoreLp& lp_;
  LpOptions opt_;
  int m_, n_, N_;

  std::vector<std::uint8_t> stat_;
  std::vector<int> basic_;  // var per slot
  std::vector<int> pos_;    // slot per var, -1 if nonbasic
  std::vector<double> x_;
  std::vector<double> pcost_;  // phase-1 costs, by variable
  bool phase1_ = false;
  bool bland_ = false;
  int stall_ = 0;
  int iters_ = 0;
  int pivots_since_refactor_ = 0;

  SparseLu lu_;
  std::vector<Eta> etas_;

  template <class F>
  void for_col(int var, F&& f) const {
    if (var < n_) {
      for (auto k = lp_.col_start[var]; k < lp_.col_start[var + 1]; ++k)
        f(lp_.row_index[k], lp_.value[k]);
    } else {
      f(var - n_, -1.0);
    }
  }

  double cost_of(int j) const { return phase1_ ? pcost_[j] : lp_.cost[j]; }

  double bound_start_value(int var) const {
    if (lp_.lb[var] > -kInf) return lp_.lb[var];
    if (lp_.ub[var] < kInf) return lp_.ub[var];
    return 0.0;
  }

  void default_basis() {
    stat_.assign(N_, kAtLower);
    for (int j = 0; j < N_; ++j) {
      if (lp_.lb[j] > -kInf) stat_[j] = kAtLower;
      else if (lp_.ub[j] < kInf) stat_[j] = kAtUpper;
      else stat_[j] = kFree;
    }
    for (int i = 0; i < m_; ++i) stat_[n_ + i] = kBasic;
  }

  void adopt_basis(const std::vector<std::uint8_t>& warm) {
    stat_ = warm;
    int basics = 0;
    for (int j = 0; j < N_; ++j)
      if (stat_[j] == kBasic) ++basics;
    for (int j = N_ - 1; j >= 0 && basics > m_; --j)
      if (stat_[j] == kBasic) {
        stat_[j] = lp_.lb[j] > -kInf ? kAtLower : (lp_.ub[j] < kInf ? kAtUpper : kFree);
        --basics;
      }
    for (int i = 0; i < m_ && basics < m_; ++i)
      if (stat_[n_ + i] != kBasic) {
        stat_[n_ + i] = kBasic;
        ++basics;
      }
  }

  void build_slots() {
    basic_.clear();
    pos_.assign(N_, -1);
    for (int j = 0; j < N_; ++j)
      if (stat_[j] == kBasic) {
        pos_[j] = int(basic_.size());
        basic_.push_back(j);
      }
  }

  bool refactorize() {
    for (int attempt = 0; attempt < 5; ++attempt) {
      const bool ok = lu_.factorize(
          m_, [&](int slot, std::vector<int>& rows, std::vector<double>& vals) {
            for_col(basic_[slot], [&](int r, double v) {
              rows.push_back(r);
              vals.push_back(v);
            });
          });
      etas_.clear();
      pivots_since_refactor_ = 0;
      if (ok) return true;
      const auto& slots = lu_.failed_slots();
      const auto& rows = lu_.failed_rows();
      // repair: swap dependent columns for the slacks of unpivoted rows
      for (std::size_t k = 0; k < slots.size() && k < rows.size(); ++k) {
        const int out_var = basic_[slots[k]];
        const int in_var = n_ + rows[k];
        if (pos_[in_var] >= 0) continue;
        stat_[out_var] =
            lp_.lb[out_var] > -kInf ? kAtLower
                                    : (lp_.ub[out_var] < kInf ? kAtUpper : kFree);
        x_[out_var] = bound_start_value(out_var);
        pos_[out_var] = -1;
        stat_[in_var] = kBasic;
        pos_[in_var] = slots[k];
        basic_[slots[k]] = in_var;
      }
    }
    return false;
  }

  void ftran(std::vector<double>& b) const {
    lu_.solve(b);
    for (const auto& e : etas_) {
      const double t = b[e.pos] / e.pivot;
      if (t != 0.0)
        for (std::size_t k = 0; k < e.idx.size(); ++k) b[e.idx[k]] -= e.val[k] * t;
      b[e.pos] = t;
    }
  }

  void btran(std::vector<double>& c) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double acc = c[it->pos];
      for (std::size_t k = 0; k < it->idx.size(); ++k)
        acc -= it->val[k] * c[it->idx[k]];
      c[it->pos] = acc / it->pivot;
    }
    lu_.solve_transpose(c);
  }

  void recompute_basics() {
    std::vector<double> rhs(m_, 0.0);
    for (int j = 0; j < N_; ++j) {
      if (stat_[j] == kBasic) continue;
      const double v = x_[j];
      if (v == 0.0) continue;
      for_col(j, [&](int r, double a) { rhs[r] -= a * v; });
    }
    ftran(rhs);
    for (int s = 0; s < m_; ++s) x_[basic_[s]] = rhs[s];
  }

  double rebuild_phase_costs() {
    double infeas = 0.0;
    std::fill(pcost_.begin(), pcost_.end(), 0.0);
    for (int s = 0; s < m_; ++s) {
      const int j = basic_[s];
      const double v = x_[j];
      if (v < lp_.lb[j] - opt_.feas_tol) {
        pcost_[j] = -1.0;
        infeas += lp_.lb[j] - v;
      } else if (v > lp_.ub[j] + opt_.feas_tol) {
        pcost_[j] = 1.0;
        infeas += v - lp_.ub[j];
      }
    }
    return infeas;
  }

  LpSolution finish_optimal();
};

LpSolution Simplex::run() {
  x_.assign(N_, 0.0);
  pcost_.assign(N_, 0.0);

  if (opt_.warm_basis && int(opt_.warm_basis->size()) == N_)
    adopt_basis(*opt_.warm_basis);
  else
    default_basis();
  for (int j = 0; j < N_; ++j) {
    if (stat_[j] == kBasic) continue;
    if (stat_[j] == kAtLower && lp_.lb[j] <= -kInf)
      stat_[j] = lp_.ub[j] < kInf ? kAtUpper : kFree;
    if (stat_[j] == kAtUpper && lp_.ub[j] >= kInf)
      stat_[j] = lp_.lb[j] > -kInf ? kAtLower : kFree;
    if (stat_[j] == kFree && lp_.lb[j] == lp_.ub[j]) stat_[j] = kAtLower;
    x_[j] = stat_[j] == kAtLower ? lp_.lb[j] : (stat_[j] == kAtUpper ? lp_.ub[j] : 0.0);
  }
  build_slots();
  if (!refactorize())
    raise(ErrorCode::NumericalFailure, "basis factorization failed");
  recompute_basics();

  std::vector<double> y(m_), w(m_);
  phase1_ = rebuild_phase_costs() > opt_.feas_tol;

  while (true) {
    if (++iters_ > opt_.max_iterations)
      raise(ErrorCode::NumericalFailure, "simplex iteration limit exceeded");

    std::fill(y.begin(), y.end(), 0.0);
    bool any_cost = false;
    for (int s = 0; s < m_; ++s) {
      y[s] = cost_of(basic_[s]);
      any_cost = any_cost || y[s] != 0.0;
    }
    if (any_cost) btran(y);

    int enter = -1;
    double best_score = 0.0;
    double enter_d = 0.0;
    for (int j = 0; j < N_; ++j) {
      if (stat_[j] == kBasic) continue;
      if (lp_.lb[j] == lp_.ub[j]) continue;
      double d = cost_of(j);
      if (any_cost) for_col(j, [&](int r, double a) { d -= y[r] * a; });
      double score = 0.0;
      if (stat_[j] == kAtLower && d < -opt_.opt_tol) score = -d;
      else if (stat_[j] == kAtUpper && d > opt_.opt_tol) score = d;
      else if (stat_[j] == kFree && std::abs(d) > opt_.opt_tol) score = std::abs(d);
      if (score > 0.0) {
        if (bland_) { enter = j; enter_d = d; break; }
        if (score > best_score) { best_score = score; enter = j; enter_d = d; }
      }
    }

    if (enter < 0) {
      if (phase1_) {
        const double infeas = rebuild_phase_costs();
        if (infeas > 1e3 * opt_.feas_tol) {
          LpSolution sol;
          sol.status = LpStatus::Infeasible;
          sol.iterations = iters_;
          sol.basis = stat_;
          sol.farkas = y;  // phase-1 duals certify emptiness
          return sol;
        }
        phase1_ = false;
        continue;
      }
      return finish_optimal();
    }

    const double sigma = (stat_[enter] == kAtUpper) ? -1.0
                         : (stat_[enter] == kFree) ? (enter_d < 0 ? 1.0 : -1.0)
                                                   : 1.0;

    std::fill(w.begin(), w.end(), 0.0);
    for_col(enter, [&](int r, double a) { w[r] += a; });
    ftran(w);

    // ratio test: basics move at rate -sigma*w per unit of the entering step
    double step = kInf;
    if (lp_.lb[enter] > -kInf && lp_.ub[enter] < kInf)
      step = lp_.ub[enter] - lp_.lb[enter];
    int leave_slot = -1;
    double leave_pivot = 0.0;
    std::uint8_t leave_stat = kAtLower;
    for (int s = 0; s < m_; ++s) {
      const double rate = -sigma * w[s];
      if (std::abs(rate) < kPivotTol) continue;
      const int j = basic_[s];
      const double v = x_[j];
      double bound;
      std::uint8_t target;
      if (phase1_ && v < lp_.lb[j] - opt_.feas_tol) {
        if (rate <= 0.0) continue;  // drifting further out is priced by phase 1
        bound = lp_.lb[j];
        target = kAtLower;
      } else if (phase1_ && v > lp_.ub[j] + opt_.feas_tol) {
        if (rate >= 0.0) continue;
        bound = lp_.ub[j];
        target = kAtUpper;
      } else if (rate > 0.0) {
        if (lp_.ub[j] >= kInf) continue;
        bound = lp_.ub[j];
        target = kAtUpper;
      } else {
        if (lp_.lb[j] <= -kInf) continue;
        bound = lp_.lb[j];
        target = kAtLower;
      }
      const double ratio = std::max((bound - v) / rate, 0.0);
      bool take = false;
      if (ratio < step - 1e-12) {
        take = true;
      } else if (leave_slot >= 0 && ratio <= step + 1e-12) {
        take = bland_ ? j < basic_[leave_slot]
                      : std::abs(w[s]) > std::abs(leave_pivot);
      }
      if (take) {
        step = std::min(step, ratio);
        leave_slot = s;
        leave_pivot = w[s];
        leave_stat = target;
      }
    }

    if (step >= kInf) {
      if (phase1_)
        raise(ErrorCode::NumericalFailure, "unbounded phase-1 direction");
      LpSolution sol;
      sol.status = LpStatus::Unbounded;
      sol.iterations = iters_;
      sol.basis = stat_;
      sol.ray.assign(n_, 0.0);
      if (enter < n_) sol.ray[enter] = sigma;
      for (int s = 0; s < m_; ++s)
        if (basic_[s] < n_) sol.ray[basic_[s]] = -sigma * w[s];
      return sol;
    }

    if (step <= 1e-12) {
      if (++stall_ > kStallLimit) bland_ = true;
    } else {
      // real progress; degenerate patch is over
      stall_ = 0;
      bland_ = false;
    }

    if (step > 0.0) {
      for (int s = 0; s < m_; ++s) {
        const double rate = -sigma * w[s];
        if (rate != 0.0) x_[basic_[s]] += rate * step;
      }
      x_[enter] += sigma * step;
    }

    if (leave_slot < 0) {
      stat_[enter] = stat_[enter] == kAtLower ? kAtUpper : kAtLower;
      x_[enter] = stat_[enter] == kAtLower ? lp_.lb[enter] : lp_.ub[enter];
    } else {
      const int leave_var = basic_[leave_slot];
      x_[leave_var] = leave_stat == kAtLower ? lp_.lb[leave_var] : lp_.ub[leave_var];
      stat_[leave_var] = leave_stat;
      pos_[leave_var] = -1;
      stat_[enter] = kBasic;
      pos_[enter] = leave_slot;
      basic_[leave_slot] = enter;

      Eta e;
      e.pos = leave_slot;
      e.pivot = w[leave_slot];
      for (int s = 0; s < m_; ++s)
        if (s != leave_slot && w[s] != 0.0) {
          e.idx.push_back(s);
          e.val.push_back(w[s]);
        }
      etas_.push_back(std::move(e));

      if (++pivots_since_refactor_ >= kRefactorEvery) {
        if (!refactorize())
          raise(ErrorCode::NumericalFailure, "basis factorization failed");
        recompute_basics();
        // numeric drift can push basics out of bounds; fall back to phase 1
        if (!phase1_ && rebuild_phase_costs() > 1e3 * opt_.feas_tol) phase1_ = true;
      }
    }

    if (phase1_) {
      const double infeas = rebuild_phase_costs();
      if (infeas <= opt_.feas_tol) {
        phase1_ = false;
        if (!refactorize())
          raise(ErrorCode::NumericalFailure, "basis factorization failed");
        recompute_basics();
      }
    }
  }
}

LpSolution Simplex::finish_optimal() {
  if (!refactorize())
    raise(ErrorCode::NumericalFailure, "basis factorization failed");
  recompute_basics();

  LpSolution sol;
  sol.status = LpStatus::Optimal;
  sol.iterations = iters_;
  sol.basis = stat_;

  std::vector<double> y(m_, 0.0);
  for (int s = 0; s < m_; ++s) y[s] = lp_.cost[basic_[s]];
  btran(y);

  sol.primal.assign(x_.begin(), x_.begin() + n_);
  sol.dual = y;
  sol.reduced_cost.assign(N_, 0.0);
  double dual_obj = 0.0;
  double dres = 0.0;
  for (int j = 0; j < N_; ++j) {
    double d = lp_.cost[j];
    for_col(j, [&](int r, double a) { d -= y[r] * a; });
    sol.reduced_cost[j] = d;
    if (stat_[j] == kBasic) dres = std::max(dres, std::abs(d));
    else if (lp_.lb[j] == lp_.ub[j]) { /* fixed: any sign */ }
    else if (stat_[j] == kAtLower) dres = std::max(dres, -d);
    else if (stat_[j] == kAtUpper) dres = std::max(dres, d);
    else dres = std::max(dres, std::abs(d));
    if (d > 0.0 && lp_.lb[j] > -kInf) dual_obj += d * lp_.lb[j];
    else if (d < 0.0 && lp_.ub[j] < kInf) dual_obj += d * lp_.ub[j];
  }
  sol.max_dual_residual = dres;
  sol.dual_objective = dual_obj;

  double obj = 0.0;
  for (int j = 0; j < n_; ++j) obj += lp_.cost[j] * x_[j];
  sol.objective_value = obj;

  std::vector<double> act(m_, 0.0);
  for (int j = 0; j < n_; ++j) {
    const double v = x_[j];
    if (v == 0.0) continue;
    for (auto k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k)
      act[lp_.row_index[k]] += lp_.value[k] * v;
  }
  double pres = 0.0, bviol = 0.0;
  for (int i = 0; i < m_; ++i) pres = std::max(pres, std::abs(act[i] - x_[n_ + i]));
  for (int j = 0; j < N_; ++j) {
    if (lp_.lb[j] > -kInf) bviol = std::max(bviol, lp_.lb[j] - x_[j]);
    if (lp_.ub[j] < kInf) bviol = std::max(bviol, x_[j] - lp_.ub[j]);
  }
  sol.max_primal_residual = pres;
  sol.max_bound_violation = bviol;
  sol.reduced_cost.resize(n_);
  return sol;
}

}  // namespace

CoreLp CoreLp::from_model(const MilpModel& model) {
  CoreLp lp;
  lp.m = int(model.constraints.size());
  lp.n = model.num_vars;
  lp.cost = model.objective;
  lp.cost.resize(lp.n + lp.m, 0.0);
  lp.lb = model.lower;
  lp.ub = model.upper;
  lp.lb.resize(lp.n + lp.m);
  lp.ub.resize(lp.n + lp.m);
  for (int i = 0; i < lp.m; ++i) {
    const auto& c = model.constraints[i];
    switch (c.relation) {
      case Relation::LessEqual:
        lp.lb[lp.n + i] = -kInf;
        lp.ub[lp.n + i] = c.rhs;
        break;
      case Relation::GreaterEqual:
        lp.lb[lp.n + i] = c.rhs;
        lp.ub[lp.n + i] = kInf;
        break;
      case Relation::Equal:
        lp.lb[lp.n + i] = c.rhs;
        lp.ub[lp.n + i] = c.rhs;
        break;
    }
  }
  std::vector<std::int64_t> count(lp.n + 1, 0);
  for (const auto& c : model.constraints)
    for (int j : c.row.index) ++count[j + 1];
  lp.col_start.assign(lp.n + 1, 0);
  for (int j = 0; j < lp.n; ++j) lp.col_start[j + 1] = lp.col_start[j] + count[j + 1];
  lp.row_index.resize(lp.col_start[lp.n]);
  lp.value.resize(lp.col_start[lp.n]);
  std::vector<std::int64_t> fill(lp.n, 0);
  for (int i = 0; i < lp.m; ++i) {
    const auto& c = model.constraints[i];
    for (std::size_t k = 0; k < c.row.index.size(); ++k) {
      const int j = c.row.index[k];
      const auto at = lp.col_start[j] + fill[j]++;
      lp.row_index[at] = i;
      lp.value[at] = c.row.value[k];
    }
  }
  return lp;
}

namespace {

// power-of-two geometric-mean equilibration; exactly invertible
void equilibrate(CoreLp& lp, std::vector<double>& row_scale,
                 std::vector<double>& col_scale) {
  row_scale.assign(lp.m, 1.0);
  col_scale.assign(lp.n, 1.0);
  for (int pass = 0; pass < 3; ++pass) {
    std::vector<double> rmin(lp.m, kInf), rmax(lp.m, 0.0);
    for (int j = 0; j < lp.n; ++j)
      for (auto k = lp.col_start[j]; k < lp.col_start[j + 1]; ++k) {
        const double a =
            std::abs(lp.value[k] * row_scale[lp.row_index[k]] * col_scale[j]);
        if (a == 0.0) continue;
        rmin[lp.row_index[k]] = std::min(rmin[lp.row_index[k]], a);
        rmax[lp.row_index[k]] = std::max(rmax[lp.row_index[k]], a);
      }
    for (int i = 0; i < lp.m; ++i)
      if (rmax[i] > 0.0)
        row_scale[i] *= std::exp2(-std::round(0.5 * std::log2(rmin[i] * rmax[i])));
    std::vector<double> cmin(lp.n, kInf), cmax(lp.n, 0.0);
    for (int j = 0; j < lp.n; ++j)
      for (auto k = lp.col_start[j]; k < lp.col_start[j + 1]; ++k) {
        const double a =
            std::abs(lp.value[k] * row_scale[lp.row_index[k]] * col_scale[j]);
        if (a == 0.0) continue;
        cmin[j] = std::min(cmin[j], a);
        cmax[j] = std::max(cmax[j], a);
      }
    for (int j = 0; j < lp.n; ++j)
      if (cmax[j] > 0.0)
        col_scale[j] *= std::exp2(-std::round(0.5 * std::log2(cmin[j] * cmax[j])));
  }
}

}  // namespace

LpSolution solve_core(const CoreLp& lp, const LpOptions& options) {
  // scale a working copy; variable transform x^ = x / col_scale, row scale R
  CoreLp s = lp;
  std::vector<double> rs, cs;
  equilibrate(s, rs, cs);
  for (int j = 0; j < s.n; ++j)
    for (auto k = s.col_start[j]; k < s.col_start[j + 1]; ++k)
      s.value[k] *= rs[s.row_index[k]] * cs[j];
  for (int j = 0; j < s.n; ++j) {
    s.cost[j] *= cs[j];
    if (s.lb[j] > -kInf) s.lb[j] /= cs[j];
    if (s.ub[j] < kInf) s.ub[j] /= cs[j];
  }
  for (int i = 0; i < s.m; ++i) {
    // slack s^ = R * (A x), so slack bounds scale by R
    if (s.lb[s.n + i] > -kInf) s.lb[s.n + i] *= rs[i];
    if (s.ub[s.n + i] < kInf) s.ub[s.n + i] *= rs[i];
  }

  Simplex simplex(s, options);
  LpSolution sol = simplex.run();

  // map the solution back to original units
  if (sol.status == LpStatus::Optimal) {
    for (int j = 0; j < lp.n; ++j) sol.primal[j] *= cs[j];
    for (int i = 0; i < lp.m; ++i) sol.dual[i] *= rs[i];
    for (int j = 0; j < lp.n; ++j) sol.reduced_cost[j] /= cs[j];
    double obj = 0.0;
    for (int j = 0; j < lp.n; ++j) obj += lp.cost[j] * sol.primal[j];
    sol.objective_value = obj;
    // residuals against the original data
    std::vector<double> act(lp.m, 0.0);
    for (int j = 0; j < lp.n; ++j) {
      const double v = sol.primal[j];
      if (v == 0.0) continue;
      for (auto k = lp.col_start[j]; k < lp.col_start[j + 1]; ++k)
        act[lp.row_index[k]] += lp.value[k] * v;
    }
    double pres = 0.0, bviol = 0.0;
    for (int i = 0; i < lp.m; ++i) {
      const double scale = std::max(1.0, std::abs(act[i]));
      if (lp.lb[lp.n + i] > -kInf)
        pres = std::max(pres, (lp.lb[lp.n + i] - act[i]) / scale);
      if (lp.ub[lp.n + i] < kInf)
        pres = std::max(pres, (act[i] - lp.ub[lp.n + i]) / scale);
    }
    for (int j = 0; j < lp.n; ++j) {
      const double v = sol.primal[j];
      const double scale = std::max(1.0, std::abs(v));
      if (lp.lb[j] > -kInf) bviol = std::max(bviol, (lp.lb[j] - v) / scale);
      if (lp.ub[j] < kInf) bviol = std::max(bviol, (v - lp.ub[j]) / scale);
    }
    sol.max_primal_residual = std::max(pres, 0.0);
    sol.max_bound_violation = std::max(bviol, 0.0);
  } else if (sol.status == LpStatus::Infeasible) {
    for (std::size_t i = 0; i < sol.farkas.size(); ++i) sol.farkas[i] *= rs[i];
  } else if (sol.status == LpStatus::Unbounded) {
    for (int j = 0; j < lp.n; ++j) sol.ray[j] *= cs[j];
  }
  return sol;
}

}  // namespace microplan::detail
