#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

#include "microplan/errors.hpp"
#include "microplan/milp.hpp"
#include "simplex.hpp"

namespace microplan {

LpSolution solve_lp(const MilpModel& model, const LpOptions& options) {
  auto errs = model.structural_errors();
  if (!errs.empty()) raise(ErrorCode::SchemaError, "bad model: " + errs.front());
  auto lp = detail::CoreLp::from_model(model);
  return detail::solve_core(lp, options);
}

namespace {

struct Node {
  std::int64_t id = 0;
  double bound = -kInf;
  std::vector<std::pair<int, std::uint8_t>> fixings;  // (binary var, 0/1) on the path
  std::vector<std::uint8_t> warm;                     // parent basis snapshot
};

// best-first on bound, FIFO among equal bounds
struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

}  // namespace

MilpSolution solve_milp(const MilpModel& model, const MilpOptions& options) {
  auto errs = model.structural_errors();
  if (!errs.empty()) raise(ErrorCode::SchemaError, "bad model: " + errs.front());
  if (!(options.gap_tol > 0.0)) raise(ErrorCode::UnitError, "gap_tol must be positive");

  const auto t_start = std::chrono::steady_clock::now();
  auto timed_out = [&] {
    if (options.time_limit_s <= 0.0) return false;
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t_start;
    return dt.count() > options.time_limit_s;
  };

  std::vector<int> binaries;
  for (int j = 0; j < model.num_vars; ++j)
    if (model.integrality[j] == VarKind::Binary) binaries.push_back(j);

  const auto lp = detail::CoreLp::from_model(model);

  double incumbent_obj = kInf;
  std::vector<double> incumbent;
  bool root_infeasible_proven = false;

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::int64_t next_id = 0;
  open.push(Node{next_id++, -kInf, {}, {}});

  MilpSolution out;
  auto rel_gap = [&](double obj, double bound) {
    return (obj - bound) / std::max(1.0, std::abs(obj));
  };
  auto cutoff = [&] {
    return incumbent_obj - 1e-12 * (1.0 + std::abs(incumbent_obj));
  };

  bool hit_node_limit = false, hit_time_limit = false;

  while (!open.empty()) {
    if (incumbent_obj < kInf && rel_gap(incumbent_obj, open.top().bound) <= options.gap_tol)
      break;
    if (out.nodes_explored >= options.node_limit) { hit_node_limit = true; break; }
    if (timed_out()) { hit_time_limit = true; break; }

    Node node = open.top();
    open.pop();
    ++out.nodes_explored;
    if (node.bound >= cutoff()) continue;

    detail::CoreLp sub = lp;
    for (auto [var, val] : node.fixings) {
      sub.lb[var] = val;
      sub.ub[var] = val;
    }

    LpOptions lpopt = options.lp;
    lpopt.warm_basis = node.warm.empty() ? nullptr : &node.warm;
    LpSolution rel = detail::solve_core(sub, lpopt);
    if (options.node_inspector) options.node_inspector(model, rel, node.bound);

    if (rel.status == LpStatus::Infeasible) {
      if (node.fixings.empty()) root_infeasible_proven = true;
      continue;
    }
    if (rel.status == LpStatus::Unbounded)
      raise(ErrorCode::NumericalFailure, "LP relaxation is unbounded");

    const double bound = rel.objective_value;
    if (bound >= cutoff()) continue;

    // most-fractional binary; ties broken by the lowest variable index
    int branch_var = -1;
    double most = options.int_tol;
    for (int j : binaries) {
      const double dist = std::abs(rel.primal[j] - std::round(rel.primal[j]));
      if (dist > most + 1e-15) {
        most = dist;
        branch_var = j;
      }
    }

    if (branch_var < 0) {
      if (bound < incumbent_obj) {
        incumbent_obj = bound;
        incumbent = rel.primal;
      }
      continue;
    }

    for (std::uint8_t val : {std::uint8_t(0), std::uint8_t(1)}) {
      Node child;
      child.id = next_id++;
      child.bound = bound;
      child.fixings = node.fixings;
      child.fixings.emplace_back(branch_var, val);
      child.warm = rel.basis;
      open.push(std::move(child));
    }
  }

  const bool hit_limit = hit_node_limit || hit_time_limit;
  const double open_bound = open.empty() ? kInf : open.top().bound;

  if (incumbent_obj >= kInf) {
    if (!hit_limit || root_infeasible_proven) {
      out.status = MilpStatus::Infeasible;
      out.objective_value = kInf;
      out.best_bound = kInf;
    } else {
      out.status = hit_node_limit ? MilpStatus::NodeLimit : MilpStatus::GapLimit;
      out.objective_value = kInf;
      out.best_bound = open_bound == kInf ? -kInf : open_bound;
      out.gap = kInf;
    }
    return out;
  }

  out.incumbent = incumbent;
  out.objective_value = incumbent_obj;
  out.best_bound = std::min(open_bound, incumbent_obj);
  out.gap = std::max(0.0, rel_gap(incumbent_obj, out.best_bound));
  if (out.gap <= options.gap_tol) out.status = MilpStatus::Optimal;
  else if (hit_node_limit) out.status = MilpStatus::NodeLimit;
  else out.status = MilpStatus::GapLimit;
  return out;
}

}  // namespace microplan
