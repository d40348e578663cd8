#include "microplan/milp.hpp"

#include <cmath>
#include <sstream>

namespace microplan {

int MilpModel::add_var(double lo, double hi, double cost, VarKind kind,
                       std::string name) {
  lower.push_back(lo);
  upper.push_back(hi);
  objective.push_back(cost);
  integrality.push_back(kind);
  if (!name.empty() || !names.empty()) {
    names.resize(num_vars);
    names.push_back(std::move(name));
  }
  return num_vars++;
}

void MilpModel::add_constraint(SparseRow row, Relation rel, double rhs) {
  constraints.push_back({std::move(row), rel, rhs});
}

std::vector<std::string> MilpModel::structural_errors() const {
  std::vector<std::string> errs;
  auto finite = [](double v) { return !std::isnan(v) && !std::isinf(v); };
  if (int(objective.size()) != num_vars || int(lower.size()) != num_vars ||
      int(upper.size()) != num_vars || int(integrality.size()) != num_vars)
    errs.push_back("variable array sizes disagree with num_vars");
  for (int j = 0; j < num_vars && j < int(objective.size()); ++j) {
    if (!finite(objective[j]))
      errs.push_back("objective[" + std::to_string(j) + "] is not finite");
    if (integrality[j] == VarKind::Binary &&
        (lower[j] < -1e-12 || upper[j] > 1.0 + 1e-12))
      errs.push_back("binary variable " + std::to_string(j) +
                     " has bounds outside [0,1]");
    if (lower[j] > upper[j])
      errs.push_back("variable " + std::to_string(j) + " has lower > upper");
  }
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto& c = constraints[i];
    if (!finite(c.rhs)) errs.push_back("rhs of row " + std::to_string(i) + " not finite");
    for (std::size_t k = 0; k < c.row.index.size(); ++k) {
      if (c.row.index[k] < 0 || c.row.index[k] >= num_vars) {
        errs.push_back("row " + std::to_string(i) + " references variable " +
                       std::to_string(c.row.index[k]));
        break;
      }
      if (!finite(c.row.value[k])) {
        errs.push_back("row " + std::to_string(i) + " has a non-finite coefficient");
        break;
      }
    }
  }
  return errs;
}

ResidualReport check_solution(const MilpModel& model,
                              const std::vector<double>& point, double tol) {
  ResidualReport rep;
  for (int j = 0; j < model.num_vars; ++j) {
    const double v = point[j];
    rep.max_bound_violation =
        std::max({rep.max_bound_violation, model.lower[j] - v, v - model.upper[j]});
    if (model.integrality[j] == VarKind::Binary)
      rep.max_integrality_violation =
          std::max(rep.max_integrality_violation, std::abs(v - std::round(v)));
  }
  for (const auto& c : model.constraints) {
    double lhs = 0.0;
    for (std::size_t k = 0; k < c.row.index.size(); ++k)
      lhs += c.row.value[k] * point[c.row.index[k]];
    double viol = 0.0;
    switch (c.relation) {
      case Relation::LessEqual: viol = lhs - c.rhs; break;
      case Relation::GreaterEqual: viol = c.rhs - lhs; break;
      case Relation::Equal: viol = std::abs(lhs - c.rhs); break;
    }
    rep.max_row_violation = std::max(rep.max_row_violation, viol);
  }
  rep.pass = rep.max_bound_violation <= tol && rep.max_row_violation <= tol &&
             rep.max_integrality_violation <= tol;
  return rep;
}

namespace {

std::string var_name(const MilpModel& m, int j) {
  if (j < int(m.names.size()) && !m.names[j].empty()) return m.names[j];
  return "x" + std::to_string(j);
}

std::string coef(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

}  // namespace

std::string write_lp_format(const MilpModel& m) {
  std::ostringstream out;
  out << "\\ exported model\nMinimize\n obj:";
  bool any = false;
  for (int j = 0; j < m.num_vars; ++j) {
    if (m.objective[j] == 0.0) continue;
    out << (m.objective[j] >= 0 ? " + " : " - ") << coef(std::abs(m.objective[j]))
        << " " << var_name(m, j);
    any = true;
  }
  if (!any) out << " 0 " << var_name(m, 0);
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < m.constraints.size(); ++i) {
    const auto& c = m.constraints[i];
    out << " c" << i << ":";
    for (std::size_t k = 0; k < c.row.index.size(); ++k) {
      const double v = c.row.value[k];
      out << (v >= 0 ? " + " : " - ") << coef(std::abs(v)) << " "
          << var_name(m, c.row.index[k]);
    }
    switch (c.relation) {
      case Relation::LessEqual: out << " <= "; break;
      case Relation::Equal: out << " = "; break;
      case Relation::GreaterEqual: out << " >= "; break;
    }
    out << coef(c.rhs) << "\n";
  }
  out << "Bounds\n";
  for (int j = 0; j < m.num_vars; ++j) {
    const double lo = m.lower[j], hi = m.upper[j];
    if (lo == -kInf && hi == kInf) out << " " << var_name(m, j) << " free\n";
    else if (lo == -kInf) out << " -inf <= " << var_name(m, j) << " <= " << coef(hi) << "\n";
    else if (hi == kInf) out << " " << coef(lo) << " <= " << var_name(m, j) << "\n";
    else out << " " << coef(lo) << " <= " << var_name(m, j) << " <= " << coef(hi) << "\n";
  }
  bool any_bin = false;
  for (int j = 0; j < m.num_vars; ++j)
    if (m.integrality[j] == VarKind::Binary) {
      if (!any_bin) { out << "Binaries\n"; any_bin = true; }
      out << " " << var_name(m, j) << "\n";
    }
  out << "End\n";
  return out.str();
}

}  // namespace microplan
