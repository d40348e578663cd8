#include "microplan/grid_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "microplan/errors.hpp"
#include "microplan/util.hpp"

namespace microplan {

void TimeSeriesBundle::recompute_peak() {
  double peak = 0.0;
  for (std::size_t p = 0; p < periods.size(); ++p) {
    double total = 0.0;
    for (const auto& series : load_p)
      if (p < series.size()) total += series[p];
    peak = std::max(peak, total);
  }
  peak_demand = peak;
}

int PlanningProblem::bus_index(int bus_id) const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == bus_id) return int(i);
  return -1;
}

int PlanningProblem::poi_bus_id() const {
  for (const auto& b : buses)
    if (b.is_poi) return b.id;
  return -1;
}

std::pair<double, double> per_unitize(double r_ohm, double x_ohm,
                                      double base_kv, double base_mva) {
  const double z_base = base_kv * base_kv / base_mva;
  const double r = r_ohm / z_base;
  const double x = x_ohm / z_base;
  const double zz = r * r + x * x;
  if (zz == 0.0) raise(ErrorCode::ZeroImpedance, "line has zero series impedance");
  return {r / zz, -x / zz};
}

namespace {

void add(std::vector<Violation>& v, const std::string& code, const std::string& msg) {
  v.push_back({code, msg});
}

}  // namespace

std::vector<Violation> validate(const PlanningProblem& pr) {
  std::vector<Violation> v;

  if (pr.base_mva <= 0.0) add(v, "base_mva", "base_mva must be positive");
  if (pr.base_kv <= 0.0) add(v, "base_kv", "base_kv must be positive");
  if (pr.buses.empty()) add(v, "buses_empty", "no buses defined");

  int poi_count = 0;
  std::set<int> bus_ids;
  for (const auto& b : pr.buses) {
    if (b.is_poi) ++poi_count;
    if (!bus_ids.insert(b.id).second)
      add(v, "bus_duplicate", "duplicate bus id " + std::to_string(b.id));
    if (!(b.dv_min <= 0.0 && 0.0 <= b.dv_max))
      add(v, "bus_dv_bounds", "bus " + std::to_string(b.id) +
                                  " voltage-deviation bounds must bracket 0");
  }
  if (poi_count != 1)
    add(v, "poi_count", "expected exactly one POI bus, found " +
                            std::to_string(poi_count));

  std::set<int> line_ids;
  for (const auto& l : pr.lines) {
    const std::string tag = "line " + std::to_string(l.id);
    if (!line_ids.insert(l.id).second) add(v, "line_duplicate", "duplicate " + tag);
    if (l.from_bus == l.to_bus) add(v, "line_loop", tag + " connects a bus to itself");
    if (!bus_ids.count(l.from_bus) || !bus_ids.count(l.to_bus))
      add(v, "line_endpoint", tag + " references an unknown bus");
    if (!(l.g > 0.0)) add(v, "line_conductance", tag + " must have g > 0");
    if (!(l.p_limit > 0.0)) add(v, "line_p_limit", tag + " must have p_limit > 0");
    if (!(l.q_limit > 0.0)) add(v, "line_q_limit", tag + " must have q_limit > 0");
    if (l.status == LineStatus::Existing && l.annual_cost != 0.0)
      add(v, "line_existing_cost", tag + " is existing but has a nonzero annual cost");
  }

  std::set<int> der_ids;
  for (const auto& d : pr.der_candidates) {
    const std::string tag = "der " + std::to_string(d.id);
    if (!der_ids.insert(d.id).second) add(v, "der_duplicate", "duplicate " + tag);
    if (!(d.p_cap > 0.0)) add(v, "der_p_cap", tag + " must have p_cap > 0");
    if (d.kind == DerKind::Storage) {
      if (!(d.e_cap > 0.0)) add(v, "der_e_cap", tag + " must have e_cap > 0");
      if (!(d.efficiency > 0.0 && d.efficiency <= 1.0))
        add(v, "der_efficiency", tag + " efficiency must lie in (0,1]");
    }
    if (d.candidate_buses.empty())
      add(v, "der_buses_empty", tag + " has no candidate buses");
    for (int b : d.candidate_buses)
      if (!bus_ids.count(b))
        add(v, "der_bus_unknown", tag + " candidate bus " + std::to_string(b) +
                                      " does not exist");
    if (d.q_ratio < 0.0) add(v, "der_q_ratio", tag + " q_ratio must be >= 0");
    if (d.kind == DerKind::NondispatchableDg &&
        !pr.timeseries.gen_profiles.count(d.profile_id))
      add(v, "der_profile", tag + " references unknown profile '" + d.profile_id + "'");
  }

  const auto& ts = pr.timeseries;
  const std::size_t np = ts.periods.size();
  if (np == 0) add(v, "periods_empty", "no periods defined");
  if (ts.load_p.size() != pr.buses.size() || ts.load_q.size() != pr.buses.size())
    add(v, "load_shape", "load series count must equal bus count");
  for (const auto& series : ts.load_p) {
    if (series.size() != np) { add(v, "series_length", "load_p series length mismatch"); break; }
  }
  for (const auto& series : ts.load_q) {
    if (series.size() != np) { add(v, "series_length", "load_q series length mismatch"); break; }
  }
  if (ts.price.size() != np) add(v, "series_length", "price series length mismatch");
  for (const auto& [pid, series] : ts.gen_profiles) {
    if (series.size() != np) {
      add(v, "series_length", "profile '" + pid + "' length mismatch");
      continue;
    }
    for (double mu : series)
      if (!(mu >= 0.0 && mu <= 1.0)) {
        add(v, "profile_range", "profile '" + pid + "' leaves [0,1]");
        break;
      }
  }
  bool negative_load = false;
  for (const auto& series : ts.load_p)
    for (double l : series) negative_load = negative_load || l < 0.0;
  if (negative_load) add(v, "load_negative", "negative active load");

  // weights per year must sum to 365
  {
    std::map<int, double> wsum;
    bool bad_period = false;
    for (const auto& p : ts.periods) {
      if (p.year < 1 || p.year > pr.economics.horizon_years) bad_period = true;
      if (p.hour == 0) wsum[p.year] += p.weight_days;  // one weight per day
    }
    if (bad_period)
      add(v, "period_year", "period year outside [1, horizon_years]");
    for (const auto& [year, w] : wsum)
      if (std::abs(w - 365.0) > 0.5)
        add(v, "day_weights", "day weights for year " + std::to_string(year) +
                                  " sum to " + fmt_double(w) + ", expected 365");
  }

  {
    double recomputed = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
      double total = 0.0;
      for (const auto& series : ts.load_p)
        if (p < series.size()) total += series[p];
      recomputed = std::max(recomputed, total);
    }
    if (std::abs(recomputed - ts.peak_demand) > 1e-9 * (1.0 + recomputed))
      add(v, "peak_demand", "peak_demand is stale; expected " + fmt_double(recomputed));
  }

  const auto& sc = pr.scenarios;
  if (sc.scenarios.empty()) add(v, "scenarios_empty", "no scenarios defined");
  bool grid_found = false;
  for (const auto& s : sc.scenarios) {
    if (s.probability < 0.0)
      add(v, "scenario_probability", "scenario " + std::to_string(s.id) +
                                         " has negative probability");
    if (s.u.size() != np)
      add(v, "scenario_length", "scenario " + std::to_string(s.id) +
                                    " islanding signal length mismatch");
    for (auto b : s.u)
      if (b != 0 && b != 1) {
        add(v, "scenario_signal", "islanding signal must be 0/1");
        break;
      }
    if (s.id == sc.grid_scenario_id) {
      grid_found = true;
      bool all_grid = true;
      for (auto b : s.u) all_grid = all_grid && b == 1;
      if (!all_grid)
        add(v, "grid_scenario", "grid scenario must be connected in every period");
    }
  }
  if (!grid_found) add(v, "grid_scenario_missing", "grid-connected scenario not present");

  const auto& ec = pr.economics;
  if (ec.discount_rate < 0.0) add(v, "discount_rate", "discount rate must be >= 0");
  if (!(ec.voll > 0.0)) add(v, "voll", "VOLL must be positive");
  if (!(ec.critical_ratio >= 0.0 && ec.critical_ratio <= 1.0))
    add(v, "critical_ratio", "critical ratio must lie in [0,1]");
  if (!(ec.poi_limit > 0.0)) add(v, "poi_limit", "POI limit must be positive");
  if (ec.horizon_years < 1) add(v, "horizon_years", "horizon must be >= 1 years");
  if (!(ec.big_m > 0.0)) add(v, "big_m", "big_m must be positive");

  // dispatchable adequacy: installed dispatchable capacity can never reach
  // beta * peak if the candidate pool is too small
  {
    double dispatchable_cap = 0.0;
    for (const auto& d : pr.der_candidates)
      if (d.kind == DerKind::DispatchableDg) dispatchable_cap += d.p_cap;
    if (dispatchable_cap < ec.critical_ratio * ts.peak_demand - 1e-9)
      add(v, "adequacy",
          "total dispatchable candidate capacity " + fmt_double(dispatchable_cap) +
              " MW cannot cover critical load " +
              fmt_double(ec.critical_ratio * ts.peak_demand) + " MW");
  }

  return v;
}

PlanningProblem with_critical_ratio(PlanningProblem p, double beta) {
  p.economics.critical_ratio = beta;
  return p;
}

PlanningProblem with_load_scale(PlanningProblem p, double factor) {
  for (auto& series : p.timeseries.load_p)
    for (auto& x : series) x *= factor;
  for (auto& series : p.timeseries.load_q)
    for (auto& x : series) x *= factor;
  p.timeseries.recompute_peak();
  return p;
}

PlanningProblem with_price_scale(PlanningProblem p, double factor) {
  for (auto& x : p.timeseries.price) x *= factor;
  return p;
}

PlanningProblem without_candidate_lines(PlanningProblem p) {
  std::erase_if(p.lines, [](const Line& l) { return l.status == LineStatus::Candidate; });
  return p;
}

PlanningProblem without_der_candidates(PlanningProblem p) {
  p.der_candidates.clear();
  return p;
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::UnitError: return "UnitError";
    case ErrorCode::ZeroImpedance: return "ZeroImpedance";
    case ErrorCode::StageError: return "StageError";
    case ErrorCode::ModelSizeError: return "ModelSizeError";
    case ErrorCode::IntegralityError: return "IntegralityError";
    case ErrorCode::MismatchError: return "MismatchError";
    case ErrorCode::TooManyBinaries: return "TooManyBinaries";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::IslandedBus: return "IslandedBus";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace microplan
