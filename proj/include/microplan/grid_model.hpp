#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace microplan {

// All network quantities are per-unit on (base_mva, base_kv) once a
// PlanningProblem is constructed; capacities and costs keep engineering
// units (MW, MWh, $) and are converted at the model boundary.

struct Bus {
  int id = 0;  // 1-based
  bool is_poi = false;
  double dv_min = -0.05;  // p.u. voltage deviation bounds
  double dv_max = 0.05;
};

enum class LineStatus { Existing, Candidate };

struct Line {
  int id = 0;
  int from_bus = 0;
  int to_bus = 0;
  double r_ohm = 0.0;
  double x_ohm = 0.0;
  double g = 0.0;  // p.u. series conductance
  double b = 0.0;  // p.u. series susceptance (<= 0 for inductive lines)
  double p_limit = 0.0;  // p.u.
  double q_limit = 0.0;  // p.u.
  LineStatus status = LineStatus::Existing;
  double annual_cost = 0.0;  // $/yr, 0 for existing lines
};

enum class DerKind { DispatchableDg, NondispatchableDg, Storage };

struct DerCandidate {
  int id = 0;
  DerKind kind = DerKind::DispatchableDg;
  std::vector<int> candidate_buses;
  double p_cap = 0.0;             // MW
  double e_cap = 0.0;             // MWh, storage only
  double gen_price = 0.0;         // $/MWh, dispatchable only
  double annual_cost_power = 0.0; // $/MW-yr
  double annual_cost_energy = 0.0;// $/MWh-yr, storage only
  double efficiency = 1.0;        // storage only, in (0,1]
  std::string profile_id;         // nondispatchable only
  double q_ratio = 0.0;           // |Q| <= q_ratio * installed P
};

struct Period {
  int year = 1;   // 1-based
  int day = 1;    // representative day within the year, 1-based
  int hour = 0;   // 0..H-1 within the day
  double weight_days = 365.0;  // calendar days this representative day stands for
};

struct TimeSeriesBundle {
  std::vector<Period> periods;
  // load_p[bus_index][period], MW; bus_index follows PlanningProblem.buses order
  std::vector<std::vector<double>> load_p;
  std::vector<std::vector<double>> load_q;  // MVAr
  std::vector<double> price;                // $/MWh
  std::map<std::string, std::vector<double>> gen_profiles;  // normalized, [0,1]
  double peak_demand = 0.0;  // MW, recomputed by finalize()

  // Recomputes peak_demand as max over periods of total load_p.
  void recompute_peak();
};

struct Scenario {
  int id = 0;
  double probability = 1.0;
  std::vector<std::uint8_t> u;  // per period: 1 grid-connected, 0 islanded
};

struct ScenarioSet {
  std::vector<Scenario> scenarios;
  int grid_scenario_id = 0;
};

struct Economics {
  double discount_rate = 0.05;
  double voll = 10000.0;        // $/MWh
  double critical_ratio = 0.0;  // beta in [0,1]
  double poi_limit = 10.0;      // MW
  double poi_q_limit = 10.0;    // MVAr
  int horizon_years = 1;
  double big_m = 1e4;           // cap on per-line relaxation constants (p.u.)
};

struct PlanningProblem {
  std::string name;
  double base_mva = 10.0;
  double base_kv = 12.66;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<DerCandidate> der_candidates;
  TimeSeriesBundle timeseries;
  ScenarioSet scenarios;
  Economics economics;

  int bus_index(int bus_id) const;  // -1 when absent
  int poi_bus_id() const;
  std::size_t period_count() const { return timeseries.periods.size(); }
};

struct Violation {
  std::string code;     // stable machine-readable tag
  std::string message;
};

// (g, b) of a series impedance given in ohms. b <= 0 for inductive lines.
// Throws ZeroImpedance when r^2 + x^2 == 0.
std::pair<double, double> per_unitize(double r_ohm, double x_ohm,
                                      double base_kv, double base_mva);

// Every type invariant plus the dispatchable-adequacy precheck. Violations
// are data, not exceptions; an empty list means the problem is usable.
std::vector<Violation> validate(const PlanningProblem& problem);

// Pure transforms used by the CLI sweeps. Each returns a modified copy.
PlanningProblem with_critical_ratio(PlanningProblem p, double beta);
PlanningProblem with_load_scale(PlanningProblem p, double factor);
PlanningProblem with_price_scale(PlanningProblem p, double factor);
PlanningProblem without_candidate_lines(PlanningProblem p);
PlanningProblem without_der_candidates(PlanningProblem p);

}  // namespace microplan
