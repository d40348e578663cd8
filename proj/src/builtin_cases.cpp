#include "microplan/builtin_cases.hpp"

#include <algorithm>
#include <cmath>

#include "microplan/errors.hpp"
#include "microplan/util.hpp"

namespace microplan {

namespace {

struct BranchRow {
  int from, to;
  double r_ohm, x_ohm;
};

// Baran/Wu 33-bus branch data. With the full nominal load this network
// solves to Vmin = 0.9131 p.u. at bus 18 and 202.7 kW of losses, matching
// the commonly published load-flow results for the feeder.
constexpr BranchRow kBranches33[32] = {
    {1, 2, 0.0922, 0.0477},   {2, 3, 0.4930, 0.2511},   {3, 4, 0.3660, 0.1864},
    {4, 5, 0.3811, 0.1941},   {5, 6, 0.8190, 0.7070},   {6, 7, 0.1872, 0.6188},
    {7, 8, 0.7114, 0.2351},   {8, 9, 1.0300, 0.7400},   {9, 10, 1.0440, 0.7400},
    {10, 11, 0.1966, 0.0650}, {11, 12, 0.3744, 0.1238}, {12, 13, 1.4680, 1.1550},
    {13, 14, 0.5416, 0.7129}, {14, 15, 0.5910, 0.5260}, {15, 16, 0.7463, 0.5450},
    {16, 17, 1.2890, 1.7210}, {17, 18, 0.7320, 0.5740}, {2, 19, 0.1640, 0.1565},
    {19, 20, 1.5042, 1.3554}, {20, 21, 0.4095, 0.4784}, {21, 22, 0.7089, 0.9373},
    {3, 23, 0.4512, 0.3083},  {23, 24, 0.8980, 0.7091}, {24, 25, 0.8960, 0.7011},
    {6, 26, 0.2030, 0.1034},  {26, 27, 0.2842, 0.1447}, {27, 28, 1.0590, 0.9337},
    {28, 29, 0.8042, 0.7006}, {29, 30, 0.5075, 0.2585}, {30, 31, 0.9744, 0.9630},
    {31, 32, 0.3105, 0.3619}, {32, 33, 0.3410, 0.5302}};

// Nominal bus loads (kW, kvar), buses 2..33. Bus 1 is the POI.
constexpr double kLoads33[32][3] = {
    {2, 100, 60},  {3, 90, 40},   {4, 120, 80},  {5, 60, 30},   {6, 60, 20},
    {7, 200, 100}, {8, 200, 100}, {9, 60, 20},   {10, 60, 20},  {11, 45, 30},
    {12, 60, 35},  {13, 60, 35},  {14, 120, 80}, {15, 60, 10},  {16, 60, 20},
    {17, 60, 20},  {18, 90, 40},  {19, 90, 40},  {20, 90, 40},  {21, 90, 40},
    {22, 90, 40},  {23, 90, 50},  {24, 420, 200},{25, 420, 200},{26, 60, 25},
    {27, 60, 25},  {28, 60, 20},  {29, 120, 70}, {30, 200, 600},{31, 150, 70},
    {32, 210, 100},{33, 60, 40}};

struct CandLineRow {
  int id, from, to;
  double r_ohm, x_ohm, cap_kw, annual_cost;
};

constexpr CandLineRow kCandLines[11] = {
    {33, 12, 13, 1.4680, 1.1550, 500, 37749},
    {34, 13, 14, 0.5416, 0.7129, 450, 12534},
    {35, 14, 15, 0.5910, 0.5260, 300, 9118},
    {36, 15, 16, 0.7463, 0.5450, 250, 9595},
    {37, 16, 17, 1.2890, 1.7210, 250, 16573},
    {38, 17, 18, 0.7320, 0.5740, 100, 3765},
    {39, 20, 21, 0.4095, 0.4784, 210, 4423},
    {40, 21, 22, 0.7089, 0.9373, 110, 4010},
    {41, 23, 24, 0.8980, 0.7091, 1050, 48492},
    {42, 24, 25, 0.8960, 0.7011, 500, 23040},
    {43, 30, 31, 0.9744, 0.9630, 500, 25056}};

struct DgRow {
  int id;
  DerKind kind;
  int bus;
  double p_cap_mw, gen_price, annual_cost;
  const char* profile;
};

constexpr DgRow kDgs[6] = {
    {1, DerKind::DispatchableDg, 17, 3, 90, 50000, ""},
    {2, DerKind::DispatchableDg, 21, 3, 90, 50000, ""},
    {3, DerKind::DispatchableDg, 32, 1, 70, 70000, ""},
    {4, DerKind::DispatchableDg, 24, 1, 70, 70000, ""},
    {5, DerKind::NondispatchableDg, 15, 2, 0, 132000, "wind"},
    {6, DerKind::NondispatchableDg, 15, 2, 0, 133000, "solar"}};

constexpr double kBaseMva = 10.0;
constexpr double kBaseKv = 12.66;
constexpr double kPeakAggregateMw = 2.7;
constexpr double kNominalAggregateKw = 3715.0;
constexpr double kExistingLimitMw = 5.0;  // thermal limit applied to existing branches

// Daily load multiplier in [0.6, 1.0]: a morning shoulder and an evening peak.
double load_shape(int hour) {
  const double h = hour + 0.5;
  const double raw = 0.55 * std::exp(-(h - 9.0) * (h - 9.0) / 10.0) +
                     std::exp(-(h - 19.0) * (h - 19.0) / 14.0);
  // maximum of raw over the 24 grid points, evaluated once
  static const double raw_max = [] {
    double m = 0.0;
    for (int k = 0; k < 24; ++k) {
      const double hk = k + 0.5;
      m = std::max(m, 0.55 * std::exp(-(hk - 9.0) * (hk - 9.0) / 10.0) +
                          std::exp(-(hk - 19.0) * (hk - 19.0) / 14.0));
    }
    return m;
  }();
  return 0.6 + 0.4 * raw / raw_max;
}

double price_shape(int hour) {  // $30..$90, peaking with load
  return 30.0 + 60.0 * (load_shape(hour) - 0.6) / 0.4;
}

double solar_shape(int hour) {  // clamped half-sine over 07:00-19:00
  const double h = hour + 0.5;
  if (h < 7.0 || h > 19.0) return 0.0;
  return std::max(0.0, std::sin(M_PI * (h - 7.0) / 12.0));
}

// Smooth seeded wind day: three-harmonic Fourier series min-max normalized
// into [0.1, 0.9].
std::vector<double> wind_day(SplitMix64& rng) {
  double amp[3], phase[3];
  for (int k = 0; k < 3; ++k) amp[k] = rng.next_double();
  for (int k = 0; k < 3; ++k) phase[k] = rng.next_double() * 2.0 * M_PI;
  std::vector<double> w(24);
  for (int h = 0; h < 24; ++h) {
    const double t = h + 0.5;
    double s = 0.0;
    for (int k = 0; k < 3; ++k)
      s += amp[k] * std::sin(2.0 * M_PI * (k + 1) * t / 24.0 + phase[k]);
    w[h] = s;
  }
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  const double span = *hi - *lo;
  for (auto& x : w) x = span > 0.0 ? 0.1 + 0.8 * (x - *lo) / span : 0.5;
  return w;
}

}  // namespace

PlanningProblem builtin_case33(std::uint64_t profile_seed, int rep_days_per_year,
                               int horizon_years) {
  if (rep_days_per_year < 1)
    raise(ErrorCode::UnitError, "rep_days_per_year must be >= 1");
  if (horizon_years < 1) raise(ErrorCode::UnitError, "horizon_years must be >= 1");

  PlanningProblem p;
  p.name = "builtin33";
  p.base_mva = kBaseMva;
  p.base_kv = kBaseKv;

  for (int id = 1; id <= 33; ++id)
    p.buses.push_back({id, id == 1, -0.05, 0.05});

  const double limit_pu = kExistingLimitMw / kBaseMva;
  int line_id = 1;
  for (const auto& br : kBranches33) {
    auto [g, b] = per_unitize(br.r_ohm, br.x_ohm, kBaseKv, kBaseMva);
    p.lines.push_back({line_id++, br.from, br.to, br.r_ohm, br.x_ohm, g, b,
                       limit_pu, limit_pu, LineStatus::Existing, 0.0});
  }
  for (const auto& cl : kCandLines) {
    auto [g, b] = per_unitize(cl.r_ohm, cl.x_ohm, kBaseKv, kBaseMva);
    const double cap_pu = cl.cap_kw / 1000.0 / kBaseMva;
    p.lines.push_back({cl.id, cl.from, cl.to, cl.r_ohm, cl.x_ohm, g, b, cap_pu,
                       cap_pu, LineStatus::Candidate, cl.annual_cost});
  }

  for (const auto& dg : kDgs) {
    DerCandidate d;
    d.id = dg.id;
    d.kind = dg.kind;
    d.candidate_buses = {dg.bus};
    d.p_cap = dg.p_cap_mw;
    d.gen_price = dg.gen_price;
    d.annual_cost_power = dg.annual_cost;
    d.profile_id = dg.profile;
    d.q_ratio = 0.6;
    p.der_candidates.push_back(d);
  }
  {
    DerCandidate des;
    des.id = 7;
    des.kind = DerKind::Storage;
    des.candidate_buses = {15};
    des.p_cap = 1.0;
    des.e_cap = 6.0;
    des.annual_cost_power = 60000.0;
    des.annual_cost_energy = 30000.0;
    des.efficiency = 0.95;
    des.q_ratio = 0.0;
    p.der_candidates.push_back(des);
  }

  auto& ts = p.timeseries;
  const int hours = 24;
  const double weight = 365.0 / rep_days_per_year;
  for (int t = 1; t <= horizon_years; ++t)
    for (int d = 1; d <= rep_days_per_year; ++d)
      for (int h = 0; h < hours; ++h)
        ts.periods.push_back({t, d, h, weight});
  const std::size_t np = ts.periods.size();

  // Wind days are drawn once per representative day and repeated every year.
  SplitMix64 rng(profile_seed);
  std::vector<std::vector<double>> wind_days;
  for (int d = 0; d < rep_days_per_year; ++d) wind_days.push_back(wind_day(rng));

  const double load_scale = kPeakAggregateMw / (kNominalAggregateKw / 1000.0);
  ts.load_p.assign(p.buses.size(), std::vector<double>(np, 0.0));
  ts.load_q.assign(p.buses.size(), std::vector<double>(np, 0.0));
  ts.price.resize(np);
  auto& solar = ts.gen_profiles["solar"];
  auto& wind = ts.gen_profiles["wind"];
  solar.resize(np);
  wind.resize(np);

  for (std::size_t k = 0; k < np; ++k) {
    const auto& per = ts.periods[k];
    const double shape = load_shape(per.hour);
    for (const auto& row : kLoads33) {
      const int bi = int(row[0]) - 1;
      ts.load_p[bi][k] = row[1] / 1000.0 * load_scale * shape;
      ts.load_q[bi][k] = row[2] / 1000.0 * load_scale * shape;
    }
    ts.price[k] = price_shape(per.hour);
    solar[k] = solar_shape(per.hour);
    wind[k] = wind_days[per.day - 1][per.hour];
  }
  ts.recompute_peak();

  Scenario grid;
  grid.id = 0;
  grid.probability = 1.0;
  grid.u.assign(np, 1);
  p.scenarios.scenarios = {grid};
  p.scenarios.grid_scenario_id = 0;

  p.economics.discount_rate = 0.05;
  p.economics.voll = 10000.0;
  p.economics.critical_ratio = 0.4;
  p.economics.poi_limit = 10.0;
  p.economics.poi_q_limit = 10.0;
  p.economics.horizon_years = horizon_years;
  p.economics.big_m = 1e4;
  return p;
}

PlanningProblem toy4_case() {
  PlanningProblem p;
  p.name = "toy4";
  p.base_mva = 10.0;
  p.base_kv = 12.66;

  for (int id = 1; id <= 4; ++id) p.buses.push_back({id, id == 1, -0.1, 0.1});

  auto mk_line = [&](int id, int f, int t, double r, double x, double lim_mw,
                     LineStatus st, double cost) {
    auto [g, b] = per_unitize(r, x, p.base_kv, p.base_mva);
    p.lines.push_back({id, f, t, r, x, g, b, lim_mw / p.base_mva,
                       lim_mw / p.base_mva, st, cost});
  };
  mk_line(1, 1, 2, 0.5, 0.4, 5.0, LineStatus::Existing, 0.0);
  mk_line(2, 2, 3, 0.8, 0.6, 3.0, LineStatus::Candidate, 9000.0);
  mk_line(3, 3, 4, 0.8, 0.6, 3.0, LineStatus::Candidate, 7000.0);

  {
    DerCandidate dg;
    dg.id = 1;
    dg.kind = DerKind::DispatchableDg;
    dg.candidate_buses = {3, 4};  // two-site candidate
    dg.p_cap = 2.0;
    dg.gen_price = 35.0;
    dg.annual_cost_power = 40000.0;
    dg.q_ratio = 1.0;
    p.der_candidates.push_back(dg);
  }
  {
    DerCandidate des;
    des.id = 2;
    des.kind = DerKind::Storage;
    des.candidate_buses = {4};
    des.p_cap = 1.0;
    des.e_cap = 3.0;
    des.annual_cost_power = 15000.0;
    des.annual_cost_energy = 8000.0;
    des.efficiency = 0.9;
    des.q_ratio = 0.0;
    p.der_candidates.push_back(des);
  }

  auto& ts = p.timeseries;
  const int hours = 4;
  for (int h = 0; h < hours; ++h) ts.periods.push_back({1, 1, h, 365.0});
  ts.load_p.assign(4, std::vector<double>(hours, 0.0));
  ts.load_q.assign(4, std::vector<double>(hours, 0.0));
  // bus 2 steady, buses 3/4 peak in the evening hours
  ts.load_p[1] = {0.4, 0.5, 0.5, 0.4};
  ts.load_q[1] = {0.10, 0.12, 0.12, 0.10};
  ts.load_p[2] = {0.3, 0.4, 0.8, 0.6};
  ts.load_q[2] = {0.06, 0.08, 0.16, 0.12};
  ts.load_p[3] = {0.2, 0.3, 0.7, 0.5};
  ts.load_q[3] = {0.04, 0.06, 0.14, 0.10};
  ts.price = {25.0, 45.0, 95.0, 60.0};
  ts.recompute_peak();

  Scenario grid;
  grid.id = 0;
  grid.probability = 0.95;
  grid.u.assign(hours, 1);
  Scenario islanded;
  islanded.id = 1;
  islanded.probability = 0.05;
  islanded.u = {1, 1, 0, 0};  // outage during the evening peak
  p.scenarios.scenarios = {grid, islanded};
  p.scenarios.grid_scenario_id = 0;

  p.economics.discount_rate = 0.05;
  p.economics.voll = 8000.0;
  p.economics.critical_ratio = 0.5;
  p.economics.poi_limit = 5.0;
  p.economics.poi_q_limit = 5.0;
  p.economics.horizon_years = 1;
  p.economics.big_m = 1e4;
  return p;
}

}  // namespace microplan
