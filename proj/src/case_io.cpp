#include "microplan/case_io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "microplan/errors.hpp"
#include "microplan/util.hpp"

namespace microplan {

namespace {

constexpr const char* kHeader = "# microplan case v1";

std::string kind_name(DerKind k) {
  switch (k) {
    case DerKind::DispatchableDg: return "dispatchable";
    case DerKind::NondispatchableDg: return "nondispatchable";
    case DerKind::Storage: return "storage";
  }
  return "?";
}

DerKind parse_kind(std::string_view s) {
  if (s == "dispatchable") return DerKind::DispatchableDg;
  if (s == "nondispatchable") return DerKind::NondispatchableDg;
  if (s == "storage") return DerKind::Storage;
  raise(ErrorCode::ParseError, "unknown DER kind '" + std::string(s) + "'");
}

std::string opt_num(double v, bool present) { return present ? fmt_double(v) : "-"; }

double parse_num(std::string_view s, const std::string& what) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    raise(ErrorCode::ParseError, "bad number '" + std::string(s) + "' in " + what);
  return v;
}

int parse_int(std::string_view s, const std::string& what) {
  int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    raise(ErrorCode::ParseError, "bad integer '" + std::string(s) + "' in " + what);
  return v;
}

// sections in canonical order
const std::set<std::string> kSections = {"meta",    "economics", "buses",
                                         "lines",   "ders",      "periods",
                                         "profiles","scenarios"};

struct RawCase {
  std::map<std::string, std::vector<std::string>> rows;        // table rows per section
  std::map<std::string, std::map<std::string, std::string>> kv; // key=value per section
  std::vector<std::string> kv_order;  // not needed for parsing, kept simple
};

RawCase split_sections(const std::string& text) {
  RawCase raw;
  std::string section;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (first) {
      first = false;
      if (t != kHeader)
        raise(ErrorCode::ParseError, "missing '" + std::string(kHeader) + "' header");
      continue;
    }
    if (t.empty() || t.front() == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') raise(ErrorCode::ParseError, "malformed section " + std::string(t));
      section = std::string(t.substr(1, t.size() - 2));
      if (!kSections.count(section))
        raise(ErrorCode::SchemaError, "unknown section [" + section + "]");
      raw.rows[section];  // mark present
      continue;
    }
    if (section.empty()) raise(ErrorCode::ParseError, "data before first section");
    auto eq = t.find('=');
    // key = value lines only in kv-style sections; tables elsewhere
    if ((section == "meta" || section == "economics" ||
         (section == "profiles" && t.substr(0, 3) == "csv")) &&
        eq != std::string_view::npos) {
      std::string key(trim(t.substr(0, eq)));
      std::string val(trim(t.substr(eq + 1)));
      if (raw.kv[section].count(key))
        raise(ErrorCode::SchemaError, "duplicate key '" + key + "' in [" + section + "]");
      raw.kv[section][key] = val;
    } else {
      raw.rows[section].push_back(std::string(t));
    }
  }
  return raw;
}

double kv_num(const RawCase& raw, const std::string& section, const std::string& key) {
  auto sit = raw.kv.find(section);
  if (sit == raw.kv.end() || !sit->second.count(key))
    raise(ErrorCode::SchemaError, "missing key '" + key + "' in [" + section + "]");
  return parse_num(sit->second.at(key), "[" + section + "] " + key);
}

std::string kv_str(const RawCase& raw, const std::string& section, const std::string& key) {
  auto sit = raw.kv.find(section);
  if (sit == raw.kv.end() || !sit->second.count(key))
    raise(ErrorCode::SchemaError, "missing key '" + key + "' in [" + section + "]");
  return sit->second.at(key);
}

void check_known_keys(const RawCase& raw, const std::string& section,
                      const std::set<std::string>& allowed) {
  auto sit = raw.kv.find(section);
  if (sit == raw.kv.end()) return;
  for (const auto& [k, v] : sit->second)
    if (!allowed.count(k))
      raise(ErrorCode::SchemaError, "unknown key '" + k + "' in [" + section + "]");
}

void unit_check(bool ok, const std::string& msg) {
  if (!ok) raise(ErrorCode::UnitError, msg);
}

// RFC-4180-ish CSV: quoted fields with doubled quotes, comma separated.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  auto end_field = [&] { row.push_back(field); field.clear(); };
  auto end_row = [&] {
    end_field();
    if (row.size() > 1 || !row[0].empty()) out.push_back(row);
    row.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') { field += '"'; ++i; }
        else quoted = false;
      } else field += c;
    } else if (c == '"') quoted = true;
    else if (c == ',') end_field();
    else if (c == '\n') end_row();
    else if (c != '\r') field += c;
  }
  if (!field.empty() || !row.empty()) end_row();
  if (quoted) raise(ErrorCode::ParseError, "unterminated quote in CSV");
  return out;
}

}  // namespace

std::string serialize_case(const PlanningProblem& p) {
  std::ostringstream out;
  out << kHeader << "\n\n";
  out << "[meta]\n";
  out << "name = " << p.name << "\n";
  out << "base_mva = " << fmt_double(p.base_mva) << "\n";
  out << "base_kv = " << fmt_double(p.base_kv) << "\n\n";

  const auto& ec = p.economics;
  out << "[economics]\n";
  out << "discount_rate = " << fmt_double(ec.discount_rate) << "\n";
  out << "voll = " << fmt_double(ec.voll) << "\n";
  out << "critical_ratio = " << fmt_double(ec.critical_ratio) << "\n";
  out << "poi_limit_mw = " << fmt_double(ec.poi_limit) << "\n";
  out << "poi_q_limit_mvar = " << fmt_double(ec.poi_q_limit) << "\n";
  out << "horizon_years = " << ec.horizon_years << "\n";
  out << "big_m = " << fmt_double(ec.big_m) << "\n\n";

  out << "[buses]\n# id poi dv_min dv_max\n";
  for (const auto& b : p.buses)
    out << b.id << " " << (b.is_poi ? "poi" : "-") << " " << fmt_double(b.dv_min)
        << " " << fmt_double(b.dv_max) << "\n";
  out << "\n[lines]\n# id from to r_ohm x_ohm p_limit_mw q_limit_mvar status annual_cost\n";
  for (const auto& l : p.lines)
    out << l.id << " " << l.from_bus << " " << l.to_bus << " " << fmt_double(l.r_ohm)
        << " " << fmt_double(l.x_ohm) << " " << fmt_double(l.p_limit * p.base_mva)
        << " " << fmt_double(l.q_limit * p.base_mva) << " "
        << (l.status == LineStatus::Existing ? "existing" : "candidate") << " "
        << fmt_double(l.annual_cost) << "\n";

  out << "\n[ders]\n# id kind buses p_cap_mw e_cap_mwh gen_price cost_power "
         "cost_energy efficiency profile q_ratio\n";
  for (const auto& d : p.der_candidates) {
    out << d.id << " " << kind_name(d.kind) << " ";
    for (std::size_t i = 0; i < d.candidate_buses.size(); ++i)
      out << (i ? "," : "") << d.candidate_buses[i];
    const bool st = d.kind == DerKind::Storage;
    out << " " << fmt_double(d.p_cap) << " " << opt_num(d.e_cap, st) << " "
        << opt_num(d.gen_price, d.kind == DerKind::DispatchableDg) << " "
        << fmt_double(d.annual_cost_power) << " " << opt_num(d.annual_cost_energy, st)
        << " " << opt_num(d.efficiency, st) << " "
        << (d.profile_id.empty() ? "-" : d.profile_id) << " " << fmt_double(d.q_ratio)
        << "\n";
  }

  out << "\n[periods]\n# index year day hour weight_days\n";
  for (std::size_t i = 0; i < p.timeseries.periods.size(); ++i) {
    const auto& per = p.timeseries.periods[i];
    out << i << " " << per.year << " " << per.day << " " << per.hour << " "
        << fmt_double(per.weight_days) << "\n";
  }

  out << "\n[profiles]\n";
  auto emit_series = [&](const std::string& name, const std::vector<double>& s) {
    out << name;
    for (double v : s) out << " " << fmt_double(v);
    out << "\n";
  };
  emit_series("price", p.timeseries.price);
  for (std::size_t bi = 0; bi < p.buses.size(); ++bi) {
    bool nonzero = false;
    for (double v : p.timeseries.load_p[bi]) nonzero = nonzero || v != 0.0;
    for (double v : p.timeseries.load_q[bi]) nonzero = nonzero || v != 0.0;
    if (!nonzero) continue;  // all-zero buses are implied
    emit_series("load_p[" + std::to_string(p.buses[bi].id) + "]", p.timeseries.load_p[bi]);
    emit_series("load_q[" + std::to_string(p.buses[bi].id) + "]", p.timeseries.load_q[bi]);
  }
  for (const auto& [pid, series] : p.timeseries.gen_profiles)
    emit_series("mu[" + pid + "]", series);

  out << "\n[scenarios]\n# id probability signal\n";
  for (const auto& s : p.scenarios.scenarios) {
    out << s.id << " " << fmt_double(s.probability) << " ";
    bool all_grid = true;
    for (auto u : s.u) all_grid = all_grid && u == 1;
    if (all_grid) out << "grid";
    else
      for (auto u : s.u) out << (u ? '1' : '0');
    out << "\n";
  }
  return out.str();
}

PlanningProblem load_case(const std::string& text, const std::string& base_dir) {
  RawCase raw = split_sections(text);
  for (const char* required : {"meta", "economics", "buses", "lines", "ders",
                               "periods", "profiles", "scenarios"})
    if (!raw.rows.count(required))
      raise(ErrorCode::SchemaError, std::string("missing section [") + required + "]");

  PlanningProblem p;
  check_known_keys(raw, "meta", {"name", "base_mva", "base_kv"});
  p.name = kv_str(raw, "meta", "name");
  p.base_mva = kv_num(raw, "meta", "base_mva");
  p.base_kv = kv_num(raw, "meta", "base_kv");
  unit_check(p.base_mva > 0, "base_mva must be positive");
  unit_check(p.base_kv > 0, "base_kv must be positive");

  check_known_keys(raw, "economics",
                   {"discount_rate", "voll", "critical_ratio", "poi_limit_mw",
                    "poi_q_limit_mvar", "horizon_years", "big_m"});
  auto& ec = p.economics;
  ec.discount_rate = kv_num(raw, "economics", "discount_rate");
  ec.voll = kv_num(raw, "economics", "voll");
  ec.critical_ratio = kv_num(raw, "economics", "critical_ratio");
  ec.poi_limit = kv_num(raw, "economics", "poi_limit_mw");
  ec.poi_q_limit = kv_num(raw, "economics", "poi_q_limit_mvar");
  ec.horizon_years = int(kv_num(raw, "economics", "horizon_years"));
  ec.big_m = kv_num(raw, "economics", "big_m");
  unit_check(ec.discount_rate >= 0, "discount_rate must be >= 0");
  unit_check(ec.voll > 0, "voll must be positive");
  unit_check(ec.critical_ratio >= 0 && ec.critical_ratio <= 1,
             "critical_ratio must lie in [0,1]");
  unit_check(ec.poi_limit > 0, "poi_limit_mw must be positive");
  unit_check(ec.horizon_years >= 1, "horizon_years must be >= 1");
  unit_check(ec.big_m > 0, "big_m must be positive");

  if (raw.rows.at("buses").empty()) raise(ErrorCode::SchemaError, "empty [buses] table");
  for (const auto& row : raw.rows.at("buses")) {
    auto f = split_ws(row);
    if (f.size() != 4) raise(ErrorCode::ParseError, "bus row needs 4 fields: " + row);
    Bus b;
    b.id = parse_int(f[0], "[buses]");
    b.is_poi = f[1] == "poi";
    b.dv_min = parse_num(f[2], "[buses]");
    b.dv_max = parse_num(f[3], "[buses]");
    p.buses.push_back(b);
  }

  for (const auto& row : raw.rows.at("lines")) {
    auto f = split_ws(row);
    if (f.size() != 9) raise(ErrorCode::ParseError, "line row needs 9 fields: " + row);
    Line l;
    l.id = parse_int(f[0], "[lines]");
    l.from_bus = parse_int(f[1], "[lines]");
    l.to_bus = parse_int(f[2], "[lines]");
    l.r_ohm = parse_num(f[3], "[lines]");
    l.x_ohm = parse_num(f[4], "[lines]");
    const double p_mw = parse_num(f[5], "[lines]");
    const double q_mvar = parse_num(f[6], "[lines]");
    unit_check(p_mw > 0 && q_mvar > 0, "line limits must be positive");
    l.p_limit = p_mw / p.base_mva;
    l.q_limit = q_mvar / p.base_mva;
    if (f[7] == "existing") l.status = LineStatus::Existing;
    else if (f[7] == "candidate") l.status = LineStatus::Candidate;
    else raise(ErrorCode::ParseError, "unknown line status '" + std::string(f[7]) + "'");
    l.annual_cost = parse_num(f[8], "[lines]");
    unit_check(l.annual_cost >= 0, "line annual_cost must be >= 0");
    std::tie(l.g, l.b) = per_unitize(l.r_ohm, l.x_ohm, p.base_kv, p.base_mva);
    p.lines.push_back(l);
  }

  for (const auto& row : raw.rows.at("ders")) {
    auto f = split_ws(row);
    if (f.size() != 11) raise(ErrorCode::ParseError, "der row needs 11 fields: " + row);
    DerCandidate d;
    d.id = parse_int(f[0], "[ders]");
    d.kind = parse_kind(f[1]);
    std::string buses(f[2]);
    std::size_t pos = 0;
    while (pos < buses.size()) {
      auto comma = buses.find(',', pos);
      if (comma == std::string::npos) comma = buses.size();
      d.candidate_buses.push_back(
          parse_int(std::string_view(buses).substr(pos, comma - pos), "[ders] buses"));
      pos = comma + 1;
    }
    auto opt = [&](std::string_view s, const char* what) {
      return s == "-" ? 0.0 : parse_num(s, what);
    };
    d.p_cap = parse_num(f[3], "[ders]");
    d.e_cap = opt(f[4], "[ders]");
    d.gen_price = opt(f[5], "[ders]");
    d.annual_cost_power = parse_num(f[6], "[ders]");
    d.annual_cost_energy = opt(f[7], "[ders]");
    d.efficiency = f[8] == "-" ? 1.0 : parse_num(f[8], "[ders]");
    if (f[9] != "-") d.profile_id = std::string(f[9]);
    d.q_ratio = parse_num(f[10], "[ders]");
    unit_check(d.p_cap > 0, "der p_cap must be positive");
    unit_check(d.kind != DerKind::Storage || d.e_cap > 0,
               "storage e_cap must be positive");
    unit_check(d.efficiency > 0 && d.efficiency <= 1.0,
               "efficiency must lie in (0,1]");
    unit_check(d.q_ratio >= 0, "q_ratio must be >= 0");
    p.der_candidates.push_back(d);
  }

  auto& ts = p.timeseries;
  for (const auto& row : raw.rows.at("periods")) {
    auto f = split_ws(row);
    if (f.size() != 5) raise(ErrorCode::ParseError, "period row needs 5 fields: " + row);
    if (parse_int(f[0], "[periods]") != int(ts.periods.size()))
      raise(ErrorCode::ParseError, "period indices must be consecutive from 0");
    Period per;
    per.year = parse_int(f[1], "[periods]");
    per.day = parse_int(f[2], "[periods]");
    per.hour = parse_int(f[3], "[periods]");
    per.weight_days = parse_num(f[4], "[periods]");
    unit_check(per.weight_days > 0, "period weight must be positive");
    ts.periods.push_back(per);
  }
  const std::size_t np = ts.periods.size();
  if (np == 0) raise(ErrorCode::SchemaError, "empty [periods] table");

  ts.load_p.assign(p.buses.size(), std::vector<double>(np, 0.0));
  ts.load_q.assign(p.buses.size(), std::vector<double>(np, 0.0));
  ts.price.assign(np, 0.0);
  bool price_seen = false;

  auto apply_series = [&](const std::string& name, const std::vector<double>& vals) {
    if (vals.size() != np)
      raise(ErrorCode::SchemaError, "series '" + name + "' has " +
                                        std::to_string(vals.size()) + " values, expected " +
                                        std::to_string(np));
    if (name == "price") {
      ts.price = vals;
      price_seen = true;
      return;
    }
    auto open = name.find('[');
    auto close = name.find(']');
    if (open == std::string::npos || close != name.size() - 1)
      raise(ErrorCode::SchemaError, "unknown series '" + name + "'");
    const std::string base = name.substr(0, open);
    const std::string arg = name.substr(open + 1, close - open - 1);
    if (base == "load_p" || base == "load_q") {
      int bi = p.bus_index(parse_int(arg, "profile bus"));
      if (bi < 0) raise(ErrorCode::SchemaError, "series '" + name + "' unknown bus");
      (base == "load_p" ? ts.load_p : ts.load_q)[bi] = vals;
    } else if (base == "mu") {
      ts.gen_profiles[arg] = vals;
    } else {
      raise(ErrorCode::SchemaError, "unknown series '" + name + "'");
    }
  };

  if (raw.kv.count("profiles") && raw.kv.at("profiles").count("csv")) {
    check_known_keys(raw, "profiles", {"csv"});
    const std::string rel = raw.kv.at("profiles").at("csv");
    const auto path = base_dir.empty() ? std::filesystem::path(rel)
                                       : std::filesystem::path(base_dir) / rel;
    auto cells = parse_csv(read_file(path.string()));
    if (cells.empty() || cells[0].empty() || cells[0][0] != "period_id")
      raise(ErrorCode::ParseError, "profile CSV must start with a period_id column");
    if (cells.size() != np + 1)
      raise(ErrorCode::SchemaError, "profile CSV row count mismatch");
    for (std::size_t col = 1; col < cells[0].size(); ++col) {
      std::vector<double> vals(np);
      for (std::size_t r = 1; r < cells.size(); ++r) {
        if (cells[r].size() != cells[0].size())
          raise(ErrorCode::ParseError, "ragged profile CSV row");
        vals[r - 1] = parse_num(cells[r][col], "profile CSV");
      }
      apply_series(cells[0][col], vals);
    }
  }
  for (const auto& row : raw.rows.at("profiles")) {
    auto f = split_ws(row);
    if (f.size() < 2) raise(ErrorCode::ParseError, "profile row needs values: " + row);
    std::vector<double> vals;
    vals.reserve(f.size() - 1);
    for (std::size_t i = 1; i < f.size(); ++i)
      vals.push_back(parse_num(f[i], "[profiles]"));
    apply_series(std::string(f[0]), vals);
  }
  if (!price_seen) raise(ErrorCode::SchemaError, "missing 'price' series");
  ts.recompute_peak();

  for (const auto& row : raw.rows.at("scenarios")) {
    auto f = split_ws(row);
    if (f.size() != 3) raise(ErrorCode::ParseError, "scenario row needs 3 fields: " + row);
    Scenario s;
    s.id = parse_int(f[0], "[scenarios]");
    s.probability = parse_num(f[1], "[scenarios]");
    unit_check(s.probability >= 0, "scenario probability must be >= 0");
    if (f[2] == "grid") s.u.assign(np, 1);
    else {
      if (f[2].size() != np)
        raise(ErrorCode::SchemaError, "scenario signal length mismatch");
      for (char c : f[2]) {
        if (c != '0' && c != '1')
          raise(ErrorCode::ParseError, "scenario signal must be a 0/1 string");
        s.u.push_back(c == '1');
      }
    }
    p.scenarios.scenarios.push_back(s);
  }
  if (p.scenarios.scenarios.empty())
    raise(ErrorCode::SchemaError, "empty [scenarios] table");
  p.scenarios.grid_scenario_id = p.scenarios.scenarios.front().id;

  return p;
}

PlanningProblem load_case_file(const std::string& path) {
  return load_case(read_file(path), std::filesystem::path(path).parent_path().string());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoError, "cannot write " + path);
  out << content;
  if (!out.good()) raise(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace microplan
