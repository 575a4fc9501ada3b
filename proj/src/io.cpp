#include "gtep/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gtep/error.hpp"

namespace gtep {

using nlohmann::json;

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("cannot write " + path.string());
}

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

// ---------------------------------------------------------------------------
// CSV tables

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // source line per row

  [[nodiscard]] int column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  }
};

std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c); };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

CsvTable parse_csv(const std::string& text, const std::string& source) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size())
      throw ParseError(source + ": expected " + std::to_string(t.header.size()) + " fields", n);
    t.rows.push_back(std::move(cells));
    t.lines.push_back(n);
  }
  if (t.header.empty()) throw ParseError(source + ": empty CSV file");
  return t;
}

double to_double(const std::string& s, const std::string& source, std::size_t line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(source + ": not a number: '" + s + "'", line);
}

int to_int(const std::string& s, const std::string& source, std::size_t line) {
  const double v = to_double(s, source, line);
  if (v != std::floor(v)) throw ParseError(source + ": not an integer: '" + s + "'", line);
  return static_cast<int>(v);
}

// ---------------------------------------------------------------------------
// Instance reader

class Reader {
 public:
  explicit Reader(std::filesystem::path base) : base_(std::move(base)) {}

  Instance read(const json& doc);

 private:
  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw ParseError(path + ": " + what);
  }

  void allow(const json& obj, const std::string& path, std::initializer_list<const char*> keys) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [k, v] : obj.items())
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
        fail(path, "unknown field '" + k + "'");
  }

  const json& need(const json& obj, const char* key, const std::string& path) const {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path, std::string("missing field '") + key + "'");
    return *it;
  }

  double num(const json& obj, const char* key, const std::string& path, std::optional<double> def = {}) const {
    const auto it = obj.find(key);
    if (it == obj.end()) {
      if (def) return *def;
      fail(path, std::string("missing field '") + key + "'");
    }
    if (it->is_string() && (*it == "inf" || *it == "Infinity")) return kInf;
    if (!it->is_number()) fail(path + "." + key, "expected a number");
    return it->get<double>();
  }

  std::optional<double> opt_num(const json& obj, const char* key, const std::string& path) const {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    return num(obj, key, path);
  }

  int integer(const json& obj, const char* key, const std::string& path, std::optional<int> def = {}) const {
    const auto it = obj.find(key);
    if (it == obj.end()) {
      if (def) return *def;
      fail(path, std::string("missing field '") + key + "'");
    }
    if (!it->is_number_integer()) fail(path + "." + key, "expected an integer");
    return it->get<int>();
  }

  std::optional<int> opt_int(const json& obj, const char* key, const std::string& path) const {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    return integer(obj, key, path);
  }

  std::string str(const json& obj, const char* key, const std::string& path, const std::string& def) const {
    const auto it = obj.find(key);
    if (it == obj.end()) return def;
    if (!it->is_string()) fail(path + "." + key, "expected a string");
    return it->get<std::string>();
  }

  bool flag(const json& obj, const char* key, const std::string& path, bool def) const {
    const auto it = obj.find(key);
    if (it == obj.end()) return def;
    if (!it->is_boolean()) fail(path + "." + key, "expected true or false");
    return it->get<bool>();
  }

  std::vector<int> ints(const json& obj, const char* key, const std::string& path) const {
    const auto it = obj.find(key);
    if (it == obj.end()) return {};
    if (!it->is_array()) fail(path + "." + key, "expected an array of integers");
    std::vector<int> out;
    for (const json& v : *it) {
      if (!v.is_number_integer()) fail(path + "." + key, "expected an array of integers");
      out.push_back(v.get<int>());
    }
    return out;
  }

  const json& array(const json& doc, const char* key) const {
    static const json empty = json::array();
    const auto it = doc.find(key);
    if (it == doc.end()) return empty;
    if (!it->is_array()) fail(key, "expected an array");
    return *it;
  }

  Profile profile(const json& v, const std::string& path, bool seasonal);
  Profile csv_profile(const json& v, const std::string& path, bool seasonal);
  const CsvTable& table(const std::string& file, const std::string& path);

  void read_time(const json& doc, double annual_rate);
  void read_scenarios(const json& doc);
  std::map<int, Profile> profile_map(const json& obj, const std::string& path, bool seasonal);

  std::filesystem::path base_;
  std::map<std::string, CsvTable> tables_;
  Instance in_;
  std::optional<TimeGrid> grid_;
};

const CsvTable& Reader::table(const std::string& file, const std::string& path) {
  auto it = tables_.find(file);
  if (it != tables_.end()) return it->second;
  const std::filesystem::path full = base_ / file;
  std::string text;
  try {
    text = read_text_file(full);
  } catch (const IoError&) {
    throw IoError(path + ": cannot read " + full.string());
  }
  return tables_.emplace(file, parse_csv(text, file)).first->second;
}

Profile Reader::csv_profile(const json& v, const std::string& path, bool seasonal) {
  allow(v, path, {"csv", "column"});
  const std::string file = str(v, "csv", path, "");
  const std::string column = str(v, "column", path, "");
  if (file.empty() || column.empty()) fail(path, "profile reference needs 'csv' and 'column'");
  const CsvTable& t = table(file, path);
  const int col = t.column(column);
  if (col < 0) fail(path, file + " has no column '" + column + "'");
  const int c_season = t.column("season"), c_day = t.column("typical_day"), c_hour = t.column("hour"),
            c_scen = t.column("scenario");
  if (c_season < 0) fail(path, file + " needs a 'season' column");
  if (!seasonal && (c_day < 0 || c_hour < 0))
    fail(path, file + " needs 'typical_day' and 'hour' columns for an hourly profile");

  const TimeGrid& g = *grid_;
  const int S = g.num_scenarios();
  const std::size_t n = seasonal ? g.num_season_slots() : g.num_slots();
  std::vector<double> values(n, 0.0);
  std::vector<bool> set(n, false);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::size_t line = t.lines[r];
    const int season = to_int(row[c_season], file, line) - 1;
    if (season < 0 || season >= g.num_seasons()) throw ParseError(file + ": season out of range", line);
    int s_lo = 0, s_hi = S - 1;
    if (c_scen >= 0) {
      s_lo = s_hi = to_int(row[c_scen], file, line) - 1;
      if (s_lo < 0 || s_lo >= S) throw ParseError(file + ": scenario out of range", line);
    }
    const double value = to_double(row[col], file, line);
    for (int s = s_lo; s <= s_hi; ++s) {
      std::size_t k;
      if (seasonal) {
        k = g.season_slot(season, s);
        if (set[k] && values[k] != value)
          throw ParseError(file + ": conflicting seasonal values for " + column, line);
      } else {
        const int d = to_int(row[c_day], file, line) - 1;
        const int h = to_int(row[c_hour], file, line) - 1;
        if (d < 0 || d >= in_.time.num_days(season)) throw ParseError(file + ": typical_day out of range", line);
        if (h < 0 || h >= kHoursPerDay) throw ParseError(file + ": hour out of range", line);
        k = g.slot(season, d, h, s);
        if (set[k]) throw ParseError(file + ": duplicate row for " + column, line);
      }
      values[k] = value;
      set[k] = true;
    }
  }
  if (std::find(set.begin(), set.end(), false) != set.end())
    fail(path, file + " does not cover every " + (seasonal ? "(season, scenario)" : "(season, typical_day, hour, scenario)"));
  return Profile(std::move(values));
}

Profile Reader::profile(const json& v, const std::string& path, bool seasonal) {
  if (v.is_number()) return Profile(v.get<double>());
  if (v.is_array()) {
    std::vector<double> values;
    for (const json& e : v) {
      if (!e.is_number()) fail(path, "profile arrays hold numbers only");
      values.push_back(e.get<double>());
    }
    if (values.empty()) fail(path, "empty profile");
    return Profile(std::move(values));
  }
  if (v.is_object()) return csv_profile(v, path, seasonal);
  fail(path, "expected a number, an array or a CSV reference");
}

std::map<int, Profile> Reader::profile_map(const json& obj, const std::string& path, bool seasonal) {
  std::map<int, Profile> out;
  if (!obj.is_object()) fail(path, "expected an object keyed by asset id");
  for (const auto& [k, v] : obj.items()) {
    int id = 0;
    try {
      std::size_t pos = 0;
      id = std::stoi(k, &pos);
      if (pos != k.size()) throw std::invalid_argument(k);
    } catch (const std::exception&) {
      fail(path, "key '" + k + "' is not an asset id");
    }
    out.emplace(id, profile(v, path + "." + k, seasonal));
  }
  return out;
}

void Reader::read_time(const json& doc, double annual_rate) {
  const auto it = doc.find("time");
  if (it == doc.end()) {
    in_.time = build_time_structure(std::array<int, 12>{}, std::vector<int>(kDaysInYear, 0),
                                    season_rate_from_annual(annual_rate, 1));
    return;
  }
  const json& t = *it;
  const std::string path = "time";
  allow(t, path, {"month_to_season", "season_names", "day_assignment", "leap_year", "season_rate"});
  std::array<int, 12> m2s{};
  if (t.contains("month_to_season")) {
    const std::vector<int> m = ints(t, "month_to_season", path);
    if (m.size() != 12) fail(path + ".month_to_season", "expected 12 entries");
    for (int i = 0; i < 12; ++i) m2s[i] = m[i] - 1;
  }
  std::vector<std::string> names;
  if (t.contains("season_names")) {
    for (const json& n : t.at("season_names")) {
      if (!n.is_string()) fail(path + ".season_names", "expected strings");
      names.push_back(n.get<std::string>());
    }
  }
  const bool leap = flag(t, "leap_year", path, false);
  const int T = *std::max_element(m2s.begin(), m2s.end()) + 1;
  const double rate = t.contains("season_rate") ? num(t, "season_rate", path)
                                                : season_rate_from_annual(annual_rate, std::max(T, 1));
  try {
    if (!t.contains("day_assignment")) {
      in_.time = build_time_structure(m2s, std::vector<int>(kDaysInYear, 0), rate, leap, names);
      return;
    }
    const json& a = t.at("day_assignment");
    if (a.is_object()) {
      allow(a, path + ".day_assignment", {"weekday_weekend"});
      in_.time = build_time_structure(
          m2s, weekday_weekend_assignment(integer(a, "weekday_weekend", path + ".day_assignment")), rate,
          leap, names);
      return;
    }
    if (!a.is_array()) fail(path + ".day_assignment", "expected an array");
    if (!a.empty() && a.front().is_array()) {
      std::vector<std::pair<int, int>> pairs;
      for (const json& e : a) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
          fail(path + ".day_assignment", "expected [season, typical_day] pairs");
        pairs.emplace_back(e[0].get<int>() - 1, e[1].get<int>() - 1);
      }
      in_.time = build_time_structure(m2s, pairs, rate, leap, names);
    } else {
      std::vector<int> days = ints(t, "day_assignment", path);
      for (int& d : days) d -= 1;
      in_.time = build_time_structure(m2s, days, rate, leap, names);
    }
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

void Reader::read_scenarios(const json& doc) {
  const json& arr = array(doc, "scenarios");
  if (arr.empty()) return;
  in_.scenarios.scenarios.clear();
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "scenarios[" + std::to_string(i) + "]";
    allow(arr[i], path, {"name", "probability"});
    in_.scenarios.scenarios.push_back(
        Scenario{str(arr[i], "name", path, "s" + std::to_string(i + 1)), num(arr[i], "probability", path)});
  }
}

Instance Reader::read(const json& doc) {
  allow(doc, "instance",
        {"name", "time", "scenarios", "areas", "buses", "thermals", "hydros", "renewables", "batteries",
         "lines", "demands", "generation_groups", "reserves", "projects", "precedence", "exclusivity",
         "association", "capacity_groups", "horizon", "theta_max"});

  // Horizon first: the season rate defaults to the annual rate.
  int years = 1;
  json year_specs = json::array();
  if (doc.contains("horizon")) {
    const json& h = doc.at("horizon");
    allow(h, "horizon", {"annual_rate", "years"});
    in_.horizon.annual_rate = num(h, "annual_rate", "horizon", 0.0);
    if (h.contains("years")) {
      const json& y = h.at("years");
      if (y.is_number_integer()) {
        years = y.get<int>();
        if (years < 1) fail("horizon.years", "at least one year is required");
      } else if (y.is_array()) {
        year_specs = y;
        years = static_cast<int>(y.size());
        if (years < 1) fail("horizon.years", "at least one year is required");
      } else {
        fail("horizon.years", "expected a count or an array");
      }
    }
  }
  read_time(doc, in_.horizon.annual_rate);
  read_scenarios(doc);
  grid_.emplace(in_.time, static_cast<int>(in_.scenarios.size()));
  in_.theta_max = num(doc, "theta_max", "instance", std::numbers::pi / 2);

  PowerSystem& sys = in_.system;
  const auto each = [&](const char* key, auto&& fn) {
    const json& arr = array(doc, key);
    for (std::size_t i = 0; i < arr.size(); ++i) fn(arr[i], std::string(key) + "[" + std::to_string(i) + "]");
  };
  const auto name_of = [&](const json& o, const std::string& p, const char* prefix) {
    return str(o, "name", p, prefix + std::to_string(integer(o, "id", p)));
  };

  each("areas", [&](const json& o, const std::string& p) {
    allow(o, p, {"id", "name", "import_min", "import_max", "export_min", "export_max"});
    sys.areas.push_back(Area{integer(o, "id", p), name_of(o, p, "area"), opt_num(o, "import_min", p),
                             opt_num(o, "import_max", p), opt_num(o, "export_min", p),
                             opt_num(o, "export_max", p)});
  });
  each("buses", [&](const json& o, const std::string& p) {
    allow(o, p, {"id", "name", "area"});
    sys.buses.push_back(Bus{integer(o, "id", p), name_of(o, p, "bus"), opt_int(o, "area", p)});
  });
  each("thermals", [&](const json& o, const std::string& p) {
    allow(o, p, {"id", "name", "bus", "g_min", "g_max", "ramp_up", "ramp_down", "op_cost", "startup_cost",
                 "commitment"});
    ThermalPlant t;
    t.id = integer(o, "id", p);
    t.name = name_of(o, p, "thermal");
    t.bus_id = integer(o, "bus", p);
    t.g_min = num(o, "g_min", p, 0.0);
    t.g_max = num(o, "g_max", p);
    t.ramp_up = num(o, "ramp_up", p, kInf);
    t.ramp_down = num(o, "ramp_down", p, kInf);
    t.op_cost = num(o, "op_cost", p, 0.0);
    t.startup_cost = num(o, "startup_cost", p, 0.0);
    t.has_commitment = flag(o, "commitment", p, false);
    sys.thermals.push_back(std::move(t));
  });
  each("hydros", [&](const json& o, const std::string& p) {
    allow(o, p, {"id", "name", "bus", "v_min", "v_max", "u_min", "u_max", "q_min", "q_max", "rho", "g_max",
                 "upstream", "om_cost", "penalty_storage", "penalty_turbining", "penalty_outflow",
                 "initial_storage", "inflow"});
    HydroPlant h;
    h.id = integer(o, "id", p);
    h.name = name_of(o, p, "hydro");
    h.bus_id = integer(o, "bus", p);
    h.v_min = num(o, "v_min", p, 0.0);
    h.v_max = num(o, "v_max", p);
    h.u_min = num(o, "u_min", p, 0.0);
    h.u_max = num(o, "u_max", p);
    h.q_min = num(o, "q_min", p, 0.0);
    h.q_max = opt_num(o, "q_max", p);
    h.rho = num(o, "rho", p);
    h.g_max = num(o, "g_max", p);
    h.upstream = ints(o, "upstream", p);
    h.om_cost = num(o, "om_cost", p, 0.0);
    h.penalty_storage = num(o, "penalty_storage", p, 0.0);
    h.penalty_turbining = num(o, "penalty_turbining", p, 0.0);
    h.penalty_outflow = num(o, "penalty_outflow", p, 0.0);
    h.initial_storage = opt_num(o, "initial_storage", p);
    if (o.contains("inflow")) in_.scenarios.inflows.emplace(h.id, profile(o.at("inflow"), p + ".inflow", true));
    sys.hydros.push_back(std::move(h));
  });
  each("renewables", [&](const json& o, const std::string& p) {
    allow(o, p, {"id", "name", "bus", "capacity", "profile"});
    RenewablePlant l{integer(o, "id", p), name_of(o, p, "renewable"), integer(o, "bus", p),
                     num(o, "capacity", p)};
    if (o.contains("profile"))
      in_.scenarios.renewable.emplace(l.id, profile(o.at("profile"), p + ".profile", false));
    sys.renewables.push_back(std::move(l));
  });
  each("batteries", [&](const json& o, const std::string& p) {
    allow(o, p, {"id", "name", "bus", "v_max", "charge_max", "discharge_max", "eta_charge", "eta_discharge"});
    Battery b;
    b.id = integer(o, "id", p);
    b.name = name_of(o, p, "battery");
    b.bus_id = integer(o, "bus", p);
    b.v_max = num(o, "v_max", p);
    b.charge_max = num(o, "charge_max", p);
    b.discharge_max = num(o, "discharge_max", p);
    b.eta_charge = num(o, "eta_charge", p, 1.0);
    b.eta_discharge = num(o, "eta_discharge", p, 1.0);
    sys.batteries.push_back(std::move(b));
  });
  each("lines", [&](const json& o, const std::string& p) {
    allow(o, p, {"id", "name", "from", "to", "kind", "f_max", "f_max_fwd", "f_max_bwd", "susceptance"});
    TransmissionLine k;
    k.id = integer(o, "id", p);
    k.name = name_of(o, p, "line");
    k.from_bus = integer(o, "from", p);
    k.to_bus = integer(o, "to", p);
    const std::string kind = str(o, "kind", p, "circuit");
    if (kind == "circuit")
      k.kind = LineKind::circuit;
    else if (kind == "dc_link")
      k.kind = LineKind::dc_link;
    else
      fail(p + ".kind", "expected 'circuit' or 'dc_link'");
    const std::optional<double> both = opt_num(o, "f_max", p);
    k.f_max_fwd = both ? num(o, "f_max_fwd", p, *both) : num(o, "f_max_fwd", p);
    k.f_max_bwd = both ? num(o, "f_max_bwd", p, *both) : num(o, "f_max_bwd", p);
    k.susceptance = num(o, "susceptance", p, 0.0);
    sys.lines.push_back(std::move(k));
  });
  each("demands", [&](const json& o, const std::string& p) {
    allow(o, p, {"bus", "inelastic", "elastic", "deficit_cost"});
    DemandSpec d;
    d.bus_id = integer(o, "bus", p);
    d.inelastic = profile(need(o, "inelastic", p), p + ".inelastic", false);
    d.deficit_cost = num(o, "deficit_cost", p);
    if (o.contains("elastic")) {
      const json& segs = o.at("elastic");
      if (!segs.is_array()) fail(p + ".elastic", "expected an array");
      for (std::size_t e = 0; e < segs.size(); ++e) {
        const std::string sp = p + ".elastic[" + std::to_string(e) + "]";
        allow(segs[e], sp, {"price", "max_quantity"});
        d.elastic.push_back(ElasticSegment{num(segs[e], "price", sp),
                                           profile(need(segs[e], "max_quantity", sp), sp + ".max_quantity", false)});
      }
    }
    sys.demands.push_back(std::move(d));
  });
  each("generation_groups", [&](const json& o, const std::string& p) {
    allow(o, p, {"id", "name", "thermals", "hydros", "kind", "threshold", "penalty"});
    GenerationGroup g;
    g.id = integer(o, "id", p);
    g.name = name_of(o, p, "group");
    g.thermal_ids = ints(o, "thermals", p);
    g.hydro_ids = ints(o, "hydros", p);
    const std::string kind = str(o, "kind", p, "");
    if (kind == "min")
      g.kind = BoundKind::min;
    else if (kind == "max")
      g.kind = BoundKind::max;
    else
      fail(p + ".kind", "expected 'min' or 'max'");
    g.threshold = num(o, "threshold", p);
    g.penalty = num(o, "penalty", p);
    sys.generation_groups.push_back(std::move(g));
  });
  each("reserves", [&](const json& o, const std::string& p) {
    allow(o, p, {"id", "name", "thermals", "hydros", "batteries", "requirement", "penalty"});
    ReserveRequirement r;
    r.id = integer(o, "id", p);
    r.name = name_of(o, p, "reserve");
    r.thermal_ids = ints(o, "thermals", p);
    r.hydro_ids = ints(o, "hydros", p);
    r.battery_ids = ints(o, "batteries", p);
    r.requirement = profile(need(o, "requirement", p), p + ".requirement", false);
    r.penalty = num(o, "penalty", p);
    sys.reserves.push_back(std::move(r));
  });

  ProjectCatalog& cat = in_.catalog;
  each("projects", [&](const json& o, const std::string& p) {
    allow(o, p, {"id", "name", "target", "kind", "investment_cost", "capex", "lifetime", "earliest_year",
                 "latest_year"});
    Project pr;
    pr.id = integer(o, "id", p);
    pr.name = name_of(o, p, "project");
    pr.target_id = integer(o, "target", p);
    const std::string kind = str(o, "kind", p, "binary");
    if (kind == "binary")
      pr.kind = DecisionKind::binary;
    else if (kind == "continuous")
      pr.kind = DecisionKind::continuous;
    else if (kind == "obligatory")
      pr.kind = DecisionKind::obligatory;
    else
      fail(p + ".kind", "expected 'binary', 'continuous' or 'obligatory'");
    pr.investment_cost = num(o, "investment_cost", p, 0.0);
    pr.capex = opt_num(o, "capex", p);
    pr.lifetime = integer(o, "lifetime", p, 0);
    pr.earliest_year = integer(o, "earliest_year", p, 1);
    pr.latest_year = opt_int(o, "latest_year", p);
    cat.projects.push_back(std::move(pr));
  });
  const auto pairs = [&](const char* key) {
    std::vector<std::pair<int, int>> out;
    each(key, [&](const json& o, const std::string& p) {
      if (!o.is_array() || o.size() != 2 || !o[0].is_number_integer() || !o[1].is_number_integer())
        fail(p, "expected a pair of project ids");
      out.emplace_back(o[0].get<int>(), o[1].get<int>());
    });
    return out;
  };
  cat.precedence = pairs("precedence");
  cat.association = pairs("association");
  each("exclusivity", [&](const json& o, const std::string& p) {
    if (!o.is_array()) fail(p, "expected an array of project ids");
    std::vector<int> ids;
    for (const json& v : o) {
      if (!v.is_number_integer()) fail(p, "expected an array of project ids");
      ids.push_back(v.get<int>());
    }
    cat.exclusivity.push_back(std::move(ids));
  });
  each("capacity_groups", [&](const json& o, const std::string& p) {
    allow(o, p, {"name", "terms", "lower", "upper"});
    CapacityGroup g;
    g.name = str(o, "name", p, p);
    const json& terms = need(o, "terms", p);
    if (!terms.is_array()) fail(p + ".terms", "expected an array");
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const std::string tp = p + ".terms[" + std::to_string(i) + "]";
      allow(terms[i], tp, {"project", "weight"});
      g.terms.push_back({integer(terms[i], "project", tp), num(terms[i], "weight", tp)});
    }
    g.lower = opt_num(o, "lower", p);
    g.upper = opt_num(o, "upper", p);
    cat.capacity_groups.push_back(std::move(g));
  });

  in_.horizon.years.assign(years, YearSpec{});
  for (std::size_t y = 0; y < year_specs.size(); ++y) {
    const json& o = year_specs[y];
    const std::string p = "horizon.years[" + std::to_string(y) + "]";
    allow(o, p, {"demand_growth", "inflows", "renewable_profiles"});
    YearSpec& spec = in_.horizon.years[y];
    spec.demand_growth = num(o, "demand_growth", p, 1.0);
    if (o.contains("inflows") || o.contains("renewable_profiles")) {
      ScenarioSet s = in_.scenarios;
      if (o.contains("inflows"))
        for (auto& [id, prof] : profile_map(o.at("inflows"), p + ".inflows", true)) s.inflows[id] = prof;
      if (o.contains("renewable_profiles"))
        for (auto& [id, prof] : profile_map(o.at("renewable_profiles"), p + ".renewable_profiles", false))
          s.renewable[id] = prof;
      spec.scenarios = std::move(s);
    }
  }
  return std::move(in_);
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

}  // namespace

Instance parse_instance(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    const std::string what = e.what();
    throw ParseError("invalid JSON: " + what.substr(what.find(':') + 2), line_of(json_text, e.byte));
  }
  try {
    return Reader(base_dir).read(doc);
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

Instance load_instance(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_instance(text, path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(path.filename().string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Reports

namespace {

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v == 0.0 ? 0.0 : v;
}

json costs_json(const CostBreakdown& c) {
  return json{{"investment", number(c.investment)}, {"generation", number(c.generation)},
              {"startup", number(c.startup)},       {"violation", number(c.violation)},
              {"deficit", number(c.deficit)},       {"elastic_gain", number(c.elastic_gain)},
              {"total", number(c.total())}};
}

}  // namespace

std::string plan_json(const ExpansionPlan& plan, const Instance& instance) {
  json projects = json::array();
  for (const Project& p : instance.catalog.projects) {
    const auto& year = plan.decision_year.at(p.id);
    json e{{"id", p.id}, {"name", p.name}, {"target", p.target_id}};
    e["decision_year"] = year ? json(*year) : json(nullptr);
    const auto it = plan.built_level.find(p.id);
    e["level"] = number(it == plan.built_level.end() ? 0.0 : it->second);
    projects.push_back(std::move(e));
  }
  json years = json::array();
  for (const YearResult& y : plan.years) {
    years.push_back(json{{"year", y.year},
                         {"status", std::string(to_string(y.solution.status))},
                         {"objective", number(y.solution.objective)},
                         {"gap", number(y.solution.gap)},
                         {"discount_factor", number(y.discount_factor)},
                         {"new_projects", y.new_projects},
                         {"costs", costs_json(y.costs)},
                         {"deficit_energy", number(y.deficit_energy)},
                         {"reserve_shortfall", number(y.reserve_shortfall)},
                         {"group_violation", number(y.group_violation)},
                         {"curtailed_energy", number(y.curtailed_energy)}});
  }
  json doc{{"projects", std::move(projects)},
           {"years", std::move(years)},
           {"discounted_total", number(plan.discounted_total())}};
  return doc.dump(2) + "\n";
}

std::string costs_csv(const ExpansionPlan& plan) {
  std::string out = "year,investment,generation,startup,violation,deficit,elastic_gain,total,discount_factor\n";
  for (const YearResult& y : plan.years) {
    const CostBreakdown& c = y.costs;
    out += std::to_string(y.year);
    for (double v : {c.investment, c.generation, c.startup, c.violation, c.deficit, c.elastic_gain, c.total(),
                     y.discount_factor})
      out += "," + format_number(v);
    out += "\n";
  }
  return out;
}

std::string dispatch_csv(const ExpansionPlan& plan, const Instance& instance) {
  const PowerSystem& sys = instance.system;
  std::string out = "year,season,typical_day,hour,scenario,beta";
  const auto col = [&](const char* fam, int id) { out += "," + std::string(fam) + "_" + std::to_string(id); };
  for (const ThermalPlant& t : sys.thermals) {
    col("g", t.id);
    if (t.has_commitment) col("gamma", t.id), col("st", t.id);
  }
  for (const HydroPlant& h : sys.hydros) col("g", h.id);
  for (const RenewablePlant& l : sys.renewables) col("g", l.id), col("curtail", l.id);
  for (const Battery& b : sys.batteries) col("soc", b.id), col("chg", b.id), col("dis", b.id);
  for (const TransmissionLine& k : sys.lines) col("flow", k.id);
  // reserve columns only for assets that carry reserve variables
  std::set<int> reserve_assets;
  for (const ReserveRequirement& r : sys.reserves) {
    reserve_assets.insert(r.thermal_ids.begin(), r.thermal_ids.end());
    reserve_assets.insert(r.hydro_ids.begin(), r.hydro_ids.end());
    reserve_assets.insert(r.battery_ids.begin(), r.battery_ids.end());
  }
  for (int id : reserve_assets) col("r", id);
  for (const GenerationGroup& g : sys.generation_groups) col("dg", g.id);
  for (const ReserveRequirement& r : sys.reserves) col("dr", r.id);
  for (const DemandSpec& d : sys.demands) {
    col("deficit", d.bus_id);
    for (std::size_t e = 0; e < d.elastic.size(); ++e)
      out += ",de_" + std::to_string(d.bus_id) + "_" + std::to_string(e + 1);
  }
  for (const Bus& b : sys.buses) col("price", b.id);
  out += "\n";

  for (const YearResult& y : plan.years) {
    const YearlyModel& ym = *y.model;
    const VariableIndex& ix = ym.index;
    const Solution& s = y.solution;
    const TimeGrid& grid = ym.grid;
    const ScenarioSet& scen = instance.scenarios_of(y.year);
    for (int k = 0; k < grid.num_slots(); ++k) {
      const auto c = grid.coord(k);
      const double b = beta(c.t, c.d, c.s, instance.time, scen);
      out += std::to_string(y.year) + "," + std::to_string(c.t + 1) + "," + std::to_string(c.d + 1) + "," +
             std::to_string(c.h + 1) + "," + std::to_string(c.s + 1) + "," + format_number(b);
      const auto put = [&](double v) { out += "," + format_number(v); };
      std::map<int, double> reserve;
      for (const ThermalIndex& t : ix.thermal) {
        put(s.value(t.g[k]));
        if (!t.gamma.empty()) put(s.value(t.gamma[k])), put(s.value(t.startup[k]));
        if (!t.r.empty()) reserve[t.id] = s.value(t.r[k]);
      }
      for (const HydroIndex& h : ix.hydro) {
        put(s.value(h.g[k]));
        if (!h.r.empty()) reserve[h.id] = s.value(h.r[k]);
      }
      for (const RenewableIndex& l : ix.renewable) {
        const double avail = grid.hourly(scen.renewable.at(l.id), k) * s.value(l.x);
        put(s.value(l.g[k]));
        put(std::max(0.0, avail - s.value(l.g[k])));
      }
      for (const BatteryIndex& bi : ix.battery) {
        put(s.value(bi.v[k]));
        put(s.value(bi.charge[k]));
        put(s.value(bi.discharge[k]));
        if (!bi.r.empty()) reserve[bi.id] = s.value(bi.r[k]);
      }
      for (const LineIndex& li : ix.line) put(s.value(li.fwd[k]) - s.value(li.bwd[k]));
      for (int id : reserve_assets) put(reserve.at(id));
      for (const SlackIndex& g : ix.generation_group) put(s.value(g.slack[k]));
      for (const SlackIndex& r : ix.reserve) put(s.value(r.slack[k]));
      for (const DemandSpec& d : sys.demands) {
        const auto it = std::find_if(ix.bus.begin(), ix.bus.end(), [&](const BusIndex& bi) { return bi.id == d.bus_id; });
        put(s.value(it->deficit[k]));
        for (const auto& seg : it->elastic) put(s.value(seg[k]));
      }
      // Load-balance dual per unit of energy in the represented hour.
      for (const BusIndex& bi : ix.bus) {
        const double dual = s.duals.empty() ? 0.0 : s.dual(bi.balance[k]);
        put(b > 0.0 ? dual / b : 0.0);
      }
      out += "\n";
    }
  }
  return out;
}

std::string hydro_csv(const ExpansionPlan& plan, const Instance& instance) {
  std::string out = "year,season,scenario,hydro,v_start,v_end,turbined,spilled,dv,du,dq,weight\n";
  for (const YearResult& y : plan.years) {
    const YearlyModel& ym = *y.model;
    const Solution& s = y.solution;
    const TimeGrid& grid = ym.grid;
    const int T = grid.num_seasons();
    const ScenarioSet& scen = instance.scenarios_of(y.year);
    for (int sc = 0; sc < grid.num_scenarios(); ++sc)
      for (int t = 0; t < T; ++t)
        for (const HydroIndex& h : ym.index.hydro) {
          const int q = grid.season_slot(t, sc);
          out += std::to_string(y.year) + "," + std::to_string(t + 1) + "," + std::to_string(sc + 1) + "," +
                 std::to_string(h.id);
          for (double v : {s.value(h.v[sc * (T + 1) + t]), s.value(h.v[sc * (T + 1) + t + 1]), s.value(h.u[q]),
                           s.value(h.spill[q]), s.value(h.dv[q]), s.value(h.du[q]), s.value(h.dq[q]),
                           season_weight(t, sc, instance.time, scen)})
            out += "," + format_number(v);
          out += "\n";
        }
  }
  return out;
}

std::map<int, Build> parse_plan_builds(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("invalid plan JSON", line_of(json_text, e.byte));
  }
  std::map<int, Build> out;
  if (!doc.is_object() || !doc.contains("projects") || !doc.at("projects").is_array())
    throw ParseError("plan: missing 'projects' array");
  for (const json& p : doc.at("projects")) {
    if (!p.is_object() || !p.contains("id") || !p.at("id").is_number_integer())
      throw ParseError("plan: every project needs an integer 'id'");
    const json& year = p.value("decision_year", json(nullptr));
    if (year.is_null()) continue;
    if (!year.is_number_integer()) throw ParseError("plan: decision_year must be an integer or null");
    const double level = p.contains("level") && p.at("level").is_number() ? p.at("level").get<double>() : 1.0;
    out[p.at("id").get<int>()] = Build{year.get<int>(), level};
  }
  return out;
}

DailyProfiles read_daily_profiles(const std::filesystem::path& path, const std::string& column) {
  const std::string source = path.filename().string();
  const CsvTable t = parse_csv(read_text_file(path), source);
  const int c_day = t.column("day"), c_hour = t.column("hour"), c_val = t.column(column);
  if (c_day < 0 || c_hour < 0) throw ParseError(source + ": needs 'day' and 'hour' columns");
  if (c_val < 0) throw ParseError(source + ": no column '" + column + "'");
  DailyProfiles out(kDaysInYear);
  std::vector<bool> seen(static_cast<std::size_t>(kDaysInYear) * kHoursPerDay, false);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t line = t.lines[r];
    const int d = to_int(t.rows[r][c_day], source, line) - 1;
    const int h = to_int(t.rows[r][c_hour], source, line) - 1;
    if (d < 0 || d >= kDaysInYear || h < 0 || h >= kHoursPerDay)
      throw ParseError(source + ": day or hour out of range", line);
    out[d][h] = to_double(t.rows[r][c_val], source, line);
    seen[static_cast<std::size_t>(d) * kHoursPerDay + h] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw ParseError(source + ": every (day, hour) of 365 days is required");
  return out;
}

std::string day_assignment_json(const TypicalDaySuggestion& s) {
  json medoids = json::array();
  for (const auto& m : s.medoids) {
    json days = json::array();
    for (int d : m) days.push_back(d + 1);
    medoids.push_back(std::move(days));
  }
  std::vector<int> assign = s.day_assignment;
  for (int& d : assign) d += 1;
  json doc{{"day_assignment", assign}, {"medoids", std::move(medoids)}, {"error", number(s.error)}};
  return doc.dump() + "\n";
}

}  // namespace gtep
