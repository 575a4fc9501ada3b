#include "gtep/system.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

#include "gtep/time.hpp"

namespace gtep {

double Profile::max() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

double Profile::min() const {
  return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
}

const char* to_string(AssetKind k) {
  switch (k) {
    case AssetKind::thermal: return "thermal";
    case AssetKind::hydro: return "hydro";
    case AssetKind::renewable: return "renewable";
    case AssetKind::battery: return "battery";
    case AssetKind::line: return "line";
  }
  return "?";
}

std::map<int, AssetRef> asset_table(const PowerSystem& system) {
  std::map<int, AssetRef> out;
  const auto add = [&](int id, AssetKind kind, std::size_t index) {
    if (!out.emplace(id, AssetRef{kind, index}).second)
      throw std::invalid_argument("duplicate asset id " + std::to_string(id));
  };
  for (std::size_t i = 0; i < system.thermals.size(); ++i) add(system.thermals[i].id, AssetKind::thermal, i);
  for (std::size_t i = 0; i < system.hydros.size(); ++i) add(system.hydros[i].id, AssetKind::hydro, i);
  for (std::size_t i = 0; i < system.renewables.size(); ++i)
    add(system.renewables[i].id, AssetKind::renewable, i);
  for (std::size_t i = 0; i < system.batteries.size(); ++i) add(system.batteries[i].id, AssetKind::battery, i);
  for (std::size_t i = 0; i < system.lines.size(); ++i) add(system.lines[i].id, AssetKind::line, i);
  return out;
}

const Project* ProjectCatalog::find(int project_id) const {
  for (const Project& p : projects)
    if (p.id == project_id) return &p;
  return nullptr;
}

const Project* ProjectCatalog::find_by_target(int asset_id) const {
  for (const Project& p : projects)
    if (p.target_id == asset_id) return &p;
  return nullptr;
}

bool ValidationReport::ok() const { return error_count() == 0; }

std::size_t ValidationReport::error_count() const {
  return static_cast<std::size_t>(std::count_if(findings.begin(), findings.end(), [](const Finding& f) {
    return f.severity == Severity::error;
  }));
}

void ValidationReport::error(std::string entity, std::string message) {
  findings.push_back({Severity::error, std::move(entity), std::move(message)});
}

void ValidationReport::warn(std::string entity, std::string message) {
  findings.push_back({Severity::warning, std::move(entity), std::move(message)});
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  for (const Finding& f : findings)
    out << (f.severity == Severity::error ? "error" : "warning") << ": " << f.entity << ": "
        << f.message << '\n';
  return out.str();
}

std::vector<int> topological_order(const std::vector<HydroPlant>& hydros) {
  std::map<int, std::size_t> index;
  for (std::size_t i = 0; i < hydros.size(); ++i)
    if (!index.emplace(hydros[i].id, i).second)
      throw std::invalid_argument("duplicate hydro id " + std::to_string(hydros[i].id));
  std::map<int, int> indegree;
  std::map<int, std::vector<int>> downstream;
  for (const HydroPlant& h : hydros) indegree[h.id];
  for (const HydroPlant& h : hydros) {
    for (int up : std::set<int>(h.upstream.begin(), h.upstream.end())) {
      if (!index.count(up))
        throw std::invalid_argument("hydro " + std::to_string(h.id) + " lists unknown upstream " +
                                    std::to_string(up));
      downstream[up].push_back(h.id);
      ++indegree[h.id];
    }
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (const auto& [id, deg] : indegree)
    if (deg == 0) ready.push(id);
  std::vector<int> order;
  while (!ready.empty()) {
    const int id = ready.top();
    ready.pop();
    order.push_back(id);
    for (int next : downstream[id])
      if (--indegree[next] == 0) ready.push(next);
  }
  if (order.size() != hydros.size()) {
    std::string members;
    for (const auto& [id, deg] : indegree)
      if (deg > 0) members += (members.empty() ? "" : ", ") + std::to_string(id);
    throw std::invalid_argument("hydro cascade cycle through plants " + members);
  }
  return order;
}

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

std::string label(const char* kind, int id) { return std::string(kind) + " " + std::to_string(id); }

class Validator {
 public:
  Validator(const PowerSystem& sys, const ProjectCatalog& cat, const ScenarioSet& sc,
            const TimeStructure* time)
      : sys_(sys), cat_(cat), sc_(sc) {
    if (time) grid_.emplace(*time, static_cast<int>(std::max<std::size_t>(1, sc.size())));
  }

  ValidationReport run() {
    areas_and_buses();
    assets();
    demands();
    groups();
    catalog();
    scenarios();
    return std::move(r_);
  }

 private:
  void hourly(const std::string& who, const char* what, const Profile& p) {
    if (p.empty()) {
      r_.error(who, std::string(what) + " profile is missing");
      return;
    }
    for (double v : p.values) {
      if (!finite_nonneg(v)) {
        r_.error(who, std::string(what) + " profile has a negative or non-finite value");
        break;
      }
    }
    if (grid_ && !grid_->fits_hourly(p))
      r_.error(who, std::string(what) + " profile has " + std::to_string(p.values.size()) +
                        " values; expected 1, 24 or " + std::to_string(grid_->num_slots()));
  }

  void bus_ref(const std::string& who, int bus) {
    if (!bus_ids_.count(bus)) r_.error(who, "references unknown bus " + std::to_string(bus));
  }

  void areas_and_buses() {
    for (const Area& a : sys_.areas) {
      const std::string who = label("area", a.id);
      if (!area_ids_.insert(a.id).second) r_.error(who, "duplicate area id");
      for (const auto* b : {&a.import_min, &a.import_max, &a.export_min, &a.export_max})
        if (b->has_value() && !finite_nonneg(**b)) r_.error(who, "import/export bounds must be >= 0");
      if (a.import_min && a.import_max && *a.import_min > *a.import_max)
        r_.error(who, "import_min exceeds import_max");
      if (a.export_min && a.export_max && *a.export_min > *a.export_max)
        r_.error(who, "export_min exceeds export_max");
    }
    for (const Bus& b : sys_.buses) {
      const std::string who = label("bus", b.id);
      if (!bus_ids_.insert(b.id).second) r_.error(who, "duplicate bus id");
      if (b.area_id && !area_ids_.count(*b.area_id))
        r_.error(who, "references unknown area " + std::to_string(*b.area_id));
    }
  }

  void assets() {
    std::map<int, int> seen;
    const auto unique = [&](const std::string& who, int id) {
      if (++seen[id] == 2) r_.error(who, "asset id is not unique across plants, batteries and lines");
    };
    for (const ThermalPlant& t : sys_.thermals) {
      const std::string who = label("thermal", t.id);
      unique(who, t.id);
      bus_ref(who, t.bus_id);
      if (!(finite_nonneg(t.g_min) && std::isfinite(t.g_max) && t.g_min <= t.g_max))
        r_.error(who, "requires 0 <= g_min <= g_max");
      if (!(t.ramp_up >= 0.0) || !(t.ramp_down >= 0.0)) r_.error(who, "ramps must be >= 0");
      if (!finite_nonneg(t.op_cost) || !finite_nonneg(t.startup_cost))
        r_.error(who, "costs must be >= 0");
    }
    std::set<int> hydro_ids;
    for (const HydroPlant& h : sys_.hydros) hydro_ids.insert(h.id);
    bool upstream_ok = true;
    for (const HydroPlant& h : sys_.hydros) {
      const std::string who = label("hydro", h.id);
      unique(who, h.id);
      bus_ref(who, h.bus_id);
      if (!(finite_nonneg(h.v_min) && std::isfinite(h.v_max) && h.v_min <= h.v_max))
        r_.error(who, "requires 0 <= v_min <= v_max");
      if (!(finite_nonneg(h.u_min) && std::isfinite(h.u_max) && h.u_min <= h.u_max))
        r_.error(who, "requires 0 <= u_min <= u_max");
      if (!finite_nonneg(h.q_min)) r_.error(who, "q_min must be >= 0");
      if (h.q_max && !(std::isfinite(*h.q_max) && *h.q_max >= h.q_min))
        r_.error(who, "q_max must be >= q_min");
      if (!(std::isfinite(h.rho) && h.rho > 0.0)) r_.error(who, "rho must be > 0");
      if (!finite_nonneg(h.g_max)) r_.error(who, "g_max must be >= 0");
      if (!finite_nonneg(h.om_cost) || !finite_nonneg(h.penalty_storage) ||
          !finite_nonneg(h.penalty_turbining) || !finite_nonneg(h.penalty_outflow))
        r_.error(who, "costs and penalties must be >= 0");
      if (h.initial_storage && !(*h.initial_storage >= h.v_min && *h.initial_storage <= h.v_max))
        r_.error(who, "initial storage outside [v_min, v_max]");
      for (int up : h.upstream) {
        if (up == h.id) {
          r_.error(who, "hydro cascade cycle: plant lists itself upstream");
          upstream_ok = false;
        } else if (!hydro_ids.count(up)) {
          r_.error(who, "references unknown upstream hydro " + std::to_string(up));
          upstream_ok = false;
        }
      }
      if (!sc_.inflows.count(h.id)) r_.error(who, "inflow series is missing");
    }
    if (upstream_ok) {
      try {
        (void)topological_order(sys_.hydros);
      } catch (const std::invalid_argument& e) {
        r_.error("hydro cascade", e.what());
      }
    }
    for (const RenewablePlant& l : sys_.renewables) {
      const std::string who = label("renewable", l.id);
      unique(who, l.id);
      bus_ref(who, l.bus_id);
      if (!(std::isfinite(l.capacity) && l.capacity > 0.0)) r_.error(who, "capacity must be > 0");
      auto it = sc_.renewable.find(l.id);
      if (it == sc_.renewable.end()) {
        r_.error(who, "renewable profile is missing");
      } else {
        hourly(who, "renewable", it->second);
        if (it->second.max() > l.capacity * (1.0 + 1e-9))
          r_.error(who, "renewable profile exceeds capacity");
      }
    }
    for (const Battery& b : sys_.batteries) {
      const std::string who = label("battery", b.id);
      unique(who, b.id);
      bus_ref(who, b.bus_id);
      if (!finite_nonneg(b.v_max) || !finite_nonneg(b.charge_max) || !finite_nonneg(b.discharge_max))
        r_.error(who, "capacities must be >= 0");
      if (!(b.eta_charge > 0.0 && b.eta_charge <= 1.0) ||
          !(b.eta_discharge > 0.0 && b.eta_discharge <= 1.0))
        r_.error(who, "efficiencies must lie in (0, 1]");
    }
    for (const TransmissionLine& k : sys_.lines) {
      const std::string who = label("line", k.id);
      unique(who, k.id);
      bus_ref(who, k.from_bus);
      bus_ref(who, k.to_bus);
      if (k.from_bus == k.to_bus) r_.error(who, "from and to bus are the same");
      if (!finite_nonneg(k.f_max_fwd) || !finite_nonneg(k.f_max_bwd))
        r_.error(who, "flow limits must be >= 0");
      if (k.kind == LineKind::circuit && !(std::isfinite(k.susceptance) && k.susceptance > 0.0))
        r_.error(who, "circuit susceptance must be > 0");
    }
    for (const auto& [id, n] : seen) asset_ids_.insert(id);
  }

  void demands() {
    std::set<int> buses;
    for (const DemandSpec& d : sys_.demands) {
      const std::string who = label("demand at bus", d.bus_id);
      bus_ref(who, d.bus_id);
      if (!buses.insert(d.bus_id).second) r_.error(who, "more than one demand at this bus");
      hourly(who, "inelastic demand", d.inelastic);
      double max_price = -std::numeric_limits<double>::infinity();
      for (const ElasticSegment& e : d.elastic) {
        if (!std::isfinite(e.price)) r_.error(who, "elastic price must be finite");
        max_price = std::max(max_price, e.price);
        hourly(who, "elastic quantity", e.max_quantity);
      }
      if (!finite_nonneg(d.deficit_cost)) r_.error(who, "deficit cost must be >= 0");
      if (!d.elastic.empty() && !(d.deficit_cost > max_price))
        r_.error(who, "deficit cost must exceed every elastic price");
    }
  }

  template <class Vec>
  void members(const std::string& who, const std::vector<int>& ids, const Vec& entities,
               const char* kind) {
    for (int id : ids) {
      const bool found = std::any_of(entities.begin(), entities.end(),
                                     [&](const auto& e) { return e.id == id; });
      if (!found) r_.error(who, std::string("references unknown ") + kind + " " + std::to_string(id));
    }
  }

  void groups() {
    std::set<int> ids;
    for (const GenerationGroup& g : sys_.generation_groups) {
      const std::string who = label("generation group", g.id);
      if (!ids.insert(g.id).second) r_.error(who, "duplicate generation group id");
      members(who, g.thermal_ids, sys_.thermals, "thermal");
      members(who, g.hydro_ids, sys_.hydros, "hydro");
      if (!finite_nonneg(g.threshold)) r_.error(who, "threshold must be >= 0");
      if (!finite_nonneg(g.penalty)) r_.error(who, "penalty must be >= 0");
    }
    ids.clear();
    for (const ReserveRequirement& c : sys_.reserves) {
      const std::string who = label("reserve", c.id);
      if (!ids.insert(c.id).second) r_.error(who, "duplicate reserve id");
      members(who, c.thermal_ids, sys_.thermals, "thermal");
      members(who, c.hydro_ids, sys_.hydros, "hydro");
      members(who, c.battery_ids, sys_.batteries, "battery");
      hourly(who, "reserve requirement", c.requirement);
      if (!finite_nonneg(c.penalty)) r_.error(who, "penalty must be >= 0");
    }
  }

  void project_ref(const std::string& who, int id) {
    if (!project_ids_.count(id)) r_.error(who, "references unknown project " + std::to_string(id));
  }

  void catalog() {
    std::set<int> targets;
    for (const Project& p : cat_.projects) {
      const std::string who = label("project", p.id);
      if (!project_ids_.insert(p.id).second) r_.error(who, "duplicate project id");
      if (!asset_ids_.count(p.target_id))
        r_.error(who, "targets unknown asset " + std::to_string(p.target_id));
      if (!targets.insert(p.target_id).second)
        r_.error(who, "asset " + std::to_string(p.target_id) + " already has a project");
      if (!finite_nonneg(p.investment_cost)) r_.error(who, "investment cost must be >= 0");
      if (p.capex && (!finite_nonneg(*p.capex) || p.lifetime < 1))
        r_.error(who, "capex must be >= 0 with lifetime >= 1");
      if (p.earliest_year < 1) r_.error(who, "earliest_year must be >= 1");
      if (p.latest_year && *p.latest_year < p.earliest_year)
        r_.error(who, "latest_year precedes earliest_year");
      if (p.kind == DecisionKind::continuous) {
        for (const ThermalPlant& t : sys_.thermals)
          if (t.id == p.target_id && t.has_commitment)
            r_.error(who, "continuous investment decision is incompatible with thermal commitment");
      }
      if (p.kind != DecisionKind::obligatory)
        for (const HydroPlant& h : sys_.hydros)
          if (h.id == p.target_id && h.q_max)
            r_.warn(who, "q_max on a candidate hydro blocks all outflow while it is not built");
    }
    for (const auto& [a, b] : cat_.precedence) {
      const std::string who = "precedence (" + std::to_string(a) + ", " + std::to_string(b) + ")";
      project_ref(who, a);
      project_ref(who, b);
      if (a == b) r_.error(who, "project cannot precede itself");
    }
    for (const auto& [a, b] : cat_.association) {
      const std::string who = "association (" + std::to_string(a) + ", " + std::to_string(b) + ")";
      project_ref(who, a);
      project_ref(who, b);
      if (a == b) r_.error(who, "project cannot be associated with itself");
    }
    for (std::size_t k = 0; k < cat_.exclusivity.size(); ++k) {
      const std::string who = "exclusivity set " + std::to_string(k + 1);
      const auto& set = cat_.exclusivity[k];
      if (std::set<int>(set.begin(), set.end()).size() < 2)
        r_.error(who, "needs at least two distinct projects");
      for (int id : set) project_ref(who, id);
    }
    for (const CapacityGroup& g : cat_.capacity_groups) {
      const std::string who = "capacity group " + g.name;
      for (const WeightedProject& w : g.terms) {
        project_ref(who, w.project_id);
        if (!std::isfinite(w.weight)) r_.error(who, "weight must be finite");
      }
      if (!g.lower && !g.upper) r_.error(who, "needs a lower or an upper bound");
      if (g.lower && g.upper && *g.lower > *g.upper) r_.error(who, "lower bound exceeds upper bound");
    }
  }

  void scenarios() {
    if (sc_.scenarios.empty()) {
      r_.error("scenarios", "at least one scenario is required");
      return;
    }
    double sum = 0.0;
    for (const Scenario& s : sc_.scenarios) {
      if (!finite_nonneg(s.probability)) r_.error("scenario " + s.name, "probability must be >= 0");
      sum += s.probability;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      r_.error("scenarios", "probabilities sum to " + std::to_string(sum) + ", not 1");
    for (const auto& [id, p] : sc_.inflows) {
      const std::string who = label("inflow of hydro", id);
      if (std::none_of(sys_.hydros.begin(), sys_.hydros.end(), [&](const HydroPlant& h) { return h.id == id; }))
        r_.error(who, "no such hydro plant");
      if (p.empty() || p.min() < 0.0 || !std::isfinite(p.max()))
        r_.error(who, "inflows must be present, finite and >= 0");
      if (grid_ && !grid_->fits_seasonal(p))
        r_.error(who, "inflow series has " + std::to_string(p.values.size()) +
                          " values; expected 1, " + std::to_string(grid_->num_seasons()) + " or " +
                          std::to_string(grid_->num_season_slots()));
    }
    for (const auto& [id, p] : sc_.renewable)
      if (std::none_of(sys_.renewables.begin(), sys_.renewables.end(),
                       [&](const RenewablePlant& l) { return l.id == id; }))
        r_.error(label("renewable profile", id), "no such renewable plant");
  }

  const PowerSystem& sys_;
  const ProjectCatalog& cat_;
  const ScenarioSet& sc_;
  std::optional<TimeGrid> grid_;
  ValidationReport r_;
  std::set<int> area_ids_, bus_ids_, asset_ids_, project_ids_;
};

}  // namespace

ValidationReport validate_system(const PowerSystem& system, const ProjectCatalog& catalog,
                                 const ScenarioSet& scenarios, const TimeStructure* time) {
  return Validator(system, catalog, scenarios, time).run();
}

}  // namespace gtep
