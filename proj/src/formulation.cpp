#include "gtep/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <stdexcept>

#include "gtep/planner.hpp"

namespace gtep {
namespace {

std::string key(const char* family, std::initializer_list<int> idx) {
  std::string s = family;
  s.push_back('[');
  bool first = true;
  for (int i : idx) {
    if (!first) s.push_back(',');
    s += std::to_string(i);
    first = false;
  }
  s.push_back(']');
  return s;
}

// 1-based hourly key: fam[t,d,h,s,id]
std::string hkey(const char* family, const TimeGrid& grid, int slot, int id) {
  const auto c = grid.coord(slot);
  return key(family, {c.t + 1, c.d + 1, c.h + 1, c.s + 1, id});
}

std::vector<VarId> hourly_vars(MilpModel& m, const TimeGrid& grid, const char* family, int id,
                               double lo, double hi, VarType type = VarType::continuous) {
  std::vector<VarId> out(grid.num_slots());
  for (int k = 0; k < grid.num_slots(); ++k)
    out[k] = m.add_variable(hkey(family, grid, k, id), lo, hi, type);
  return out;
}

std::vector<VarId> seasonal_vars(MilpModel& m, const TimeGrid& grid, const char* family, int id) {
  std::vector<VarId> out(grid.num_season_slots());
  for (int s = 0; s < grid.num_scenarios(); ++s)
    for (int t = 0; t < grid.num_seasons(); ++t)
      out[grid.season_slot(t, s)] =
          m.add_variable(key(family, {t + 1, s + 1, id}), 0.0, kInf);
  return out;
}

template <class Vec>
std::map<int, std::size_t> positions(const Vec& v) {
  std::map<int, std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.emplace(v[i].id, i);
  return out;
}

}  // namespace

double project_cost(const Project& p, double annual_rate) {
  if (p.capex) return annualize_cost(*p.capex, p.lifetime, annual_rate);
  return p.investment_cost;
}

void emit_investment_variables(FormulationContext& ctx, const FixedDecisions& fixed) {
  MilpModel& m = ctx.out.model;
  VariableIndex& ix = ctx.out.index;
  for (const auto& [pid, value] : fixed) {
    if (!ctx.catalog.find(pid))
      throw std::invalid_argument("fixed decision for unknown project " + std::to_string(pid));
    if (!(value >= 0.0 && value <= 1.0))
      throw std::invalid_argument("fixed decision for project " + std::to_string(pid) +
                                  " outside [0, 1]");
  }
  const auto make = [&](int asset_id) {
    const Project* p = ctx.catalog.find_by_target(asset_id);
    VarId x;
    if (!p) {
      x = m.add_variable(key("x", {asset_id}), 1.0, 1.0);
    } else {
      double lo = 0.0, hi = 1.0;
      if (auto it = fixed.find(p->id); it != fixed.end()) {
        lo = hi = it->second;
      } else if (p->kind == DecisionKind::obligatory) {
        lo = hi = 1.0;
      }
      const VarType type = p->kind == DecisionKind::continuous ? VarType::continuous : VarType::binary;
      if (type == VarType::binary && lo == hi && lo != 0.0 && lo != 1.0)
        throw std::invalid_argument("binary project " + std::to_string(p->id) +
                                    " fixed at a fractional value");
      x = m.add_variable(key("x", {asset_id}), lo, hi, type);
      ix.x_by_project[p->id] = x;
    }
    ix.x_by_asset[asset_id] = x;
    return x;
  };
  for (const ThermalPlant& t : ctx.system.thermals) ix.thermal.push_back({t.id, make(t.id), {}, {}, {}, {}});
  for (const HydroPlant& h : ctx.system.hydros) {
    HydroIndex hi;
    hi.id = h.id;
    hi.x = make(h.id);
    ix.hydro.push_back(std::move(hi));
  }
  for (const RenewablePlant& l : ctx.system.renewables) ix.renewable.push_back({l.id, make(l.id), {}});
  for (const Battery& b : ctx.system.batteries) ix.battery.push_back({b.id, make(b.id), {}, {}, {}, {}});
  for (const TransmissionLine& k : ctx.system.lines) ix.line.push_back({k.id, make(k.id), {}, {}, {}, {}});
}

void emit_investment_logic(FormulationContext& ctx) {
  MilpModel& m = ctx.out.model;
  const auto& xp = ctx.out.index.x_by_project;
  const auto x = [&](int pid) { return xp.at(pid); };
  int k = 0;
  for (const auto& [first, second] : ctx.catalog.precedence)
    m.add_constraint(key("prec", {++k}), {{x(first), 1.0}, {x(second), -1.0}}, Sense::greater_equal, 0.0);
  k = 0;
  for (const auto& set : ctx.catalog.exclusivity) {
    std::vector<Term> terms;
    for (int pid : std::set<int>(set.begin(), set.end())) terms.push_back({x(pid), 1.0});
    m.add_constraint(key("excl", {++k}), terms, Sense::less_equal, 1.0);
  }
  k = 0;
  for (const auto& [a, b] : ctx.catalog.association) {
    ++k;
    m.add_constraint(key("assoc", {k, 1}), {{x(a), 1.0}, {x(b), -1.0}}, Sense::greater_equal, 0.0);
    m.add_constraint(key("assoc", {k, 2}), {{x(b), 1.0}, {x(a), -1.0}}, Sense::greater_equal, 0.0);
  }
  k = 0;
  for (const CapacityGroup& g : ctx.catalog.capacity_groups) {
    ++k;
    std::vector<Term> terms;
    for (const WeightedProject& w : g.terms) terms.push_back({x(w.project_id), w.weight});
    if (g.lower) m.add_constraint(key("capmin", {k}), terms, Sense::greater_equal, *g.lower);
    if (g.upper) m.add_constraint(key("capmax", {k}), terms, Sense::less_equal, *g.upper);
  }
}

void emit_thermal(FormulationContext& ctx) {
  MilpModel& m = ctx.out.model;
  const TimeGrid& grid = ctx.out.grid;
  const int N = grid.num_slots();
  for (std::size_t j = 0; j < ctx.system.thermals.size(); ++j) {
    const ThermalPlant& p = ctx.system.thermals[j];
    ThermalIndex& ti = ctx.out.index.thermal[j];
    ti.g = hourly_vars(m, grid, "g", p.id, 0.0, kInf);
    if (p.has_commitment) {
      ti.gamma = hourly_vars(m, grid, "gamma", p.id, 0.0, 1.0, VarType::binary);
      ti.startup = hourly_vars(m, grid, "st", p.id, 0.0, 1.0);
    }
    for (int k = 0; k < N; ++k) {
      const VarId on = p.has_commitment ? ti.gamma[k] : ti.x;
      if (p.has_commitment)
        m.add_constraint(hkey("gmin", grid, k, p.id), {{ti.g[k], 1.0}, {on, -p.g_min}},
                         Sense::greater_equal, 0.0);
      m.add_constraint(hkey("gmax", grid, k, p.id), {{ti.g[k], 1.0}, {on, -p.g_max}},
                       Sense::less_equal, 0.0);
      const int prev = grid.previous_hour(k);
      if (std::isfinite(p.ramp_up))
        m.add_constraint(hkey("rampup", grid, k, p.id), {{ti.g[k], 1.0}, {ti.g[prev], -1.0}},
                         Sense::less_equal, p.ramp_up);
      if (std::isfinite(p.ramp_down))
        m.add_constraint(hkey("rampdn", grid, k, p.id), {{ti.g[prev], 1.0}, {ti.g[k], -1.0}},
                         Sense::less_equal, p.ramp_down);
      if (p.has_commitment) {
        m.add_constraint(hkey("startup", grid, k, p.id),
                         {{ti.startup[k], 1.0}, {ti.gamma[k], -1.0}, {ti.gamma[prev], 1.0}},
                         Sense::greater_equal, 0.0);
        m.add_constraint(hkey("commit", grid, k, p.id), {{ti.gamma[k], 1.0}, {ti.x, -1.0}},
                         Sense::less_equal, 0.0);
      }
    }
  }
}

void emit_hydro(FormulationContext& ctx) {
  MilpModel& m = ctx.out.model;
  const TimeGrid& grid = ctx.out.grid;
  const int T = grid.num_seasons(), S = grid.num_scenarios();
  const auto& hydros = ctx.system.hydros;
  auto& index = ctx.out.index.hydro;
  for (std::size_t i = 0; i < hydros.size(); ++i) {
    const HydroPlant& p = hydros[i];
    HydroIndex& hi = index[i];
    hi.v.resize(static_cast<std::size_t>(S) * (T + 1));
    for (int s = 0; s < S; ++s)
      for (int t = 0; t <= T; ++t)
        hi.v[s * (T + 1) + t] = m.add_variable(key("v", {t, s + 1, p.id}), 0.0, kInf);
    hi.u = seasonal_vars(m, grid, "u", p.id);
    hi.spill = seasonal_vars(m, grid, "spill", p.id);
    hi.dv = seasonal_vars(m, grid, "dv", p.id);
    hi.du = seasonal_vars(m, grid, "du", p.id);
    hi.dq = seasonal_vars(m, grid, "dq", p.id);
    hi.g = hourly_vars(m, grid, "g", p.id, 0.0, kInf);
  }
  const auto pos = positions(hydros);
  for (int id : topological_order(hydros)) {
    const std::size_t i = pos.at(id);
    const HydroPlant& p = hydros[i];
    const HydroIndex& hi = index[i];
    const Profile& inflow = ctx.scenarios.inflows.at(p.id);
    for (int s = 0; s < S; ++s) {
      const auto v = [&](int t) { return hi.v[s * (T + 1) + t]; };
      for (int t = 0; t < T; ++t) {
        const int q = grid.season_slot(t, s);
        std::vector<Term> wb{{v(t + 1), 1.0}, {v(t), -1.0}, {hi.u[q], 1.0}, {hi.spill[q], 1.0}};
        for (int up : p.upstream) {
          const HydroIndex& ui = index[pos.at(up)];
          wb.push_back({ui.u[q], -1.0});
          wb.push_back({ui.spill[q], -1.0});
        }
        m.add_constraint(key("wbal", {t + 1, s + 1, p.id}), wb, Sense::equal,
                         grid.seasonal(inflow, t, s));

        std::vector<Term> reg{{hi.u[q], -p.rho}};
        for (int d = 0; d < ctx.time.num_days(t); ++d)
          for (int h = 0; h < kHoursPerDay; ++h)
            reg.push_back({hi.g[grid.slot(t, d, h, s)], static_cast<double>(ctx.time.duration(t, d))});
        m.add_constraint(key("regul", {t + 1, s + 1, p.id}), reg, Sense::equal, 0.0);

        const auto sk = [&](const char* fam) { return key(fam, {t + 1, s + 1, p.id}); };
        m.add_constraint(sk("vmax"), {{v(t + 1), 1.0}, {hi.x, -p.v_max}}, Sense::less_equal, 0.0);
        m.add_constraint(sk("vmin"), {{v(t + 1), 1.0}, {hi.dv[q], 1.0}, {hi.x, -p.v_min}},
                         Sense::greater_equal, 0.0);
        m.add_constraint(sk("umax"), {{hi.u[q], 1.0}, {hi.x, -p.u_max}}, Sense::less_equal, 0.0);
        m.add_constraint(sk("umin"), {{hi.u[q], 1.0}, {hi.du[q], 1.0}, {hi.x, -p.u_min}},
                         Sense::greater_equal, 0.0);
        if (p.q_max)
          m.add_constraint(sk("qmax"), {{hi.u[q], 1.0}, {hi.spill[q], 1.0}, {hi.x, -*p.q_max}},
                           Sense::less_equal, 0.0);
        m.add_constraint(sk("qmin"),
                         {{hi.u[q], 1.0}, {hi.spill[q], 1.0}, {hi.dq[q], 1.0}, {hi.x, -p.q_min}},
                         Sense::greater_equal, 0.0);
      }
      m.add_constraint(key("cyclic", {s + 1, p.id}), {{v(T), 1.0}, {v(0), -1.0}}, Sense::equal, 0.0);
      if (p.initial_storage)
        m.add_constraint(key("vinit", {s + 1, p.id}), {{v(0), 1.0}, {hi.x, -*p.initial_storage}},
                         Sense::equal, 0.0);
    }
    for (int k = 0; k < grid.num_slots(); ++k)
      m.add_constraint(hkey("hgmax", grid, k, p.id), {{hi.g[k], 1.0}, {hi.x, -p.g_max}},
                       Sense::less_equal, 0.0);
  }
}

void emit_renewables(FormulationContext& ctx) {
  MilpModel& m = ctx.out.model;
  const TimeGrid& grid = ctx.out.grid;
  for (std::size_t l = 0; l < ctx.system.renewables.size(); ++l) {
    const RenewablePlant& p = ctx.system.renewables[l];
    RenewableIndex& ri = ctx.out.index.renewable[l];
    const Profile& psi = ctx.scenarios.renewable.at(p.id);
    ri.g = hourly_vars(m, grid, "g", p.id, 0.0, kInf);
    for (int k = 0; k < grid.num_slots(); ++k)
      m.add_constraint(hkey("rgmax", grid, k, p.id), {{ri.g[k], 1.0}, {ri.x, -grid.hourly(psi, k)}},
                       Sense::less_equal, 0.0);
  }
}

void emit_batteries(FormulationContext& ctx) {
  MilpModel& m = ctx.out.model;
  const TimeGrid& grid = ctx.out.grid;
  for (std::size_t b = 0; b < ctx.system.batteries.size(); ++b) {
    const Battery& p = ctx.system.batteries[b];
    BatteryIndex& bi = ctx.out.index.battery[b];
    bi.v = hourly_vars(m, grid, "soc", p.id, 0.0, kInf);
    bi.charge = hourly_vars(m, grid, "chg", p.id, 0.0, kInf);
    bi.discharge = hourly_vars(m, grid, "dis", p.id, 0.0, kInf);
    for (int k = 0; k < grid.num_slots(); ++k) {
      // v at the next hour of the same typical day; hour 24 wraps to hour 1
      const int next = k % kHoursPerDay == kHoursPerDay - 1 ? k - (kHoursPerDay - 1) : k + 1;
      m.add_constraint(hkey("bbal", grid, k, p.id),
                       {{bi.v[next], 1.0}, {bi.v[k], -1.0}, {bi.charge[k], -p.eta_charge},
                        {bi.discharge[k], 1.0}},
                       Sense::equal, 0.0);
      m.add_constraint(hkey("bvmax", grid, k, p.id), {{bi.v[k], 1.0}, {bi.x, -p.v_max}},
                       Sense::less_equal, 0.0);
      m.add_constraint(hkey("bchg", grid, k, p.id), {{bi.charge[k], 1.0}, {bi.x, -p.charge_max}},
                       Sense::less_equal, 0.0);
      m.add_constraint(hkey("bdis", grid, k, p.id),
                       {{bi.discharge[k], 1.0}, {bi.x, -p.discharge_max}}, Sense::less_equal, 0.0);
    }
  }
}

namespace {

// Union-find over bus positions.
struct Components {
  std::vector<std::size_t> parent;
  explicit Components(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

void emit_network(FormulationContext& ctx) {
  MilpModel& m = ctx.out.model;
  const TimeGrid& grid = ctx.out.grid;
  const int N = grid.num_slots();
  const auto& buses = ctx.system.buses;
  const auto bus_pos = positions(buses);
  auto& bus_ix = ctx.out.index.bus;
  for (const Bus& b : buses) bus_ix.push_back({b.id, {}, {}, {}, {}});

  // Circuit-connected components decide the reference buses.
  Components circuits(buses.size());
  std::vector<bool> touched(buses.size(), false);
  for (const TransmissionLine& k : ctx.system.lines) {
    if (k.kind != LineKind::circuit) continue;
    const std::size_t a = bus_pos.at(k.from_bus), b = bus_pos.at(k.to_bus);
    circuits.unite(a, b);
    touched[a] = touched[b] = true;
  }
  std::map<std::size_t, std::size_t> reference;  // root -> lowest-id bus position
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (!touched[i]) continue;
    const std::size_t root = circuits.find(i);
    auto it = reference.find(root);
    if (it == reference.end() || buses[i].id < buses[it->second].id) reference[root] = i;
  }
  std::set<std::size_t> refs;
  for (const auto& [root, i] : reference) refs.insert(i);
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (!touched[i]) continue;
    const bool is_ref = refs.count(i) > 0;
    const double lim = is_ref ? 0.0 : ctx.options.theta_max;
    bus_ix[i].theta = hourly_vars(m, grid, "theta", buses[i].id, -lim, lim);
  }
  for (std::size_t i : refs) ctx.out.index.reference_buses.push_back(buses[i].id);
  std::sort(ctx.out.index.reference_buses.begin(), ctx.out.index.reference_buses.end());

  // Islands reachable only through candidate lines.
  if (buses.size() > 1) {
    Components existing(buses.size()), all(buses.size());
    for (const TransmissionLine& k : ctx.system.lines) {
      const std::size_t a = bus_pos.at(k.from_bus), b = bus_pos.at(k.to_bus);
      all.unite(a, b);
      const Project* p = ctx.catalog.find_by_target(k.id);
      if (!p || p->kind == DecisionKind::obligatory) existing.unite(a, b);
    }
    // whole component -> existing-line islands, in bus order
    std::map<std::size_t, std::map<std::size_t, std::vector<int>>> islands;
    for (std::size_t i = 0; i < buses.size(); ++i)
      islands[all.find(i)][existing.find(i)].push_back(buses[i].id);
    for (auto& [root, parts] : islands) {
      if (parts.size() < 2) continue;
      std::vector<std::vector<int>> sorted;
      for (auto& [r, ids] : parts) {
        std::sort(ids.begin(), ids.end());
        sorted.push_back(ids);
      }
      std::sort(sorted.begin(), sorted.end());
      std::string text = "bus groups";
      for (const auto& ids : sorted) {
        text += " {";
        for (std::size_t j = 0; j < ids.size(); ++j) text += (j ? ", " : "") + std::to_string(ids[j]);
        text += "}";
      }
      ctx.out.warnings.push_back(text + " are joined only through candidate lines");
    }
  }

  for (std::size_t kk = 0; kk < ctx.system.lines.size(); ++kk) {
    const TransmissionLine& k = ctx.system.lines[kk];
    LineIndex& li = ctx.out.index.line[kk];
    li.fwd = hourly_vars(m, grid, "fp", k.id, 0.0, kInf);
    li.bwd = hourly_vars(m, grid, "fn", k.id, 0.0, kInf);
    const double big_m = k.susceptance * 2.0 * ctx.options.theta_max;
    const BusIndex& from = bus_ix[bus_pos.at(k.from_bus)];
    const BusIndex& to = bus_ix[bus_pos.at(k.to_bus)];
    for (int s = 0; s < N; ++s) {
      m.add_constraint(hkey("fpmax", grid, s, k.id), {{li.fwd[s], 1.0}, {li.x, -k.f_max_fwd}},
                       Sense::less_equal, 0.0);
      m.add_constraint(hkey("fnmax", grid, s, k.id), {{li.bwd[s], 1.0}, {li.x, -k.f_max_bwd}},
                       Sense::less_equal, 0.0);
      if (k.kind != LineKind::circuit) continue;
      const std::initializer_list<Term> flow{{li.fwd[s], 1.0},
                                             {li.bwd[s], -1.0},
                                             {from.theta[s], -k.susceptance},
                                             {to.theta[s], k.susceptance},
                                             {li.x, -big_m}};
      li.kvl_lo.push_back(m.add_constraint(hkey("kvllo", grid, s, k.id), flow, Sense::greater_equal, -big_m));
      const std::initializer_list<Term> flow_hi{{li.fwd[s], 1.0},
                                                {li.bwd[s], -1.0},
                                                {from.theta[s], -k.susceptance},
                                                {to.theta[s], k.susceptance},
                                                {li.x, big_m}};
      li.kvl_hi.push_back(m.add_constraint(hkey("kvlhi", grid, s, k.id), flow_hi, Sense::less_equal, big_m));
    }
  }

  // Area import/export.
  std::map<int, int> area_of_bus;
  for (const Bus& b : buses)
    if (b.area_id) area_of_bus[b.id] = *b.area_id;
  const auto area = [&](int bus) {
    auto it = area_of_bus.find(bus);
    return it == area_of_bus.end() ? std::optional<int>{} : std::optional<int>{it->second};
  };
  for (const Area& a : ctx.system.areas) {
    std::vector<std::size_t> arriving, leaving;
    for (std::size_t kk = 0; kk < ctx.system.lines.size(); ++kk) {
      const TransmissionLine& k = ctx.system.lines[kk];
      const auto fa = area(k.from_bus), ta = area(k.to_bus);
      if (ta == a.id && fa != a.id) arriving.push_back(kk);
      if (fa == a.id && ta != a.id) leaving.push_back(kk);
    }
    const auto& lines = ctx.out.index.line;
    for (int s = 0; s < N; ++s) {
      std::vector<Term> imp, exp;
      for (std::size_t kk : arriving) {
        imp.push_back({lines[kk].fwd[s], 1.0});
        exp.push_back({lines[kk].bwd[s], 1.0});
      }
      for (std::size_t kk : leaving) {
        imp.push_back({lines[kk].bwd[s], 1.0});
        exp.push_back({lines[kk].fwd[s], 1.0});
      }
      if (a.import_max) m.add_constraint(hkey("impmax", grid, s, a.id), imp, Sense::less_equal, *a.import_max);
      if (a.import_min) m.add_constraint(hkey("impmin", grid, s, a.id), imp, Sense::greater_equal, *a.import_min);
      if (a.export_max) m.add_constraint(hkey("expmax", grid, s, a.id), exp, Sense::less_equal, *a.export_max);
      if (a.export_min) m.add_constraint(hkey("expmin", grid, s, a.id), exp, Sense::greater_equal, *a.export_min);
    }
  }
}

void emit_generation_groups(FormulationContext& ctx) {
  MilpModel& m = ctx.out.model;
  const TimeGrid& grid = ctx.out.grid;
  const auto tpos = positions(ctx.system.thermals);
  const auto hpos = positions(ctx.system.hydros);
  for (const GenerationGroup& c : ctx.system.generation_groups) {
    SlackIndex gi;
    gi.id = c.id;
    gi.slack = hourly_vars(m, grid, "dg", c.id, 0.0, kInf);
    const bool is_min = c.kind == BoundKind::min;
    for (int k = 0; k < grid.num_slots(); ++k) {
      std::vector<Term> terms;
      for (int j : c.thermal_ids) terms.push_back({ctx.out.index.thermal[tpos.at(j)].g[k], 1.0});
      for (int i : c.hydro_ids) terms.push_back({ctx.out.index.hydro[hpos.at(i)].g[k], 1.0});
      terms.push_back({gi.slack[k], is_min ? 1.0 : -1.0});
      gi.rows.push_back(m.add_constraint(hkey("ggrp", grid, k, c.id), terms,
                                         is_min ? Sense::greater_equal : Sense::less_equal,
                                         c.threshold));
    }
    ctx.out.index.generation_group.push_back(std::move(gi));
  }
}

void emit_reserves(FormulationContext& ctx) {
  if (ctx.system.reserves.empty()) return;
  MilpModel& m = ctx.out.model;
  const TimeGrid& grid = ctx.out.grid;
  const int N = grid.num_slots();
  std::set<int> thermal_members, hydro_members, battery_members;
  for (const ReserveRequirement& c : ctx.system.reserves) {
    thermal_members.insert(c.thermal_ids.begin(), c.thermal_ids.end());
    hydro_members.insert(c.hydro_ids.begin(), c.hydro_ids.end());
    battery_members.insert(c.battery_ids.begin(), c.battery_ids.end());
  }
  auto& ix = ctx.out.index;
  for (std::size_t j = 0; j < ctx.system.thermals.size(); ++j) {
    const ThermalPlant& p = ctx.system.thermals[j];
    if (!thermal_members.count(p.id)) continue;
    ThermalIndex& ti = ix.thermal[j];
    ti.r = hourly_vars(m, grid, "r", p.id, 0.0, kInf);
    for (int k = 0; k < N; ++k) {
      const VarId on = p.has_commitment ? ti.gamma[k] : ti.x;
      m.add_constraint(hkey("tres", grid, k, p.id), {{ti.g[k], 1.0}, {ti.r[k], 1.0}, {on, -p.g_max}},
                       Sense::less_equal, 0.0);
      if (std::isfinite(p.ramp_up))
        m.add_constraint(hkey("tramp", grid, k, p.id), {{ti.r[k], 1.0}}, Sense::less_equal, p.ramp_up);
    }
  }
  for (std::size_t i = 0; i < ctx.system.hydros.size(); ++i) {
    const HydroPlant& p = ctx.system.hydros[i];
    if (!hydro_members.count(p.id)) continue;
    HydroIndex& hi = ix.hydro[i];
    hi.r = hourly_vars(m, grid, "r", p.id, 0.0, kInf);
    for (int k = 0; k < N; ++k)
      m.add_constraint(hkey("hres", grid, k, p.id), {{hi.g[k], 1.0}, {hi.r[k], 1.0}, {hi.x, -p.g_max}},
                       Sense::less_equal, 0.0);
  }
  for (std::size_t b = 0; b < ctx.system.batteries.size(); ++b) {
    const Battery& p = ctx.system.batteries[b];
    if (!battery_members.count(p.id)) continue;
    BatteryIndex& bi = ix.battery[b];
    bi.r = hourly_vars(m, grid, "r", p.id, 0.0, kInf);
    for (int k = 0; k < N; ++k) {
      m.add_constraint(hkey("bres1", grid, k, p.id),
                       {{bi.discharge[k], p.eta_discharge},
                        {bi.r[k], 1.0},
                        {bi.x, -p.eta_discharge * p.discharge_max}},
                       Sense::less_equal, 0.0);
      m.add_constraint(hkey("bres2", grid, k, p.id), {{bi.r[k], 1.0}, {bi.v[k], -p.eta_discharge}},
                       Sense::less_equal, 0.0);
    }
  }
  const auto tpos = positions(ctx.system.thermals);
  const auto hpos = positions(ctx.system.hydros);
  const auto bpos = positions(ctx.system.batteries);
  for (const ReserveRequirement& c : ctx.system.reserves) {
    SlackIndex ri;
    ri.id = c.id;
    ri.slack = hourly_vars(m, grid, "dr", c.id, 0.0, kInf);
    for (int k = 0; k < N; ++k) {
      std::vector<Term> terms;
      for (int j : std::set<int>(c.thermal_ids.begin(), c.thermal_ids.end()))
        terms.push_back({ix.thermal[tpos.at(j)].r[k], 1.0});
      for (int i : std::set<int>(c.hydro_ids.begin(), c.hydro_ids.end()))
        terms.push_back({ix.hydro[hpos.at(i)].r[k], 1.0});
      for (int b : std::set<int>(c.battery_ids.begin(), c.battery_ids.end()))
        terms.push_back({ix.battery[bpos.at(b)].r[k], 1.0});
      terms.push_back({ri.slack[k], 1.0});
      ri.rows.push_back(m.add_constraint(hkey("resv", grid, k, c.id), terms, Sense::greater_equal,
                                         grid.hourly(c.requirement, k)));
    }
    ix.reserve.push_back(std::move(ri));
  }
}

void emit_load_balance(FormulationContext& ctx) {
  MilpModel& m = ctx.out.model;
  const TimeGrid& grid = ctx.out.grid;
  const int N = grid.num_slots();
  const double scale = ctx.options.demand_scale;
  auto& ix = ctx.out.index;
  const auto bus_pos = positions(ctx.system.buses);

  std::vector<const DemandSpec*> demand(ctx.system.buses.size(), nullptr);
  for (const DemandSpec& d : ctx.system.demands) demand[bus_pos.at(d.bus_id)] = &d;
  for (std::size_t n = 0; n < ctx.system.buses.size(); ++n) {
    const DemandSpec* d = demand[n];
    if (!d) continue;
    BusIndex& bi = ix.bus[n];
    const int id = ctx.system.buses[n].id;
    bi.deficit.resize(N);
    for (int k = 0; k < N; ++k)
      bi.deficit[k] = m.add_variable(hkey("def", grid, k, id), 0.0, scale * grid.hourly(d->inelastic, k));
    for (std::size_t e = 0; e < d->elastic.size(); ++e) {
      std::vector<VarId> seg(N);
      for (int k = 0; k < N; ++k) {
        const auto c = grid.coord(k);
        seg[k] = m.add_variable(key("de", {c.t + 1, c.d + 1, c.h + 1, c.s + 1, id, static_cast<int>(e) + 1}),
                                0.0, scale * grid.hourly(d->elastic[e].max_quantity, k));
      }
      bi.elastic.push_back(std::move(seg));
    }
  }

  // Injections grouped by bus position.
  struct Injection {
    const std::vector<VarId>* vars;
    double coef;
  };
  std::vector<std::vector<Injection>> inj(ctx.system.buses.size());
  for (std::size_t j = 0; j < ctx.system.thermals.size(); ++j)
    inj[bus_pos.at(ctx.system.thermals[j].bus_id)].push_back({&ix.thermal[j].g, 1.0});
  for (std::size_t i = 0; i < ctx.system.hydros.size(); ++i)
    inj[bus_pos.at(ctx.system.hydros[i].bus_id)].push_back({&ix.hydro[i].g, 1.0});
  for (std::size_t l = 0; l < ctx.system.renewables.size(); ++l)
    inj[bus_pos.at(ctx.system.renewables[l].bus_id)].push_back({&ix.renewable[l].g, 1.0});
  for (std::size_t b = 0; b < ctx.system.batteries.size(); ++b) {
    const Battery& p = ctx.system.batteries[b];
    inj[bus_pos.at(p.bus_id)].push_back({&ix.battery[b].discharge, p.eta_discharge});
    inj[bus_pos.at(p.bus_id)].push_back({&ix.battery[b].charge, -1.0});
  }
  for (std::size_t k = 0; k < ctx.system.lines.size(); ++k) {
    const TransmissionLine& line = ctx.system.lines[k];
    inj[bus_pos.at(line.to_bus)].push_back({&ix.line[k].fwd, 1.0});
    inj[bus_pos.at(line.to_bus)].push_back({&ix.line[k].bwd, -1.0});
    inj[bus_pos.at(line.from_bus)].push_back({&ix.line[k].fwd, -1.0});
    inj[bus_pos.at(line.from_bus)].push_back({&ix.line[k].bwd, 1.0});
  }

  for (std::size_t n = 0; n < ctx.system.buses.size(); ++n) {
    BusIndex& bi = ix.bus[n];
    const DemandSpec* d = demand[n];
    bi.balance.reserve(N);
    for (int k = 0; k < N; ++k) {
      std::vector<Term> terms;
      terms.reserve(inj[n].size() + 1 + bi.elastic.size());
      for (const Injection& e : inj[n]) terms.push_back({(*e.vars)[k], e.coef});
      for (const auto& seg : bi.elastic) terms.push_back({seg[k], -1.0});
      if (d) terms.push_back({bi.deficit[k], 1.0});
      const double rhs = d ? scale * grid.hourly(d->inelastic, k) : 0.0;
      bi.balance.push_back(m.add_constraint(hkey("bal", grid, k, bi.id), terms, Sense::equal, rhs));
    }
  }
}

void emit_objective(FormulationContext& ctx) {
  MilpModel& m = ctx.out.model;
  const TimeGrid& grid = ctx.out.grid;
  const int N = grid.num_slots();
  auto& terms = ctx.out.cost_terms;
  terms.assign(m.num_variables(), CostTerm::none);
  const auto& ix = ctx.out.index;
  const auto charge = [&](VarId v, double c, CostTerm term) {
    if (c == 0.0) return;
    m.add_cost(v, c);
    terms[v.index] = term;
  };
  std::vector<double> beta_of(N);
  for (int k = 0; k < N; ++k) {
    const auto c = grid.coord(k);
    beta_of[k] = beta(c.t, c.d, c.s, ctx.time, ctx.scenarios);
  }

  for (const Project& p : ctx.catalog.projects)
    charge(ix.x_by_project.at(p.id), project_cost(p, ctx.options.annual_rate), CostTerm::investment);

  for (std::size_t j = 0; j < ctx.system.thermals.size(); ++j) {
    const ThermalPlant& p = ctx.system.thermals[j];
    const ThermalIndex& ti = ix.thermal[j];
    for (int k = 0; k < N; ++k) {
      charge(ti.g[k], beta_of[k] * p.op_cost, CostTerm::generation);
      if (!ti.startup.empty()) charge(ti.startup[k], beta_of[k] * p.startup_cost, CostTerm::startup);
    }
  }
  for (std::size_t i = 0; i < ctx.system.hydros.size(); ++i) {
    const HydroPlant& p = ctx.system.hydros[i];
    const HydroIndex& hi = ix.hydro[i];
    for (int k = 0; k < N; ++k) charge(hi.g[k], beta_of[k] * p.om_cost, CostTerm::generation);
    for (int s = 0; s < grid.num_scenarios(); ++s) {
      for (int t = 0; t < grid.num_seasons(); ++t) {
        const double w = season_weight(t, s, ctx.time, ctx.scenarios);
        const int q = grid.season_slot(t, s);
        charge(hi.dv[q], w * p.penalty_storage, CostTerm::violation);
        charge(hi.du[q], w * p.penalty_turbining, CostTerm::violation);
        charge(hi.dq[q], w * p.penalty_outflow, CostTerm::violation);
      }
    }
  }
  for (std::size_t c = 0; c < ix.generation_group.size(); ++c)
    for (int k = 0; k < N; ++k)
      charge(ix.generation_group[c].slack[k], beta_of[k] * ctx.system.generation_groups[c].penalty,
             CostTerm::violation);
  for (std::size_t c = 0; c < ix.reserve.size(); ++c)
    for (int k = 0; k < N; ++k)
      charge(ix.reserve[c].slack[k], beta_of[k] * ctx.system.reserves[c].penalty, CostTerm::violation);

  const auto bus_pos = positions(ctx.system.buses);
  for (const DemandSpec& d : ctx.system.demands) {
    const BusIndex& bi = ix.bus[bus_pos.at(d.bus_id)];
    for (int k = 0; k < N; ++k) {
      charge(bi.deficit[k], beta_of[k] * d.deficit_cost, CostTerm::deficit);
      for (std::size_t e = 0; e < d.elastic.size(); ++e)
        charge(bi.elastic[e][k], -beta_of[k] * d.elastic[e].price, CostTerm::elastic_gain);
    }
  }
}

YearlyModel build_yearly_model(const PowerSystem& system, const ProjectCatalog& catalog,
                               const TimeStructure& time, const ScenarioSet& scenarios,
                               const FixedDecisions& fixed, const FormulationOptions& options) {
  YearlyModel out{MilpModel("gtep"), {}, {}, {},
                  TimeGrid(time, static_cast<int>(scenarios.size()))};
  FormulationContext ctx{system, catalog, time, scenarios, options, out};
  emit_investment_variables(ctx, fixed);
  emit_investment_logic(ctx);
  emit_thermal(ctx);
  emit_hydro(ctx);
  emit_renewables(ctx);
  emit_batteries(ctx);
  emit_network(ctx);
  emit_generation_groups(ctx);
  emit_reserves(ctx);
  emit_load_balance(ctx);
  emit_objective(ctx);
  out.model.seal();
  return out;
}

CostBreakdown decompose_costs(const YearlyModel& ym, std::span<const double> x) {
  CostBreakdown b;
  const auto& c = ym.model.costs();
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double v = c[j] * x[j];
    switch (ym.cost_terms[j]) {
      case CostTerm::investment: b.investment += v; break;
      case CostTerm::generation: b.generation += v; break;
      case CostTerm::startup: b.startup += v; break;
      case CostTerm::violation: b.violation += v; break;
      case CostTerm::deficit: b.deficit += v; break;
      case CostTerm::elastic_gain: b.elastic_gain -= v; break;
      case CostTerm::none: break;
    }
  }
  return b;
}

std::size_t expected_variable_count(const PowerSystem& system, const TimeStructure& time,
                                    const ScenarioSet& scenarios) {
  const std::size_t S = scenarios.size(), T = time.num_seasons();
  const std::size_t N = S * time.total_days() * kHoursPerDay;
  const std::size_t season_slots = S * T;
  std::set<int> tr, hr, br, circuit_buses;
  for (const ReserveRequirement& c : system.reserves) {
    tr.insert(c.thermal_ids.begin(), c.thermal_ids.end());
    hr.insert(c.hydro_ids.begin(), c.hydro_ids.end());
    br.insert(c.battery_ids.begin(), c.battery_ids.end());
  }
  std::size_t n = system.thermals.size() + system.hydros.size() + system.renewables.size() +
                  system.batteries.size() + system.lines.size();
  for (const ThermalPlant& p : system.thermals) n += N * (1 + (p.has_commitment ? 2 : 0) + tr.count(p.id));
  for (const HydroPlant& p : system.hydros)
    n += S * (T + 1) + 5 * season_slots + N * (1 + hr.count(p.id));
  n += N * system.renewables.size();
  for (const Battery& b : system.batteries) n += N * (3 + br.count(b.id));
  n += 2 * N * system.lines.size();
  for (const TransmissionLine& k : system.lines) {
    if (k.kind != LineKind::circuit) continue;
    circuit_buses.insert(k.from_bus);
    circuit_buses.insert(k.to_bus);
  }
  n += N * circuit_buses.size();
  for (const DemandSpec& d : system.demands) n += N * (1 + d.elastic.size());
  n += N * (system.generation_groups.size() + system.reserves.size());
  return n;
}

}  // namespace gtep
