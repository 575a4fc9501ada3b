#pragma once

#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "gtep/milp.hpp"
#include "gtep/system.hpp"
#include "gtep/time.hpp"

namespace gtep {

/// Project id -> fixed investment value (0 or 1; any value in [0,1] for
/// continuous projects).
using FixedDecisions = std::map<int, double>;

struct FormulationOptions {
  double demand_scale = 1.0;  // multiplies inelastic demand and elastic caps
  double annual_rate = 0.0;   // used to annualize projects given by capex
  double theta_max = std::numbers::pi / 2;  // rad
};

enum class CostTerm : std::uint8_t {
  none,
  investment,
  generation,
  startup,
  violation,
  deficit,
  elastic_gain
};

/// Objective split by term. `elastic_gain` is reported as a positive amount
/// that is subtracted in `total()`.
struct CostBreakdown {
  double investment = 0.0;
  double generation = 0.0;
  double startup = 0.0;
  double violation = 0.0;
  double deficit = 0.0;
  double elastic_gain = 0.0;

  [[nodiscard]] double total() const {
    return investment + generation + startup + violation + deficit - elastic_gain;
  }
};

// Per-entity variable handles. Hourly vectors are indexed by TimeGrid slot,
// seasonal vectors by TimeGrid season slot. Empty vectors mean the entity
// has no such variable.

struct ThermalIndex {
  int id = 0;
  VarId x;
  std::vector<VarId> gamma, startup, g, r;
};

struct HydroIndex {
  int id = 0;
  VarId x;
  std::vector<VarId> v;  // s * (T + 1) + t, t = 0 is the initial storage
  std::vector<VarId> u, spill, dv, du, dq;
  std::vector<VarId> g, r;
};

struct RenewableIndex {
  int id = 0;
  VarId x;
  std::vector<VarId> g;
};

struct BatteryIndex {
  int id = 0;
  VarId x;
  std::vector<VarId> v, charge, discharge, r;
};

struct LineIndex {
  int id = 0;
  VarId x;
  std::vector<VarId> fwd, bwd;
  std::vector<RowId> kvl_lo, kvl_hi;  // circuits only
};

struct BusIndex {
  int id = 0;
  std::vector<VarId> theta;                 // empty for buses without circuits
  std::vector<VarId> deficit;               // empty without a demand
  std::vector<std::vector<VarId>> elastic;  // [segment][slot]
  std::vector<RowId> balance;
};

struct SlackIndex {
  int id = 0;
  std::vector<VarId> slack;
  std::vector<RowId> rows;
};

/// Semantic coordinates -> model variables. Entity vectors follow the order
/// of the PowerSystem vectors.
struct VariableIndex {
  std::vector<ThermalIndex> thermal;
  std::vector<HydroIndex> hydro;
  std::vector<RenewableIndex> renewable;
  std::vector<BatteryIndex> battery;
  std::vector<LineIndex> line;
  std::vector<BusIndex> bus;
  std::vector<SlackIndex> generation_group;
  std::vector<SlackIndex> reserve;
  std::map<int, VarId> x_by_asset;
  std::map<int, VarId> x_by_project;
  std::vector<int> reference_buses;
};

struct YearlyModel {
  MilpModel model;
  VariableIndex index;
  std::vector<CostTerm> cost_terms;  // per column
  std::vector<std::string> warnings;
  TimeGrid grid;
};

/// Shared state of the emit_* steps for one yearly model.
struct FormulationContext {
  const PowerSystem& system;
  const ProjectCatalog& catalog;
  const TimeStructure& time;
  const ScenarioSet& scenarios;
  FormulationOptions options;
  YearlyModel& out;
};

// Emission steps, applied in this order by build_yearly_model.
void emit_investment_variables(FormulationContext& ctx, const FixedDecisions& fixed);
void emit_investment_logic(FormulationContext& ctx);
void emit_thermal(FormulationContext& ctx);
void emit_hydro(FormulationContext& ctx);
void emit_renewables(FormulationContext& ctx);
void emit_batteries(FormulationContext& ctx);
void emit_network(FormulationContext& ctx);
void emit_generation_groups(FormulationContext& ctx);
void emit_reserves(FormulationContext& ctx);
void emit_load_balance(FormulationContext& ctx);
void emit_objective(FormulationContext& ctx);

/// Investment cost charged to a project in one yearly problem: the annuity
/// of its capex when given, else its investment cost.
[[nodiscard]] double project_cost(const Project& p, double annual_rate);

/// Builds and seals the model of one planning year. Fixed decisions become
/// tight bounds on the investment variables; obligatory projects not listed
/// in `fixed` are fixed at 1. Throws std::invalid_argument for decisions on
/// unknown projects.
[[nodiscard]] YearlyModel build_yearly_model(const PowerSystem& system,
                                             const ProjectCatalog& catalog,
                                             const TimeStructure& time,
                                             const ScenarioSet& scenarios,
                                             const FixedDecisions& fixed = {},
                                             const FormulationOptions& options = {});

/// Cost terms of a primal point of `ym.model`.
[[nodiscard]] CostBreakdown decompose_costs(const YearlyModel& ym, std::span<const double> x);

/// Column count predicted from entity counts and the index space.
[[nodiscard]] std::size_t expected_variable_count(const PowerSystem& system,
                                                  const TimeStructure& time,
                                                  const ScenarioSet& scenarios);

}  // namespace gtep
