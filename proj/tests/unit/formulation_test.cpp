#include <gtest/gtest.h>

#include <cmath>

#include "gtep/formulation.hpp"
#include "gtep/solver.hpp"
#include "support/toy_systems.hpp"

namespace gtep {
namespace {

using namespace oracle;

constexpr double kTol = 1e-6;

struct Toy {
  PowerSystem sys;
  ProjectCatalog cat;
  TimeStructure time;
  ScenarioSet scen;

  [[nodiscard]] YearlyModel build(const FixedDecisions& fixed = {}) const {
    const ValidationReport r = validate_system(sys, cat, scen, &time);
    EXPECT_TRUE(r.ok()) << r.to_text();
    return build_yearly_model(sys, cat, time, scen, fixed);
  }
};

double sum_values(const Solution& s, const std::vector<VarId>& vars) {
  double total = 0.0;
  for (VarId v : vars) total += s.value(v);
  return total;
}

TEST(Formulation, TriangleSplitsFlowTwoToOne) {
  Toy toy;
  toy.sys.buses = {bus(1), bus(2), bus(3)};
  toy.sys.thermals = {thermal(10, 1, 200, 5)};
  toy.sys.lines = {line(21, 1, 2, 1000), line(22, 2, 3, 1000), line(23, 1, 3, 1000)};
  toy.sys.demands = {demand(3, 90.0)};
  const YearlyModel ym = toy.build();
  const Solution s = solve_year(ym);
  ASSERT_EQ(s.status, SolveStatus::optimal);
  const auto net = [&](std::size_t k, int h) {
    return s.value(ym.index.line[k].fwd[h]) - s.value(ym.index.line[k].bwd[h]);
  };
  for (int h = 0; h < kHoursPerDay; ++h) {
    EXPECT_NEAR(net(2, h), 60.0, kTol);
    EXPECT_NEAR(net(0, h), 30.0, kTol);
    EXPECT_NEAR(net(1, h), 30.0, kTol);
  }
  EXPECT_EQ(ym.index.reference_buses, std::vector<int>{1});
  EXPECT_NEAR(s.objective, 365.0 * 24 * 90 * 5, 1e-6 * s.objective);
}

TEST(Formulation, LineLimitLeavesRemoteDeficit) {
  Toy toy;
  toy.sys.buses = {bus(1), bus(2)};
  toy.sys.thermals = {thermal(10, 1, 100, 1)};
  toy.sys.lines = {line(21, 1, 2, 5)};
  toy.sys.demands = {demand(2, 8.0)};
  const YearlyModel ym = toy.build();
  const Solution s = solve_year(ym);
  ASSERT_EQ(s.status, SolveStatus::optimal);
  const BusIndex& remote = ym.index.bus[1];
  for (int h = 0; h < kHoursPerDay; ++h) {
    EXPECT_NEAR(s.value(remote.deficit[h]), 3.0, kTol);
    // Marginal cost at the remote bus is the deficit cost times the day weight.
    EXPECT_NEAR(s.dual(remote.balance[h]), 365.0 * 1000.0, 1e-6 * 365e3);
  }
}

TEST(Formulation, IslandBusWithoutGenerationIsFullDeficit) {
  Toy toy;
  toy.sys.buses = {bus(1)};
  toy.sys.demands = {demand(1, 10.0, 700.0)};
  const YearlyModel ym = toy.build();
  const Solution s = solve_year(ym);
  ASSERT_EQ(s.status, SolveStatus::optimal);
  EXPECT_NEAR(sum_values(s, ym.index.bus[0].deficit), 240.0, kTol);
  const double expected = 365.0 * 24 * 10 * 700;
  EXPECT_NEAR(s.objective, expected, 1e-9 * expected);
  const CostBreakdown c = decompose_costs(ym, s.primal);
  EXPECT_NEAR(c.deficit, expected, 1e-9 * expected);
  EXPECT_NEAR(c.total(), s.objective, 1e-9 * expected);
}

HydroPlant hydro(int id, int bus_id) {
  HydroPlant h;
  h.id = id;
  h.name = "h" + std::to_string(id);
  h.bus_id = bus_id;
  h.v_max = 1000;
  h.u_max = 1000;
  h.g_max = 100;
  h.rho = 1.0;
  return h;
}

TEST(Formulation, HydroTurbinesTheAnnualInflow) {
  Toy toy;
  toy.sys.buses = {bus(1)};
  toy.sys.hydros = {hydro(10, 1)};
  toy.sys.demands = {demand(1, 50.0)};
  toy.scen.inflows[10] = 100.0;
  const YearlyModel ym = toy.build();
  const Solution s = solve_year(ym);
  ASSERT_EQ(s.status, SolveStatus::optimal);
  const HydroIndex& hi = ym.index.hydro[0];
  EXPECT_NEAR(365.0 * sum_values(s, hi.g), 100.0, kTol);
  EXPECT_NEAR(s.value(hi.u[0]), 100.0, kTol);
  EXPECT_NEAR(s.value(hi.spill[0]), 0.0, kTol);
  EXPECT_NEAR(s.value(hi.v[0]), s.value(hi.v[1]), kTol);
}

TEST(Formulation, CascadePassesUpstreamReleaseDownstream) {
  Toy toy;
  toy.sys.buses = {bus(1)};
  HydroPlant up = hydro(10, 1), down = hydro(11, 1);
  up.g_max = 0;  // A cannot generate: its water has to go downstream
  down.upstream = {10};
  down.rho = 2.0;
  toy.sys.hydros = {down, up};
  toy.sys.demands = {demand(1, 50.0)};
  toy.scen.inflows[10] = 100.0;
  toy.scen.inflows[11] = 0.0;
  const YearlyModel ym = toy.build();
  const Solution s = solve_year(ym);
  ASSERT_EQ(s.status, SolveStatus::optimal);
  EXPECT_NEAR(365.0 * sum_values(s, ym.index.hydro[0].g), 200.0, kTol);

  const Constraint& wb = ym.model.constraint(ym.model.find_constraint("wbal[1,1,11]"));
  const int u_up = ym.index.hydro[1].u[0].index;
  const auto it = std::find_if(wb.row.begin(), wb.row.end(), [&](auto e) { return e.first == u_up; });
  ASSERT_NE(it, wb.row.end());
  EXPECT_EQ(it->second, -1.0);
}

TEST(Formulation, ZeroInflowMeansNoRelease) {
  Toy toy;
  toy.sys.buses = {bus(1)};
  toy.sys.hydros = {hydro(10, 1)};
  toy.sys.demands = {demand(1, 50.0)};
  toy.scen.inflows[10] = 0.0;
  toy.time = build_time_structure({0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3},
                                  std::vector<int>(365, 0), 0.0);
  const YearlyModel ym = toy.build();
  const Solution s = solve_year(ym);
  ASSERT_EQ(s.status, SolveStatus::optimal);
  const HydroIndex& hi = ym.index.hydro[0];
  EXPECT_NEAR(sum_values(s, hi.u) + sum_values(s, hi.spill), 0.0, kTol);
}

TEST(Formulation, BatteryShiftsCheapEnergy) {
  Toy toy;
  toy.sys.buses = {bus(1)};
  RenewablePlant pv{10, "pv", 1, 100};
  Battery b;
  b.id = 11;
  b.bus_id = 1;
  b.v_max = 500;
  b.charge_max = b.discharge_max = 50;
  b.eta_charge = 0.9;
  toy.sys.renewables = {pv};
  toy.sys.batteries = {b};
  toy.sys.thermals = {thermal(12, 1, 100, 80)};
  toy.sys.demands = {demand(1, 30.0)};
  toy.scen.renewable[10] = block_profile(8, 15, 100.0);
  const YearlyModel ym = toy.build();
  const Solution s = solve_year(ym);
  ASSERT_EQ(s.status, SolveStatus::optimal);
  const BatteryIndex& bi = ym.index.battery[0];
  double neutral = 0.0, charged = 0.0;
  for (int h = 0; h < kHoursPerDay; ++h) {
    neutral += b.eta_charge * s.value(bi.charge[h]) - s.value(bi.discharge[h]);
    if (h < 8 || h > 15) EXPECT_NEAR(s.value(bi.charge[h]), 0.0, kTol) << h;
    charged += s.value(bi.charge[h]);
  }
  EXPECT_NEAR(neutral, 0.0, kTol);
  EXPECT_GT(charged, 1.0);
  // Surplus is 8 h x 70 MW; the battery can absorb 8 x 50, delivering 0.9 of it.
  EXPECT_NEAR(sum_values(s, ym.index.thermal[0].g), 16 * 30.0 - 0.9 * 400.0, 1e-5);
}

TEST(Formulation, ReserveShortfallFromRampLimit) {
  Toy toy;
  toy.sys.buses = {bus(1)};
  ThermalPlant t = thermal(10, 1, 100, 1);
  t.ramp_up = 15;
  toy.sys.thermals = {t};
  toy.sys.demands = {demand(1, 10.0)};
  toy.sys.reserves = {ReserveRequirement{1, "spin", {10}, {}, {}, 20.0, 500.0}};
  const YearlyModel ym = toy.build();
  const Solution s = solve_year(ym);
  ASSERT_EQ(s.status, SolveStatus::optimal);
  for (int h = 0; h < kHoursPerDay; ++h) {
    EXPECT_NEAR(s.value(ym.index.reserve[0].slack[h]), 5.0, kTol);
    EXPECT_NEAR(s.value(ym.index.thermal[0].r[h]), 15.0, kTol);
  }
}

TEST(Formulation, GenerationGroupMinimumAccruesSlack) {
  Toy toy;
  toy.sys.buses = {bus(1)};
  toy.sys.thermals = {thermal(10, 1, 30, 1)};
  toy.sys.demands = {demand(1, 30.0)};
  toy.sys.generation_groups = {GenerationGroup{1, "must", {10}, {}, BoundKind::min, 50.0, 9.0}};
  const YearlyModel ym = toy.build();
  const Solution s = solve_year(ym);
  ASSERT_EQ(s.status, SolveStatus::optimal);
  for (int h = 0; h < kHoursPerDay; ++h)
    EXPECT_NEAR(s.value(ym.index.generation_group[0].slack[h]), 20.0, kTol);
  const CostBreakdown c = decompose_costs(ym, s.primal);
  EXPECT_NEAR(c.violation, 365.0 * 24 * 20 * 9, 1e-6);
}

TEST(Formulation, GenerationGroupMaximumBindsWithPositiveValue) {
  Toy toy;
  toy.sys.buses = {bus(1)};
  toy.sys.thermals = {thermal(10, 1, 50, 1), thermal(11, 1, 50, 2), thermal(12, 1, 100, 30)};
  toy.sys.demands = {demand(1, 60.0)};
  toy.sys.generation_groups = {GenerationGroup{1, "cap", {10, 11}, {}, BoundKind::max, 40.0, 1e4}};
  const YearlyModel ym = toy.build();
  const Solution s = solve_year(ym);
  ASSERT_EQ(s.status, SolveStatus::optimal);
  const RowId row = ym.index.generation_group[0].rows[0];
  EXPECT_NEAR(ym.model.row_activity(row.index, s.primal), 40.0, kTol);
  // Relaxing the cap by 1 MW saves (30 - 1) $/MWh for the day weight.
  EXPECT_NEAR(s.dual(row), -365.0 * 29, 1e-6 * 365 * 29);
}

TEST(Formulation, UnbuiltCandidateIsGated) {
  Toy toy;
  toy.sys.buses = {bus(1), bus(2)};
  toy.sys.thermals = {thermal(10, 1, 100, 10), thermal(11, 2, 100, 1)};
  toy.sys.lines = {line(21, 1, 2, 100)};
  toy.sys.demands = {demand(1, 20.0)};
  toy.cat.projects = {project(1, 11, 1e9), project(2, 21, 1e9)};
  const YearlyModel ym = toy.build();
  const Solution s = solve_year(ym);
  ASSERT_EQ(s.status, SolveStatus::optimal);
  EXPECT_NEAR(s.value(ym.index.x_by_project.at(1)), 0.0, kTol);
  EXPECT_NEAR(sum_values(s, ym.index.thermal[1].g), 0.0, kTol);
  EXPECT_NEAR(sum_values(s, ym.index.line[0].fwd) + sum_values(s, ym.index.line[0].bwd), 0.0, kTol);
  ASSERT_EQ(ym.warnings.size(), 1u);
  EXPECT_EQ(ym.warnings[0], "bus groups {1} {2} are joined only through candidate lines");
}

TEST(Formulation, PrecedenceForcesPredecessor) {
  Toy toy;
  toy.sys.buses = {bus(1)};
  toy.sys.thermals = {thermal(10, 1, 100, 1), thermal(11, 1, 100, 1)};
  toy.sys.demands = {demand(1, 10.0)};
  toy.cat.projects = {project(1, 10, 50), project(2, 11, 50)};
  toy.cat.precedence = {{1, 2}};
  const YearlyModel ym = toy.build({{2, 1.0}});
  const Solution s = solve_year(ym);
  ASSERT_EQ(s.status, SolveStatus::optimal);
  EXPECT_NEAR(s.value(ym.index.x_by_project.at(1)), 1.0, kTol);
}

TEST(Formulation, ExclusiveProjectsBothForcedIsInfeasible) {
  Toy toy;
  toy.sys.buses = {bus(1)};
  toy.sys.thermals = {thermal(10, 1, 100, 1), thermal(11, 1, 100, 1)};
  toy.sys.demands = {demand(1, 10.0)};
  toy.cat.projects = {project(1, 10, 0, DecisionKind::obligatory),
                      project(2, 11, 0, DecisionKind::obligatory)};
  toy.cat.exclusivity = {{1, 2}};
  const YearlyModel ym = toy.build();
  EXPECT_EQ(solve_year(ym).status, SolveStatus::infeasible);
}

TEST(Formulation, MinimumCapacityMatchesEnumeration) {
  Toy toy;
  toy.sys.buses = {bus(1)};
  toy.sys.thermals = {thermal(10, 1, 50, 1), thermal(11, 1, 60, 1), thermal(12, 1, 70, 1)};
  toy.sys.demands = {demand(1, 0.0)};
  const double costs[3] = {5, 6, 8}, weights[3] = {50, 60, 70};
  for (int j = 0; j < 3; ++j) toy.cat.projects.push_back(project(j + 1, 10 + j, costs[j]));
  CapacityGroup g;
  g.name = "firm";
  for (int j = 0; j < 3; ++j) g.terms.push_back({j + 1, weights[j]});
  g.lower = 100.0;
  toy.cat.capacity_groups = {g};

  double best = kInf;
  int best_mask = -1;
  for (int mask = 0; mask < 8; ++mask) {
    double w = 0, c = 0;
    for (int j = 0; j < 3; ++j)
      if (mask >> j & 1) w += weights[j], c += costs[j];
    if (w >= 100 && c < best) best = c, best_mask = mask;
  }
  const YearlyModel ym = toy.build();
  const Solution s = solve_year(ym);
  ASSERT_EQ(s.status, SolveStatus::optimal);
  EXPECT_NEAR(s.objective, best, kTol);
  for (int j = 0; j < 3; ++j)
    EXPECT_NEAR(s.value(ym.index.x_by_project.at(j + 1)), (best_mask >> j) & 1, kTol);
}

TEST(Formulation, FixedDecisionForUnknownProjectThrows) {
  Toy toy;
  toy.sys.buses = {bus(1)};
  EXPECT_THROW((void)build_yearly_model(toy.sys, toy.cat, toy.time, toy.scen, {{7, 1.0}}),
               std::invalid_argument);
}

TEST(Formulation, NamesFollowTheIndexScheme) {
  Toy toy;
  toy.sys.buses = {bus(1)};
  toy.sys.thermals = {thermal(10, 1, 100, 1)};
  toy.sys.demands = {demand(1, 10.0)};
  const YearlyModel ym = toy.build();
  EXPECT_EQ(ym.model.find_variable("g[1,1,1,1,10]"), ym.index.thermal[0].g[0]);
  EXPECT_EQ(ym.model.find_variable("g[1,1,24,1,10]"), ym.index.thermal[0].g[23]);
  EXPECT_EQ(ym.model.find_constraint("bal[1,1,3,1,1]"), ym.index.bus[0].balance[2]);
}

Toy mixed_toy() {
  Toy toy;
  toy.sys.areas = {Area{1, "north", std::nullopt, 80.0, std::nullopt, std::nullopt}};
  toy.sys.buses = {bus(1), bus(2), bus(3)};
  toy.sys.buses[1].area_id = 1;
  ThermalPlant t = thermal(10, 1, 100, 20);
  t.has_commitment = true;
  t.g_min = 10;
  t.startup_cost = 100;
  t.ramp_up = t.ramp_down = 40;
  toy.sys.thermals = {t, thermal(11, 2, 50, 30)};
  toy.sys.hydros = {hydro(12, 3)};
  toy.sys.renewables = {RenewablePlant{13, "wind", 2, 60}};
  Battery b;
  b.id = 14;
  b.bus_id = 3;
  b.v_max = 40;
  b.charge_max = b.discharge_max = 10;
  toy.sys.batteries = {b};
  TransmissionLine dc = line(17, 2, 3, 30);
  dc.kind = LineKind::dc_link;
  toy.sys.lines = {line(15, 1, 2, 80), line(16, 1, 3, 80), dc};
  DemandSpec d = demand(2, 70.0);
  d.elastic = {ElasticSegment{50.0, 5.0}};
  toy.sys.demands = {d, demand(3, 20.0)};
  toy.sys.generation_groups = {GenerationGroup{1, "g", {10, 11}, {12}, BoundKind::max, 150, 10}};
  toy.sys.reserves = {ReserveRequirement{2, "r", {10}, {12}, {14}, 10.0, 100}};
  toy.cat.projects = {project(1, 11, 100), project(2, 14, 50, DecisionKind::continuous),
                      project(3, 17, 10)};
  toy.scen.inflows[12] = 50.0;
  toy.scen.renewable[13] = block_profile(0, 5, 60.0, 10.0);
  return toy;
}

TEST(Formulation, VariableCountMatchesClosedForm) {
  Toy toy = mixed_toy();
  const YearlyModel one = toy.build();
  EXPECT_EQ(one.model.num_variables(), expected_variable_count(toy.sys, toy.time, toy.scen));

  toy.scen.scenarios = {Scenario{"wet", 0.5}, Scenario{"dry", 0.5}};
  const YearlyModel two = toy.build();
  EXPECT_EQ(two.model.num_variables(), expected_variable_count(toy.sys, toy.time, toy.scen));
  // Everything but the investment columns scales with the number of scenarios.
  const std::size_t x_cols = one.index.x_by_asset.size();
  EXPECT_EQ(two.model.num_variables() - x_cols, 2 * (one.model.num_variables() - x_cols));
  EXPECT_EQ(two.model.num_constraints(), 2 * one.model.num_constraints());
}

TEST(Formulation, MixedInstanceSolvesAndDecomposes) {
  const Toy toy = mixed_toy();
  const YearlyModel ym = toy.build();
  const Solution s = solve_year(ym);
  ASSERT_EQ(s.status, SolveStatus::optimal);
  EXPECT_LE(max_violation(ym.model, s.primal, true), 1e-6);
  const CostBreakdown c = decompose_costs(ym, s.primal);
  EXPECT_NEAR(c.total(), s.objective, 1e-6 * (1 + std::abs(s.objective)));
  EXPECT_GE(c.elastic_gain, 0.0);
}

TEST(Formulation, ProjectCostUsesAnnuityWhenCapexGiven) {
  Project p = project(1, 10, 7);
  EXPECT_EQ(project_cost(p, 0.1), 7.0);
  p.capex = 100.0;
  p.lifetime = 10;
  EXPECT_DOUBLE_EQ(project_cost(p, 0.0), 10.0);
}

}  // namespace
}  // namespace gtep
