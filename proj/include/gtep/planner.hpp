#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gtep/formulation.hpp"
#include "gtep/solver.hpp"

namespace gtep {

/// Standard annuity capex * r / (1 - (1 + r)^-lifetime); capex / lifetime at
/// r = 0. Throws std::invalid_argument for lifetime < 1 or r < 0.
[[nodiscard]] double annualize_cost(double capex, int lifetime_years, double annual_rate);

struct YearSpec {
  double demand_growth = 1.0;             // multiplies inelastic demand and elastic caps
  std::optional<ScenarioSet> scenarios;   // empty: the instance scenarios
};

struct StudyHorizon {
  std::vector<YearSpec> years{YearSpec{}};
  double annual_rate = 0.0;

  [[nodiscard]] int num_years() const { return static_cast<int>(years.size()); }
};

/// Everything one planning study needs.
struct Instance {
  PowerSystem system;
  ProjectCatalog catalog;
  TimeStructure time;
  ScenarioSet scenarios;
  StudyHorizon horizon;
  double theta_max = std::numbers::pi / 2;

  [[nodiscard]] const ScenarioSet& scenarios_of(int year) const;
  /// Runs validate_system for every distinct scenario set and checks the
  /// horizon and entry windows.
  [[nodiscard]] ValidationReport validate() const;
};

struct PlannerConfig {
  SolveConfig solve;
  const SolverBackend* backend = nullptr;  // null: embedded branch and bound
};

/// Operation summary of one year. Energies are expected annual MWh.
struct YearResult {
  int year = 0;  // 1-based
  Solution solution;
  std::shared_ptr<const YearlyModel> model;
  CostBreakdown costs;             // undiscounted yearly objective terms
  double discount_factor = 1.0;    // (1 + r_a)^-(year - 1)
  std::vector<int> new_projects;   // ascending ids
  double deficit_energy = 0.0;
  double reserve_shortfall = 0.0;
  double group_violation = 0.0;
  double curtailed_energy = 0.0;
};

struct ExpansionPlan {
  std::map<int, std::optional<int>> decision_year;  // project id -> year or never
  std::map<int, double> built_level;                // 1, or the level of a continuous project
  std::vector<YearResult> years;

  [[nodiscard]] double discounted_total() const;
};

/// A yearly solve without a usable solution.
class PlanningError : public std::runtime_error {
 public:
  PlanningError(int year, SolveStatus status, const std::string& detail)
      : std::runtime_error("year " + std::to_string(year) + ": " + std::string(to_string(status)) +
                           (detail.empty() ? "" : " (" + detail + ")")),
        year_(year),
        status_(status) {}
  [[nodiscard]] int year() const { return year_; }
  [[nodiscard]] SolveStatus status() const { return status_; }

 private:
  int year_;
  SolveStatus status_;
};

/// Decisions applied to year `year` given the projects decided earlier:
/// earlier builds keep their level, projects outside their entry window are
/// fixed at 0, obligatory projects are fixed at 1 from their earliest year.
[[nodiscard]] FixedDecisions fixed_decisions_for_year(const ProjectCatalog& catalog, int year,
                                                      const std::map<int, double>& built);

/// Builds the model of one year.
[[nodiscard]] YearlyModel build_year(const Instance& instance, int year, const FixedDecisions& fixed);

/// Solve year 1, fix its builds, advance. Throws PlanningError when a year has
/// no solution.
[[nodiscard]] ExpansionPlan run_rolling_horizon(const Instance& instance,
                                                const PlannerConfig& config = {});

/// A build decision given to run_fixed_plan.
struct Build {
  int year = 1;
  double level = 1.0;
};

/// Operation-only run over the horizon: every project is fixed, at its level
/// from its build year on and at 0 otherwise. Throws PlanningError when a
/// year has no solution.
[[nodiscard]] ExpansionPlan run_fixed_plan(const Instance& instance, const std::map<int, Build>& builds,
                                           const PlannerConfig& config = {});

/// Builds recorded in a finished plan.
[[nodiscard]] std::map<int, Build> builds_of(const ExpansionPlan& plan);

}  // namespace gtep
