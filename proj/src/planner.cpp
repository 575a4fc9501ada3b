#include "gtep/planner.hpp"

#include <algorithm>
#include <cmath>

namespace gtep {

double annualize_cost(double capex, int lifetime_years, double annual_rate) {
  if (lifetime_years < 1) throw std::invalid_argument("lifetime must be at least 1 year");
  if (!(annual_rate >= 0.0)) throw std::invalid_argument("annual rate must be nonnegative");
  if (annual_rate == 0.0) return capex / lifetime_years;
  return capex * annual_rate / (1.0 - std::pow(1.0 + annual_rate, -lifetime_years));
}

const ScenarioSet& Instance::scenarios_of(int year) const {
  const YearSpec& spec = horizon.years.at(year - 1);
  return spec.scenarios ? *spec.scenarios : scenarios;
}

ValidationReport Instance::validate() const {
  ValidationReport report = validate_system(system, catalog, scenarios, &time);
  if (horizon.years.empty()) report.error("horizon", "at least one year is required");
  if (!(horizon.annual_rate >= 0.0)) report.error("horizon", "annual rate must be nonnegative");
  if (!(theta_max > 0.0)) report.error("network", "theta_max must be positive");
  for (int y = 1; y <= horizon.num_years(); ++y) {
    const YearSpec& spec = horizon.years[y - 1];
    const std::string who = "year " + std::to_string(y);
    if (!(spec.demand_growth >= 0.0) || !std::isfinite(spec.demand_growth))
      report.error(who, "demand growth must be a finite nonnegative number");
    if (spec.scenarios) {
      ValidationReport sub = validate_system(system, catalog, *spec.scenarios, &time);
      for (Finding& f : sub.findings) {
        f.entity = who + ", " + f.entity;
        report.findings.push_back(std::move(f));
      }
    }
  }
  for (const Project& p : catalog.projects) {
    const std::string who = "project " + std::to_string(p.id);
    if (p.earliest_year > horizon.num_years())
      report.error(who, "earliest_year " + std::to_string(p.earliest_year) + " is beyond the horizon");
    if (p.latest_year && *p.latest_year > horizon.num_years())
      report.warn(who, "latest_year is beyond the horizon");
  }
  return report;
}

double ExpansionPlan::discounted_total() const {
  double sum = 0.0;
  for (const YearResult& y : years) sum += y.discount_factor * y.costs.total();
  return sum;
}

FixedDecisions fixed_decisions_for_year(const ProjectCatalog& catalog, int year,
                                        const std::map<int, double>& built) {
  FixedDecisions fixed;
  for (const Project& p : catalog.projects) {
    if (auto it = built.find(p.id); it != built.end()) {
      fixed[p.id] = it->second;
      continue;
    }
    const bool open = year >= p.earliest_year && (!p.latest_year || year <= *p.latest_year);
    if (!open)
      fixed[p.id] = 0.0;
    else if (p.kind == DecisionKind::obligatory)
      fixed[p.id] = 1.0;
  }
  return fixed;
}

YearlyModel build_year(const Instance& instance, int year, const FixedDecisions& fixed) {
  FormulationOptions options;
  options.demand_scale = instance.horizon.years.at(year - 1).demand_growth;
  options.annual_rate = instance.horizon.annual_rate;
  options.theta_max = instance.theta_max;
  return build_yearly_model(instance.system, instance.catalog, instance.time,
                            instance.scenarios_of(year), fixed, options);
}

namespace {

// Decision levels below this are treated as "not built".
constexpr double kBuildThreshold = 1e-6;

void summarize(YearResult& r, const YearlyModel& ym, const Instance& instance, int year) {
  const TimeGrid& grid = ym.grid;
  const ScenarioSet& scen = instance.scenarios_of(year);
  const Solution& sol = r.solution;
  std::vector<double> weight(grid.num_slots());
  for (int k = 0; k < grid.num_slots(); ++k) {
    const auto c = grid.coord(k);
    weight[k] = scen.scenarios[c.s].probability * instance.time.duration(c.t, c.d);
  }
  const auto energy = [&](const std::vector<VarId>& vars) {
    double e = 0.0;
    for (std::size_t k = 0; k < vars.size(); ++k) e += weight[k] * sol.value(vars[k]);
    return e;
  };
  for (const BusIndex& b : ym.index.bus) r.deficit_energy += energy(b.deficit);
  for (const SlackIndex& s : ym.index.reserve) r.reserve_shortfall += energy(s.slack);
  for (const SlackIndex& s : ym.index.generation_group) r.group_violation += energy(s.slack);
  for (std::size_t l = 0; l < ym.index.renewable.size(); ++l) {
    const RenewableIndex& ri = ym.index.renewable[l];
    const Profile& psi = scen.renewable.at(ri.id);
    const double x = sol.value(ri.x);
    for (int k = 0; k < grid.num_slots(); ++k)
      r.curtailed_energy += weight[k] * std::max(0.0, grid.hourly(psi, k) * x - sol.value(ri.g[k]));
  }
}

}  // namespace

namespace {

YearResult solve_one(const Instance& instance, int year, const FixedDecisions& fixed,
                     const SolverBackend& backend, const SolveConfig& solve) {
  auto ym = std::make_shared<YearlyModel>(build_year(instance, year, fixed));
  YearResult r;
  r.year = year;
  r.solution = backend.solve(ym->model, solve);
  if (!r.solution.has_primal()) throw PlanningError(year, r.solution.status, r.solution.message);
  r.costs = decompose_costs(*ym, r.solution.primal);
  r.discount_factor = std::pow(1.0 + instance.horizon.annual_rate, -(year - 1));
  summarize(r, *ym, instance, year);
  r.model = std::move(ym);
  return r;
}

}  // namespace

ExpansionPlan run_rolling_horizon(const Instance& instance, const PlannerConfig& config) {
  const EmbeddedBackend embedded;
  const SolverBackend& backend = config.backend ? *config.backend : embedded;
  ExpansionPlan plan;
  for (const Project& p : instance.catalog.projects) plan.decision_year[p.id] = std::nullopt;

  for (int year = 1; year <= instance.horizon.num_years(); ++year) {
    const FixedDecisions fixed = fixed_decisions_for_year(instance.catalog, year, plan.built_level);
    YearResult r = solve_one(instance, year, fixed, backend, config.solve);
    for (const auto& [pid, var] : r.model->index.x_by_project) {
      if (plan.built_level.count(pid)) continue;
      const double level = r.solution.value(var);
      if (level <= kBuildThreshold) continue;
      const Project* p = instance.catalog.find(pid);
      plan.built_level[pid] = p->kind == DecisionKind::continuous ? std::min(1.0, level) : 1.0;
      plan.decision_year[pid] = year;
      r.new_projects.push_back(pid);
    }
    plan.years.push_back(std::move(r));
  }
  return plan;
}

ExpansionPlan run_fixed_plan(const Instance& instance, const std::map<int, Build>& builds,
                             const PlannerConfig& config) {
  const EmbeddedBackend embedded;
  const SolverBackend& backend = config.backend ? *config.backend : embedded;
  ExpansionPlan plan;
  for (const Project& p : instance.catalog.projects) plan.decision_year[p.id] = std::nullopt;
  for (const auto& [pid, b] : builds)
    if (!instance.catalog.find(pid)) throw std::invalid_argument("build of unknown project " + std::to_string(pid));

  for (int year = 1; year <= instance.horizon.num_years(); ++year) {
    FixedDecisions fixed;
    for (const Project& p : instance.catalog.projects) {
      const auto it = builds.find(p.id);
      fixed[p.id] = it != builds.end() && it->second.year <= year ? it->second.level : 0.0;
    }
    YearResult r = solve_one(instance, year, fixed, backend, config.solve);
    for (const auto& [pid, b] : builds) {
      if (b.year != year || b.level <= kBuildThreshold) continue;
      plan.decision_year[pid] = year;
      plan.built_level[pid] = b.level;
      r.new_projects.push_back(pid);
    }
    plan.years.push_back(std::move(r));
  }
  return plan;
}

std::map<int, Build> builds_of(const ExpansionPlan& plan) {
  std::map<int, Build> out;
  for (const auto& [pid, year] : plan.decision_year)
    if (year) out[pid] = Build{*year, plan.built_level.at(pid)};
  return out;
}

}  // namespace gtep
