// gtep: expansion planning command line.
//
// Exit codes: 0 success, 1 invalid input or configuration, 2 solve failure,
// 3 file I/O failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "gtep/error.hpp"
#include "gtep/io.hpp"
#include "gtep/planner.hpp"
#include "gtep/solver.hpp"

namespace fs = std::filesystem;
using namespace gtep;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kSolveFailure = 2, kIoFailure = 3 };

struct SolverFlags {
  std::string backend = "embedded";
  std::string external_command;
  bool keep_solver_files = false;
  SolveConfig solve;

  void add(CLI::App* cmd) {
    cmd->add_option("--backend", backend, "embedded or external")
        ->check(CLI::IsMember({"embedded", "external"}))
        ->capture_default_str();
    cmd->add_option("--external-command", external_command,
                    std::string("external solver template with {mps} {sol} {gap}; default: $") +
                        kExternalSolverEnv);
    cmd->add_flag("--keep-solver-files", keep_solver_files, "keep the external solver's work files");
    cmd->add_option("--gap", solve.mip_gap, "relative MIP gap")->capture_default_str();
    cmd->add_option("--node-limit", solve.node_limit, "branch-and-bound node limit")->capture_default_str();
    cmd->add_option("--time-limit", solve.time_limit_seconds, "seconds per yearly solve");
    cmd->add_option("--feasibility-tol", solve.feasibility_tolerance)->capture_default_str();
    cmd->add_option("--optimality-tol", solve.optimality_tolerance)->capture_default_str();
  }

  // Throws ConfigError.
  std::unique_ptr<SolverBackend> make() const {
    solve.validate();
    if (backend == "embedded") return std::make_unique<EmbeddedBackend>();
    std::string command = external_command;
    if (command.empty())
      if (const char* env = std::getenv(kExternalSolverEnv)) command = env;
    if (command.empty())
      throw ConfigError(std::string("external backend needs --external-command or $") + kExternalSolverEnv);
    ExternalSolverConfig cfg;
    cfg.command = command;
    cfg.keep_files = keep_solver_files;
    return std::make_unique<ExternalBackend>(cfg);
  }
};

Instance load_valid(const std::string& path) {
  Instance in = load_instance(path);
  const ValidationReport r = in.validate();
  if (!r.findings.empty()) std::cerr << r.to_text();
  if (!r.ok()) throw ConfigError("instance has " + std::to_string(r.error_count()) + " validation error(s)");
  return in;
}

void write_reports(const fs::path& dir, const ExpansionPlan& plan, const Instance& in) {
  write_text_file(dir / "plan.json", plan_json(plan, in));
  write_text_file(dir / "costs.csv", costs_csv(plan));
  write_text_file(dir / "dispatch.csv", dispatch_csv(plan, in));
  write_text_file(dir / "hydro.csv", hydro_csv(plan, in));
}

void write_models(const fs::path& dir, const ExpansionPlan& plan) {
  for (const YearResult& y : plan.years) {
    const std::string stem = "year_" + std::to_string(y.year);
    write_text_file(dir / (stem + ".mps"), export_mps(y.model->model).text);
    write_text_file(dir / (stem + ".lp"), export_lp(y.model->model));
  }
}

void print_summary(const ExpansionPlan& plan) {
  for (const YearResult& y : plan.years) {
    std::cout << "year " << y.year << ": " << to_string(y.solution.status)
              << ", objective " << format_number(y.solution.objective);
    if (!y.new_projects.empty()) {
      std::cout << ", new projects";
      for (int p : y.new_projects) std::cout << " " << p;
    }
    std::cout << "\n";
  }
  std::cout << "discounted total " << format_number(plan.discounted_total()) << "\n";
}

template <class Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const PlanningError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolveFailure;
  } catch (const ExternalSolverError& e) {
    std::cerr << "error: " << e.what() << "\n" << e.log() << "\n";
    return kSolveFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generation and transmission expansion planning"};
  app.require_subcommand(1);

  std::string instance_path, out_dir = ".", plan_path;
  int year = 1;
  bool export_models = false;
  std::vector<int> build_ids;
  SolverFlags solver;

  auto* validate = app.add_subcommand("validate", "check an instance and report findings");
  validate->add_option("instance", instance_path, "instance JSON")->required();

  auto* plan = app.add_subcommand("plan", "rolling-horizon expansion plan");
  plan->add_option("instance", instance_path, "instance JSON")->required();
  plan->add_option("-o,--out", out_dir, "output directory")->capture_default_str();
  plan->add_flag("--export-models", export_models, "also write year_<y>.mps and year_<y>.lp");
  solver.add(plan);

  auto* dispatch = app.add_subcommand("dispatch", "operation only, with every investment fixed");
  dispatch->add_option("instance", instance_path, "instance JSON")->required();
  dispatch->add_option("-o,--out", out_dir, "output directory")->capture_default_str();
  auto* plan_opt = dispatch->add_option("--plan", plan_path, "plan.json with the build decisions");
  dispatch->add_option("--build", build_ids, "projects built from year 1")->excludes(plan_opt);
  solver.add(dispatch);

  auto* exp = app.add_subcommand("export", "write one year's model as MPS and LP");
  exp->add_option("instance", instance_path, "instance JSON")->required();
  exp->add_option("--year", year, "planning year")->capture_default_str()->check(CLI::PositiveNumber);
  exp->add_option("--plan", plan_path, "fix decisions from plan.json instead of leaving them free");
  exp->add_option("-o,--out", out_dir, "output directory")->capture_default_str();

  std::string profiles_path, demand_col = "demand", renewable_col;
  std::vector<int> month_to_season(12, 1);
  int k = 2;
  std::uint64_t seed = 0;
  std::string out_file;
  auto* suggest = app.add_subcommand("suggest-days", "cluster calendar days into typical days");
  suggest->add_option("profiles", profiles_path, "CSV with day, hour and profile columns")->required();
  suggest->add_option("--demand-column", demand_col)->capture_default_str();
  suggest->add_option("--renewable-column", renewable_col, "subtracted from demand when given");
  suggest->add_option("--month-to-season", month_to_season, "12 season numbers, 1-based")
      ->expected(12)
      ->delimiter(',');
  suggest->add_option("-k", k, "typical days per season")->capture_default_str()->check(CLI::PositiveNumber);
  suggest->add_option("--seed", seed)->capture_default_str();
  suggest->add_option("-o,--out", out_file, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  if (*validate) {
    return guarded([&] {
      const Instance in = load_instance(instance_path);
      const ValidationReport r = in.validate();
      std::cout << (r.findings.empty() ? std::string("ok\n") : r.to_text());
      return r.ok() ? kOk : kInvalid;
    });
  }
  if (*plan) {
    return guarded([&] {
      const Instance in = load_valid(instance_path);
      const auto backend = solver.make();
      const ExpansionPlan p = run_rolling_horizon(in, PlannerConfig{solver.solve, backend.get()});
      write_reports(out_dir, p, in);
      if (export_models) write_models(out_dir, p);
      print_summary(p);
      return kOk;
    });
  }
  if (*dispatch) {
    return guarded([&] {
      const Instance in = load_valid(instance_path);
      std::map<int, Build> builds;
      if (!plan_path.empty()) {
        builds = parse_plan_builds(read_text_file(plan_path));
      } else {
        for (int id : build_ids) builds[id] = Build{1, 1.0};
      }
      const auto backend = solver.make();
      const ExpansionPlan p = run_fixed_plan(in, builds, PlannerConfig{solver.solve, backend.get()});
      write_reports(out_dir, p, in);
      print_summary(p);
      return kOk;
    });
  }
  if (*exp) {
    return guarded([&] {
      const Instance in = load_valid(instance_path);
      if (year > in.horizon.num_years())
        throw ConfigError("year " + std::to_string(year) + " is beyond the " +
                          std::to_string(in.horizon.num_years()) + "-year horizon");
      FixedDecisions fixed;
      if (!plan_path.empty()) {
        for (const Project& p : in.catalog.projects) fixed[p.id] = 0.0;
        for (const auto& [pid, b] : parse_plan_builds(read_text_file(plan_path)))
          if (b.year <= year) fixed[pid] = b.level;
      } else {
        fixed = fixed_decisions_for_year(in.catalog, year, {});
      }
      const YearlyModel ym = build_year(in, year, fixed);
      const std::string stem = "year_" + std::to_string(year);
      write_text_file(fs::path(out_dir) / (stem + ".mps"), export_mps(ym.model).text);
      write_text_file(fs::path(out_dir) / (stem + ".lp"), export_lp(ym.model));
      for (const std::string& w : ym.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << ym.model.num_variables() << " columns, " << ym.model.num_constraints() << " rows, "
                << ym.model.num_binaries() << " binaries\n";
      return kOk;
    });
  }
  if (*suggest) {
    return guarded([&] {
      std::array<int, 12> m2s{};
      for (int m = 0; m < 12; ++m) m2s[m] = month_to_season[m] - 1;
      const DailyProfiles demand = read_daily_profiles(profiles_path, demand_col);
      DailyProfiles renewable(kDaysInYear);
      if (!renewable_col.empty()) renewable = read_daily_profiles(profiles_path, renewable_col);
      const std::string text = day_assignment_json(suggest_typical_days(demand, renewable, m2s, k, seed));
      if (out_file.empty())
        std::cout << text;
      else
        write_text_file(out_file, text);
      return kOk;
    });
  }
  return kInvalid;
}
