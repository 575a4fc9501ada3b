#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>
#include <unistd.h>

#include "gtep/error.hpp"
#include "gtep/io.hpp"

namespace fs = std::filesystem;
using namespace gtep;

namespace {

// One bus, a cheap candidate plant and an expensive existing one.
const char* kSmall = R"({
  "name": "small",
  "buses": [{"id": 1, "name": "main"}],
  "thermals": [
    {"id": 10, "name": "base", "bus": 1, "g_max": 50, "op_cost": 20},
    {"id": 11, "name": "peak", "bus": 1, "g_max": 30, "op_cost": 90}
  ],
  "demands": [{"bus": 1, "inelastic": [30, 30, 30, 30, 30, 30, 40, 50, 60, 60, 60, 60,
                                        60, 60, 60, 60, 60, 70, 70, 60, 50, 40, 35, 30],
               "deficit_cost": 1000}],
  "projects": [{"id": 1, "name": "base plant", "target": 10, "investment_cost": 2000000}],
  "horizon": {"annual_rate": 0.05, "years": [{"demand_growth": 1.0}, {"demand_growth": 1.2}]}
})";

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("gtep_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name) << text;
    return path_ / name;
  }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

Csv parse_csv(const std::string& text) {
  Csv c;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (first) {
      c.header = fields;
      first = false;
      continue;
    }
    std::vector<double> row;
    for (const std::string& x : fields) row.push_back(std::stod(x));
    c.rows.push_back(row);
  }
  return c;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + GTEP_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(ParseInstance, ReadsEntitiesAndHorizon) {
  const Instance in = parse_instance(kSmall);
  ASSERT_EQ(in.system.thermals.size(), 2u);
  EXPECT_EQ(in.system.thermals[1].id, 11);
  EXPECT_DOUBLE_EQ(in.system.thermals[1].op_cost, 90.0);
  ASSERT_EQ(in.catalog.projects.size(), 1u);
  EXPECT_EQ(in.catalog.projects[0].target_id, 10);
  EXPECT_EQ(in.horizon.num_years(), 2);
  EXPECT_DOUBLE_EQ(in.horizon.years[1].demand_growth, 1.2);
  EXPECT_EQ(in.system.demands[0].inelastic.values.size(), 24u);
  EXPECT_TRUE(in.validate().ok()) << in.validate().to_text();
}

TEST(ParseInstance, UnknownFieldNamesThePath) {
  try {
    (void)parse_instance(R"({"buses": [{"id": 1}, {"id": 2, "colour": "red"}]})");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("buses[1]"), std::string::npos) << what;
    EXPECT_NE(what.find("colour"), std::string::npos) << what;
  }
}

TEST(ParseInstance, SyntaxErrorReportsLine) {
  try {
    (void)parse_instance("{\n  \"buses\": [\n    {\"id\": 1,,}\n  ]\n}");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u) << e.what();
  }
}

TEST(ParseInstance, WrongTypeIsRejected) {
  EXPECT_THROW((void)parse_instance(R"({"thermals": [{"id": 1, "bus": 1, "g_max": "big"}]})"), ParseError);
}

TEST(ParseInstance, CsvProfilesResolveAgainstTheDocument) {
  TempDir dir;
  std::ostringstream csv;
  csv << "season,typical_day,hour,scenario,load\n";
  for (int s = 1; s <= 2; ++s)
    for (int h = 1; h <= 24; ++h) csv << "1,1," << h << "," << s << "," << (10 * s + h) << "\n";
  dir.write("p.csv", csv.str());
  const fs::path doc = dir.write("i.json", R"({
    "scenarios": [{"name": "a", "probability": 0.5}, {"name": "b", "probability": 0.5}],
    "buses": [{"id": 1}],
    "demands": [{"bus": 1, "inelastic": {"csv": "p.csv", "column": "load"}, "deficit_cost": 100}]
  })");
  const Instance in = load_instance(doc);
  const TimeGrid grid(in.time, 2);
  const Profile& p = in.system.demands[0].inelastic;
  EXPECT_DOUBLE_EQ(grid.hourly(p, grid.slot(0, 0, 0, 0)), 11.0);
  EXPECT_DOUBLE_EQ(grid.hourly(p, grid.slot(0, 0, 23, 1)), 44.0);
}

TEST(ParseInstance, MissingCsvIsAnIoError) {
  EXPECT_THROW((void)parse_instance(R"({"buses": [{"id": 1}],
    "demands": [{"bus": 1, "inelastic": {"csv": "nope.csv", "column": "x"}}]})",
                                    fs::temp_directory_path()),
               IoError);
}

TEST(Reports, CostsMatchTheDispatchFile) {
  const Instance in = parse_instance(kSmall);
  const ExpansionPlan plan = run_rolling_horizon(in);
  const Csv costs = parse_csv(costs_csv(plan));
  const Csv dispatch = parse_csv(dispatch_csv(plan, in));
  ASSERT_EQ(costs.rows.size(), 2u);
  for (const char* name : {"beta", "g_10", "g_11", "deficit_1", "price_1"})
    ASSERT_GE(dispatch.col(name), 0) << name;

  for (std::size_t y = 0; y < 2; ++y) {
    double generation = 0.0, deficit = 0.0;
    for (const auto& row : dispatch.rows) {
      if (row[0] != static_cast<double>(y + 1)) continue;
      const double beta = row[dispatch.col("beta")];
      generation += beta * (20 * row[dispatch.col("g_10")] + 90 * row[dispatch.col("g_11")]);
      deficit += beta * 1000 * row[dispatch.col("deficit_1")];
    }
    const auto& c = costs.rows[y];
    const double investment = plan.built_level.count(1) ? 2e6 : 0.0;
    EXPECT_NEAR(c[costs.col("generation")], generation, 1e-6 * generation);
    EXPECT_NEAR(c[costs.col("deficit")], deficit, 1e-6 * (1 + deficit));
    EXPECT_NEAR(c[costs.col("investment")], investment, 1e-6);
    EXPECT_NEAR(c[costs.col("total")], investment + generation + deficit, 1e-6 * generation);
    EXPECT_NEAR(c[costs.col("discount_factor")], std::pow(1.05, -static_cast<double>(y)), 1e-15);
  }
}

TEST(Reports, PlanJsonRoundTripsBuilds) {
  const Instance in = parse_instance(kSmall);
  const ExpansionPlan plan = run_rolling_horizon(in);
  const auto builds = parse_plan_builds(plan_json(plan, in));
  ASSERT_EQ(builds.count(1), 1u);
  EXPECT_EQ(builds.at(1).year, 1);
  EXPECT_DOUBLE_EQ(builds.at(1).level, 1.0);
  // the fixed-plan replay reproduces the planner's objectives
  const ExpansionPlan replay = run_fixed_plan(in, builds);
  for (std::size_t y = 0; y < plan.years.size(); ++y)
    EXPECT_NEAR(replay.years[y].solution.objective, plan.years[y].solution.objective,
                1e-9 * plan.years[y].solution.objective);
}

TEST(Reports, PricesAreDualsPerUnitWeight) {
  const Instance in = parse_instance(kSmall);
  const ExpansionPlan plan = run_rolling_horizon(in);
  const Csv dispatch = parse_csv(dispatch_csv(plan, in));
  // the marginal unit sets the price: base plant, peaker, or deficit
  for (const auto& row : dispatch.rows) {
    const double served = row[dispatch.col("g_10")] + row[dispatch.col("g_11")];
    const double price = row[dispatch.col("price_1")];
    if (row[dispatch.col("deficit_1")] > 1e-6)
      EXPECT_NEAR(price, 1000.0, 1e-6);
    else if (served < 50 - 1e-6)
      EXPECT_NEAR(price, 20.0, 1e-6);
    else if (served > 50 + 1e-6)
      EXPECT_NEAR(price, 90.0, 1e-6);
  }
}

TEST(Reports, FormatNumber) {
  EXPECT_EQ(format_number(0.0), "0");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(3.0), "3");
}

TEST(Cli, ValidateReportsOk) {
  TempDir dir;
  const fs::path doc = dir.write("i.json", kSmall);
  EXPECT_EQ(run_cli("validate \"" + doc.string() + "\"", dir.path() / "log"), 0);
  EXPECT_EQ(slurp(dir.path() / "log"), "ok\n");
}

TEST(Cli, ValidationErrorsExitWithOne) {
  TempDir dir;
  const fs::path missing_bus = dir.write("a.json", R"({"buses": [{"id": 1}],
    "thermals": [{"id": 10, "bus": 7, "g_max": 5, "op_cost": 1}]})");
  EXPECT_EQ(run_cli("validate \"" + missing_bus.string() + "\"", dir.path() / "log"), 1);
  EXPECT_NE(slurp(dir.path() / "log").find("thermal 10"), std::string::npos) << slurp(dir.path() / "log");

  const fs::path bad_probabilities = dir.write("b.json", R"({"buses": [{"id": 1}],
    "scenarios": [{"name": "a", "probability": 0.5}, {"name": "b", "probability": 0.4}]})");
  EXPECT_EQ(run_cli("validate \"" + bad_probabilities.string() + "\"", dir.path() / "log"), 1);

  const fs::path syntax = dir.write("c.json", "{\"buses\": [");
  EXPECT_EQ(run_cli("plan \"" + syntax.string() + "\" -o \"" + (dir.path() / "out").string() + "\"",
                    dir.path() / "log"),
            1);
}

TEST(Cli, UnreadableInstanceExitsWithThree) {
  TempDir dir;
  EXPECT_EQ(run_cli("validate \"" + (dir.path() / "absent.json").string() + "\"", dir.path() / "log"), 3);
}

TEST(Cli, PlanWithoutCandidatesWritesAnEmptyPlan) {
  TempDir dir;
  const fs::path doc = dir.write("i.json", R"({
    "buses": [{"id": 1}],
    "thermals": [{"id": 10, "bus": 1, "g_max": 50, "op_cost": 20}],
    "demands": [{"bus": 1, "inelastic": 25, "deficit_cost": 1000}]
  })");
  const fs::path out = dir.path() / "out";
  ASSERT_EQ(run_cli("plan \"" + doc.string() + "\" -o \"" + out.string() + "\"", dir.path() / "log"), 0)
      << slurp(dir.path() / "log");
  EXPECT_TRUE(parse_plan_builds(slurp(out / "plan.json")).empty());
  const Csv costs = parse_csv(slurp(out / "costs.csv"));
  ASSERT_EQ(costs.rows.size(), 1u);
  EXPECT_NEAR(costs.rows[0][costs.col("generation")], 365.0 * 24 * 25 * 20, 1e-6);
}

TEST(Cli, PlanIsDeterministic) {
  TempDir dir;
  const fs::path doc = dir.write("i.json", kSmall);
  for (const char* sub : {"a", "b"})
    ASSERT_EQ(run_cli("plan \"" + doc.string() + "\" -o \"" + (dir.path() / sub).string() + "\"",
                      dir.path() / "log"),
              0);
  for (const char* file : {"plan.json", "costs.csv", "dispatch.csv", "hydro.csv"})
    EXPECT_EQ(slurp(dir.path() / "a" / file), slurp(dir.path() / "b" / file)) << file;
}

TEST(Cli, ExportWritesBothFormats) {
  TempDir dir;
  const fs::path doc = dir.write("i.json", kSmall);
  ASSERT_EQ(run_cli("export \"" + doc.string() + "\" --year 2 -o \"" + dir.path().string() + "\"",
                    dir.path() / "log"),
            0);
  const MilpModel m = parse_mps(slurp(dir.path() / "year_2.mps"));
  EXPECT_EQ(m.num_binaries(), 1u);
  EXPECT_NE(slurp(dir.path() / "year_2.lp").find("Minimize"), std::string::npos);
  EXPECT_EQ(run_cli("export \"" + doc.string() + "\" --year 3 -o \"" + dir.path().string() + "\"",
                    dir.path() / "log"),
            1);
}

TEST(Cli, DispatchWithBuildList) {
  TempDir dir;
  const fs::path doc = dir.write("i.json", kSmall);
  const fs::path out = dir.path() / "out";
  ASSERT_EQ(run_cli("dispatch \"" + doc.string() + "\" --build 1 -o \"" + out.string() + "\"", dir.path() / "log"), 0)
      << slurp(dir.path() / "log");
  const Csv costs = parse_csv(slurp(out / "costs.csv"));
  EXPECT_NEAR(costs.rows[0][costs.col("investment")], 2e6, 1e-6);
  EXPECT_EQ(run_cli("dispatch \"" + doc.string() + "\" --build 9 -o \"" + out.string() + "\"", dir.path() / "log"), 1);
}

TEST(Reports, HydroViolationsMatchTheHydroFile) {
  // 10 hm3 of inflow against a 50 hm3 turbining floor: 40 hm3 short
  const Instance in = parse_instance(R"({
    "buses": [{"id": 1}],
    "thermals": [{"id": 10, "bus": 1, "g_max": 50, "op_cost": 20}],
    "hydros": [{"id": 20, "bus": 1, "v_max": 100, "u_max": 100, "u_min": 50, "rho": 1, "g_max": 10,
                "inflow": 10, "penalty_turbining": 3, "om_cost": 0.5}],
    "demands": [{"bus": 1, "inelastic": 20, "deficit_cost": 1000}]
  })");
  const ExpansionPlan plan = run_rolling_horizon(in);
  const Csv hydro = parse_csv(hydro_csv(plan, in));
  const Csv costs = parse_csv(costs_csv(plan));
  const Csv dispatch = parse_csv(dispatch_csv(plan, in));
  double violation = 0.0;
  for (const auto& row : hydro.rows) violation += row[hydro.col("weight")] * 3 * row[hydro.col("du")];
  double generation = 0.0;
  for (const auto& row : dispatch.rows)
    generation += row[dispatch.col("beta")] * (20 * row[dispatch.col("g_10")] + 0.5 * row[dispatch.col("g_20")]);
  EXPECT_NEAR(violation, 120.0, 1e-6);
  EXPECT_NEAR(costs.rows[0][costs.col("violation")], violation, 1e-6);
  EXPECT_NEAR(costs.rows[0][costs.col("generation")], generation, 1e-6 * generation);
  EXPECT_NEAR(hydro.rows[0][hydro.col("turbined")], 10.0, 1e-6);
}
