#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gtep {

/// Hourly or seasonal data series.
///
/// Hourly series hold 1 value (constant), 24 values (one per hour of the day,
/// repeated), or one value per grid slot. Seasonal series hold 1 value, one
/// per season, or one per (season, scenario). See TimeGrid for slot order.
struct Profile {
  std::vector<double> values;

  Profile() = default;
  Profile(double constant) : values{constant} {}  // NOLINT: implicit on purpose
  explicit Profile(std::vector<double> v) : values(std::move(v)) {}

  [[nodiscard]] bool empty() const { return values.empty(); }
  [[nodiscard]] double max() const;
  [[nodiscard]] double min() const;
};

struct Area {
  int id = 0;
  std::string name;
  std::optional<double> import_min, import_max;  // MW
  std::optional<double> export_min, export_max;
};

struct Bus {
  int id = 0;
  std::string name;
  std::optional<int> area_id;
};

struct ThermalPlant {
  int id = 0;
  std::string name;
  int bus_id = 0;
  double g_min = 0.0;  // MW
  double g_max = 0.0;
  double ramp_up = std::numeric_limits<double>::infinity();  // MW/h, inf: no rows
  double ramp_down = std::numeric_limits<double>::infinity();
  double op_cost = 0.0;       // $/MWh
  double startup_cost = 0.0;  // $/start
  bool has_commitment = false;
};

struct HydroPlant {
  int id = 0;
  std::string name;
  int bus_id = 0;
  double v_min = 0.0, v_max = 0.0;  // hm3
  double u_min = 0.0, u_max = 0.0;  // hm3/season
  double q_min = 0.0;               // hm3/season, total outflow
  std::optional<double> q_max;
  double rho = 1.0;    // MWh/hm3
  double g_max = 0.0;  // MW
  std::vector<int> upstream;
  double om_cost = 0.0;
  double penalty_storage = 0.0;  // $/hm3
  double penalty_turbining = 0.0;
  double penalty_outflow = 0.0;
  std::optional<double> initial_storage;  // empty: free, tied to final storage
};

struct RenewablePlant {
  int id = 0;
  std::string name;
  int bus_id = 0;
  double capacity = 0.0;  // MW; profiles are MW and must not exceed it
};

struct Battery {
  int id = 0;
  std::string name;
  int bus_id = 0;
  double v_max = 0.0;       // MWh
  double charge_max = 0.0;  // MW
  double discharge_max = 0.0;
  double eta_charge = 1.0;
  double eta_discharge = 1.0;
};

enum class LineKind { circuit, dc_link };

struct TransmissionLine {
  int id = 0;
  std::string name;
  int from_bus = 0;
  int to_bus = 0;
  LineKind kind = LineKind::circuit;
  double f_max_fwd = 0.0;  // MW
  double f_max_bwd = 0.0;
  double susceptance = 0.0;  // MW/rad
};

struct ElasticSegment {
  double price = 0.0;  // $/MWh
  Profile max_quantity;  // MW, hourly
};

struct DemandSpec {
  int bus_id = 0;
  Profile inelastic;  // MW, hourly
  std::vector<ElasticSegment> elastic;
  double deficit_cost = 0.0;
};

enum class BoundKind { min, max };

struct GenerationGroup {
  int id = 0;
  std::string name;
  std::vector<int> thermal_ids;
  std::vector<int> hydro_ids;
  BoundKind kind = BoundKind::min;
  double threshold = 0.0;  // MW
  double penalty = 0.0;    // $/MWh
};

struct ReserveRequirement {
  int id = 0;
  std::string name;
  std::vector<int> thermal_ids;
  std::vector<int> hydro_ids;
  std::vector<int> battery_ids;
  Profile requirement;  // MW, hourly
  double penalty = 0.0;
};

struct PowerSystem {
  std::vector<Area> areas;
  std::vector<Bus> buses;
  std::vector<ThermalPlant> thermals;
  std::vector<HydroPlant> hydros;
  std::vector<RenewablePlant> renewables;
  std::vector<Battery> batteries;
  std::vector<TransmissionLine> lines;
  std::vector<DemandSpec> demands;
  std::vector<GenerationGroup> generation_groups;
  std::vector<ReserveRequirement> reserves;
};

enum class AssetKind { thermal, hydro, renewable, battery, line };
[[nodiscard]] const char* to_string(AssetKind k);

/// Position of an asset in its PowerSystem vector.
struct AssetRef {
  AssetKind kind = AssetKind::thermal;
  std::size_t index = 0;
};

/// Asset id -> position. Throws std::invalid_argument on duplicate ids.
[[nodiscard]] std::map<int, AssetRef> asset_table(const PowerSystem& system);

enum class DecisionKind { binary, continuous, obligatory };

struct Project {
  int id = 0;
  std::string name;
  int target_id = 0;  // asset id
  DecisionKind kind = DecisionKind::binary;
  double investment_cost = 0.0;  // $ per yearly problem, used when capex is absent
  std::optional<double> capex;   // annualized by the planner over `lifetime`
  int lifetime = 0;
  int earliest_year = 1;
  std::optional<int> latest_year;
};

struct WeightedProject {
  int project_id = 0;
  double weight = 0.0;
};

struct CapacityGroup {
  std::string name;
  std::vector<WeightedProject> terms;
  std::optional<double> lower, upper;
};

struct ProjectCatalog {
  std::vector<Project> projects;
  std::vector<std::pair<int, int>> precedence;     // (first, second): second needs first
  std::vector<std::vector<int>> exclusivity;       // at most one of each set
  std::vector<std::pair<int, int>> association;    // built together or not at all
  std::vector<CapacityGroup> capacity_groups;

  [[nodiscard]] const Project* find(int project_id) const;
  [[nodiscard]] const Project* find_by_target(int asset_id) const;
};

struct Scenario {
  std::string name;
  double probability = 1.0;
};

/// Scenario data. Inflows are seasonal (hm3/season), renewable profiles
/// hourly (MW).
struct ScenarioSet {
  std::vector<Scenario> scenarios{Scenario{"base", 1.0}};
  std::map<int, Profile> inflows;    // hydro id ->
  std::map<int, Profile> renewable;  // renewable id ->

  [[nodiscard]] std::size_t size() const { return scenarios.size(); }
};

enum class Severity { error, warning };

struct Finding {
  Severity severity = Severity::error;
  std::string entity;  // e.g. "thermal 3"
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;

  [[nodiscard]] bool ok() const;
  [[nodiscard]] std::size_t error_count() const;
  void error(std::string entity, std::string message);
  void warn(std::string entity, std::string message);
  [[nodiscard]] std::string to_text() const;
};

class TimeStructure;

/// Checks every invariant of the instance; never throws on bad data.
/// `time` may be null, in which case profile lengths are not checked.
[[nodiscard]] ValidationReport validate_system(const PowerSystem& system,
                                               const ProjectCatalog& catalog,
                                               const ScenarioSet& scenarios,
                                               const TimeStructure* time = nullptr);

/// Hydro ids ordered so that every plant follows its upstream plants.
/// Ties are broken by ascending id. Throws std::invalid_argument naming a
/// "hydro cascade cycle" when the upstream graph is cyclic.
[[nodiscard]] std::vector<int> topological_order(const std::vector<HydroPlant>& hydros);

}  // namespace gtep
