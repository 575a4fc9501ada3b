#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gtep {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarType { continuous, binary };
enum class Sense { less_equal, equal, greater_equal };

/// Handle to a model column. Default-constructed handles are invalid.
struct VarId {
  int index = -1;
  [[nodiscard]] bool valid() const { return index >= 0; }
  friend bool operator==(VarId, VarId) = default;
};

/// Handle to a model row.
struct RowId {
  int index = -1;
  [[nodiscard]] bool valid() const { return index >= 0; }
  friend bool operator==(RowId, RowId) = default;
};

struct Term {
  VarId var;
  double coef = 0.0;
};

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  VarType type = VarType::continuous;
};

struct Constraint {
  std::string name;
  std::vector<std::pair<int, double>> row;  // (column, coefficient), sorted, merged
  Sense sense = Sense::less_equal;
  double rhs = 0.0;
};

/// Sparse MILP container: minimize c'x + offset subject to rows and bounds.
///
/// Rows and columns keep insertion order, which is also export order. The
/// model is single-writer during construction; `seal()` freezes it.
class MilpModel {
 public:
  MilpModel() = default;
  explicit MilpModel(std::string name) : name_(std::move(name)) {}

  VarId add_variable(std::string name, double lower, double upper,
                     VarType type = VarType::continuous, double cost = 0.0);
  VarId add_binary(std::string name, double cost = 0.0) {
    return add_variable(std::move(name), 0.0, 1.0, VarType::binary, cost);
  }

  /// Duplicate columns within `terms` are summed; exact zeros are dropped.
  RowId add_constraint(std::string name, std::span<const Term> terms,
                       Sense sense, double rhs);
  RowId add_constraint(std::string name, std::initializer_list<Term> terms,
                       Sense sense, double rhs) {
    return add_constraint(std::move(name),
                          std::span<const Term>(terms.begin(), terms.size()),
                          sense, rhs);
  }

  void set_cost(VarId v, double cost);
  void add_cost(VarId v, double cost);
  void set_objective_offset(double offset);
  void set_bounds(VarId v, double lower, double upper);

  void seal() { sealed_ = true; }
  [[nodiscard]] bool sealed() const { return sealed_; }

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] std::size_t num_variables() const { return vars_.size(); }
  [[nodiscard]] std::size_t num_constraints() const { return rows_.size(); }
  [[nodiscard]] std::size_t num_nonzeros() const;
  [[nodiscard]] std::size_t num_binaries() const;

  [[nodiscard]] const Variable& variable(VarId v) const { return vars_.at(v.index); }
  [[nodiscard]] const Variable& variable(int j) const { return vars_.at(j); }
  [[nodiscard]] const Constraint& constraint(RowId r) const { return rows_.at(r.index); }
  [[nodiscard]] const Constraint& constraint(int i) const { return rows_.at(i); }
  [[nodiscard]] const std::vector<Variable>& variables() const { return vars_; }
  [[nodiscard]] const std::vector<Constraint>& constraints() const { return rows_; }
  [[nodiscard]] const std::vector<double>& costs() const { return cost_; }
  [[nodiscard]] double cost(VarId v) const { return cost_.at(v.index); }
  [[nodiscard]] double objective_offset() const { return offset_; }

  [[nodiscard]] VarId find_variable(std::string_view name) const;
  [[nodiscard]] RowId find_constraint(std::string_view name) const;

  /// Copy of this model without the listed rows (used for relaxation checks).
  [[nodiscard]] MilpModel without_constraints(std::span<const RowId> drop) const;

  /// Objective value c'x + offset.
  [[nodiscard]] double evaluate_objective(std::span<const double> x) const;
  /// Row activity a_i'x.
  [[nodiscard]] double row_activity(int row, std::span<const double> x) const;

 private:
  void require_open() const;
  void check_var(VarId v) const;

  std::string name_ = "gtep";
  std::vector<Variable> vars_;
  std::vector<double> cost_;
  std::vector<Constraint> rows_;
  double offset_ = 0.0;
  bool sealed_ = false;
  std::unordered_map<std::string, int> var_lookup_;
  std::unordered_map<std::string, int> row_lookup_;
};

enum class SolveStatus {
  optimal,
  infeasible,
  unbounded,
  gap_limit,  // node or time limit reached with an incumbent; gap reported
  no_solution,  // limit reached without any incumbent
  numerical_failure,
};

[[nodiscard]] std::string_view to_string(SolveStatus s);

struct Solution {
  SolveStatus status = SolveStatus::no_solution;
  std::vector<double> primal;
  std::vector<double> duals;  // d(objective)/d(rhs) per row
  double objective = 0.0;
  double best_bound = -kInf;
  double gap = kInf;  // relative gap |obj - bound| / max(1, |obj|)
  long iterations = 0;
  long nodes = 0;
  std::string message;

  [[nodiscard]] bool has_primal() const {
    return status == SolveStatus::optimal || status == SolveStatus::gap_limit;
  }
  [[nodiscard]] double value(VarId v) const { return primal.at(v.index); }
  [[nodiscard]] double dual(RowId r) const { return duals.at(r.index); }
};

/// Largest absolute-plus-relative violation of rows and bounds by `x`:
/// max over items of violation / (1 + |bound|). Integrality is checked when
/// `check_integrality` is set.
[[nodiscard]] double max_violation(const MilpModel& m, std::span<const double> x,
                                   bool check_integrality = false);

// ---------------------------------------------------------------------------
// Text formats

/// Result of MPS export. `column_names`/`row_names` are the names that appear
/// in the file (shortened names for anything that does not fit the fixed
/// format), indexed like the model.
struct MpsText {
  std::string text;
  std::vector<std::string> column_names;
  std::vector<std::string> row_names;
};

inline constexpr std::size_t kMpsNameLimit = 8;

[[nodiscard]] MpsText export_mps(const MilpModel& m);
[[nodiscard]] MilpModel parse_mps(std::string_view text);
[[nodiscard]] std::string export_lp(const MilpModel& m);

/// Deterministic short name used when a name does not fit the MPS field.
[[nodiscard]] std::string mps_short_name(std::string_view name, int salt);

/// Structural equality: names ignored, everything else bit-exact.
[[nodiscard]] bool structurally_equal(const MilpModel& a, const MilpModel& b,
                                      std::string* why = nullptr);

}  // namespace gtep
