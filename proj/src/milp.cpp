#include "gtep/milp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace gtep {

void MilpModel::require_open() const {
  if (sealed_) throw std::logic_error("model '" + name_ + "' is sealed");
}

void MilpModel::check_var(VarId v) const {
  if (v.index < 0 || static_cast<std::size_t>(v.index) >= vars_.size())
    throw std::out_of_range("unknown variable handle " + std::to_string(v.index));
}

VarId MilpModel::add_variable(std::string name, double lower, double upper,
                              VarType type, double cost) {
  require_open();
  if (std::isnan(lower) || std::isnan(upper) || lower > upper)
    throw std::invalid_argument("variable '" + name + "': invalid bounds [" +
                                std::to_string(lower) + ", " + std::to_string(upper) + "]");
  if (type == VarType::binary && (lower < 0.0 || upper > 1.0))
    throw std::invalid_argument("binary variable '" + name + "' bounds outside [0,1]");
  if (!std::isfinite(cost))
    throw std::invalid_argument("variable '" + name + "': non-finite cost");
  const int index = static_cast<int>(vars_.size());
  auto [it, inserted] = var_lookup_.emplace(name, index);
  if (!inserted) throw std::invalid_argument("duplicate variable name '" + name + "'");
  vars_.push_back({std::move(name), lower, upper, type});
  cost_.push_back(cost);
  return VarId{index};
}

RowId MilpModel::add_constraint(std::string name, std::span<const Term> terms,
                                Sense sense, double rhs) {
  require_open();
  if (!std::isfinite(rhs))
    throw std::invalid_argument("constraint '" + name + "': non-finite rhs");
  std::vector<std::pair<int, double>> row;
  row.reserve(terms.size());
  for (const Term& t : terms) {
    check_var(t.var);
    if (!std::isfinite(t.coef))
      throw std::invalid_argument("constraint '" + name + "': non-finite coefficient");
    row.emplace_back(t.var.index, t.coef);
  }
  std::sort(row.begin(), row.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<int, double>> merged;
  merged.reserve(row.size());
  for (const auto& [col, coef] : row) {
    if (!merged.empty() && merged.back().first == col)
      merged.back().second += coef;
    else
      merged.emplace_back(col, coef);
  }
  std::erase_if(merged, [](const auto& e) { return e.second == 0.0; });

  const int index = static_cast<int>(rows_.size());
  auto [it, inserted] = row_lookup_.emplace(name, index);
  if (!inserted) throw std::invalid_argument("duplicate constraint name '" + name + "'");
  rows_.push_back({std::move(name), std::move(merged), sense, rhs});
  return RowId{index};
}

void MilpModel::set_cost(VarId v, double cost) {
  require_open();
  check_var(v);
  cost_[v.index] = cost;
}

void MilpModel::add_cost(VarId v, double cost) {
  require_open();
  check_var(v);
  cost_[v.index] += cost;
}

void MilpModel::set_objective_offset(double offset) {
  require_open();
  offset_ = offset;
}

void MilpModel::set_bounds(VarId v, double lower, double upper) {
  require_open();
  check_var(v);
  Variable& var = vars_[v.index];
  if (lower > upper || (var.type == VarType::binary && (lower < 0.0 || upper > 1.0)))
    throw std::invalid_argument("variable '" + var.name + "': invalid bounds");
  var.lower = lower;
  var.upper = upper;
}

std::size_t MilpModel::num_nonzeros() const {
  std::size_t nnz = 0;
  for (const auto& r : rows_) nnz += r.row.size();
  return nnz;
}

std::size_t MilpModel::num_binaries() const {
  return static_cast<std::size_t>(std::count_if(
      vars_.begin(), vars_.end(), [](const Variable& v) { return v.type == VarType::binary; }));
}

VarId MilpModel::find_variable(std::string_view name) const {
  auto it = var_lookup_.find(std::string(name));
  return it == var_lookup_.end() ? VarId{} : VarId{it->second};
}

RowId MilpModel::find_constraint(std::string_view name) const {
  auto it = row_lookup_.find(std::string(name));
  return it == row_lookup_.end() ? RowId{} : RowId{it->second};
}

MilpModel MilpModel::without_constraints(std::span<const RowId> drop) const {
  std::unordered_set<int> dropped;
  for (RowId r : drop) dropped.insert(r.index);
  MilpModel out(name_);
  out.vars_ = vars_;
  out.cost_ = cost_;
  out.offset_ = offset_;
  out.var_lookup_ = var_lookup_;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (dropped.contains(static_cast<int>(i))) continue;
    out.row_lookup_.emplace(rows_[i].name, static_cast<int>(out.rows_.size()));
    out.rows_.push_back(rows_[i]);
  }
  out.sealed_ = sealed_;
  return out;
}

double MilpModel::evaluate_objective(std::span<const double> x) const {
  double obj = offset_;
  for (std::size_t j = 0; j < cost_.size(); ++j) obj += cost_[j] * x[j];
  return obj;
}

double MilpModel::row_activity(int row, std::span<const double> x) const {
  double a = 0.0;
  for (const auto& [col, coef] : rows_.at(row).row) a += coef * x[col];
  return a;
}

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::gap_limit: return "gap_limit";
    case SolveStatus::no_solution: return "no_solution";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

double max_violation(const MilpModel& m, std::span<const double> x, bool check_integrality) {
  double worst = 0.0;
  for (std::size_t j = 0; j < m.num_variables(); ++j) {
    const Variable& v = m.variable(static_cast<int>(j));
    if (x[j] < v.lower) worst = std::max(worst, (v.lower - x[j]) / (1.0 + std::abs(v.lower)));
    if (x[j] > v.upper) worst = std::max(worst, (x[j] - v.upper) / (1.0 + std::abs(v.upper)));
    if (check_integrality && v.type == VarType::binary)
      worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
  }
  for (std::size_t i = 0; i < m.num_constraints(); ++i) {
    const Constraint& c = m.constraint(static_cast<int>(i));
    const double a = m.row_activity(static_cast<int>(i), x);
    const double scale = 1.0 + std::abs(c.rhs);
    if (c.sense != Sense::greater_equal && a > c.rhs) worst = std::max(worst, (a - c.rhs) / scale);
    if (c.sense != Sense::less_equal && a < c.rhs) worst = std::max(worst, (c.rhs - a) / scale);
  }
  return worst;
}

bool structurally_equal(const MilpModel& a, const MilpModel& b, std::string* why) {
  auto fail = [&](std::string msg) {
    if (why) *why = std::move(msg);
    return false;
  };
  if (a.num_variables() != b.num_variables()) return fail("column count differs");
  if (a.num_constraints() != b.num_constraints()) return fail("row count differs");
  if (a.objective_offset() != b.objective_offset()) return fail("objective offset differs");
  for (std::size_t j = 0; j < a.num_variables(); ++j) {
    const auto& va = a.variable(static_cast<int>(j));
    const auto& vb = b.variable(static_cast<int>(j));
    if (va.lower != vb.lower || va.upper != vb.upper)
      return fail("bounds of column " + std::to_string(j) + " differ");
    if (va.type != vb.type) return fail("integrality of column " + std::to_string(j) + " differs");
    if (a.costs()[j] != b.costs()[j]) return fail("cost of column " + std::to_string(j) + " differs");
  }
  for (std::size_t i = 0; i < a.num_constraints(); ++i) {
    const auto& ra = a.constraint(static_cast<int>(i));
    const auto& rb = b.constraint(static_cast<int>(i));
    if (ra.sense != rb.sense) return fail("sense of row " + std::to_string(i) + " differs");
    if (ra.rhs != rb.rhs) return fail("rhs of row " + std::to_string(i) + " differs");
    if (ra.row != rb.row) return fail("coefficients of row " + std::to_string(i) + " differ");
  }
  return true;
}

}  // namespace gtep
