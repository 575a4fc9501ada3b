#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

#include "gtep/solver.hpp"

namespace gtep {
namespace {

struct Node {
  double bound = -kInf;
  long id = 0;
  std::vector<std::pair<int, double>> fixings;  // (column, 0 or 1)
  Basis basis;
};

struct WorseNode {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

// Rounding dive from a node relaxation: binaries that are already integral
// are fixed, then the most fractional one is rounded to its nearest value (the
// other value is tried once if that is infeasible) and the LP re-solved.
// Column bounds are left modified; the caller resets them. Returns false when
// the dive fails or cannot beat `cutoff`.
bool dive(LpSolver& lp, std::vector<double> x, Basis basis, const std::vector<int>& binaries,
          double tol, double cutoff, long& iterations, double& obj_out, std::vector<double>& x_out) {
  for (std::size_t step = 0; step <= binaries.size(); ++step) {
    int col = -1;
    double best = tol;
    for (int j : binaries) {
      const double frac = x[j] - std::floor(x[j]);
      const double score = std::min(frac, 1.0 - frac);
      if (score <= tol) {
        const double v = std::round(x[j]);
        lp.set_column_bounds(j, v, v);
      } else if (score > best) {
        best = score;
        col = j;
      }
    }
    if (col < 0) {
      obj_out = lp.objective();
      x_out = std::move(x);
      return true;
    }
    const double v = x[col] >= 0.5 ? 1.0 : 0.0;
    lp.set_column_bounds(col, v, v);
    SolveStatus st = lp.solve(&basis);
    iterations += lp.iterations();
    if (st != SolveStatus::optimal) {
      lp.set_column_bounds(col, 1.0 - v, 1.0 - v);
      st = lp.solve(&basis);
      iterations += lp.iterations();
      if (st != SolveStatus::optimal) return false;
    }
    if (lp.objective() >= cutoff) return false;
    x = lp.solution().primal;
    basis = lp.basis();
  }
  return false;
}

double relative_gap(double incumbent, double bound) {
  if (!std::isfinite(incumbent)) return kInf;
  if (!std::isfinite(bound)) return kInf;
  return std::max(0.0, incumbent - bound) / std::max(1.0, std::abs(incumbent));
}

}  // namespace

Solution solve_mip(const MilpModel& model, const SolveConfig& config,
                   std::vector<MipTraceEntry>* trace) {
  config.validate();
  std::vector<int> binaries;
  for (std::size_t j = 0; j < model.num_variables(); ++j)
    if (model.variable(static_cast<int>(j)).type == VarType::binary)
      binaries.push_back(static_cast<int>(j));
  if (binaries.empty()) {
    Solution s = solve_lp(model, config);
    s.nodes = 1;
    return s;
  }

  std::vector<int> costed;
  for (int j : binaries)
    if (model.costs()[j] != 0.0) costed.push_back(j);

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const auto out_of_time = [&] {
    if (!std::isfinite(config.time_limit_seconds)) return false;
    return std::chrono::duration<double>(Clock::now() - start).count() > config.time_limit_seconds;
  };

  LpSolver lp(model, config);
  std::priority_queue<Node, std::vector<Node>, WorseNode> open;
  open.push(Node{});
  long next_id = 1;
  long processed = 0;
  long iterations = 0;
  double incumbent = kInf;
  std::vector<double> incumbent_x;
  bool limit_hit = false;
  bool lost_nodes = false;
  double lower_bound = -kInf;  // monotone record for the trace
  double pruned_min = kInf;  // smallest bound among nodes cut off by the gap test

  const auto prunable = [&](double bound) {
    return std::isfinite(incumbent) &&
           incumbent - bound <= config.mip_gap * std::max(1.0, std::abs(incumbent));
  };

  while (!open.empty()) {
    if (processed >= config.node_limit || out_of_time()) {
      limit_hit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    lower_bound = std::max(lower_bound, std::min(node.bound, incumbent));
    if (prunable(node.bound)) {
      // best-bound order: every remaining node is prunable as well
      pruned_min = std::min(pruned_min, node.bound);
      while (!open.empty()) open.pop();
      break;
    }

    for (int j : binaries) lp.reset_column_bounds(j);
    for (const auto& [j, v] : node.fixings) lp.set_column_bounds(j, v, v);
    const SolveStatus status = lp.solve(node.basis.empty() ? nullptr : &node.basis);
    iterations += lp.iterations();
    ++processed;

    const auto record = [&] {
      if (!trace) return;
      double lb = open.empty() ? incumbent : std::min(incumbent, open.top().bound);
      lb = std::max(lb, lower_bound);
      trace->push_back({processed, incumbent, lb});
    };

    if (status == SolveStatus::unbounded) {
      Solution s;
      s.status = SolveStatus::unbounded;
      s.message = "LP relaxation unbounded";
      s.nodes = processed;
      s.iterations = iterations;
      return s;
    }
    if (status != SolveStatus::optimal) {
      if (status != SolveStatus::infeasible) {
        if (node.id == 0) {
          Solution s = lp.solution();
          s.nodes = processed;
          return s;
        }
        lost_nodes = true;
      }
      record();
      continue;
    }

    const double obj = std::max(lp.objective(), node.bound);
    if (prunable(obj)) {
      pruned_min = std::min(pruned_min, obj);
      record();
      continue;
    }
    const Solution relax = lp.solution();
    // Most fractional, looking first at binaries with an objective cost
    // (investment decisions); ties go to the lowest column.
    int branch_col = -1;
    for (const auto* group : {&costed, &binaries}) {
      double best_score = config.integrality_tolerance;
      for (int j : *group) {
        const double v = relax.primal[j];
        const double frac = v - std::floor(v);
        const double score = std::min(frac, 1.0 - frac);
        if (score > best_score) {
          best_score = score;
          branch_col = j;
        }
      }
      if (branch_col >= 0) break;
    }
    if (branch_col < 0) {
      if (obj < incumbent) {
        incumbent = obj;
        incumbent_x = relax.primal;
      }
      record();
      continue;
    }
    Basis basis = lp.basis();
    // dive at the root and periodically while there is no incumbent
    if (node.id == 0 || (!std::isfinite(incumbent) && processed % 50 == 0)) {
      double dive_obj = kInf;
      std::vector<double> dive_x;
      if (dive(lp, relax.primal, basis, binaries, config.integrality_tolerance, incumbent, iterations,
               dive_obj, dive_x)) {
        incumbent = dive_obj;
        incumbent_x = std::move(dive_x);
      }
    }
    for (double v : {0.0, 1.0}) {
      Node child;
      child.bound = obj;
      child.id = next_id++;
      child.fixings = node.fixings;
      child.fixings.emplace_back(branch_col, v);
      child.basis = basis;
      open.push(std::move(child));
    }
    record();
  }

  double proven = pruned_min;
  if (!open.empty()) proven = std::min(proven, open.top().bound);

  Solution out;
  out.nodes = processed;
  out.iterations = iterations;
  if (!std::isfinite(incumbent)) {
    out.status = limit_hit ? SolveStatus::no_solution : SolveStatus::infeasible;
    if (lost_nodes && !limit_hit) {
      out.status = SolveStatus::numerical_failure;
      out.message = "node LPs failed and no incumbent was found";
    }
    return out;
  }

  // Final LP with binaries fixed at their rounded incumbent values: clean
  // primal values and duals for the integer-fixed problem.
  for (int j : binaries) {
    const double v = std::round(incumbent_x[j]);
    lp.set_column_bounds(j, v, v);
  }
  lp.solve();
  Solution fixed = lp.solution();
  if (fixed.status == SolveStatus::optimal &&
      max_violation(model, fixed.primal, true) <= 10.0 * config.feasibility_tolerance) {
    out.primal = std::move(fixed.primal);
    out.duals = std::move(fixed.duals);
    out.objective = fixed.objective;
  } else {
    out.primal = incumbent_x;
    out.objective = model.evaluate_objective(incumbent_x);
    out.duals.assign(model.num_constraints(), 0.0);
    out.message = "integer-fixed LP failed; duals unavailable";
  }
  out.iterations += fixed.iterations;

  out.best_bound = std::min(proven, out.objective);
  out.gap = relative_gap(out.objective, out.best_bound);
  if (limit_hit || lost_nodes) {
    out.status = SolveStatus::gap_limit;
    if (lost_nodes) out.message = "some node LPs failed; optimality not proven";
  } else {
    out.status = SolveStatus::optimal;
  }
  return out;
}

}  // namespace gtep
