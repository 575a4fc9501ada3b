#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <chrono>
#include <cmath>

#include "gtep/error.hpp"
#include "gtep/solver.hpp"

namespace gtep {

void SolveConfig::validate() const {
  if (!(feasibility_tolerance > 0.0)) throw ConfigError("feasibility_tolerance must be > 0");
  if (!(optimality_tolerance > 0.0)) throw ConfigError("optimality_tolerance must be > 0");
  if (!(integrality_tolerance > 0.0) || integrality_tolerance >= 0.5)
    throw ConfigError("integrality_tolerance must be in (0, 0.5)");
  if (!(mip_gap >= 0.0)) throw ConfigError("mip_gap must be >= 0");
  if (node_limit < 1) throw ConfigError("node_limit must be >= 1");
  if (!(time_limit_seconds > 0.0)) throw ConfigError("time_limit_seconds must be > 0");
  if (iteration_limit < 0) throw ConfigError("iteration_limit must be >= 0");
  if (refactor_interval < 1) throw ConfigError("refactor_interval must be >= 1");
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kDropTol = 1e-14;
constexpr int kDegenerateRunForBland = 50;

struct Eta {
  int row = 0;
  double pivot = 1.0;
  std::vector<int> idx;
  std::vector<double> val;
};

using Clock = std::chrono::steady_clock;

}  // namespace

struct LpSolver::Impl {
  SolveConfig cfg;
  int n = 0;  // structural columns
  int m = 0;  // rows kept in the simplex
  std::vector<int> row_map;  // model row -> internal row or -1
  std::vector<int> model_row;  // internal row -> model row
  bool empty_row_infeasible = false;
  double offset = 0.0;

  std::vector<int> cstart, cidx;
  std::vector<double> cval;
  std::vector<double> lb, ub, cost;  // size n + m
  std::vector<double> model_lb, model_ub;  // structural, as in the model

  std::vector<int> head;  // basis position -> variable
  std::vector<int> pos;  // variable -> basis position or -1
  std::vector<VarStatus> st;
  std::vector<double> x;
  std::vector<double> y;  // row duals (internal rows)

  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  std::vector<Eta> etas;
  bool factored = false;

  long iters = 0;
  SolveStatus status = SolveStatus::no_solution;
  std::string message;
  Clock::time_point deadline = Clock::time_point::max();

  explicit Impl(const MilpModel& model, SolveConfig config) : cfg(config) {
    cfg.validate();
    n = static_cast<int>(model.num_variables());
    offset = model.objective_offset();
    row_map.assign(model.num_constraints(), -1);
    const double ftol = cfg.feasibility_tolerance;
    for (std::size_t i = 0; i < model.num_constraints(); ++i) {
      const Constraint& c = model.constraint(static_cast<int>(i));
      if (c.row.empty()) {
        const bool ok = (c.sense == Sense::less_equal && 0.0 <= c.rhs + ftol) ||
                        (c.sense == Sense::greater_equal && 0.0 >= c.rhs - ftol) ||
                        (c.sense == Sense::equal && std::abs(c.rhs) <= ftol);
        if (!ok) empty_row_infeasible = true;
        continue;
      }
      row_map[i] = static_cast<int>(model_row.size());
      model_row.push_back(static_cast<int>(i));
    }
    m = static_cast<int>(model_row.size());

    std::vector<int> count(n, 0);
    for (int r = 0; r < m; ++r)
      for (const auto& [j, a] : model.constraint(model_row[r]).row) ++count[j];
    cstart.assign(n + 1, 0);
    for (int j = 0; j < n; ++j) cstart[j + 1] = cstart[j] + count[j];
    cidx.resize(cstart[n]);
    cval.resize(cstart[n]);
    std::vector<int> fill(cstart.begin(), cstart.end() - 1);
    for (int r = 0; r < m; ++r)
      for (const auto& [j, a] : model.constraint(model_row[r]).row) {
        cidx[fill[j]] = r;
        cval[fill[j]] = a;
        ++fill[j];
      }

    const int total = n + m;
    lb.resize(total);
    ub.resize(total);
    cost.assign(total, 0.0);
    for (int j = 0; j < n; ++j) {
      lb[j] = model.variable(j).lower;
      ub[j] = model.variable(j).upper;
      cost[j] = model.costs()[j];
    }
    model_lb.assign(lb.begin(), lb.begin() + n);
    model_ub.assign(ub.begin(), ub.begin() + n);
    for (int r = 0; r < m; ++r) {
      const Constraint& c = model.constraint(model_row[r]);
      lb[n + r] = c.sense == Sense::less_equal ? -kInf : c.rhs;
      ub[n + r] = c.sense == Sense::greater_equal ? kInf : c.rhs;
    }
    x.assign(total, 0.0);
    y.assign(m, 0.0);
  }

  [[nodiscard]] int total() const { return n + m; }

  // Nonbasic status compatible with the current bounds.
  [[nodiscard]] VarStatus nonbasic_status(int j, VarStatus wanted) const {
    if (lb[j] == ub[j]) return VarStatus::fixed;
    const bool lo = std::isfinite(lb[j]);
    const bool hi = std::isfinite(ub[j]);
    if (wanted == VarStatus::at_upper && hi) return VarStatus::at_upper;
    if (wanted == VarStatus::at_lower && lo) return VarStatus::at_lower;
    if (lo) return VarStatus::at_lower;
    if (hi) return VarStatus::at_upper;
    return VarStatus::at_zero;
  }

  [[nodiscard]] double nonbasic_value(int j) const {
    switch (st[j]) {
      case VarStatus::at_lower:
      case VarStatus::fixed: return lb[j];
      case VarStatus::at_upper: return ub[j];
      default: return 0.0;
    }
  }

  void slack_basis() {
    const int N = total();
    st.assign(N, VarStatus::at_lower);
    head.resize(m);
    pos.assign(N, -1);
    for (int j = 0; j < n; ++j) st[j] = nonbasic_status(j, VarStatus::at_lower);
    for (int r = 0; r < m; ++r) {
      st[n + r] = VarStatus::basic;
      head[r] = n + r;
      pos[n + r] = r;
    }
  }

  bool load_basis(const Basis& b) {
    const int N = total();
    if (static_cast<int>(b.status.size()) != N) return false;
    if (std::count(b.status.begin(), b.status.end(), VarStatus::basic) != m) return false;
    st = b.status;
    head.clear();
    pos.assign(N, -1);
    for (int j = 0; j < N; ++j) {
      if (st[j] == VarStatus::basic) {
        pos[j] = static_cast<int>(head.size());
        head.push_back(j);
      } else {
        st[j] = nonbasic_status(j, st[j]);
      }
    }
    return true;
  }

  bool factorize() {
    etas.clear();
    if (m == 0) return factored = true;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(m) * 2);
    for (int p = 0; p < m; ++p) {
      const int j = head[p];
      if (j < n) {
        for (int k = cstart[j]; k < cstart[j + 1]; ++k) trip.emplace_back(cidx[k], p, cval[k]);
      } else {
        trip.emplace_back(j - n, p, -1.0);
      }
    }
    Eigen::SparseMatrix<double> B(m, m);
    B.setFromTriplets(trip.begin(), trip.end());
    B.makeCompressed();
    lu.analyzePattern(B);
    lu.factorize(B);
    etas.clear();
    factored = lu.info() == Eigen::Success;
    if (factored) {
      // SparseLU may accept a numerically singular basis; reject tiny pivots.
      const double logdet = lu.logAbsDeterminant();
      factored = std::isfinite(logdet);
    }
    return factored;
  }

  void ftran(Eigen::VectorXd& v) const {
    if (m == 0) return;
    v = lu.solve(v);
    for (const Eta& e : etas) {
      const double wr = v[e.row] / e.pivot;
      v[e.row] = wr;
      if (wr == 0.0) continue;
      for (std::size_t k = 0; k < e.idx.size(); ++k) v[e.idx[k]] -= e.val[k] * wr;
    }
  }

  void btran(Eigen::VectorXd& v) const {
    if (m == 0) return;
    for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
      double s = v[it->row];
      for (std::size_t k = 0; k < it->idx.size(); ++k) s -= v[it->idx[k]] * it->val[k];
      v[it->row] = s / it->pivot;
    }
    v = lu.transpose().solve(v);
  }

  void column(int j, Eigen::VectorXd& out) const {
    out.setZero(m);
    if (j < n) {
      for (int k = cstart[j]; k < cstart[j + 1]; ++k) out[cidx[k]] = cval[k];
    } else {
      out[j - n] = -1.0;
    }
  }

  [[nodiscard]] double dot_column(int j, const Eigen::VectorXd& v) const {
    if (j >= n) return -v[j - n];
    double s = 0.0;
    for (int k = cstart[j]; k < cstart[j + 1]; ++k) s += cval[k] * v[cidx[k]];
    return s;
  }

  void compute_basic_values() {
    const int N = total();
    for (int j = 0; j < N; ++j)
      if (st[j] != VarStatus::basic) x[j] = nonbasic_value(j);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (int j = 0; j < N; ++j) {
      if (st[j] == VarStatus::basic || x[j] == 0.0) continue;
      if (j < n) {
        for (int k = cstart[j]; k < cstart[j + 1]; ++k) rhs[cidx[k]] -= cval[k] * x[j];
      } else {
        rhs[j - n] += x[j];
      }
    }
    ftran(rhs);
    for (int p = 0; p < m; ++p) x[head[p]] = rhs[p];
  }

  [[nodiscard]] double infeasibility(int j) const {
    const double tol = cfg.feasibility_tolerance;
    if (x[j] < lb[j] - tol) return lb[j] - x[j];
    if (x[j] > ub[j] + tol) return x[j] - ub[j];
    return 0.0;
  }

  struct Ratio {
    int leave_pos = -1;
    double step = kInf;
    bool flip = false;
    bool leave_at_upper = false;
  };

  // Blocking step for basic variable j moving at `rate` per unit step.
  // Returns false when j does not block.
  bool blocking(int j, double rate, bool phase1, double& relaxed, double& exact,
                bool& at_upper) const {
    const double tol = cfg.feasibility_tolerance;
    const double xv = x[j];
    if (phase1 && xv < lb[j] - tol) {
      if (rate <= 0.0) return false;
      exact = relaxed = (lb[j] - xv) / rate;
      at_upper = false;
      return true;
    }
    if (phase1 && xv > ub[j] + tol) {
      if (rate >= 0.0) return false;
      exact = relaxed = (ub[j] - xv) / rate;
      at_upper = true;
      return true;
    }
    if (rate > 0.0) {
      if (!std::isfinite(ub[j])) return false;
      exact = std::max(0.0, (ub[j] - xv) / rate);
      relaxed = (ub[j] + tol - xv) / rate;
      at_upper = true;
      return true;
    }
    if (!std::isfinite(lb[j])) return false;
    exact = std::max(0.0, (lb[j] - xv) / rate);
    relaxed = (lb[j] - tol - xv) / rate;
    at_upper = false;
    return true;
  }

  Ratio ratio_test(int q, int dir, const Eigen::VectorXd& alpha, bool phase1, bool bland) const {
    Ratio out;
    const double flip_dist =
        (std::isfinite(lb[q]) && std::isfinite(ub[q])) ? ub[q] - lb[q] : kInf;
    double relaxed = 0.0, exact = 0.0;
    bool up = false;
    if (bland) {
      double best = kInf;
      int best_var = -1;
      for (int p = 0; p < m; ++p) {
        if (std::abs(alpha[p]) < kPivotTol) continue;
        const int j = head[p];
        if (!blocking(j, -dir * alpha[p], phase1, relaxed, exact, up)) continue;
        if (exact < best - 1e-12 || (exact <= best + 1e-12 && j < best_var)) {
          best = exact;
          best_var = j;
          out.leave_pos = p;
          out.leave_at_upper = up;
        }
      }
      out.step = best;
    } else {
      double t1 = kInf;
      for (int p = 0; p < m; ++p) {
        if (std::abs(alpha[p]) < kPivotTol) continue;
        if (blocking(head[p], -dir * alpha[p], phase1, relaxed, exact, up))
          t1 = std::min(t1, relaxed);
      }
      if (t1 < kInf) {
        double best_pivot = 0.0;
        for (int p = 0; p < m; ++p) {
          const double a = std::abs(alpha[p]);
          if (a < kPivotTol) continue;
          if (!blocking(head[p], -dir * alpha[p], phase1, relaxed, exact, up)) continue;
          if (exact <= t1 && a > best_pivot) {
            best_pivot = a;
            out.leave_pos = p;
            out.step = exact;
            out.leave_at_upper = up;
          }
        }
      }
    }
    if (std::isfinite(flip_dist) && flip_dist <= out.step) {
      out.flip = true;
      out.step = flip_dist;
      out.leave_pos = -1;
    }
    return out;
  }

  void add_eta(int r, const Eigen::VectorXd& alpha) {
    Eta e;
    e.row = r;
    e.pivot = alpha[r];
    for (int i = 0; i < m; ++i) {
      if (i == r || std::abs(alpha[i]) <= kDropTol) continue;
      e.idx.push_back(i);
      e.val.push_back(alpha[i]);
    }
    etas.push_back(std::move(e));
  }

  SolveStatus run(const Basis* warm) {
    message.clear();
    if (empty_row_infeasible) {
      message = "empty row with unsatisfiable right-hand side";
      return status = SolveStatus::infeasible;
    }
    for (int j = 0; j < n; ++j) {
      if (lb[j] > ub[j]) {
        message = "column bounds cross";
        return status = SolveStatus::infeasible;
      }
    }
    bool from_warm = warm && load_basis(*warm);
    if (!from_warm) slack_basis();
    if (!factorize()) {
      if (!from_warm) {
        message = "slack basis factorization failed";
        return status = SolveStatus::numerical_failure;
      }
      slack_basis();
      if (!factorize()) return status = SolveStatus::numerical_failure;
    }
    compute_basic_values();

    const long limit =
        cfg.iteration_limit > 0 ? cfg.iteration_limit : 50L * (n + m) + 10000;
    const double otol = cfg.optimality_tolerance;
    int degenerate_run = 0;
    bool bland = false;
    Eigen::VectorXd cb(m), yv(m), alpha(m);
    std::vector<double> d(total(), 0.0);

    while (true) {
      if (iters >= limit) {
        message = "iteration limit";
        return status = SolveStatus::numerical_failure;
      }
      if ((iters & 63) == 0 && Clock::now() > deadline) {
        message = "time limit";
        return status = SolveStatus::no_solution;
      }

      bool phase1 = false;
      for (int p = 0; p < m; ++p) {
        if (infeasibility(head[p]) > 0.0) {
          phase1 = true;
          break;
        }
      }
      for (int p = 0; p < m; ++p) {
        const int j = head[p];
        if (phase1) {
          const double tol = cfg.feasibility_tolerance;
          cb[p] = x[j] < lb[j] - tol ? -1.0 : (x[j] > ub[j] + tol ? 1.0 : 0.0);
        } else {
          cb[p] = cost[j];
        }
      }
      yv = cb;
      btran(yv);

      int q = -1;
      int dir = 0;
      double best = 0.0;
      const int N = total();
      for (int j = 0; j < N; ++j) {
        const VarStatus s = st[j];
        if (s == VarStatus::basic || s == VarStatus::fixed) continue;
        const double dj = (phase1 ? 0.0 : cost[j]) - dot_column(j, yv);
        int want = 0;
        if (s == VarStatus::at_lower && dj < -otol) want = 1;
        else if (s == VarStatus::at_upper && dj > otol) want = -1;
        else if (s == VarStatus::at_zero && std::abs(dj) > otol) want = dj < 0 ? 1 : -1;
        if (want == 0) continue;
        if (bland) {
          q = j;
          dir = want;
          break;
        }
        if (std::abs(dj) > best) {
          best = std::abs(dj);
          q = j;
          dir = want;
        }
      }

      if (q < 0) {
        if (!etas.empty()) {
          // confirm with a fresh factorization before concluding
          if (!factorize()) return recover("refactorization failed");
          compute_basic_values();
          continue;
        }
        if (phase1) {
          message = "primal infeasible";
          return status = SolveStatus::infeasible;
        }
        for (int r = 0; r < m; ++r) y[r] = yv[r];
        return status = SolveStatus::optimal;
      }

      column(q, alpha);
      ftran(alpha);
      const Ratio ratio = ratio_test(q, dir, alpha, phase1, bland);
      if (!ratio.flip && ratio.leave_pos < 0) {
        if (phase1) return recover("phase 1 ray");
        message = "primal unbounded";
        return status = SolveStatus::unbounded;
      }
      ++iters;
      const double t = ratio.step;
      if (t <= 1e-12) {
        if (++degenerate_run > kDegenerateRunForBland) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }

      if (t > 0.0) {
        x[q] += dir * t;
        for (int p = 0; p < m; ++p)
          if (alpha[p] != 0.0) x[head[p]] -= dir * t * alpha[p];
      }
      if (ratio.flip) {
        st[q] = dir > 0 ? VarStatus::at_upper : VarStatus::at_lower;
        x[q] = dir > 0 ? ub[q] : lb[q];
        continue;
      }
      const int r = ratio.leave_pos;
      const int leaving = head[r];
      x[leaving] = ratio.leave_at_upper ? ub[leaving] : lb[leaving];
      st[leaving] = lb[leaving] == ub[leaving]
                        ? VarStatus::fixed
                        : (ratio.leave_at_upper ? VarStatus::at_upper : VarStatus::at_lower);
      pos[leaving] = -1;
      head[r] = q;
      pos[q] = r;
      st[q] = VarStatus::basic;
      add_eta(r, alpha);

      if (static_cast<int>(etas.size()) >= cfg.refactor_interval) {
        if (!factorize()) return recover("refactorization failed");
        compute_basic_values();
      }
    }
  }

  // One cold restart from the slack basis, then give up.
  SolveStatus recover(const char* why) {
    if (restarts_left-- <= 0) {
      message = why;
      return status = SolveStatus::numerical_failure;
    }
    return run(nullptr);
  }

  int restarts_left = 1;
};

LpSolver::LpSolver(const MilpModel& model, SolveConfig config)
    : impl_(std::make_unique<Impl>(model, config)) {}
LpSolver::~LpSolver() = default;
LpSolver::LpSolver(LpSolver&&) noexcept = default;
LpSolver& LpSolver::operator=(LpSolver&&) noexcept = default;

void LpSolver::set_column_bounds(int column, double lower, double upper) {
  impl_->lb.at(column) = lower;
  impl_->ub.at(column) = upper;
}

void LpSolver::reset_column_bounds(int column) {
  impl_->lb.at(column) = impl_->model_lb.at(column);
  impl_->ub.at(column) = impl_->model_ub.at(column);
}

double LpSolver::column_lower(int column) const { return impl_->lb.at(column); }
double LpSolver::column_upper(int column) const { return impl_->ub.at(column); }

SolveStatus LpSolver::solve(const Basis* warm) {
  if (std::isfinite(impl_->cfg.time_limit_seconds)) {
    impl_->deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                         std::chrono::duration<double>(impl_->cfg.time_limit_seconds));
  }
  impl_->iters = 0;
  impl_->restarts_left = 1;
  return impl_->run(warm);
}

Solution LpSolver::solution() const {
  const Impl& s = *impl_;
  Solution out;
  out.status = s.status;
  out.iterations = s.iters;
  out.message = s.message;
  if (s.status == SolveStatus::optimal) {
    out.primal.assign(s.x.begin(), s.x.begin() + s.n);
    out.duals.assign(s.row_map.size(), 0.0);
    for (std::size_t i = 0; i < s.row_map.size(); ++i)
      if (s.row_map[i] >= 0) out.duals[i] = s.y[s.row_map[i]];
    out.objective = objective();
    out.best_bound = out.objective;
    out.gap = 0.0;
  }
  return out;
}

Basis LpSolver::basis() const { return Basis{impl_->st}; }

double LpSolver::objective() const {
  double obj = impl_->offset;
  for (int j = 0; j < impl_->n; ++j) obj += impl_->cost[j] * impl_->x[j];
  return obj;
}

long LpSolver::iterations() const { return impl_->iters; }

double lp_dual_bound(const MilpModel& m, std::span<const double> duals, double tol) {
  double bound = m.objective_offset();
  std::vector<double> reduced(m.costs().begin(), m.costs().end());
  for (std::size_t i = 0; i < m.num_constraints(); ++i) {
    const Constraint& c = m.constraint(static_cast<int>(i));
    double yi = duals[i];
    if (c.sense == Sense::greater_equal && yi < 0.0) {
      if (yi < -tol) return -kInf;
      yi = 0.0;
    }
    if (c.sense == Sense::less_equal && yi > 0.0) {
      if (yi > tol) return -kInf;
      yi = 0.0;
    }
    bound += yi * c.rhs;
    for (const auto& [j, a] : c.row) reduced[j] -= a * yi;
  }
  for (std::size_t j = 0; j < m.num_variables(); ++j) {
    const Variable& v = m.variable(static_cast<int>(j));
    const double dj = reduced[j];
    if (dj > 0.0) {
      if (std::isinf(v.lower)) {
        if (dj > tol) return -kInf;
        continue;
      }
      bound += dj * v.lower;
    } else if (dj < 0.0) {
      if (std::isinf(v.upper)) {
        if (dj < -tol) return -kInf;
        continue;
      }
      bound += dj * v.upper;
    }
  }
  return bound;
}

Solution solve_lp(const MilpModel& model, const SolveConfig& config) {
  LpSolver lp(model, config);
  lp.solve();
  Solution sol = lp.solution();
  if (sol.status == SolveStatus::optimal) {
    const double viol = max_violation(model, sol.primal);
    if (viol > 10.0 * config.feasibility_tolerance) {
      // independent residual pass failed; one cold retry before reporting
      LpSolver again(model, config);
      again.solve();
      Solution retry = again.solution();
      if (retry.status == SolveStatus::optimal &&
          max_violation(model, retry.primal) <= 10.0 * config.feasibility_tolerance)
        return retry;
      sol.status = SolveStatus::numerical_failure;
      sol.message = "solution violates the model by " + std::to_string(viol);
    }
  }
  return sol;
}

}  // namespace gtep
