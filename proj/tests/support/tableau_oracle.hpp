#pragma once
// Dense two-phase tableau simplex with Bland's rule. Slow and simple on
// purpose: it shares no code with the library solver and is only used to
// cross-check it on small problems.

#include <cmath>
#include <vector>

#include "gtep/milp.hpp"

namespace gtep::oracle {

struct TableauResult {
  SolveStatus status = SolveStatus::no_solution;
  double objective = 0.0;
  std::vector<double> x;
};

inline TableauResult tableau_solve(const MilpModel& m, double eps = 1e-10) {
  const int n = static_cast<int>(m.num_variables());
  // x_j = base[j] + sign[j] * y[pos[j]] - (free ? y[neg[j]] : 0)
  std::vector<double> base(n, 0.0), sign(n, 1.0);
  std::vector<int> pos(n, -1), neg(n, -1);
  int ny = 0;
  struct Ub { int col; double width; };
  std::vector<Ub> upper_rows;
  for (int j = 0; j < n; ++j) {
    const Variable& v = m.variable(j);
    const bool lo = std::isfinite(v.lower), hi = std::isfinite(v.upper);
    if (lo && hi && v.lower == v.upper) {
      base[j] = v.lower;
    } else if (lo) {
      base[j] = v.lower;
      pos[j] = ny++;
      if (hi) upper_rows.push_back({pos[j], v.upper - v.lower});
    } else if (hi) {
      base[j] = v.upper;
      sign[j] = -1.0;
      pos[j] = ny++;
    } else {
      pos[j] = ny++;
      neg[j] = ny++;
    }
  }

  struct Row { std::vector<double> a; double b; int slack; };  // slack: +1, -1, 0
  std::vector<Row> rows;
  for (const Constraint& c : m.constraints()) {
    Row r{std::vector<double>(ny, 0.0), c.rhs, 0};
    for (const auto& [j, a] : c.row) {
      r.b -= a * base[j];
      if (pos[j] >= 0) r.a[pos[j]] += a * sign[j];
      if (neg[j] >= 0) r.a[neg[j]] -= a;
    }
    r.slack = c.sense == Sense::less_equal ? 1 : c.sense == Sense::greater_equal ? -1 : 0;
    rows.push_back(std::move(r));
  }
  for (const Ub& u : upper_rows) {
    Row r{std::vector<double>(ny, 0.0), u.width, 1};
    r.a[u.col] = 1.0;
    rows.push_back(std::move(r));
  }

  const int mr = static_cast<int>(rows.size());
  int nslack = 0;
  for (const Row& r : rows) nslack += r.slack != 0;
  const int ncol = ny + nslack;  // structural + slack
  const int ntot = ncol + mr;    // + artificials
  std::vector<std::vector<double>> T(mr, std::vector<double>(ntot, 0.0));
  std::vector<double> b(mr);
  std::vector<int> basis(mr);
  int s = ny;
  for (int i = 0; i < mr; ++i) {
    for (int k = 0; k < ny; ++k) T[i][k] = rows[i].a[k];
    if (rows[i].slack != 0) T[i][s++] = rows[i].slack;
    b[i] = rows[i].b;
    if (b[i] < 0) {
      for (int k = 0; k < ncol; ++k) T[i][k] = -T[i][k];
      b[i] = -b[i];
    }
    T[i][ncol + i] = 1.0;
    basis[i] = ncol + i;
  }

  const auto pivot = [&](int r, int e) {
    const double p = T[r][e];
    for (double& v : T[r]) v /= p;
    b[r] /= p;
    for (int i = 0; i < mr; ++i) {
      if (i == r || T[i][e] == 0.0) continue;
      const double f = T[i][e];
      for (int k = 0; k < ntot; ++k) T[i][k] -= f * T[r][k];
      b[i] -= f * b[r];
    }
    basis[r] = e;
  };

  // returns false when unbounded
  const auto optimize = [&](const std::vector<double>& cost, int allowed) {
    for (;;) {
      int enter = -1;
      for (int k = 0; k < allowed && enter < 0; ++k) {
        double d = cost[k];
        for (int i = 0; i < mr; ++i) d -= cost[basis[i]] * T[i][k];
        if (d < -1e-9) enter = k;
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = 0.0;
      for (int i = 0; i < mr; ++i) {
        if (T[i][enter] <= eps) continue;
        const double ratio = b[i] / T[i][enter];
        if (leave < 0 || ratio < best - 1e-12 ||
            (ratio <= best + 1e-12 && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  };

  TableauResult res;
  std::vector<double> phase1(ntot, 0.0);
  for (int i = 0; i < mr; ++i) phase1[ncol + i] = 1.0;
  optimize(phase1, ntot);
  double infeas = 0.0;
  for (int i = 0; i < mr; ++i)
    if (basis[i] >= ncol) infeas += b[i];
  if (infeas > 1e-7) {
    res.status = SolveStatus::infeasible;
    return res;
  }
  for (int i = 0; i < mr; ++i) {
    if (basis[i] < ncol) continue;
    for (int k = 0; k < ncol; ++k) {
      if (std::abs(T[i][k]) > 1e-9) {
        pivot(i, k);
        break;
      }
    }
  }

  std::vector<double> cost(ntot, 0.0);
  double constant = m.objective_offset();
  for (int j = 0; j < n; ++j) {
    const double c = m.costs()[j];
    constant += c * base[j];
    if (pos[j] >= 0) cost[pos[j]] += c * sign[j];
    if (neg[j] >= 0) cost[neg[j]] -= c;
  }
  if (!optimize(cost, ncol)) {
    res.status = SolveStatus::unbounded;
    return res;
  }
  std::vector<double> y(ntot, 0.0);
  for (int i = 0; i < mr; ++i) y[basis[i]] = b[i];
  res.x.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    res.x[j] = base[j];
    if (pos[j] >= 0) res.x[j] += sign[j] * y[pos[j]];
    if (neg[j] >= 0) res.x[j] -= y[neg[j]];
  }
  res.objective = constant;
  for (int k = 0; k < ncol; ++k) res.objective += cost[k] * y[k];
  res.status = SolveStatus::optimal;
  return res;
}

}  // namespace gtep::oracle
