#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "gtep/milp.hpp"

namespace gtep {

struct SolveConfig {
  double feasibility_tolerance = 1e-7;
  double optimality_tolerance = 1e-7;
  double mip_gap = 1e-6;  // relative
  double integrality_tolerance = 1e-6;
  long node_limit = 1'000'000;
  double time_limit_seconds = kInf;
  long iteration_limit = 0;  // 0: derived from problem size
  int refactor_interval = 100;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

/// |a - b| <= tol * (1 + |b|)
[[nodiscard]] inline bool approx_equal(double a, double b, double tol) {
  return std::abs(a - b) <= tol * (1.0 + std::abs(b));
}

enum class VarStatus : std::uint8_t { basic, at_lower, at_upper, at_zero, fixed };

/// Simplex basis over structural columns followed by one logical per row.
struct Basis {
  std::vector<VarStatus> status;
  [[nodiscard]] bool empty() const { return status.empty(); }
};

/// Bounded revised simplex on the continuous relaxation of a model.
///
/// Rows are brought into the form A x - z = 0 with one logical z_i per row
/// carrying the row bounds; the basis is kept as a sparse LU factorization
/// plus a product-form eta file and is refactorized every
/// `refactor_interval` pivots. Phase 1 minimizes the sum of infeasibilities.
/// Pricing is Dantzig with a Harris two-pass ratio test; after a run of
/// degenerate pivots the solver switches to Bland's rule until progress
/// resumes. Column bounds may be overridden between solves (branch and bound)
/// and a previous basis reused as the starting point.
class LpSolver {
 public:
  LpSolver(const MilpModel& model, SolveConfig config = {});
  ~LpSolver();
  LpSolver(LpSolver&&) noexcept;
  LpSolver& operator=(LpSolver&&) noexcept;

  void set_column_bounds(int column, double lower, double upper);
  void reset_column_bounds(int column);
  [[nodiscard]] double column_lower(int column) const;
  [[nodiscard]] double column_upper(int column) const;

  /// Solves from `warm` if it is a valid basis, else from the slack basis.
  SolveStatus solve(const Basis* warm = nullptr);

  [[nodiscard]] Solution solution() const;
  [[nodiscard]] Basis basis() const;
  [[nodiscard]] double objective() const;
  [[nodiscard]] long iterations() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Lagrangian dual bound of `duals` for the LP relaxation of `m`; -inf when
/// the multipliers are not dual feasible within `tol`.
[[nodiscard]] double lp_dual_bound(const MilpModel& m, std::span<const double> duals,
                                   double tol = 1e-7);

/// LP relaxation (integrality ignored). Solutions are re-checked row by row
/// against the model before they are returned.
[[nodiscard]] Solution solve_lp(const MilpModel& model, const SolveConfig& config = {});

/// Progress record of a branch-and-bound run, one entry per processed node.
struct MipTraceEntry {
  long node = 0;
  double incumbent = kInf;
  double lower_bound = -kInf;
};

/// Best-bound branch and bound over the binary columns with most-fractional
/// branching (ties to the lowest column index). Binaries with a nonzero
/// objective coefficient are branched on before the others. A rounding dive
/// runs at the root and every 50 nodes while no incumbent exists. The
/// returned duals come from the LP with every binary fixed at its incumbent
/// value.
[[nodiscard]] Solution solve_mip(const MilpModel& model, const SolveConfig& config = {},
                                 std::vector<MipTraceEntry>* trace = nullptr);

/// External solver invoked as a subprocess.
///
/// `command` is a template where `{mps}`, `{sol}` and `{gap}` are replaced by
/// the model path, the solution path and the relative gap. The solution file
/// must use the HiGHS raw solution grammar (see docs/formats.md).
struct ExternalSolverConfig {
  std::string command;
  std::filesystem::path work_dir;  // empty: a fresh temp directory
  bool keep_files = false;
};

/// Raised when the external process or its output cannot be used. `log`
/// holds the captured solver output.
class ExternalSolverError : public std::runtime_error {
 public:
  ExternalSolverError(const std::string& what, std::string log)
      : std::runtime_error(what), log_(std::move(log)) {}
  [[nodiscard]] const std::string& log() const { return log_; }

 private:
  std::string log_;
};

/// Same semantics as solve_mip: the model is solved once, then again with the
/// binaries fixed to obtain row duals.
[[nodiscard]] Solution solve_external(const MilpModel& model, const SolveConfig& config,
                                      const ExternalSolverConfig& external);

/// Parses a HiGHS raw solution file. `columns`/`rows` are the names used in
/// the exported MPS, indexed like the model.
[[nodiscard]] Solution parse_highs_solution(std::string_view text,
                                            const std::vector<std::string>& columns,
                                            const std::vector<std::string>& rows);

/// Backend selection used by the planner and the CLI.
class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  [[nodiscard]] virtual std::string name() const = 0;
  [[nodiscard]] virtual Solution solve(const MilpModel& model, const SolveConfig& config) const = 0;
};

class EmbeddedBackend final : public SolverBackend {
 public:
  [[nodiscard]] std::string name() const override { return "embedded"; }
  [[nodiscard]] Solution solve(const MilpModel& model, const SolveConfig& config) const override {
    return solve_mip(model, config);
  }
};

class ExternalBackend final : public SolverBackend {
 public:
  /// Throws ConfigError when the command's executable cannot be found.
  explicit ExternalBackend(ExternalSolverConfig config);
  [[nodiscard]] std::string name() const override { return "external"; }
  [[nodiscard]] Solution solve(const MilpModel& model, const SolveConfig& config) const override {
    return solve_external(model, config, config_);
  }

 private:
  ExternalSolverConfig config_;
};

/// Environment variable holding the external command template.
inline constexpr const char* kExternalSolverEnv = "GTEP_EXTERNAL_SOLVER";

}  // namespace gtep
