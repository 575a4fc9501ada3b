#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "gtep/error.hpp"
#include "gtep/solver.hpp"

namespace gtep {
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

void replace_all(std::string& s, std::string_view from, const std::string& to) {
  for (std::size_t p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size()))
    s.replace(p, from.size(), to);
}

std::string first_word(const std::string& command) {
  std::istringstream ss(command);
  std::string w;
  ss >> w;
  return w;
}

bool executable_exists(const std::string& program) {
  if (program.empty()) return false;
  if (program.find('/') != std::string::npos) return ::access(program.c_str(), X_OK) == 0;
  const char* path = std::getenv("PATH");
  if (!path) return false;
  std::istringstream dirs(path);
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    if (dir.empty()) continue;
    if (::access((fs::path(dir) / program).c_str(), X_OK) == 0) return true;
  }
  return false;
}

SolveStatus map_status(const std::string& s, bool has_primal) {
  if (s == "Optimal" || s == "Empty") return SolveStatus::optimal;
  if (s == "Infeasible" || s == "Primal infeasible or unbounded") return SolveStatus::infeasible;
  if (s == "Unbounded") return SolveStatus::unbounded;
  if (s.find("limit") != std::string::npos || s == "Interrupted by user")
    return has_primal ? SolveStatus::gap_limit : SolveStatus::no_solution;
  return SolveStatus::numerical_failure;
}

struct RunResult {
  Solution solution;
  std::string log;
};

RunResult run_once(const MilpModel& model, const SolveConfig& config,
                   const ExternalSolverConfig& ext, const fs::path& dir, const std::string& tag) {
  const MpsText mps = export_mps(model);
  const fs::path mps_path = dir / (tag + ".mps");
  const fs::path sol_path = dir / (tag + ".sol");
  const fs::path log_path = dir / (tag + ".log");
  {
    std::ofstream out(mps_path, std::ios::binary);
    out << mps.text;
    if (!out) throw ExternalSolverError("cannot write " + mps_path.string(), "");
  }
  fs::remove(sol_path);
  std::string cmd = ext.command;
  replace_all(cmd, "{mps}", shell_quote(mps_path.string()));
  replace_all(cmd, "{sol}", shell_quote(sol_path.string()));
  std::ostringstream gap;
  gap.precision(17);
  gap << config.mip_gap;
  replace_all(cmd, "{gap}", gap.str());
  cmd += " > " + shell_quote(log_path.string()) + " 2>&1";

  const int rc = std::system(cmd.c_str());
  std::string log = read_file(log_path);
  if (rc != 0)
    throw ExternalSolverError("external solver exited with status " + std::to_string(rc), log);
  if (!fs::exists(sol_path))
    throw ExternalSolverError("external solver wrote no solution file", log);
  Solution sol;
  try {
    sol = parse_highs_solution(read_file(sol_path), mps.column_names, mps.row_names);
  } catch (const ParseError& e) {
    throw ExternalSolverError(std::string("cannot parse solution file: ") + e.what(), log);
  }
  if (sol.has_primal()) {
    const double viol = max_violation(model, sol.primal, true);
    if (viol > 1e-6)
      throw ExternalSolverError("external solution violates the model by " + std::to_string(viol) +
                                    " (status " + std::string(to_string(sol.status)) + ")",
                                log);
    sol.objective = model.evaluate_objective(sol.primal);
  }
  return {std::move(sol), std::move(log)};
}

std::atomic<long> g_run_counter{0};

}  // namespace

Solution parse_highs_solution(std::string_view text, const std::vector<std::string>& columns,
                              const std::vector<std::string>& rows) {
  std::unordered_map<std::string, int> col_of, row_of;
  for (std::size_t j = 0; j < columns.size(); ++j) col_of.emplace(columns[j], static_cast<int>(j));
  for (std::size_t i = 0; i < rows.size(); ++i) row_of.emplace(rows[i], static_cast<int>(i));

  std::vector<std::string> lines;
  {
    std::istringstream ss{std::string(text)};
    std::string l;
    while (std::getline(ss, l)) {
      if (!l.empty() && l.back() == '\r') l.pop_back();
      lines.push_back(l);
    }
  }
  std::size_t k = 0;
  const auto next = [&]() -> const std::string& {
    if (k >= lines.size()) throw ParseError("unexpected end of solution file", k);
    return lines[k++];
  };
  const auto expect_count = [&](std::string_view prefix) {
    const std::string& l = next();
    if (l.rfind(prefix, 0) != 0) throw ParseError("expected '" + std::string(prefix) + "'", k);
    return std::stoul(l.substr(prefix.size()));
  };
  const auto read_block = [&](std::size_t count, const auto& index, std::vector<double>& out,
                              const char* what) {
    for (std::size_t c = 0; c < count; ++c) {
      std::istringstream ls(next());
      std::string name, value;
      ls >> name >> value;
      auto it = index.find(name);
      if (it == index.end()) throw ParseError(std::string("unknown ") + what + " '" + name + "'", k);
      try {
        out[it->second] = std::stod(value);
      } catch (const std::exception&) {
        throw ParseError("invalid value '" + value + "'", k);
      }
    }
  };

  while (k < lines.size() && lines[k] != "Model status") ++k;
  if (k >= lines.size()) throw ParseError("missing 'Model status'");
  ++k;
  const std::string status_text = next();

  Solution sol;
  bool has_primal = false;
  while (k < lines.size() && lines[k] != "# Primal solution values") ++k;
  if (k < lines.size()) {
    ++k;
    const std::string feas = next();
    if (feas != "None") {
      has_primal = true;
      const std::string& obj = next();
      if (obj.rfind("Objective ", 0) == 0) sol.objective = std::stod(obj.substr(10));
      sol.primal.assign(columns.size(), 0.0);
      read_block(expect_count("# Columns "), col_of, sol.primal, "column");
      std::vector<double> activity(rows.size(), 0.0);
      read_block(expect_count("# Rows "), row_of, activity, "row");
    }
  }
  while (k < lines.size() && lines[k] != "# Dual solution values") ++k;
  if (k < lines.size()) {
    ++k;
    if (next() != "None") {
      std::vector<double> reduced(columns.size(), 0.0);
      read_block(expect_count("# Columns "), col_of, reduced, "column");
      sol.duals.assign(rows.size(), 0.0);
      read_block(expect_count("# Rows "), row_of, sol.duals, "row");
    }
  }
  sol.status = map_status(status_text, has_primal);
  sol.message = status_text;
  if (sol.status == SolveStatus::optimal && !has_primal)
    throw ParseError("status Optimal without primal values");
  if (sol.status == SolveStatus::optimal) {
    sol.gap = 0.0;
    sol.best_bound = sol.objective;
  }
  return sol;
}

ExternalBackend::ExternalBackend(ExternalSolverConfig config) : config_(std::move(config)) {
  const std::string program = first_word(config_.command);
  if (!executable_exists(program))
    throw ConfigError("external solver command not found: '" + program + "'");
}

Solution solve_external(const MilpModel& model, const SolveConfig& config,
                        const ExternalSolverConfig& external) {
  config.validate();
  if (!executable_exists(first_word(external.command)))
    throw ConfigError("external solver command not found: '" + first_word(external.command) + "'");

  fs::path dir = external.work_dir;
  const bool own_dir = dir.empty();
  if (own_dir)
    dir = fs::temp_directory_path() /
          ("gtep-ext-" + std::to_string(::getpid()) + "-" + std::to_string(g_run_counter++));
  fs::create_directories(dir);

  RunResult first = run_once(model, config, external, dir, "model");
  Solution sol = std::move(first.solution);
  if (sol.has_primal()) {
    if (model.num_binaries() > 0) {
      // second pass: LP with binaries fixed, for duals
      MilpModel fixed(model.name());
      for (std::size_t j = 0; j < model.num_variables(); ++j) {
        const Variable& v = model.variable(static_cast<int>(j));
        if (v.type == VarType::binary) {
          const double r = std::round(sol.primal[j]);
          fixed.add_variable(v.name, r, r, VarType::continuous, model.costs()[j]);
        } else {
          fixed.add_variable(v.name, v.lower, v.upper, v.type, model.costs()[j]);
        }
      }
      for (const Constraint& c : model.constraints()) {
        std::vector<Term> terms;
        terms.reserve(c.row.size());
        for (const auto& [j, a] : c.row) terms.push_back({VarId{j}, a});
        fixed.add_constraint(c.name, terms, c.sense, c.rhs);
      }
      fixed.set_objective_offset(model.objective_offset());
      RunResult second = run_once(fixed, config, external, dir, "fixed");
      if (second.solution.status != SolveStatus::optimal)
        throw ExternalSolverError("integer-fixed LP returned status " +
                                      std::string(to_string(second.solution.status)),
                                  first.log + second.log);
      sol.duals = std::move(second.solution.duals);
      sol.primal = std::move(second.solution.primal);
      sol.objective = second.solution.objective;
    }
    if (sol.duals.empty()) sol.duals.assign(model.num_constraints(), 0.0);
  }
  if (own_dir && !external.keep_files) {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  return sol;
}

}  // namespace gtep
