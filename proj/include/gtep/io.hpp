#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "gtep/planner.hpp"

namespace gtep {

/// Reads an instance document. Profile objects of the form
/// {"csv": path, "column": name} are resolved against the document's
/// directory. Throws ParseError with the offending field path (and line for
/// JSON syntax errors) and IoError when a file cannot be read.
[[nodiscard]] Instance load_instance(const std::filesystem::path& path);
[[nodiscard]] Instance parse_instance(std::string_view json_text,
                                      const std::filesystem::path& base_dir = {});

/// A file could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// 17 significant digits, "-0" folded to "0".
[[nodiscard]] std::string format_number(double v);

[[nodiscard]] std::string plan_json(const ExpansionPlan& plan, const Instance& instance);

/// year,investment,generation,startup,violation,deficit,elastic_gain,total
/// (undiscounted yearly terms) followed by a discount_factor column.
[[nodiscard]] std::string costs_csv(const ExpansionPlan& plan);

/// One row per (year, t, d, h, s) of every year, 1-based indices.
[[nodiscard]] std::string dispatch_csv(const ExpansionPlan& plan, const Instance& instance);

/// One row per (year, t, s) with hydro storage, release and slacks.
[[nodiscard]] std::string hydro_csv(const ExpansionPlan& plan, const Instance& instance);

/// Build decisions of a plan.json document.
[[nodiscard]] std::map<int, Build> parse_plan_builds(std::string_view json_text);

/// Calendar-day profiles from a CSV with columns day (1..365), hour (1..24)
/// and `column`.
[[nodiscard]] DailyProfiles read_daily_profiles(const std::filesystem::path& path,
                                                const std::string& column);

/// {"day_assignment": [...], "medoids": [[...]], "error": e}
[[nodiscard]] std::string day_assignment_json(const TypicalDaySuggestion& s);

}  // namespace gtep
