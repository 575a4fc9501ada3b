#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gtep/system.hpp"

namespace gtep {

inline constexpr int kHoursPerDay = 24;
inline constexpr int kDaysInYear = 365;

/// Calendar-day to typical-day mapping for one year.
///
/// Seasons and typical days are 0-based here; the 1-based t, d, h of the
/// model names are produced by the formulation. D_{t,d} counts calendar days.
class TimeStructure {
 public:
  struct Season {
    std::string name;
    std::vector<int> months;        // 1..12
    std::vector<int> day_weights;   // D_{t,d}, days
  };

  /// One season of all months with one typical day of weight 365.
  TimeStructure();

  [[nodiscard]] int num_seasons() const { return static_cast<int>(seasons_.size()); }
  [[nodiscard]] int num_days(int t) const {
    return static_cast<int>(seasons_.at(t).day_weights.size());
  }
  /// Σ_t number of typical days.
  [[nodiscard]] int total_days() const { return total_days_; }
  /// Index of (t, 0) in the flattened typical-day list.
  [[nodiscard]] int day_offset(int t) const { return offsets_.at(t); }
  [[nodiscard]] int duration(int t, int d) const { return seasons_.at(t).day_weights.at(d); }
  [[nodiscard]] const std::vector<Season>& seasons() const { return seasons_; }
  [[nodiscard]] double season_rate() const { return season_rate_; }
  [[nodiscard]] int season_of_month(int month) const { return month_to_season_.at(month - 1); }
  [[nodiscard]] const std::array<int, 12>& month_to_season() const { return month_to_season_; }
  /// (season, typical day) per calendar day, 0-based day of year.
  [[nodiscard]] const std::vector<std::pair<int, int>>& day_assignment() const {
    return assignment_;
  }
  [[nodiscard]] bool leap_year() const { return leap_; }
  /// Σ_{t,d} D_{t,d}: 365, or 366 for a leap year.
  [[nodiscard]] int days_in_year() const;

  friend TimeStructure build_time_structure(const std::array<int, 12>&,
                                            const std::vector<std::pair<int, int>>&, double, bool,
                                            std::vector<std::string>);

 private:
  std::vector<Season> seasons_;
  std::array<int, 12> month_to_season_{};
  std::vector<std::pair<int, int>> assignment_;
  std::vector<int> offsets_;
  int total_days_ = 0;
  double season_rate_ = 0.0;
  bool leap_ = false;
};

/// Month (1..12) and day of month of a 0-based day of a non-leap year.
[[nodiscard]] std::pair<int, int> month_day_of(int day_of_year);
[[nodiscard]] int days_in_month(int month);

/// Builds a time structure.
///
/// `month_to_season[m]` is the 0-based season of month m+1; seasons must be
/// numbered 0..T-1 without gaps. `day_assignment` has 365 (season, typical
/// day) entries, one per calendar day of a non-leap year; the season must be
/// the one of the day's month. In a leap year Feb-29 counts toward Feb-28's
/// typical day. Every typical day must receive at least one calendar day.
/// Throws std::invalid_argument on unmapped or inconsistent days.
[[nodiscard]] TimeStructure build_time_structure(
    const std::array<int, 12>& month_to_season,
    const std::vector<std::pair<int, int>>& day_assignment, double season_rate,
    bool leap_year = false, std::vector<std::string> season_names = {});

/// Same, with the typical day given relative to the season of each day's month.
[[nodiscard]] TimeStructure build_time_structure(const std::array<int, 12>& month_to_season,
                                                 const std::vector<int>& day_assignment,
                                                 double season_rate, bool leap_year = false,
                                                 std::vector<std::string> season_names = {});

/// Per-season rate with (1 + rt)^T = 1 + r_a.
[[nodiscard]] double season_rate_from_annual(double annual_rate, int num_seasons);

/// Typical day 0 for Monday..Friday, 1 for Saturday and Sunday, for the
/// given calendar year (Feb-29 excluded from the 365 entries).
[[nodiscard]] std::vector<int> weekday_weekend_assignment(int calendar_year);

/// beta_{t,d,s} = p_s D_{t,d} / (1 + rt)^t with 0-based season t.
[[nodiscard]] double beta(int t, int d, int s, const TimeStructure& time,
                          const ScenarioSet& scenarios);

/// p_s / (1 + rt)^t, the weight of seasonal quantities.
[[nodiscard]] double season_weight(int t, int s, const TimeStructure& time,
                                   const ScenarioSet& scenarios);

/// Hourly index space of one yearly model.
///
/// Slot order is scenario-major, then flattened typical day, then hour:
/// slot = (s * total_days + day_offset(t) + d) * 24 + h. Season slots are
/// s * T + t.
class TimeGrid {
 public:
  struct Coord {
    int t = 0, d = 0, h = 0, s = 0;
  };

  TimeGrid(const TimeStructure& time, int num_scenarios);

  [[nodiscard]] int num_slots() const { return scenarios_ * days_ * kHoursPerDay; }
  [[nodiscard]] int num_season_slots() const { return scenarios_ * seasons_; }
  [[nodiscard]] int num_scenarios() const { return scenarios_; }
  [[nodiscard]] int num_seasons() const { return seasons_; }
  [[nodiscard]] int slot(int t, int d, int h, int s) const {
    return (s * days_ + offsets_[t] + d) * kHoursPerDay + h;
  }
  [[nodiscard]] int season_slot(int t, int s) const { return s * seasons_ + t; }
  [[nodiscard]] Coord coord(int slot) const;
  /// Slot of the previous hour of the same typical day (hour 0 wraps to 23).
  [[nodiscard]] int previous_hour(int slot) const {
    return slot % kHoursPerDay == 0 ? slot + kHoursPerDay - 1 : slot - 1;
  }

  [[nodiscard]] bool fits_hourly(const Profile& p) const;
  [[nodiscard]] bool fits_seasonal(const Profile& p) const;
  [[nodiscard]] double hourly(const Profile& p, int slot) const;
  [[nodiscard]] double seasonal(const Profile& p, int t, int s) const;

 private:
  std::vector<int> offsets_;
  std::vector<Coord> day_coord_;  // flattened typical day -> (t, d)
  int days_ = 0;
  int seasons_ = 0;
  int scenarios_ = 0;
};

/// One 24-hour vector per calendar day.
using DailyProfiles = std::vector<std::array<double, kHoursPerDay>>;

struct TypicalDaySuggestion {
  std::vector<int> day_assignment;          // 365 entries, as for build_time_structure
  std::vector<std::vector<int>> medoids;    // per season, calendar days (0-based)
  double error = 0.0;                       // Σ distance to the assigned medoid
};

/// k-medoids per season on net demand (demand minus renewable), z-scored per
/// season. Medoids for k are grown from those for k-1 and then improved by
/// swaps, so `error` never increases with k. `seed` orders the candidate
/// scan and thereby breaks ties. Typical days are numbered by the calendar
/// order of their medoids. Throws std::invalid_argument when k exceeds the
/// number of days of a season.
[[nodiscard]] TypicalDaySuggestion suggest_typical_days(const DailyProfiles& demand,
                                                        const DailyProfiles& renewable,
                                                        const std::array<int, 12>& month_to_season,
                                                        int k, std::uint64_t seed = 0);

}  // namespace gtep
