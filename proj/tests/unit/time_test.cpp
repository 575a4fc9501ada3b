#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "gtep/time.hpp"

namespace gtep {
namespace {

constexpr std::array<int, 12> kQuarters = {0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3};

// Zeller's congruence: 0 = Saturday, 1 = Sunday, ..., 6 = Friday.
int zeller(int year, int month, int day) {
  if (month < 3) month += 12, year -= 1;
  const int k = year % 100, j = year / 100;
  return (day + 13 * (month + 1) / 5 + k + k / 4 + j / 4 + 5 * j) % 7;
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int weekdays_in_months(int year, int first_month, int last_month) {
  const int feb = is_leap(year) ? 29 : 28;
  const int len[12] = {31, feb, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int count = 0;
  for (int m = first_month; m <= last_month; ++m)
    for (int d = 1; d <= len[m - 1]; ++d) {
      // Feb-29 is folded into Feb-28's typical day.
      const int wd = (m == 2 && d == 29) ? zeller(year, 2, 28) : zeller(year, m, d);
      count += wd >= 2;
    }
  return count;
}

TEST(TimeStructure, DefaultIsOneBucket) {
  const TimeStructure t;
  EXPECT_EQ(t.num_seasons(), 1);
  EXPECT_EQ(t.num_days(0), 1);
  EXPECT_EQ(t.duration(0, 0), 365);
  EXPECT_EQ(t.days_in_year(), 365);
}

TEST(TimeStructure, WeekdayCountsMatchCalendarOracle) {
  for (int year = 2019; year <= 2030; ++year) {
    const bool leap = is_leap(year);
    const TimeStructure t =
        build_time_structure(kQuarters, weekday_weekend_assignment(year), 0.0, leap);
    EXPECT_EQ(t.days_in_year(), leap ? 366 : 365) << year;
    for (int s = 0; s < 4; ++s) {
      EXPECT_EQ(t.duration(s, 0), weekdays_in_months(year, 3 * s + 1, 3 * s + 3)) << year << " " << s;
      int season_days = 0;
      for (int m = 3 * s + 1; m <= 3 * s + 3; ++m) season_days += days_in_month(m);
      if (leap && s == 0) ++season_days;
      EXPECT_EQ(t.duration(s, 0) + t.duration(s, 1), season_days);
    }
  }
  // Jan-Mar weekday weight of a non-leap year is 64 or 65 depending on the year start.
  std::set<int> seen;
  for (int year = 2017; year <= 2030; ++year) {
    if (is_leap(year)) continue;
    seen.insert(build_time_structure(kQuarters, weekday_weekend_assignment(year), 0.0).duration(0, 0));
  }
  EXPECT_EQ(seen, (std::set<int>{64, 65}));
}

TEST(TimeStructure, PartitionHoldsForRandomAssignments) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    std::array<int, 12> m2s{};
    const int T = 1 + static_cast<int>(rng() % 6);
    for (int m = 0; m < 12; ++m) m2s[m] = m < T ? m : static_cast<int>(rng() % T);
    const int per = 1 + static_cast<int>(rng() % 4);
    std::vector<int> assign(365);
    for (int d = 0; d < 365; ++d) assign[d] = d < 31 * 12 ? static_cast<int>(rng() % per) : 0;
    // Make sure every typical day receives a day: the first days of each season.
    std::vector<int> seen(T, 0);
    for (int d = 0; d < 365; ++d) {
      const int t = m2s[month_day_of(d).first - 1];
      if (seen[t] < per) assign[d] = seen[t]++;
    }
    const TimeStructure ts = build_time_structure(m2s, assign, 0.01);
    EXPECT_EQ(ts.days_in_year(), 365);
    for (int t = 0; t < ts.num_seasons(); ++t)
      for (int d = 0; d < ts.num_days(t); ++d) EXPECT_GE(ts.duration(t, d), 1);
  }
}

TEST(TimeStructure, LeapDayJoinsFebruary28) {
  std::vector<int> assign(365, 0);
  assign[31 + 27] = 1;  // Feb-28 alone in typical day 1
  const TimeStructure t = build_time_structure(std::array<int, 12>{}, assign, 0.0, true);
  EXPECT_EQ(t.duration(0, 1), 2);
  EXPECT_EQ(t.duration(0, 0), 364);
}

TEST(TimeStructure, RejectsBadAssignments) {
  std::vector<std::pair<int, int>> pairs(365, {0, 0});
  for (int d = 0; d < 365; ++d) pairs[d].first = kQuarters[month_day_of(d).first - 1];
  EXPECT_NO_THROW((void)build_time_structure(kQuarters, pairs, 0.0));
  auto wrong = pairs;
  wrong[0] = {1, 0};  // Jan-1 in a spring typical day
  EXPECT_THROW((void)build_time_structure(kQuarters, wrong, 0.0), std::invalid_argument);
  auto unmapped = pairs;
  unmapped[40] = {-1, -1};
  EXPECT_THROW((void)build_time_structure(kQuarters, unmapped, 0.0), std::invalid_argument);
  std::vector<int> gap(365, 0);
  gap[0] = 2;  // typical day 1 of season 1 never used
  EXPECT_THROW((void)build_time_structure(kQuarters, gap, 0.0), std::invalid_argument);
  EXPECT_THROW((void)build_time_structure(kQuarters, std::vector<int>(364, 0), 0.0),
               std::invalid_argument);
}

TEST(Beta, MatchesDirectFormula) {
  std::array<int, 12> m2s{};
  for (int m = 1; m < 12; ++m) m2s[m] = 1;
  std::vector<int> assign(365, 0);
  for (int d = 31; d < 41; ++d) assign[d] = 0;
  for (int d = 41; d < 365; ++d) assign[d] = 1;
  const TimeStructure t = build_time_structure(m2s, assign, 0.1);
  ScenarioSet sc;
  sc.scenarios = {Scenario{"a", 0.5}, Scenario{"b", 0.5}};
  EXPECT_EQ(t.duration(1, 0), 10);
  EXPECT_NEAR(beta(1, 0, 0, t, sc), 4.5455, 1e-4);
  EXPECT_EQ(beta(1, 0, 0, t, sc), 0.5 * 10 / 1.1);
  EXPECT_EQ(beta(0, 0, 1, t, sc), 0.5 * 31);
  EXPECT_EQ(season_weight(1, 1, t, sc), 0.5 / 1.1);
}

TEST(Beta, DecreasesAcrossSeasonsWithPositiveRate) {
  std::vector<int> assign(365, 0);
  const TimeStructure t = build_time_structure(kQuarters, assign, 0.02);
  ScenarioSet sc;
  for (int s = 1; s < 4; ++s)
    EXPECT_LT(beta(s, 0, 0, t, sc) / t.duration(s, 0), beta(s - 1, 0, 0, t, sc) / t.duration(s - 1, 0));
  for (int s = 0; s < 4; ++s)
    EXPECT_EQ(beta(s, 0, 0, t, sc), 1.0 * t.duration(s, 0) / std::pow(1.02, s));
}

TEST(Beta, SeasonRateCompoundsToAnnual) {
  const double rt = season_rate_from_annual(0.08, 4);
  EXPECT_NEAR(std::pow(1 + rt, 4), 1.08, 1e-14);
  EXPECT_EQ(season_rate_from_annual(0.0, 3), 0.0);
}

TEST(TimeGrid, SlotsRoundTrip) {
  const TimeStructure t = build_time_structure(kQuarters, weekday_weekend_assignment(2024), 0.0);
  const TimeGrid g(t, 3);
  EXPECT_EQ(g.num_slots(), 3 * 8 * 24);
  for (int k = 0; k < g.num_slots(); ++k) {
    const auto c = g.coord(k);
    EXPECT_EQ(g.slot(c.t, c.d, c.h, c.s), k);
    const auto p = g.coord(g.previous_hour(k));
    EXPECT_EQ(p.h, (c.h + 23) % 24);
    EXPECT_EQ(p.d, c.d);
    EXPECT_EQ(p.t, c.t);
  }
  EXPECT_TRUE(g.fits_hourly(Profile(std::vector<double>(24, 0.0))));
  EXPECT_FALSE(g.fits_hourly(Profile(std::vector<double>(48, 0.0))));
  EXPECT_TRUE(g.fits_seasonal(Profile(std::vector<double>(12, 0.0))));
}

DailyProfiles flat(double level) {
  DailyProfiles p(365);
  for (auto& day : p) day.fill(level);
  return p;
}

TEST(SuggestTypicalDays, TwoClustersAreRecovered) {
  DailyProfiles demand(365), pv = flat(0.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.5);
  std::vector<int> truth(365);
  for (int d = 0; d < 365; ++d) {
    truth[d] = (d * 7919) % 3 == 0;
    for (int h = 0; h < 24; ++h)
      demand[d][h] = (truth[d] ? 100.0 + 40 * std::sin(h / 3.8) : 60.0 - 20 * std::cos(h / 3.8)) + noise(rng);
  }
  const TypicalDaySuggestion s = suggest_typical_days(demand, pv, std::array<int, 12>{}, 2, 3);
  // Same partition up to label.
  const bool flip = s.day_assignment[0] != truth[0];
  for (int d = 0; d < 365; ++d) EXPECT_EQ(s.day_assignment[d], flip ? 1 - truth[d] : truth[d]) << d;
}

TEST(SuggestTypicalDays, ErrorNeverIncreasesWithK) {
  DailyProfiles demand(365), pv(365);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int d = 0; d < 365; ++d)
    for (int h = 0; h < 24; ++h) demand[d][h] = 50 + 30 * u(rng), pv[d][h] = 20 * u(rng);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 6; ++k) {
    const TypicalDaySuggestion s = suggest_typical_days(demand, pv, kQuarters, k, 42);
    EXPECT_LE(s.error, prev + 1e-9) << k;
    prev = s.error;
    EXPECT_EQ(s.medoids.size(), 4u);
    const TimeStructure t = build_time_structure(kQuarters, s.day_assignment, 0.0);
    EXPECT_EQ(t.days_in_year(), 365);
  }
  const auto a = suggest_typical_days(demand, pv, kQuarters, 3, 42);
  const auto b = suggest_typical_days(demand, pv, kQuarters, 3, 42);
  EXPECT_EQ(a.day_assignment, b.day_assignment);
}

TEST(SuggestTypicalDays, EdgeCases) {
  DailyProfiles demand(365), pv = flat(0.0);
  // Days after the 28th repeat the 28th, so 28 typical days per month are exact.
  for (int d = 0; d < 365; ++d) {
    const auto [month, dom] = month_day_of(d);
    for (int h = 0; h < 24; ++h) demand[d][h] = (month * 31 + std::min(dom, 28)) * 24 + h * h;
  }
  std::array<int, 12> m2s{};
  for (int m = 0; m < 12; ++m) m2s[m] = m;
  const auto every_day = suggest_typical_days(demand, pv, m2s, 28, 1);
  EXPECT_NEAR(every_day.error, 0.0, 1e-12);
  EXPECT_THROW((void)suggest_typical_days(demand, pv, m2s, 29, 1), std::invalid_argument);
  const auto same = suggest_typical_days(flat(10.0), pv, std::array<int, 12>{}, 1, 1);
  EXPECT_TRUE(std::all_of(same.day_assignment.begin(), same.day_assignment.end(),
                          [](int d) { return d == 0; }));
}

}  // namespace
}  // namespace gtep
