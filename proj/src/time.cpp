#include "gtep/time.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace gtep {
namespace {

constexpr std::array<int, 12> kMonthDays = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
constexpr int kFeb28 = 31 + 27;  // 0-based day of year

std::string day_label(int day) {
  const auto [m, d] = month_day_of(day);
  return "day " + std::to_string(day + 1) + " (" + std::to_string(m) + "/" + std::to_string(d) + ")";
}

}  // namespace

TimeStructure::TimeStructure() {
  Season all;
  all.name = "year";
  for (int m = 1; m <= 12; ++m) all.months.push_back(m);
  all.day_weights = {kDaysInYear};
  seasons_.push_back(std::move(all));
  assignment_.assign(kDaysInYear, {0, 0});
  offsets_ = {0};
  total_days_ = 1;
}

int TimeStructure::days_in_year() const {
  int sum = 0;
  for (const Season& s : seasons_) sum = std::accumulate(s.day_weights.begin(), s.day_weights.end(), sum);
  return sum;
}

std::pair<int, int> month_day_of(int day_of_year) {
  if (day_of_year < 0 || day_of_year >= kDaysInYear)
    throw std::out_of_range("day of year out of range");
  int m = 0;
  while (day_of_year >= kMonthDays[m]) day_of_year -= kMonthDays[m++];
  return {m + 1, day_of_year + 1};
}

int days_in_month(int month) { return kMonthDays.at(month - 1); }

TimeStructure build_time_structure(const std::array<int, 12>& month_to_season,
                                   const std::vector<std::pair<int, int>>& day_assignment,
                                   double season_rate, bool leap_year,
                                   std::vector<std::string> season_names) {
  if (!(season_rate >= 0.0) || !std::isfinite(season_rate))
    throw std::invalid_argument("season discount rate must be finite and >= 0");
  const int T = *std::max_element(month_to_season.begin(), month_to_season.end()) + 1;
  std::vector<bool> used(T, false);
  for (int m = 0; m < 12; ++m) {
    if (month_to_season[m] < 0)
      throw std::invalid_argument("month " + std::to_string(m + 1) + " has no season");
    used[month_to_season[m]] = true;
  }
  for (int t = 0; t < T; ++t)
    if (!used[t]) throw std::invalid_argument("season " + std::to_string(t + 1) + " has no month");
  if (day_assignment.size() != static_cast<std::size_t>(kDaysInYear))
    throw std::invalid_argument("day assignment must have 365 entries, got " +
                                std::to_string(day_assignment.size()));
  if (!season_names.empty() && season_names.size() != static_cast<std::size_t>(T))
    throw std::invalid_argument("season name count does not match season count");

  TimeStructure ts;
  ts.seasons_.assign(T, {});
  ts.month_to_season_ = month_to_season;
  for (int m = 0; m < 12; ++m) ts.seasons_[month_to_season[m]].months.push_back(m + 1);
  for (int t = 0; t < T; ++t)
    ts.seasons_[t].name = season_names.empty() ? "season " + std::to_string(t + 1) : season_names[t];

  for (int day = 0; day < kDaysInYear; ++day) {
    const auto [t, d] = day_assignment[day];
    if (t < 0 || d < 0) throw std::invalid_argument(day_label(day) + " is unmapped");
    const int month_season = month_to_season[month_day_of(day).first - 1];
    if (t != month_season)
      throw std::invalid_argument(day_label(day) + " is assigned to a typical day of season " +
                                  std::to_string(t + 1) + " but its month belongs to season " +
                                  std::to_string(month_season + 1));
    auto& w = ts.seasons_[t].day_weights;
    if (static_cast<int>(w.size()) <= d) w.resize(d + 1, 0);
    ++w[d];
  }
  if (leap_year) ++ts.seasons_[day_assignment[kFeb28].first].day_weights[day_assignment[kFeb28].second];
  for (int t = 0; t < T; ++t) {
    const auto& w = ts.seasons_[t].day_weights;
    for (std::size_t d = 0; d < w.size(); ++d)
      if (w[d] == 0)
        throw std::invalid_argument("typical day " + std::to_string(d + 1) + " of season " +
                                    std::to_string(t + 1) + " has no calendar days");
  }
  ts.assignment_ = day_assignment;
  ts.offsets_.assign(T, 0);
  int offset = 0;
  for (int t = 0; t < T; ++t) {
    ts.offsets_[t] = offset;
    offset += static_cast<int>(ts.seasons_[t].day_weights.size());
  }
  ts.total_days_ = offset;
  ts.season_rate_ = season_rate;
  ts.leap_ = leap_year;
  return ts;
}

TimeStructure build_time_structure(const std::array<int, 12>& month_to_season,
                                   const std::vector<int>& day_assignment, double season_rate,
                                   bool leap_year, std::vector<std::string> season_names) {
  if (day_assignment.size() != static_cast<std::size_t>(kDaysInYear))
    throw std::invalid_argument("day assignment must have 365 entries, got " +
                                std::to_string(day_assignment.size()));
  std::vector<std::pair<int, int>> pairs(kDaysInYear);
  for (int day = 0; day < kDaysInYear; ++day) {
    const int m = month_day_of(day).first;
    pairs[day] = {month_to_season[m - 1], day_assignment[day]};
  }
  return build_time_structure(month_to_season, pairs, season_rate, leap_year,
                              std::move(season_names));
}

double season_rate_from_annual(double annual_rate, int num_seasons) {
  if (num_seasons < 1) throw std::invalid_argument("need at least one season");
  return std::pow(1.0 + annual_rate, 1.0 / num_seasons) - 1.0;
}

std::vector<int> weekday_weekend_assignment(int calendar_year) {
  using namespace std::chrono;
  const year y{calendar_year};
  const sys_days jan1 = y / January / 1;
  std::vector<int> out(kDaysInYear);
  for (int day = 0; day < kDaysInYear; ++day) {
    const int shift = (y.is_leap() && day > kFeb28) ? 1 : 0;
    const weekday w{jan1 + days{day + shift}};
    out[day] = (w == Saturday || w == Sunday) ? 1 : 0;
  }
  return out;
}

double season_weight(int t, int s, const TimeStructure& time, const ScenarioSet& scenarios) {
  return scenarios.scenarios.at(s).probability / std::pow(1.0 + time.season_rate(), t);
}

double beta(int t, int d, int s, const TimeStructure& time, const ScenarioSet& scenarios) {
  return scenarios.scenarios.at(s).probability * time.duration(t, d) /
         std::pow(1.0 + time.season_rate(), t);
}

TimeGrid::TimeGrid(const TimeStructure& time, int num_scenarios)
    : days_(time.total_days()), seasons_(time.num_seasons()), scenarios_(num_scenarios) {
  offsets_.resize(seasons_);
  for (int t = 0; t < seasons_; ++t) {
    offsets_[t] = time.day_offset(t);
    for (int d = 0; d < time.num_days(t); ++d) day_coord_.push_back({t, d, 0, 0});
  }
}

TimeGrid::Coord TimeGrid::coord(int slot) const {
  const int h = slot % kHoursPerDay;
  const int flat = slot / kHoursPerDay;
  Coord c = day_coord_.at(flat % days_);
  c.h = h;
  c.s = flat / days_;
  return c;
}

bool TimeGrid::fits_hourly(const Profile& p) const {
  const std::size_t n = p.values.size();
  return n == 1 || n == static_cast<std::size_t>(kHoursPerDay) ||
         n == static_cast<std::size_t>(num_slots());
}

bool TimeGrid::fits_seasonal(const Profile& p) const {
  const std::size_t n = p.values.size();
  return n == 1 || n == static_cast<std::size_t>(seasons_) ||
         n == static_cast<std::size_t>(num_season_slots());
}

double TimeGrid::hourly(const Profile& p, int slot) const {
  const std::size_t n = p.values.size();
  if (n == 1) return p.values[0];
  if (n == static_cast<std::size_t>(num_slots())) return p.values[slot];
  if (n == static_cast<std::size_t>(kHoursPerDay)) return p.values[slot % kHoursPerDay];
  throw std::invalid_argument("hourly profile has " + std::to_string(n) + " values");
}

double TimeGrid::seasonal(const Profile& p, int t, int s) const {
  const std::size_t n = p.values.size();
  if (n == 1) return p.values[0];
  if (n == static_cast<std::size_t>(num_season_slots())) return p.values[season_slot(t, s)];
  if (n == static_cast<std::size_t>(seasons_)) return p.values[t];
  throw std::invalid_argument("seasonal profile has " + std::to_string(n) + " values");
}

TypicalDaySuggestion suggest_typical_days(const DailyProfiles& demand,
                                          const DailyProfiles& renewable,
                                          const std::array<int, 12>& month_to_season, int k,
                                          std::uint64_t seed) {
  if (demand.size() != static_cast<std::size_t>(kDaysInYear))
    throw std::invalid_argument("demand profiles must cover 365 days");
  if (!renewable.empty() && renewable.size() != demand.size())
    throw std::invalid_argument("renewable profiles must cover 365 days");
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  const int T = *std::max_element(month_to_season.begin(), month_to_season.end()) + 1;

  TypicalDaySuggestion out;
  out.day_assignment.assign(kDaysInYear, -1);
  out.medoids.assign(T, {});
  std::mt19937_64 rng(seed);

  for (int t = 0; t < T; ++t) {
    std::vector<int> days;
    for (int day = 0; day < kDaysInYear; ++day)
      if (month_to_season[month_day_of(day).first - 1] == t) days.push_back(day);
    const int n = static_cast<int>(days.size());
    if (n == 0) throw std::invalid_argument("season " + std::to_string(t + 1) + " has no days");
    if (k > n)
      throw std::invalid_argument("k = " + std::to_string(k) + " exceeds the " + std::to_string(n) +
                                  " days of season " + std::to_string(t + 1));

    std::vector<std::array<double, kHoursPerDay>> net(n);
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int h = 0; h < kHoursPerDay; ++h) {
        double v = demand[days[i]][h];
        if (!renewable.empty()) v -= renewable[days[i]][h];
        net[i][h] = v;
        sum += v;
        sumsq += v * v;
      }
    }
    const double count = static_cast<double>(n) * kHoursPerDay;
    const double mean = sum / count;
    const double var = std::max(0.0, sumsq / count - mean * mean);
    const double scale = var > 0.0 ? std::sqrt(var) : 1.0;
    for (auto& row : net)
      for (double& v : row) v = (v - mean) / scale;

    std::vector<double> dist(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double s = 0.0;
        for (int h = 0; h < kHoursPerDay; ++h) {
          const double diff = net[i][h] - net[j][h];
          s += diff * diff;
        }
        dist[i * n + j] = dist[j * n + i] = std::sqrt(s);
      }
    }
    const auto D = [&](int i, int j) { return dist[static_cast<std::size_t>(i) * n + j]; };
    const auto cost_of = [&](const std::vector<int>& med) {
      double c = 0.0;
      for (int i = 0; i < n; ++i) {
        double best = D(i, med[0]);
        for (std::size_t q = 1; q < med.size(); ++q) best = std::min(best, D(i, med[q]));
        c += best;
      }
      return c;
    };

    // Fisher-Yates with raw engine output keeps the order identical across
    // standard library implementations.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(order[i], order[static_cast<int>(rng() % (i + 1))]);

    std::vector<int> med;
    std::vector<bool> is_med(n, false);
    double cost = 0.0;
    for (int kk = 1; kk <= k; ++kk) {
      int add = -1;
      double add_cost = 0.0;
      for (int c : order) {
        if (is_med[c]) continue;
        med.push_back(c);
        const double v = cost_of(med);
        med.pop_back();
        if (add < 0 || v < add_cost) {
          add = c;
          add_cost = v;
        }
      }
      med.push_back(add);
      is_med[add] = true;
      cost = add_cost;
      for (bool improved = true; improved;) {
        improved = false;
        for (std::size_t q = 0; q < med.size() && !improved; ++q) {
          for (int c : order) {
            if (is_med[c]) continue;
            const int old = med[q];
            med[q] = c;
            const double v = cost_of(med);
            if (v < cost - 1e-12 * (1.0 + cost)) {
              is_med[old] = false;
              is_med[c] = true;
              cost = v;
              improved = true;
              break;
            }
            med[q] = old;
          }
        }
      }
    }

    std::sort(med.begin(), med.end());
    for (int i = 0; i < n; ++i) {
      int best = 0;
      for (int q = 1; q < static_cast<int>(med.size()); ++q)
        if (D(i, med[q]) < D(i, med[best])) best = q;
      out.day_assignment[days[i]] = best;
    }
    for (int m : med) out.medoids[t].push_back(days[m]);
    out.error += cost;
  }
  return out;
}

}  // namespace gtep
