#include "resopt/thresholds.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "resopt/rng.hpp"

namespace resopt {

namespace {

std::uint64_t series_hash(const DailySeries& s) {
  const DayStamp start = s.start();
  std::uint64_t h = fnv1a64(&start, sizeof(DayStamp));
  return fnv1a64(s.values().data(), s.values().size() * sizeof(double), h);
}

}  // namespace

double MefSchedule::annual_requirement() const {
  return std::accumulate(mef.begin(), mef.end(), 0.0);
}

MefSchedule percent_of_maf(const DailySeries& historical, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("fraction must be in (0,1]");
  }
  auto [first, lastwy] = historical.complete_water_years();
  if (lastwy - first + 1 < 2) {
    throw std::runtime_error("percent_of_maf needs at least 2 complete water years");
  }

  // Mean daily flow per calendar month over the complete water years.
  std::array<double, 12> sum{}, ndays{};
  const std::int64_t base = day_number(historical.start());
  const std::int64_t i0 = day_number(DayStamp{first, 6, 1}) - base;
  const std::int64_t i1 = day_number(DayStamp{lastwy + 1, 5, 31}) - base;
  for (std::int64_t i = i0; i <= i1; ++i) {
    const DayStamp d = historical.stamp_at(std::size_t(i));
    sum[d.month - 1] += historical[std::size_t(i)];
    ndays[d.month - 1] += 1.0;
  }

  MefSchedule out;
  for (int slot = 0; slot < 365; ++slot) {
    const DayStamp d = slot_to_date(2001, slot);  // any non-leap grid year
    const int m = int(d.month) - 1;
    out.mef[slot] = fraction * sum[m] / ndays[m];
  }
  char tag[48];
  std::snprintf(tag, sizeof tag, "percent_of_maf:%.2f", fraction);
  out.method = tag;
  out.source_hash = series_hash(historical);
  return out;
}

MefSchedule moefcc(const DailySeries& historical) {
  auto [first, lastwy] = historical.complete_water_years();
  const int n = lastwy - first + 1;
  if (n < 5) {
    throw std::runtime_error("moefcc needs at least 5 complete water years");
  }
  const auto totals = annual_totals(historical);

  // Weibull plotting positions: k-th largest total has exceedance k/(n+1).
  std::vector<std::pair<double, int>> ranked;  // (total, water year)
  for (const auto& [wy, total] : totals) ranked.emplace_back(total, wy);
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  int pick = -1;
  double best = 1e300;
  for (int k = 1; k <= n; ++k) {
    const double p = double(k) / double(n + 1);
    const double gap = std::abs(p - 0.90);
    // ties resolved toward the lower flow, i.e. the larger k
    if (gap < best - 1e-15 || (std::abs(gap - best) <= 1e-15)) {
      best = std::min(best, gap);
      pick = k;
    }
  }
  const int wy = ranked[std::size_t(pick - 1)].second;

  // Seasonal fractions applied to the selected year's daily flows.
  auto season_fraction = [](unsigned month) {
    if (month >= 6 && month <= 9) return 0.30;                      // monsoon
    if (month == 10 || month == 4 || month == 5) return 0.25;       // lean
    return 0.20;                                                    // dry
  };

  MefSchedule out;
  const std::int64_t base = day_number(historical.start());
  for (int slot = 0; slot < 365; ++slot) {
    const DayStamp d = slot_to_date(wy, slot);
    const double q = historical[std::size_t(day_number(d) - base)];
    out.mef[slot] = season_fraction(d.month) * q;
  }
  out.method = "moefcc";
  out.source_hash = series_hash(historical);
  return out;
}

FloodThreshold flood_threshold(const DailySeries& release_history) {
  if (release_history.empty()) throw std::runtime_error("empty release history");
  double mx = 0.0;
  for (double v : release_history.values()) mx = std::max(mx, v);
  return FloodThreshold{mx};
}

void write_schedule_csv(const std::string& path, const MefSchedule& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write schedule CSV: " + path);
  out << "water_year_day,mef_mm3\n";
  char buf[40];
  for (int slot = 0; slot < 365; ++slot) {
    std::snprintf(buf, sizeof buf, "%.17g", s.mef[slot]);
    out << (slot + 1) << ',' << buf << '\n';
  }
}

MefSchedule load_schedule_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open schedule CSV: " + path);
  MefSchedule s;
  std::string line;
  std::getline(in, line);  // header
  int count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || count >= 365) {
      throw std::runtime_error(path + ": malformed schedule row");
    }
    s.mef[count++] = std::stod(line.substr(comma + 1));
  }
  if (count != 365) throw std::runtime_error(path + ": expected 365 rows");
  s.method = "csv:" + path;
  return s;
}

}  // namespace resopt
