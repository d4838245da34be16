#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "resopt/hydroseries.hpp"

namespace resopt {

/// Cyclic daily MEF threshold schedule [Mm3/day], one entry per day of the
/// 365-day water-year grid (slot 0 = June 1; Feb 29 reuses Feb 28's value).
struct MefSchedule {
  std::array<double, 365> mef{};
  std::string method;        // e.g. "percent_of_maf:0.30" or "moefcc"
  std::uint64_t source_hash = 0;

  double on(DayStamp d) const { return mef[water_year_slot(d)]; }
  double annual_requirement() const;
};

struct FloodThreshold {
  double ft = 0.0;  // Mm3/day
};

/// Thresholds proportional to the historical mean flow of each calendar
/// month, scaled so the annual sum is fraction x MAF.
MefSchedule percent_of_maf(const DailySeries& historical, double fraction);

/// MoEF&CC seasonal thresholds: fractions {30% Jun-Sep, 25% Oct/Apr/May,
/// 20% Nov-Mar} of the daily flows of the 90%-exceedance year (Weibull
/// plotting positions k/(n+1) on water-year totals; nearest to 0.90, ties
/// resolved toward the lower flow).
MefSchedule moefcc(const DailySeries& historical);

/// Maximum daily release over the historical record.
FloodThreshold flood_threshold(const DailySeries& release_history);

void write_schedule_csv(const std::string& path, const MefSchedule& s);
MefSchedule load_schedule_csv(const std::string& path);

}  // namespace resopt
