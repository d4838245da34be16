#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace resopt {

/// Calendar day. Water-year accounting runs June 1 .. May 31 throughout the
/// toolkit; volumes are Mm3, rates Mm3/day.
struct DayStamp {
  int year = 1970;
  unsigned month = 1;  // 1..12
  unsigned day = 1;    // 1..31

  bool valid() const;
  std::string str() const;  // YYYY-MM-DD
  static DayStamp parse(const std::string& text);

  friend bool operator==(const DayStamp&, const DayStamp&) = default;
  friend auto operator<=>(const DayStamp&, const DayStamp&) = default;
};

bool is_leap_year(int year);
unsigned days_in_month(int year, unsigned month);
std::int64_t day_number(DayStamp d);  // days since 1970-01-01
DayStamp from_day_number(std::int64_t n);
DayStamp next_day(DayStamp d);

/// Water year of a date: Y for any date in [Y-06-01, (Y+1)-05-31].
int water_year_of(DayStamp d);

/// Slot of a date on the cyclic 365-entry water-year grid (0 = June 1).
/// Feb 29 maps onto Feb 28's slot.
int water_year_slot(DayStamp d);

/// First calendar day of water-year slot `slot` in water year `wy`.
DayStamp slot_to_date(int wy, int slot);

/// Contiguous daily series of nonnegative volumes [Mm3/day].
class DailySeries {
 public:
  DailySeries() = default;
  DailySeries(DayStamp start, std::vector<double> values);

  DayStamp start() const { return start_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  DayStamp stamp_at(std::size_t i) const;
  DayStamp last() const { return stamp_at(values_.size() - 1); }

  /// First and last complete water year fully covered, or {1,0} if none.
  std::pair<int, int> complete_water_years() const;

  /// Sub-series restricted to [from, to] inclusive; throws if out of range.
  DailySeries window(DayStamp from, DayStamp to) const;

 private:
  DayStamp start_;
  std::vector<double> values_;
};

struct CsvColumns {
  std::string date = "date";
  std::string flow = "flow_mm3";
};

DailySeries load_daily_csv(const std::string& path, const CsvColumns& cols = {});
void write_daily_csv(const std::string& path, const DailySeries& s);

/// Totals per complete water year [Mm3]; partial edge years dropped.
/// Throws if no complete water year is covered.
std::map<int, double> annual_totals(const DailySeries& s);

struct MonthlyStat {
  double mean = 0.0;  // of monthly totals [Mm3]
  double sd = 0.0;
  double lag1 = 0.0;  // correlation with the chronologically previous month
};

/// Per-calendar-month statistics of monthly totals over complete water years.
/// Requires at least two complete water years. Index 0 = January.
std::array<MonthlyStat, 12> monthly_stats(const DailySeries& s);

/// Set of equally-shaped daily inflow realizations.
struct InflowEnsemble {
  std::vector<DailySeries> realizations;
  int years_per_realization = 0;
  std::size_t steps_per_realization = 0;

  std::size_t size() const { return realizations.size(); }
  double max_value() const;
};

}  // namespace resopt
