#include "resopt/hydroseries.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace resopt {

namespace {
namespace chr = std::chrono;

chr::year_month_day to_ymd(DayStamp d) {
  return chr::year_month_day{chr::year{d.year}, chr::month{d.month}, chr::day{d.day}};
}

DayStamp from_ymd(chr::year_month_day ymd) {
  return DayStamp{int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day())};
}

// Cumulative day offsets of a 365-day water year starting June 1 (Feb = 28).
constexpr std::array<int, 13> kWySlotBase = {
    //  Jun  Jul  Aug  Sep  Oct  Nov  Dec  Jan  Feb  Mar  Apr  May
    0, 30, 61, 92, 122, 153, 183, 214, 245, 273, 304, 334, 365};

// Calendar month -> position within the water year (June = 0 .. May = 11).
int wy_month_index(unsigned month) { return (int(month) + 6) % 12; }

}  // namespace

bool is_leap_year(int year) {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

unsigned days_in_month(int year, unsigned month) {
  static constexpr unsigned base[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month < 1 || month > 12) throw std::invalid_argument("month out of range");
  if (month == 2 && is_leap_year(year)) return 29;
  return base[month - 1];
}

bool DayStamp::valid() const {
  return month >= 1 && month <= 12 && day >= 1 && day <= days_in_month(year, month);
}

std::string DayStamp::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
  return buf;
}

DayStamp DayStamp::parse(const std::string& text) {
  DayStamp d;
  char dash1 = 0, dash2 = 0;
  std::istringstream in(text);
  if (!(in >> d.year >> dash1 >> d.month >> dash2 >> d.day) || dash1 != '-' ||
      dash2 != '-' || !d.valid()) {
    throw std::runtime_error("malformed date '" + text + "' (expected YYYY-MM-DD)");
  }
  return d;
}

std::int64_t day_number(DayStamp d) {
  return chr::sys_days{to_ymd(d)}.time_since_epoch().count();
}

DayStamp from_day_number(std::int64_t n) {
  return from_ymd(chr::year_month_day{chr::sys_days{chr::days{n}}});
}

DayStamp next_day(DayStamp d) { return from_day_number(day_number(d) + 1); }

int water_year_of(DayStamp d) { return d.month >= 6 ? d.year : d.year - 1; }

int water_year_slot(DayStamp d) {
  unsigned day = d.day;
  if (d.month == 2 && day == 29) day = 28;
  return kWySlotBase[wy_month_index(d.month)] + int(day) - 1;
}

DayStamp slot_to_date(int wy, int slot) {
  if (slot < 0 || slot >= 365) throw std::invalid_argument("slot out of range");
  int mi = int(std::upper_bound(kWySlotBase.begin(), kWySlotBase.end(), slot) -
               kWySlotBase.begin()) - 1;
  unsigned month = unsigned((mi + 5) % 12 + 1);
  int year = month >= 6 ? wy : wy + 1;
  return DayStamp{year, month, unsigned(slot - kWySlotBase[mi] + 1)};
}

DailySeries::DailySeries(DayStamp start, std::vector<double> values)
    : start_(start), values_(std::move(values)) {
  if (!start_.valid()) throw std::invalid_argument("invalid start date");
  if (values_.empty()) throw std::invalid_argument("empty series");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
      throw std::invalid_argument("non-finite or negative value at index " +
                                  std::to_string(i));
    }
  }
}

DayStamp DailySeries::stamp_at(std::size_t i) const {
  return from_day_number(day_number(start_) + std::int64_t(i));
}

std::pair<int, int> DailySeries::complete_water_years() const {
  if (empty()) return {1, 0};
  const DayStamp lo = start_, hi = last();
  int first = water_year_of(lo);
  if (DayStamp{first, 6, 1} < lo) ++first;
  int lastwy = water_year_of(hi);
  if (hi < DayStamp{lastwy + 1, 5, 31}) --lastwy;
  return {first, lastwy};
}

DailySeries DailySeries::window(DayStamp from, DayStamp to) const {
  const std::int64_t base = day_number(start_);
  const std::int64_t i0 = day_number(from) - base;
  const std::int64_t i1 = day_number(to) - base;
  if (i0 < 0 || i1 < i0 || i1 >= std::int64_t(values_.size())) {
    throw std::out_of_range("window [" + from.str() + ", " + to.str() +
                            "] not covered by series");
  }
  return DailySeries(from, std::vector<double>(values_.begin() + i0,
                                               values_.begin() + i1 + 1));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    // trim
    auto b = field.find_first_not_of(" \t\r");
    auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}

bool looks_like_date(const std::string& s) {
  return s.size() >= 8 && s.find('-') != std::string::npos &&
         std::isdigit(static_cast<unsigned char>(s[0]));
}

}  // namespace

DailySeries load_daily_csv(const std::string& path, const CsvColumns& cols) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open inflow CSV: " + path);

  std::string line;
  std::size_t lineno = 0;
  int date_col = 0, flow_col = 1;
  bool saw_header = false;

  DayStamp start{}, expect{};
  std::vector<double> values;

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv_line(line);
    if (values.empty() && !saw_header && !looks_like_date(fields[0])) {
      // header row: resolve column indices by name
      saw_header = true;
      date_col = flow_col = -1;
      for (int i = 0; i < int(fields.size()); ++i) {
        if (fields[i] == cols.date) date_col = i;
        if (fields[i] == cols.flow) flow_col = i;
      }
      if (date_col < 0 || flow_col < 0) {
        throw std::runtime_error(path + ": header lacks columns '" + cols.date +
                                 "'/'" + cols.flow + "'");
      }
      continue;
    }
    if (int(fields.size()) <= std::max(date_col, flow_col)) {
      throw std::runtime_error(path + ": malformed row at line " +
                               std::to_string(lineno));
    }
    DayStamp d;
    try {
      d = DayStamp::parse(fields[date_col]);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ": line " + std::to_string(lineno) + ": " +
                               e.what());
    }
    double flow = 0.0;
    const std::string& f = fields[flow_col];
    auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), flow);
    if (ec != std::errc{} || p != f.data() + f.size() || !std::isfinite(flow)) {
      throw std::runtime_error(path + ": malformed flow at line " +
                               std::to_string(lineno));
    }
    if (flow < 0.0) {
      throw std::runtime_error(path + ": negative flow at line " +
                               std::to_string(lineno));
    }
    if (values.empty()) {
      start = expect = d;
    } else if (d != expect) {
      throw std::runtime_error(path + ": date gap at line " + std::to_string(lineno) +
                               " (expected " + expect.str() + ", got " + d.str() + ")");
    }
    values.push_back(flow);
    expect = next_day(expect);
  }
  if (values.empty()) throw std::runtime_error(path + ": no data rows");
  return DailySeries(start, std::move(values));
}

void write_daily_csv(const std::string& path, const DailySeries& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write CSV: " + path);
  out << "date,flow_mm3\n";
  char buf[40];
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", s[i]);
    out << s.stamp_at(i).str() << ',' << buf << '\n';
  }
}

std::map<int, double> annual_totals(const DailySeries& s) {
  auto [first, lastwy] = s.complete_water_years();
  if (first > lastwy) {
    throw std::runtime_error("series covers no complete water year");
  }
  std::map<int, double> totals;
  const std::int64_t base = day_number(s.start());
  for (int wy = first; wy <= lastwy; ++wy) {
    const std::int64_t i0 = day_number(DayStamp{wy, 6, 1}) - base;
    const std::int64_t i1 = day_number(DayStamp{wy + 1, 5, 31}) - base;
    double total = 0.0;
    for (std::int64_t i = i0; i <= i1; ++i) total += s[std::size_t(i)];
    totals.emplace(wy, total);
  }
  return totals;
}

std::array<MonthlyStat, 12> monthly_stats(const DailySeries& s) {
  auto [first, lastwy] = s.complete_water_years();
  if (lastwy - first + 1 < 2) {
    throw std::runtime_error("monthly_stats needs at least 2 complete water years");
  }
  // Chronological monthly totals over the complete-water-year span.
  struct MonthTotal {
    int year;
    unsigned month;
    double total;
  };
  std::vector<MonthTotal> months;
  const std::int64_t base = day_number(s.start());
  DayStamp d{first, 6, 1};
  const DayStamp end{lastwy + 1, 5, 31};
  double acc = 0.0;
  while (true) {
    acc += s[std::size_t(day_number(d) - base)];
    if (d.day == days_in_month(d.year, d.month)) {
      months.push_back({d.year, d.month, acc});
      acc = 0.0;
    }
    if (d == end) break;
    d = next_day(d);
  }

  std::array<MonthlyStat, 12> out{};
  for (unsigned m = 1; m <= 12; ++m) {
    std::vector<double> cur, prev_pair_cur, prev_pair_prev;
    for (std::size_t i = 0; i < months.size(); ++i) {
      if (months[i].month != m) continue;
      cur.push_back(months[i].total);
      if (i > 0) {
        prev_pair_prev.push_back(months[i - 1].total);
        prev_pair_cur.push_back(months[i].total);
      }
    }
    MonthlyStat st;
    const double n = double(cur.size());
    for (double v : cur) st.mean += v;
    st.mean /= n;
    double ss = 0.0;
    for (double v : cur) ss += (v - st.mean) * (v - st.mean);
    st.sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    // lag-1: Pearson correlation with the previous calendar month's total
    if (prev_pair_cur.size() >= 2) {
      double mx = 0, my = 0;
      const double k = double(prev_pair_cur.size());
      for (std::size_t i = 0; i < prev_pair_cur.size(); ++i) {
        mx += prev_pair_prev[i];
        my += prev_pair_cur[i];
      }
      mx /= k;
      my /= k;
      double sxy = 0, sxx = 0, syy = 0;
      for (std::size_t i = 0; i < prev_pair_cur.size(); ++i) {
        const double dx = prev_pair_prev[i] - mx, dy = prev_pair_cur[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
      }
      st.lag1 = (sxx > 0 && syy > 0) ? sxy / std::sqrt(sxx * syy) : 0.0;
    }
    out[m - 1] = st;
  }
  return out;
}

double InflowEnsemble::max_value() const {
  double mx = 0.0;
  for (const auto& r : realizations) {
    for (double v : r.values()) mx = std::max(mx, v);
  }
  return mx;
}

}  // namespace resopt
