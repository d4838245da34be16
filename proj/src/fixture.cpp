#include "resopt/fixture.hpp"

#include <algorithm>
#include <cmath>

#include "resopt/rng.hpp"
#include "resopt/thresholds.hpp"

namespace resopt::fixture {

namespace {

// Calendar-month mean totals [Mm3], Jan..Dec. Sum 33,900; Jun-Sep 23,730.
constexpr std::array<double, 12> kMeanMonthly = {
    900.0, 700.0, 650.0, 800.0, 1620.0, 5000.0,
    8500.0, 6730.0, 3500.0, 2600.0, 1700.0, 1200.0};

}  // namespace

DailySeries ns_like_inflow(int years, std::uint64_t seed, int start_water_year) {
  Rng rng(derive_stream(seed, 17));

  std::vector<double> values;
  values.reserve(std::size_t(years) * 366);

  double year_shock = 0.0;   // AR(1) across years
  double month_shock = 0.0;  // AR(1) across months
  double day_shock = 0.0;    // AR(1) across days
  const double sd_year = 0.35, rho_year = 0.3;
  const double sd_month = 0.25, rho_month = 0.6;
  const double sd_day = 0.25, rho_day = 0.85;

  for (int y = 0; y < years; ++y) {
    const int wy = start_water_year + y;
    year_shock = rho_year * year_shock +
                 std::sqrt(1.0 - rho_year * rho_year) * rng.normal();
    const double year_factor = std::exp(sd_year * year_shock - 0.5 * sd_year * sd_year);
    for (int mm = 0; mm < 12; ++mm) {
      const unsigned month = unsigned((mm + 5) % 12 + 1);  // June..May
      const int cal_year = month >= 6 ? wy : wy + 1;
      const unsigned ndays = days_in_month(cal_year, month);
      month_shock = rho_month * month_shock +
                    std::sqrt(1.0 - rho_month * rho_month) * rng.normal();
      const double total = kMeanMonthly[month - 1] * year_factor *
                           std::exp(sd_month * month_shock - 0.5 * sd_month * sd_month);

      std::vector<double> w(ndays);
      double wsum = 0.0;
      for (unsigned d = 0; d < ndays; ++d) {
        day_shock = rho_day * day_shock +
                    std::sqrt(1.0 - rho_day * rho_day) * rng.normal();
        w[d] = std::exp(sd_day * day_shock);
        wsum += w[d];
      }
      for (unsigned d = 0; d < ndays; ++d) values.push_back(total * w[d] / wsum);
    }
  }
  return DailySeries(DayStamp{start_water_year, 6, 1}, std::move(values));
}

DailySeries ns_like_release_history(const DailySeries& inflow) {
  std::vector<double> r(inflow.size());
  for (std::size_t i = 0; i < inflow.size(); ++i) {
    r[i] = std::min(0.9 * inflow[i], 437.5);
  }
  return DailySeries(inflow.start(), std::move(r));
}

std::array<double, 12> ns_like_irrigation_monthly() {
  // Jun..May; monsoon-peaking, summer minimum. Total 7435.
  return {900.0, 1100.0, 1050.0, 850.0, 700.0, 550.0,
          450.0, 400.0, 350.0, 300.0, 250.0, 535.0};
}

std::array<double, 365> ns_like_demand_schedule() {
  const auto irr = ns_like_irrigation_monthly();
  const double domestic = 1000.0 / 365.0;
  std::array<double, 365> dd{};
  for (int slot = 0; slot < 365; ++slot) {
    const DayStamp d = slot_to_date(2001, slot);
    const int mm = (int(d.month) + 6) % 12;  // water-year month index
    dd[slot] = irr[std::size_t(mm)] / double(days_in_month(2001, d.month)) + domestic;
  }
  return dd;
}

std::vector<std::pair<double, double>> ns_like_elevation_storage() {
  return {{0.0, 75.0},   {1000.0, 92.0},  {2000.0, 103.0}, {3000.0, 111.0},
          {4000.0, 117.0}, {5000.0, 122.0}, {5733.0, 125.0}};
}

ReservoirConfig ns_like_reservoir(const DailySeries& historical, double mef_fraction,
                                  double max_ensemble_inflow) {
  ReservoirConfig cfg;
  cfg.live_capacity = 5733.0;
  cfg.hp_release_cap = 101.9;
  cfg.hp_power_cap = 0.96;
  cfg.efficiency = 0.90;
  cfg.specific_weight = 9810.0;
  cfg.elevation_storage = ns_like_elevation_storage();
  cfg.demand = ns_like_demand_schedule();
  cfg.mef = percent_of_maf(historical, mef_fraction);
  cfg.flood = flood_threshold(ns_like_release_history(historical));
  double mx = max_ensemble_inflow;
  if (mx <= 0.0) {
    for (double v : historical.values()) mx = std::max(mx, v);
  }
  cfg.ns_denominator = cfg.live_capacity + mx;
  return cfg;
}

}  // namespace resopt::fixture
