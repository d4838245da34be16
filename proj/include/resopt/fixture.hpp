#pragma once

#include <array>
#include <cstdint>

#include "resopt/hydroseries.hpp"
#include "resopt/reservoir.hpp"

namespace resopt::fixture {

/// Synthetic monsoonal basin at the scale of a large South-Indian
/// multi-purpose project: ~70% of the annual flow in June-September,
/// MAF about 33,900 Mm3/yr. Deterministic in (years, seed).
DailySeries ns_like_inflow(int years = 35, std::uint64_t seed = 9001,
                           int start_water_year = 1968);

/// Pre-project release record used to derive the flood threshold.
DailySeries ns_like_release_history(const DailySeries& inflow);

/// Irrigation demand per water-year month [Mm3], Jun..May; total 7435.
std::array<double, 12> ns_like_irrigation_monthly();

/// Daily demand schedule: monthly irrigation plus a flat 1000 Mm3/yr
/// domestic allotment (total 8435 Mm3/yr).
std::array<double, 365> ns_like_demand_schedule();

std::vector<std::pair<double, double>> ns_like_elevation_storage();

/// Full reservoir configuration on the fixture basin. `max_ensemble_inflow`
/// feeds the storage-normalization denominator; pass the generated ensemble's
/// maximum when available.
ReservoirConfig ns_like_reservoir(const DailySeries& historical,
                                  double mef_fraction = 0.3,
                                  double max_ensemble_inflow = 0.0);

}  // namespace resopt::fixture
