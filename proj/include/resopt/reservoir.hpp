#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "resopt/hydroseries.hpp"
#include "resopt/thresholds.hpp"

namespace resopt {

/// Physical and institutional constants of the reservoir.
struct ReservoirConfig {
  double live_capacity = 5733.0;   // Mm3
  double hp_release_cap = 101.9;   // Q_HP, Mm3/day
  double hp_power_cap = 0.96;      // HP_cap, GW
  double efficiency = 0.90;        // eta
  double specific_weight = 9810.0; // gamma, N/m3

  /// Monotone storage [Mm3] -> net head [m] table, >= 2 points.
  std::vector<std::pair<double, double>> elevation_storage;

  /// Cyclic demand schedule DD_t [Mm3/day] on the water-year grid.
  std::array<double, 365> demand{};

  MefSchedule mef;
  FloodThreshold flood;

  /// Storage normalization denominator: live capacity + max ensemble inflow.
  double ns_denominator = 0.0;

  double demand_on(DayStamp d) const { return demand[water_year_slot(d)]; }
  void validate() const;  // throws on violated invariants
};

/// Gaussian-RBF hydropower release policy parameters (theta = (c, r)).
struct PolicyParams {
  std::vector<double> centers;  // in [-1, 1]
  std::vector<double> radii;    // in (0, 1]

  std::size_t rbf_count() const { return centers.size(); }
  void validate() const;
};

/// Release priority order. MEF_FIRST allocates efr -> dr -> hpr;
/// DEMAND_FIRST allocates dr -> hpr -> efr.
enum class Formulation { MefFirst, DemandFirst };

std::string to_string(Formulation f);
Formulation formulation_from_string(const std::string& name);

/// Storage normalized by (live capacity + max ensemble inflow).
double normalized_storage(double storage, const ReservoirConfig& cfg);

/// Policy release: min(Q_HP, Q_HP * mean_k exp(-(ns - c_k)^2 / r_k^2)).
/// For a single RBF this is the plain Gaussian rule.
double rbf_release(double ns, const PolicyParams& p, const ReservoirConfig& cfg);

/// Piecewise-linear interpolation of net head on the elevation-storage table.
double head(double storage, const ReservoirConfig& cfg);

/// One day of allocation.
struct DayFlux {
  double efr = 0.0;
  double dr = 0.0;
  double hpr = 0.0;
  double ewr = 0.0;
  double storage = 0.0;  // end-of-day
};

/// Advance one day. `wy_slot` indexes the cyclic demand/MEF schedules.
DayFlux step(double storage_prev, double inflow, int wy_slot, Formulation form,
             const PolicyParams& p, const ReservoirConfig& cfg);

/// Daily trace of storage and the five flux series (column layout).
struct SimTrace {
  DayStamp start;
  double storage0 = 0.0;
  std::vector<double> storage;  // end-of-day, Mm3
  std::vector<double> inflow;
  std::vector<double> efr, dr, hpr, ewr;
  std::vector<double> head;  // start-of-day head used for power [m]

  std::size_t size() const { return storage.size(); }
  double release(std::size_t t) const { return efr[t] + hpr[t] + ewr[t]; }

  /// Years spanned: exact count when the trace covers whole water years,
  /// otherwise size()/365.25.
  double years() const;
};

SimTrace simulate(const DailySeries& inflow, double storage0, Formulation form,
                  const PolicyParams& p, const ReservoirConfig& cfg);

void write_trace_csv(const std::string& path, const SimTrace& trace);

}  // namespace resopt
