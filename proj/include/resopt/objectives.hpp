#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "resopt/hydroseries.hpp"
#include "resopt/parallel.hpp"
#include "resopt/reservoir.hpp"

namespace resopt {

/// The four objective values with their optimization senses.
struct ObjectiveVector {
  double hydropower_gwh = 0.0;        // annual average, maximize
  double deficit_mm3 = 0.0;           // annual average, minimize
  double mef_reliability_pct = 0.0;   // maximize
  double flood_reliability_pct = 0.0; // maximize

  /// All-minimize view (maximized objectives negated); the order matches the
  /// epsilon vector (hydropower, deficit, MEF reliability, flood reliability).
  std::array<double, 4> minimized() const {
    return {-hydropower_gwh, deficit_mm3, -mef_reliability_pct,
            -flood_reliability_pct};
  }
  static ObjectiveVector from_minimized(const std::array<double, 4>& f) {
    return {-f[0], f[1], -f[2], -f[3]};
  }

  static const std::array<const char*, 4> names;
  static const std::array<const char*, 4> senses;  // "max"/"min" per component
};

/// Which release counts toward MEF satisfaction.
enum class MefBasis { EfrOnly, TotalDownstream };

MefBasis mef_basis_from_string(const std::string& name);
std::string to_string(MefBasis basis);

/// Stochastic evaluation setup: which ensemble, how many realizations per
/// evaluation, and the deterministic subsample seed.
struct EvalConfig {
  const InflowEnsemble* ensemble = nullptr;
  std::size_t sample_size = 100;
  std::uint64_t sample_seed = 0;
  MefBasis mef_basis = MefBasis::EfrOnly;
  double storage0 = 0.0;  // Mm3 at the start of each realization
};

/// Energy produced in one day [GWh]: P = min(eta * gamma * Q * H * 1e-9, HP_cap)
/// with Q the release in m3/s.
double daily_energy(double hpr_mm3day, double head_m, const ReservoirConfig& cfg);

ObjectiveVector objectives_of_trace(const SimTrace& trace, const ReservoirConfig& cfg,
                                    MefBasis basis);

/// Mean objectives over a deterministic subsample of the ensemble.
ObjectiveVector evaluate(const PolicyParams& p, Formulation form,
                         const ReservoirConfig& cfg, const EvalConfig& ec,
                         ExecMode mode = ExecMode::Parallel);

/// Same formulas on an externally supplied flux trace (single realization).
ObjectiveVector evaluate_historical(const SimTrace& trace, const ReservoirConfig& cfg,
                                    MefBasis basis = MefBasis::EfrOnly);

/// Reads a trace written by write_trace_csv.
SimTrace load_trace_csv(const std::string& path);

}  // namespace resopt
