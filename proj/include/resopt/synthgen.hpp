#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "resopt/hydroseries.hpp"
#include "resopt/parallel.hpp"

namespace resopt {

using Matrix12 = std::array<std::array<double, 12>, 12>;

/// Fitted state of the monthly-bootstrap streamflow generator. Month indices
/// run in water-year order (0 = June .. 11 = May).
struct GeneratorModel {
  int n_years = 0;
  int start_water_year = 0;

  std::array<double, 12> log_mean{};  // of log monthly totals
  std::array<double, 12> log_sd{};

  /// Standardized log monthly totals per historical water year.
  std::vector<std::array<double, 12>> z;
  /// Historical monthly totals [Mm3], used by the k-NN disaggregation.
  std::vector<std::array<double, 12>> monthly_totals;
  /// Per-year, per-month daily proportion vectors (each sums to 1).
  std::vector<std::array<std::vector<double>, 12>> proportions;

  Matrix12 corr{}, corr_shifted{};              // PSD-conditioned correlations
  Matrix12 chol_upper{}, chol_shifted_upper{};  // corr = U^T U

  /// Full construction includes the half-year-offset factorization that
  /// preserves correlation across the year boundary; false falls back to the
  /// intra-year-only variant.
  bool inter_annual = true;

  std::uint64_t source_hash = 0;
  std::uint64_t hash() const;
};

struct GenConfig {
  std::uint64_t seed = 0;
  std::size_t nr = 10000;
  int years = 10;
  double jitter_floor = 1e-6;  // Mm3/day
  int start_water_year = 2000; // synthetic calendar epoch
};

/// Fit the generator on a historical record covering >= 10 complete water
/// years. Throws on degenerate (zero-variance) months.
GeneratorModel fit(const DailySeries& historical, bool inter_annual = true);

/// Generate realization `index` of the ensemble. Pure function of
/// (model, cfg, index): each realization draws from its own RNG stream.
DailySeries generate_realization(const GeneratorModel& model, const GenConfig& cfg,
                                 std::size_t index);

InflowEnsemble generate(const GeneratorModel& model, const GenConfig& cfg,
                        ExecMode mode = ExecMode::Parallel);

/// Largest daily flow across the whole ensemble without materializing it.
double ensemble_max_inflow(const GeneratorModel& model, const GenConfig& cfg,
                           ExecMode mode = ExecMode::Parallel);

/// k distinct indices from [0, nr), uniform without replacement,
/// deterministic by seed, returned in ascending order.
std::vector<std::size_t> sample_indices(std::size_t nr, std::size_t k,
                                        std::uint64_t seed);

InflowEnsemble sample_subset(const InflowEnsemble& e, std::size_t k,
                             std::uint64_t seed);

}  // namespace resopt
