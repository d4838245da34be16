#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "resopt/hydroseries.hpp"
#include "resopt/objectives.hpp"
#include "resopt/reservoir.hpp"

namespace resopt {

enum class ThresholdMethod { PercentOfMaf, Moefcc };

ThresholdMethod threshold_method_from_string(const std::string& name);
std::string to_string(ThresholdMethod m);

/// Experiment configuration: a single JSON file with a strict schema
/// (unknown keys rejected). Paper-scale constants are the defaults.
struct ExperimentConfig {
  struct Paths {
    std::string inflow_csv;
    std::string release_history_csv;  // optional when flood threshold given
    std::string output_dir = "out";
  } paths;

  struct Window {
    std::optional<DayStamp> start, end;  // explicit date-window selection
  } window;

  struct Reservoir {
    double live_capacity_mm3 = 5733.0;
    double hp_release_cap_mm3day = 101.9;
    double hp_power_cap_gw = 0.96;
    double efficiency = 0.90;
    double specific_weight_nm3 = 9810.0;
    std::vector<std::pair<double, double>> elevation_storage;
    std::array<double, 12> demand_monthly_mm3{};  // Jun..May irrigation
    double domestic_demand_mm3yr = 1000.0;
    std::string demand_csv;  // overrides the monthly schedule when set
    double initial_storage_frac = 0.5;
    double ns_denominator_mm3 = 0.0;     // 0 = live capacity + max ensemble inflow
    double flood_threshold_mm3day = 0.0; // 0 = derive from release history
  } reservoir;

  struct Generator {
    std::uint64_t seed = 42;
    std::size_t nr = 10000;
    int years = 10;
    double jitter_floor_mm3day = 1e-6;
    bool inter_annual = true;
    int start_water_year = 2000;
    std::string format = "binary";  // or "csv"
    double validation_mean_tol = 0.05;
    double validation_sd_tol = 0.15;
  } generator;

  struct Thresholds {
    ThresholdMethod method = ThresholdMethod::PercentOfMaf;
    double fraction = 0.30;
  } thresholds;

  struct Optimization {
    std::uint64_t nfe = 10000;
    std::size_t population = 100;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::array<double, 4> epsilons = {50.0, 50.0, 0.01, 0.01};
    std::vector<std::string> formulations = {"mef-first", "demand-first"};
    std::size_t rbf_count = 1;
    int stall_window = 100;
    bool adaptive_operators = true;
    std::uint64_t checkpoint_interval = 0;
  } optimization;

  struct Evaluation {
    std::size_t sample_size = 100;
    std::uint64_t sample_seed = 7;
    std::string mef_basis = "efr_only";
  } evaluation;

  struct Report {
    std::size_t reeval_nr = 10000;
    std::size_t hv_samples = 1'000'000;
    std::size_t monthly_reliability_nr = 1000;
  } report;

  static ExperimentConfig load(const std::string& path);
  static ExperimentConfig from_json(const nlohmann::json& j);

  /// Fully resolved view (defaults filled in); logged into every manifest.
  nlohmann::json resolved() const;
  std::uint64_t hash() const;
};

/// Historical inflow with the configured window applied.
DailySeries load_inflow(const ExperimentConfig& cfg);
DailySeries load_release_history(const ExperimentConfig& cfg);

/// Reservoir assembled from the config blocks; MEF schedule per the
/// thresholds block (fraction overridable), flood threshold from the release
/// history unless pinned in config.
ReservoirConfig build_reservoir(const ExperimentConfig& cfg,
                                const DailySeries& historical,
                                double max_ensemble_inflow,
                                std::optional<double> fraction_override = {});

std::uint64_t file_hash(const std::string& path);

/// Reproducibility manifest: resolved config + hash, content hashes of every
/// input, all seeds, output inventory. No wall-clock fields, so reruns are
/// byte-identical.
void write_manifest(const std::string& out_dir, const std::string& command,
                    const ExperimentConfig& cfg,
                    const std::vector<std::string>& input_paths,
                    const nlohmann::json& extra);

/// Policy file {"centers": [...], "radii": [...]}; validated on load.
PolicyParams load_policy_json(const std::string& path);
void write_policy_json(const std::string& path, const PolicyParams& p);

}  // namespace resopt
