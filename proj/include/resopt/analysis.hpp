#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "resopt/moea.hpp"
#include "resopt/objectives.hpp"
#include "resopt/reservoir.hpp"
#include "resopt/synthgen.hpp"

namespace resopt {

/// A labeled candidate operating strategy.
struct Strategy {
  std::string label;
  Formulation formulation = Formulation::MefFirst;
  PolicyParams policy;
  ObjectiveVector objectives;
  std::uint64_t seed = 0;  // provenance
};

using StrategySet = std::vector<Strategy>;

/// Strict (non-ε) dominance filter, stable order.
StrategySet pareto_sort(const StrategySet& points);

/// Low-level filter on minimized vectors; returns surviving indices in order.
std::vector<std::size_t> nondominated_indices(
    const std::vector<std::vector<double>>& minimized);

struct HvOptions {
  std::size_t samples = 1'000'000;  // Monte Carlo sample count for >= 4 objectives
  std::uint64_t seed = 20130612;    // fixed so reports are repeatable
  ExecMode mode = ExecMode::Parallel;
};

struct HvResult {
  double value = 0.0;
  double std_error = 0.0;  // 0 for the exact sweeps
  std::size_t excluded = 0;  // points that failed to dominate the reference
};

/// Hypervolume of a minimized point set against a reference point.
/// Exact sweep for 2-3 objectives; deterministic chunked Monte Carlo above.
HvResult hypervolume(const std::vector<std::vector<double>>& points,
                     const std::vector<double>& reference,
                     const HvOptions& opts = {});

/// Reference point: per-objective worst value across the set plus a 10%
/// margin of max(|worst|, observed range).
std::vector<double> hv_reference(const std::vector<std::vector<double>>& points);

/// Everything needed to evaluate policies on the stochastic ensemble.
struct EvalContext {
  const InflowEnsemble* ensemble = nullptr;
  std::size_t sample_size = 100;
  std::uint64_t sample_seed = 0;
  MefBasis mef_basis = MefBasis::EfrOnly;
  double storage0 = 0.0;
};

/// Stochastic-fitness problem for one optimization run: every evaluation
/// draws a fresh subsample keyed by (run seed, evaluation counter).
Problem make_reservoir_problem(const ReservoirConfig& cfg, Formulation form,
                               const EvalContext& ctx, std::uint64_t run_seed);

using ProblemFactory = std::function<Problem(std::uint64_t run_seed)>;

/// Multi-seed search wired to per-seed stochastic problems.
MultiSeedResult run_multiseed_factory(const ProblemFactory& factory,
                                      const MoeaConfig& cfg,
                                      const ArchiveMetric& hv_fn = {});

/// Refresh objectives by full evaluation over a larger ensemble generated on
/// demand from (model, gencfg); genomes untouched.
StrategySet reevaluate(const StrategySet& set, const ReservoirConfig& cfg,
                       const GeneratorModel& model, const GenConfig& gencfg,
                       MefBasis basis, double storage0,
                       ExecMode mode = ExecMode::Parallel);

/// Same, against an in-memory ensemble (all realizations).
StrategySet reevaluate(const StrategySet& set, const ReservoirConfig& cfg,
                       const InflowEnsemble& ensemble, MefBasis basis,
                       double storage0, ExecMode mode = ExecMode::Parallel);

/// Per-calendar-month MEF satisfaction [%], pooled across realizations.
/// Index 0 = January.
std::array<double, 12> monthly_mef_reliability(const PolicyParams& p,
                                               Formulation form,
                                               const ReservoirConfig& cfg,
                                               const InflowEnsemble& ensemble,
                                               double storage0,
                                               MefBasis basis = MefBasis::EfrOnly);

/// Quartile summary {min, q1, median, q3, max} per objective of the
/// per-fraction nondominated sets, one row per (fraction, formulation).
/// Median convention: lower median for even counts.
struct SweepRow {
  double fraction = 0.0;
  Formulation formulation = Formulation::MefFirst;
  std::size_t strategies = 0;
  std::array<std::array<double, 5>, 4> quartiles{};
};

struct SweepInputs {
  const DailySeries* historical = nullptr;
  ReservoirConfig reservoir;  // mef replaced per fraction
  MoeaConfig moea;
  EvalContext eval;
  std::vector<Formulation> formulations = {Formulation::MefFirst,
                                           Formulation::DemandFirst};
};

std::vector<SweepRow> sensitivity_sweep(const std::vector<double>& fractions,
                                        const SweepInputs& in);

/// Bounds in natural units (NaN = unbounded) and a priority order of
/// objective indices for the lexicographic tie-break.
struct SelectionCriteria {
  std::array<double, 4> min_bound;
  std::array<double, 4> max_bound;
  std::vector<int> priority = {1, 0, 2, 3};
  SelectionCriteria();
};

Strategy select_strategy(const StrategySet& set, const SelectionCriteria& criteria);

/// Report bundle writers (plot-ready CSV only).
void write_strategies_csv(const std::string& path, const StrategySet& set);
StrategySet load_strategies_csv(const std::string& path);
void write_hv_trajectory_csv(const std::string& path,
                             const std::vector<RunResult>& runs);
void write_sensitivity_csv(const std::string& path,
                           const std::vector<SweepRow>& rows);
void write_monthly_reliability_csv(const std::string& path,
                                   const std::vector<std::pair<std::string, std::array<double, 12>>>& rows);
void write_run_log_csv(const std::string& path, const RunResult& run);

}  // namespace resopt
