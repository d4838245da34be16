#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace resopt {

/// Candidate solution; objectives are stored all-minimized.
struct Individual {
  std::vector<double> genome;
  std::vector<double> objectives;
  int op_origin = -1;  // operator that produced it, -1 for initialization
};

/// floor(f_i / eps_i) per component.
std::vector<std::int64_t> box_index(const std::vector<double>& f,
                                    const std::vector<double>& eps);

enum class InsertOutcome { Accepted, Dominated, SameBoxReplaced, SameBoxRejected };

/// ε-box dominance archive. One occupant per box; within a box the point
/// nearer (Euclidean) to the box's ideal corner wins; ε-progress counts
/// acceptances into previously empty nondominated boxes.
class EpsilonArchive {
 public:
  explicit EpsilonArchive(std::vector<double> eps);

  InsertOutcome insert(Individual x);
  const std::vector<Individual>& members() const { return members_; }
  std::vector<Individual> sorted_members() const;  // stable box-lexicographic
  std::size_t size() const { return members_.size(); }
  std::uint64_t eps_progress() const { return progress_; }
  const std::vector<double>& eps() const { return eps_; }

 private:
  std::vector<double> eps_;
  std::vector<Individual> members_;
  std::vector<std::vector<std::int64_t>> boxes_;
  std::uint64_t progress_ = 0;
};

/// Search configuration. Operator and restart parameters default to the
/// published Borg settings; all are overridable.
struct MoeaConfig {
  std::uint64_t nfe = 10000;
  std::size_t population = 100;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<double> epsilons;
  std::vector<double> lower, upper;  // per-gene box bounds

  int tournament = 2;
  double sbx_rate = 1.0, sbx_index = 15.0;
  double pm_index = 20.0;  // rate 1/L
  double de_cr = 0.1, de_step = 0.5;
  int multiparent = 10;  // PCX / UNDX / SPX
  double pcx_eta = 0.1, pcx_zeta = 0.1;
  double undx_zeta = 0.5, undx_eta = 0.35;

  int stall_window = 100;  // evaluations without ε-progress before restart
  double pop_ratio_lo = 0.25, pop_ratio_hi = 4.0;
  double restart_pop_factor = 4.0;    // population resized to this x archive
  bool adaptive_operators = true;     // false = uniform fixed operator mix
  std::uint64_t checkpoint_interval = 0;  // 0 = max(nfe/50, 100)
};

/// Objective callback: genome + evaluation counter -> minimized objectives.
/// The counter keys reproducible stochastic fitness subsampling.
using Problem =
    std::function<std::vector<double>(const std::vector<double>&, std::uint64_t)>;

struct LogRecord {
  std::uint64_t nfe = 0;
  std::size_t archive_size = 0;
  std::uint64_t eps_progress = 0;
  std::array<double, 6> operator_probs{};
  double hv_estimate = 0.0;
};

/// Optional archive metric for run-log checkpoints.
using ArchiveMetric = std::function<double(const std::vector<Individual>&)>;

/// Invoked at every checkpoint with the log record and the current archive;
/// lets callers persist reloadable partial results.
using CheckpointFn =
    std::function<void(const LogRecord&, const std::vector<Individual>&)>;

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<Individual> archive;  // box-sorted
  std::vector<LogRecord> log;
  std::uint64_t evaluations = 0;
  std::uint64_t restarts = 0;
};

static constexpr std::array<const char*, 6> kOperatorNames = {
    "sbx_pm", "de", "pcx", "spx", "undx", "um"};

RunResult evolve(const Problem& problem, const MoeaConfig& cfg, std::uint64_t seed,
                 const ArchiveMetric& hv_fn = {},
                 const CheckpointFn& on_checkpoint = {});

struct MultiSeedResult {
  std::vector<RunResult> runs;
  std::vector<Individual> merged;  // ε-nondominated union across seeds
};

MultiSeedResult run_multiseed(const Problem& problem, const MoeaConfig& cfg,
                              const ArchiveMetric& hv_fn = {});

}  // namespace resopt
