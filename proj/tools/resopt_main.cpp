#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "resopt/analysis.hpp"
#include "resopt/config.hpp"
#include "resopt/ensemble_io.hpp"
#include "resopt/fixture.hpp"
#include "resopt/moea.hpp"
#include "resopt/objectives.hpp"
#include "resopt/parallel.hpp"
#include "resopt/rng.hpp"
#include "resopt/synthgen.hpp"
#include "resopt/thresholds.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;

struct CommonArgs {
  std::string config_path;
  std::string out_override;
  int threads = 0;
  std::optional<std::uint64_t> seed_override;
};

resopt::ExperimentConfig load_config(const CommonArgs& args) {
  auto cfg = resopt::ExperimentConfig::load(args.config_path);
  if (!args.out_override.empty()) cfg.paths.output_dir = args.out_override;
  if (args.seed_override) {
    cfg.generator.seed = *args.seed_override;
    cfg.optimization.seeds = {*args.seed_override};
  }
  if (args.threads > 0) resopt::set_thread_cap(args.threads);
  return cfg;
}

// Pooled mean/sd of monthly totals per water-year month across realizations.
struct MonthlyMoments {
  std::array<double, 12> mean{}, sd{};
};

MonthlyMoments monthly_moments(const std::vector<const resopt::DailySeries*>& series) {
  std::array<std::vector<double>, 12> totals;
  for (const auto* s : series) {
    std::int64_t dn = resopt::day_number(s->start());
    double acc = 0.0;
    for (std::size_t i = 0; i < s->size(); ++i, ++dn) {
      const resopt::DayStamp d = resopt::from_day_number(dn);
      acc += (*s)[i];
      if (d.day == resopt::days_in_month(d.year, d.month)) {
        totals[(d.month + 6) % 12].push_back(acc);
        acc = 0.0;
      }
    }
  }
  MonthlyMoments mm;
  for (int m = 0; m < 12; ++m) {
    const auto& v = totals[m];
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= double(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    mm.mean[m] = mean;
    mm.sd[m] = v.size() > 1 ? std::sqrt(ss / double(v.size() - 1)) : 0.0;
  }
  return mm;
}

std::string ensemble_path(const resopt::ExperimentConfig& cfg) {
  const fs::path bin = fs::path(cfg.paths.output_dir) / "ensemble.bin";
  const fs::path dir = fs::path(cfg.paths.output_dir) / "ensemble_csv";
  if (fs::exists(bin)) return bin.string();
  if (fs::is_directory(dir)) return dir.string();
  throw std::runtime_error("no ensemble found under " + cfg.paths.output_dir +
                           " (run `resopt gen` first)");
}

double read_max_inflow(const resopt::ExperimentConfig& cfg,
                       const resopt::InflowEnsemble* ensemble) {
  const fs::path stats = fs::path(cfg.paths.output_dir) / "ensemble_stats.json";
  if (fs::exists(stats)) {
    std::ifstream in(stats);
    json j;
    in >> j;
    return j.at("max_inflow_mm3day").get<double>();
  }
  if (ensemble != nullptr) return ensemble->max_value();
  return 0.0;
}

resopt::StrategySet strategies_from_run(const std::vector<resopt::Individual>& members,
                                        resopt::Formulation form, std::uint64_t seed,
                                        const std::string& label_prefix) {
  resopt::StrategySet set;
  for (std::size_t i = 0; i < members.size(); ++i) {
    resopt::Strategy s;
    s.label = label_prefix + "_" + std::to_string(i);
    s.formulation = form;
    s.seed = seed;
    const std::size_t k = members[i].genome.size() / 2;
    s.policy.centers.assign(members[i].genome.begin(),
                            members[i].genome.begin() + std::ptrdiff_t(k));
    s.policy.radii.assign(members[i].genome.begin() + std::ptrdiff_t(k),
                          members[i].genome.end());
    std::array<double, 4> f{};
    std::copy_n(members[i].objectives.begin(), 4, f.begin());
    s.objectives = resopt::ObjectiveVector::from_minimized(f);
    set.push_back(std::move(s));
  }
  return set;
}

resopt::MoeaConfig moea_config_from(const resopt::ExperimentConfig& cfg) {
  resopt::MoeaConfig mc;
  mc.nfe = cfg.optimization.nfe;
  mc.population = cfg.optimization.population;
  mc.seeds = cfg.optimization.seeds;
  mc.epsilons.assign(cfg.optimization.epsilons.begin(), cfg.optimization.epsilons.end());
  const std::size_t k = cfg.optimization.rbf_count;
  mc.lower.assign(k, -1.0);
  mc.upper.assign(k, 1.0);
  mc.lower.insert(mc.lower.end(), k, 1e-6);  // radii strictly positive
  mc.upper.insert(mc.upper.end(), k, 1.0);
  mc.stall_window = cfg.optimization.stall_window;
  mc.adaptive_operators = cfg.optimization.adaptive_operators;
  mc.checkpoint_interval = cfg.optimization.checkpoint_interval;
  return mc;
}

// Fixed reference for run-log hypervolume monitoring (minimized space).
std::vector<double> monitor_reference(const resopt::ReservoirConfig& rc) {
  double annual_demand = 0.0;
  for (double d : rc.demand) annual_demand += d;
  return {1.0, annual_demand + 1.0, 0.5, 0.5};
}

int cmd_gen(const CommonArgs& args) {
  const auto cfg = load_config(args);
  const auto inflow = resopt::load_inflow(cfg);
  const auto model = resopt::fit(inflow, cfg.generator.inter_annual);

  resopt::GenConfig gc;
  gc.seed = cfg.generator.seed;
  gc.nr = cfg.generator.nr;
  gc.years = cfg.generator.years;
  gc.jitter_floor = cfg.generator.jitter_floor_mm3day;
  gc.start_water_year = cfg.generator.start_water_year;

  std::cout << "fitting on " << model.n_years << " water years from "
            << model.start_water_year << "; generating " << gc.nr << " x "
            << gc.years << "y realizations\n";
  const auto ensemble = resopt::generate(model, gc);

  fs::create_directories(cfg.paths.output_dir);
  resopt::EnsembleMeta meta{gc.seed, model.hash()};
  std::string stored;
  if (cfg.generator.format == "csv") {
    stored = (fs::path(cfg.paths.output_dir) / "ensemble_csv").string();
    resopt::save_ensemble_csv(stored, ensemble, meta);
  } else {
    stored = (fs::path(cfg.paths.output_dir) / "ensemble.bin").string();
    resopt::save_ensemble_binary(stored, ensemble, meta);
  }

  // validation: pooled monthly moments vs the historical record, plus floor
  const auto hist = monthly_moments({&inflow});
  std::vector<const resopt::DailySeries*> ptrs;
  ptrs.reserve(ensemble.size());
  for (const auto& r : ensemble.realizations) ptrs.push_back(&r);
  const auto syn = monthly_moments(ptrs);

  double worst_mean_err = 0.0, worst_sd_err = 0.0;
  for (int m = 0; m < 12; ++m) {
    worst_mean_err = std::max(worst_mean_err,
                              std::abs(syn.mean[m] - hist.mean[m]) / hist.mean[m]);
    worst_sd_err = std::max(worst_sd_err, std::abs(syn.sd[m] - hist.sd[m]) / hist.sd[m]);
  }
  double min_flow = 1e300, max_flow = 0.0;
  for (const auto& r : ensemble.realizations) {
    for (double v : r.values()) {
      min_flow = std::min(min_flow, v);
      max_flow = std::max(max_flow, v);
    }
  }
  const bool ok = worst_mean_err <= cfg.generator.validation_mean_tol &&
                  worst_sd_err <= cfg.generator.validation_sd_tol &&
                  min_flow >= gc.jitter_floor;

  json stats;
  stats["max_inflow_mm3day"] = max_flow;
  stats["min_inflow_mm3day"] = min_flow;
  stats["historical_monthly_mean"] = hist.mean;
  stats["historical_monthly_sd"] = hist.sd;
  stats["synthetic_monthly_mean"] = syn.mean;
  stats["synthetic_monthly_sd"] = syn.sd;
  stats["worst_mean_rel_err"] = worst_mean_err;
  stats["worst_sd_rel_err"] = worst_sd_err;
  stats["validation_passed"] = ok;
  {
    std::ofstream out(fs::path(cfg.paths.output_dir) / "ensemble_stats.json");
    out << stats.dump(2) << '\n';
  }

  char hex[24];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(model.hash()));
  json extra;
  extra["model_hash"] = hex;
  extra["ensemble"] = stored;
  extra["validation"] = stats;
  resopt::write_manifest(cfg.paths.output_dir, "gen", cfg,
                         {args.config_path, cfg.paths.inflow_csv}, extra);

  std::cout << "ensemble written to " << stored << "\n"
            << "validation: worst mean err " << worst_mean_err * 100 << "%, worst sd err "
            << worst_sd_err * 100 << "% -> " << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? kExitOk : kExitValidation;
}

int cmd_thresholds(const CommonArgs& args, std::optional<double> fraction) {
  const auto cfg = load_config(args);
  const auto inflow = resopt::load_inflow(cfg);
  resopt::MefSchedule schedule;
  if (cfg.thresholds.method == resopt::ThresholdMethod::PercentOfMaf) {
    schedule = resopt::percent_of_maf(inflow, fraction.value_or(cfg.thresholds.fraction));
  } else {
    schedule = resopt::moefcc(inflow);
  }
  fs::create_directories(cfg.paths.output_dir);
  const std::string out = (fs::path(cfg.paths.output_dir) / "mef_schedule.csv").string();
  resopt::write_schedule_csv(out, schedule);

  json extra;
  extra["method"] = schedule.method;
  extra["annual_requirement_mm3"] = schedule.annual_requirement();
  resopt::write_manifest(cfg.paths.output_dir, "thresholds", cfg,
                         {args.config_path, cfg.paths.inflow_csv}, extra);
  std::cout << "method " << schedule.method << ": annual MEF requirement "
            << schedule.annual_requirement() << " Mm3 -> " << out << "\n";
  return kExitOk;
}

int cmd_optimize(const CommonArgs& args, const std::string& formulation_arg) {
  const auto cfg = load_config(args);
  const auto inflow = resopt::load_inflow(cfg);
  const std::string epath = ensemble_path(cfg);
  const auto ensemble = resopt::load_ensemble(epath);
  const double max_inflow = read_max_inflow(cfg, &ensemble);
  const auto reservoir = resopt::build_reservoir(cfg, inflow, max_inflow);

  resopt::EvalContext ctx;
  ctx.ensemble = &ensemble;
  ctx.sample_size = std::min(cfg.evaluation.sample_size, ensemble.size());
  ctx.sample_seed = cfg.evaluation.sample_seed;
  ctx.mef_basis = resopt::mef_basis_from_string(cfg.evaluation.mef_basis);
  ctx.storage0 = cfg.reservoir.initial_storage_frac * reservoir.live_capacity;

  std::vector<std::string> formulations = cfg.optimization.formulations;
  if (!formulation_arg.empty()) formulations = {formulation_arg};

  const auto mc = moea_config_from(cfg);
  const auto ref = monitor_reference(reservoir);
  resopt::HvOptions hv_opts;
  hv_opts.samples = 20000;
  const auto hv_fn = [&](const std::vector<resopt::Individual>& members) {
    std::vector<std::vector<double>> pts;
    pts.reserve(members.size());
    for (const auto& m : members) pts.push_back(m.objectives);
    return resopt::hypervolume(pts, ref, hv_opts).value;
  };

  fs::create_directories(cfg.paths.output_dir);
  json extra;
  extra["ns_denominator_mm3"] = reservoir.ns_denominator;
  extra["hv_monitor_reference"] = ref;
  json file_list = json::array();

  for (const auto& fname : formulations) {
    const auto form = resopt::formulation_from_string(fname);
    std::vector<resopt::RunResult> runs;
    resopt::EpsilonArchive merged(mc.epsilons);
    for (std::uint64_t seed : mc.seeds) {
      const auto problem = resopt::make_reservoir_problem(reservoir, form, ctx, seed);
      const std::string ckpt =
          (fs::path(cfg.paths.output_dir) /
           ("checkpoint_" + fname + "_seed" + std::to_string(seed) + ".csv"))
              .string();
      const auto on_ckpt = [&](const resopt::LogRecord&,
                               const std::vector<resopt::Individual>& members) {
        resopt::write_strategies_csv(
            ckpt, strategies_from_run(members, form, seed, fname + "_ckpt"));
      };
      auto run = resopt::evolve(problem, mc, seed, hv_fn, on_ckpt);
      const std::string arch =
          (fs::path(cfg.paths.output_dir) /
           ("archive_" + fname + "_seed" + std::to_string(seed) + ".csv"))
              .string();
      resopt::write_strategies_csv(
          arch, strategies_from_run(run.archive, form, seed,
                                    fname + "_s" + std::to_string(seed)));
      resopt::write_run_log_csv(
          (fs::path(cfg.paths.output_dir) /
           ("runlog_" + fname + "_seed" + std::to_string(seed) + ".csv"))
              .string(),
          run);
      for (const auto& ind : run.archive) merged.insert(ind);
      file_list.push_back(arch);
      std::cout << fname << " seed " << seed << ": " << run.archive.size()
                << " archive members, " << run.evaluations << " NFE, "
                << run.restarts << " restarts\n";
      runs.push_back(std::move(run));
    }
    resopt::write_hv_trajectory_csv(
        (fs::path(cfg.paths.output_dir) / ("hv_trajectory_" + fname + ".csv")).string(),
        runs);
    // merged set labels carry the originating seed of each member
    resopt::StrategySet merged_set;
    {
      const auto members = merged.sorted_members();
      merged_set = strategies_from_run(members, form, 0, fname + "_merged");
    }
    const std::string mpath =
        (fs::path(cfg.paths.output_dir) / ("merged_" + fname + ".csv")).string();
    resopt::write_strategies_csv(mpath, merged_set);
    file_list.push_back(mpath);
    std::cout << fname << " merged: " << merged_set.size() << " strategies -> "
              << mpath << "\n";
  }
  extra["outputs"] = file_list;
  resopt::write_manifest(cfg.paths.output_dir, "optimize", cfg,
                         {args.config_path, cfg.paths.inflow_csv, epath}, extra);
  return kExitOk;
}

int cmd_simulate(const CommonArgs& args, const std::string& policy_path,
                 const std::string& formulation_arg) {
  const auto cfg = load_config(args);
  const auto inflow = resopt::load_inflow(cfg);
  resopt::PolicyParams policy;
  try {
    policy = resopt::load_policy_json(policy_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "policy validation failed: " << e.what() << "\n";
    return kExitValidation;
  }
  const auto form = resopt::formulation_from_string(
      formulation_arg.empty() ? "mef-first" : formulation_arg);
  const double max_inflow = read_max_inflow(cfg, nullptr);
  const auto reservoir = resopt::build_reservoir(cfg, inflow, max_inflow);
  const double s0 = cfg.reservoir.initial_storage_frac * reservoir.live_capacity;

  const auto trace = resopt::simulate(inflow, s0, form, policy, reservoir);
  fs::create_directories(cfg.paths.output_dir);
  const std::string out = (fs::path(cfg.paths.output_dir) / "trace.csv").string();
  resopt::write_trace_csv(out, trace);
  const auto j = resopt::objectives_of_trace(
      trace, reservoir, resopt::mef_basis_from_string(cfg.evaluation.mef_basis));

  json extra;
  extra["trace"] = out;
  extra["objectives"] = {{"hydropower_gwh", j.hydropower_gwh},
                         {"deficit_mm3", j.deficit_mm3},
                         {"mef_reliability_pct", j.mef_reliability_pct},
                         {"flood_reliability_pct", j.flood_reliability_pct}};
  resopt::write_manifest(cfg.paths.output_dir, "simulate", cfg,
                         {args.config_path, cfg.paths.inflow_csv, policy_path}, extra);
  std::printf("%s over %zu days: hp %.1f GWh/yr, deficit %.1f Mm3/yr, mef %.2f%%, flood %.2f%%\n",
              to_string(form).c_str(), trace.size(), j.hydropower_gwh, j.deficit_mm3,
              j.mef_reliability_pct, j.flood_reliability_pct);
  std::cout << "trace -> " << out << "\n";
  return kExitOk;
}

int cmd_report(const CommonArgs& args) {
  const auto cfg = load_config(args);
  const auto inflow = resopt::load_inflow(cfg);

  resopt::StrategySet all;
  for (const auto& fname : cfg.optimization.formulations) {
    const fs::path mpath = fs::path(cfg.paths.output_dir) / ("merged_" + fname + ".csv");
    if (!fs::exists(mpath)) {
      throw std::runtime_error("missing " + mpath.string() + " (run `resopt optimize`)");
    }
    for (auto& s : resopt::load_strategies_csv(mpath.string())) all.push_back(std::move(s));
  }
  if (all.empty()) throw std::runtime_error("no strategies found to report on");

  const auto model = resopt::fit(inflow, cfg.generator.inter_annual);
  resopt::GenConfig big;
  big.seed = cfg.generator.seed;
  big.nr = cfg.report.reeval_nr;
  big.years = cfg.generator.years;
  big.jitter_floor = cfg.generator.jitter_floor_mm3day;
  big.start_water_year = cfg.generator.start_water_year;

  const double max_inflow = read_max_inflow(cfg, nullptr);
  const auto reservoir = resopt::build_reservoir(cfg, inflow, max_inflow);
  const double s0 = cfg.reservoir.initial_storage_frac * reservoir.live_capacity;
  const auto basis = resopt::mef_basis_from_string(cfg.evaluation.mef_basis);

  std::cout << "re-evaluating " << all.size() << " strategies on " << big.nr
            << " realizations\n";
  const auto refreshed = resopt::reevaluate(all, reservoir, model, big, basis, s0);
  const auto resorted = resopt::pareto_sort(refreshed);

  fs::create_directories(cfg.paths.output_dir);
  const fs::path outdir = cfg.paths.output_dir;
  resopt::write_strategies_csv((outdir / "strategies.csv").string(), refreshed);
  resopt::write_strategies_csv((outdir / "strategies_resorted.csv").string(), resorted);

  std::vector<std::vector<double>> pts;
  for (const auto& s : resorted) {
    const auto m = s.objectives.minimized();
    pts.emplace_back(m.begin(), m.end());
  }
  const auto ref = resopt::hv_reference(pts);
  resopt::HvOptions hv_opts;
  hv_opts.samples = cfg.report.hv_samples;
  const auto hv = resopt::hypervolume(pts, ref, hv_opts);

  // hv_trajectory.csv: aggregate the per-formulation trajectories from optimize
  {
    std::ofstream out(outdir / "hv_trajectory.csv");
    out << "formulation,seed,nfe,archive_size,eps_progress,hv_estimate\n";
    for (const auto& fname : cfg.optimization.formulations) {
      const fs::path tpath = outdir / ("hv_trajectory_" + fname + ".csv");
      if (!fs::exists(tpath)) continue;
      std::ifstream in(tpath);
      std::string line;
      std::getline(in, line);  // header
      while (std::getline(in, line)) {
        if (!line.empty()) out << fname << ',' << line << '\n';
      }
    }
  }

  // compromise selection per formulation: lowest deficit first
  resopt::SelectionCriteria criteria;
  json selection = json::array();
  std::vector<std::pair<std::string, std::array<double, 12>>> monthly_rows;
  resopt::GenConfig mrc = big;
  mrc.nr = cfg.report.monthly_reliability_nr;
  const auto small_ensemble = resopt::generate(model, mrc);
  for (const auto& fname : cfg.optimization.formulations) {
    const auto form = resopt::formulation_from_string(fname);
    resopt::StrategySet subset;
    for (const auto& s : resorted) {
      if (s.formulation == form) subset.push_back(s);
    }
    if (subset.empty()) continue;
    const auto chosen = resopt::select_strategy(subset, criteria);
    selection.push_back({{"formulation", fname},
                         {"label", chosen.label},
                         {"hydropower_gwh", chosen.objectives.hydropower_gwh},
                         {"deficit_mm3", chosen.objectives.deficit_mm3},
                         {"mef_reliability_pct", chosen.objectives.mef_reliability_pct},
                         {"flood_reliability_pct", chosen.objectives.flood_reliability_pct}});
    monthly_rows.emplace_back(
        chosen.label,
        resopt::monthly_mef_reliability(chosen.policy, form, reservoir,
                                        small_ensemble, s0, basis));
    resopt::write_policy_json(
        (outdir / ("selected_" + fname + ".json")).string(), chosen.policy);
  }
  resopt::write_monthly_reliability_csv((outdir / "monthly_reliability.csv").string(),
                                        monthly_rows);

  json summary;
  summary["strategies_total"] = refreshed.size();
  summary["strategies_nondominated"] = resorted.size();
  summary["hypervolume"] = {{"value", hv.value},
                            {"std_error", hv.std_error},
                            {"reference", ref},
                            {"samples", cfg.report.hv_samples},
                            {"excluded", hv.excluded}};
  summary["selection"] = selection;
  {
    std::ofstream out(outdir / "report_summary.json");
    out << summary.dump(2) << '\n';
  }
  resopt::write_manifest(cfg.paths.output_dir, "report", cfg,
                         {args.config_path, cfg.paths.inflow_csv}, summary);
  std::cout << "report bundle in " << cfg.paths.output_dir << ": " << refreshed.size()
            << " strategies, " << resorted.size() << " nondominated, HV " << hv.value
            << " (se " << hv.std_error << ")\n";
  return kExitOk;
}

int cmd_sweep(const CommonArgs& args, std::vector<double> fractions) {
  const auto cfg = load_config(args);
  if (fractions.empty()) fractions = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  const auto inflow = resopt::load_inflow(cfg);
  const std::string epath = ensemble_path(cfg);
  const auto ensemble = resopt::load_ensemble(epath);
  const double max_inflow = read_max_inflow(cfg, &ensemble);

  resopt::SweepInputs in;
  in.historical = &inflow;
  in.reservoir = resopt::build_reservoir(cfg, inflow, max_inflow);
  in.moea = moea_config_from(cfg);
  in.eval.ensemble = &ensemble;
  in.eval.sample_size = std::min(cfg.evaluation.sample_size, ensemble.size());
  in.eval.sample_seed = cfg.evaluation.sample_seed;
  in.eval.mef_basis = resopt::mef_basis_from_string(cfg.evaluation.mef_basis);
  in.eval.storage0 = cfg.reservoir.initial_storage_frac * in.reservoir.live_capacity;
  in.formulations.clear();
  for (const auto& f : cfg.optimization.formulations) {
    in.formulations.push_back(resopt::formulation_from_string(f));
  }

  const auto rows = resopt::sensitivity_sweep(fractions, in);
  fs::create_directories(cfg.paths.output_dir);
  const std::string out =
      (fs::path(cfg.paths.output_dir) / "sensitivity_summary.csv").string();
  resopt::write_sensitivity_csv(out, rows);

  json extra;
  extra["fractions"] = fractions;
  extra["rows"] = rows.size();
  resopt::write_manifest(cfg.paths.output_dir, "sweep", cfg,
                         {args.config_path, cfg.paths.inflow_csv, epath}, extra);
  std::cout << rows.size() << " summary rows -> " << out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reservoir operation optimization toolkit"};
  app.require_subcommand(1);

  CommonArgs common;
  std::optional<double> fraction;
  std::string formulation, policy_path;
  std::vector<double> fractions;

  auto add_common = [&](CLI::App* sub, bool needs_config = true) {
    auto* opt = sub->add_option("--config", common.config_path, "experiment config (JSON)");
    if (needs_config) opt->required();
    sub->add_option("--out", common.out_override, "override output directory");
    sub->add_option("--threads", common.threads, "cap OpenMP worker count");
    std::uint64_t seed = 0;
    sub->add_option_function<std::uint64_t>(
        "--seed", [&common](const std::uint64_t& s) { common.seed_override = s; },
        "override generator/optimization seed");
    (void)seed;
  };

  auto* gen = app.add_subcommand("gen", "fit the generator and emit an inflow ensemble");
  add_common(gen);

  auto* thr = app.add_subcommand("thresholds", "compute the MEF threshold schedule");
  add_common(thr);
  thr->add_option("--fraction", fraction, "percent-of-MAF fraction override");

  auto* opt = app.add_subcommand("optimize", "search release policies per formulation");
  add_common(opt);
  opt->add_option("--formulation", formulation,
                  "mef-first or demand-first (default: both from config)");

  auto* sim = app.add_subcommand("simulate", "simulate one policy over the config window");
  add_common(sim);
  sim->add_option("--policy", policy_path, "policy JSON {centers, radii}")->required();
  sim->add_option("--formulation", formulation, "mef-first or demand-first");

  auto* rep = app.add_subcommand("report", "re-evaluate archives and emit the report bundle");
  add_common(rep);

  auto* swp = app.add_subcommand("sweep", "re-optimize across MEF fraction settings");
  add_common(swp);
  swp->add_option("--fractions", fractions, "MEF fractions, e.g. 0.3 0.8");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(common);
    if (thr->parsed()) return cmd_thresholds(common, fraction);
    if (opt->parsed()) return cmd_optimize(common, formulation);
    if (sim->parsed()) return cmd_simulate(common, policy_path, formulation);
    if (rep->parsed()) return cmd_report(common);
    if (swp->parsed()) return cmd_sweep(common, fractions);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
