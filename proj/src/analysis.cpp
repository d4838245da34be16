#include "resopt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "resopt/rng.hpp"
#include "resopt/thresholds.hpp"

namespace resopt {

namespace {

bool dominates_min(const std::vector<double>& a, const std::vector<double>& b) {
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strict = true;
  }
  return strict;
}

}  // namespace

std::vector<std::size_t> nondominated_indices(
    const std::vector<std::vector<double>>& minimized) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < minimized.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < minimized.size() && !dominated; ++j) {
      if (j != i && dominates_min(minimized[j], minimized[i])) dominated = true;
    }
    if (!dominated) keep.push_back(i);
  }
  return keep;
}

StrategySet pareto_sort(const StrategySet& points) {
  std::vector<std::vector<double>> f;
  f.reserve(points.size());
  for (const auto& s : points) {
    const auto m = s.objectives.minimized();
    f.emplace_back(m.begin(), m.end());
  }
  StrategySet out;
  for (std::size_t i : nondominated_indices(f)) out.push_back(points[i]);
  return out;
}

namespace {

// 2D hypervolume of a minimized staircase against (r1, r2).
double hv2(std::vector<std::pair<double, double>> pts, double r1, double r2) {
  if (pts.empty()) return 0.0;
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  double best_y = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> stair;
  for (const auto& p : pts) {
    if (p.second < best_y) {
      stair.push_back(p);
      best_y = p.second;
    }
  }
  for (std::size_t i = 0; i < stair.size(); ++i) {
    const double x_next = i + 1 < stair.size() ? stair[i + 1].first : r1;
    area += (x_next - stair[i].first) * (r2 - stair[i].second);
  }
  return area;
}

// 3D: sweep slabs along the third coordinate, accumulating 2D slices.
double hv3(const std::vector<std::vector<double>>& pts,
           const std::vector<double>& ref) {
  std::vector<double> levels;
  for (const auto& p : pts) levels.push_back(p[2]);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  double volume = 0.0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const double z0 = levels[k];
    const double z1 = k + 1 < levels.size() ? levels[k + 1] : ref[2];
    std::vector<std::pair<double, double>> slice;
    for (const auto& p : pts) {
      if (p[2] <= z0) slice.emplace_back(p[0], p[1]);
    }
    volume += hv2(std::move(slice), ref[0], ref[1]) * (z1 - z0);
  }
  return volume;
}

}  // namespace

HvResult hypervolume(const std::vector<std::vector<double>>& points,
                     const std::vector<double>& reference, const HvOptions& opts) {
  const std::size_t d = reference.size();
  std::vector<std::vector<double>> pts;
  std::size_t excluded = 0;
  for (const auto& p : points) {
    if (p.size() != d) throw std::invalid_argument("point/reference dimension mismatch");
    bool ok = true;
    for (std::size_t i = 0; i < d; ++i) ok = ok && p[i] < reference[i];
    if (ok) {
      pts.push_back(p);
    } else {
      ++excluded;
    }
  }
  if (excluded > 0) {
    std::fprintf(stderr,
                 "hypervolume: excluded %zu point(s) not dominating the reference\n",
                 excluded);
  }
  HvResult res;
  res.excluded = excluded;
  if (pts.empty()) return res;

  if (d == 1) {
    double best = reference[0];
    for (const auto& p : pts) best = std::min(best, p[0]);
    res.value = reference[0] - best;
    return res;
  }
  if (d == 2) {
    std::vector<std::pair<double, double>> xy;
    for (const auto& p : pts) xy.emplace_back(p[0], p[1]);
    res.value = hv2(std::move(xy), reference[0], reference[1]);
    return res;
  }
  if (d == 3) {
    res.value = hv3(pts, reference);
    return res;
  }

  // >= 4 objectives: deterministic chunked Monte Carlo over the bounding box
  // [ideal, reference]. Chunk size is fixed so thread count cannot change the
  // sampled values or the reduction order.
  std::vector<double> lo(d);
  for (std::size_t i = 0; i < d; ++i) {
    lo[i] = reference[i];
    for (const auto& p : pts) lo[i] = std::min(lo[i], p[i]);
  }
  double box = 1.0;
  for (std::size_t i = 0; i < d; ++i) box *= reference[i] - lo[i];

  const std::size_t n = std::max<std::size_t>(opts.samples, 1);
  constexpr std::size_t kChunk = 8192;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::uint64_t> hits(chunks, 0);

  auto run_chunk = [&](std::size_t c) {
    Rng rng(derive_stream(opts.seed, c));
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(begin + kChunk, n);
    std::uint64_t h = 0;
    std::vector<double> x(d);
    for (std::size_t s = begin; s < end; ++s) {
      for (std::size_t i = 0; i < d; ++i) x[i] = rng.uniform(lo[i], reference[i]);
      for (const auto& p : pts) {
        bool dom = true;
        for (std::size_t i = 0; i < d && dom; ++i) dom = p[i] <= x[i];
        if (dom) {
          ++h;
          break;
        }
      }
    }
    hits[c] = h;
  };

  if (opts.mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t c = 0; c < std::ptrdiff_t(chunks); ++c) run_chunk(std::size_t(c));
  } else {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  }

  std::uint64_t total = 0;
  for (std::uint64_t h : hits) total += h;
  const double frac = double(total) / double(n);
  res.value = frac * box;
  res.std_error = box * std::sqrt(std::max(frac * (1.0 - frac), 0.0) / double(n));
  return res;
}

std::vector<double> hv_reference(const std::vector<std::vector<double>>& points) {
  if (points.empty()) throw std::invalid_argument("hv_reference needs points");
  const std::size_t d = points[0].size();
  std::vector<double> worst(d, -std::numeric_limits<double>::infinity());
  std::vector<double> best(d, std::numeric_limits<double>::infinity());
  for (const auto& p : points) {
    for (std::size_t i = 0; i < d; ++i) {
      worst[i] = std::max(worst[i], p[i]);
      best[i] = std::min(best[i], p[i]);
    }
  }
  std::vector<double> ref(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double margin = std::max({std::abs(worst[i]), worst[i] - best[i], 1e-9});
    ref[i] = worst[i] + 0.1 * margin;
  }
  return ref;
}

Problem make_reservoir_problem(const ReservoirConfig& cfg, Formulation form,
                               const EvalContext& ctx, std::uint64_t run_seed) {
  const std::uint64_t base = derive_stream(ctx.sample_seed, run_seed);
  const ReservoirConfig cfg_copy = cfg;
  const EvalContext ctx_copy = ctx;
  return [cfg_copy, form, ctx_copy, base](const std::vector<double>& genome,
                                          std::uint64_t eval_index) {
    if (genome.size() % 2 != 0 || genome.empty()) {
      throw std::invalid_argument("reservoir genome must hold (c, r) pairs");
    }
    const std::size_t k = genome.size() / 2;
    PolicyParams p;
    p.centers.assign(genome.begin(), genome.begin() + std::ptrdiff_t(k));
    p.radii.assign(genome.begin() + std::ptrdiff_t(k), genome.end());

    EvalConfig ec;
    ec.ensemble = ctx_copy.ensemble;
    ec.sample_size = ctx_copy.sample_size;
    ec.sample_seed = derive_stream(base, eval_index);
    ec.mef_basis = ctx_copy.mef_basis;
    ec.storage0 = ctx_copy.storage0;
    const auto j = evaluate(p, form, cfg_copy, ec).minimized();
    return std::vector<double>(j.begin(), j.end());
  };
}

MultiSeedResult run_multiseed_factory(const ProblemFactory& factory,
                                      const MoeaConfig& cfg,
                                      const ArchiveMetric& hv_fn) {
  if (cfg.seeds.empty()) throw std::invalid_argument("run_multiseed needs >= 1 seed");
  MultiSeedResult out;
  for (std::uint64_t seed : cfg.seeds) {
    out.runs.push_back(evolve(factory(seed), cfg, seed, hv_fn));
  }
  EpsilonArchive merged(cfg.epsilons);
  for (const auto& run : out.runs) {
    for (const auto& ind : run.archive) merged.insert(ind);
  }
  out.merged = merged.sorted_members();
  return out;
}

namespace {

ObjectiveVector mean_of(const std::vector<ObjectiveVector>& slot) {
  ObjectiveVector mean;
  for (const auto& v : slot) {
    mean.hydropower_gwh += v.hydropower_gwh;
    mean.deficit_mm3 += v.deficit_mm3;
    mean.mef_reliability_pct += v.mef_reliability_pct;
    mean.flood_reliability_pct += v.flood_reliability_pct;
  }
  const double k = double(slot.size());
  mean.hydropower_gwh /= k;
  mean.deficit_mm3 /= k;
  mean.mef_reliability_pct /= k;
  mean.flood_reliability_pct /= k;
  return mean;
}

// Full-ensemble mean objectives with realizations generated on demand.
ObjectiveVector evaluate_streamed(const PolicyParams& p, Formulation form,
                                  const ReservoirConfig& cfg,
                                  const GeneratorModel& model, const GenConfig& gencfg,
                                  MefBasis basis, double storage0, ExecMode mode) {
  std::vector<ObjectiveVector> slot(gencfg.nr);
  auto one = [&](std::size_t i) {
    const DailySeries q = generate_realization(model, gencfg, i);
    const SimTrace tr = simulate(q, storage0, form, p, cfg);
    slot[i] = objectives_of_trace(tr, cfg, basis);
  };
  if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(gencfg.nr); ++i) one(std::size_t(i));
  } else {
    for (std::size_t i = 0; i < gencfg.nr; ++i) one(i);
  }
  return mean_of(slot);
}

}  // namespace

StrategySet reevaluate(const StrategySet& set, const ReservoirConfig& cfg,
                       const GeneratorModel& model, const GenConfig& gencfg,
                       MefBasis basis, double storage0, ExecMode mode) {
  StrategySet out = set;
  for (auto& s : out) {
    s.objectives = evaluate_streamed(s.policy, s.formulation, cfg, model, gencfg,
                                     basis, storage0, mode);
  }
  return out;
}

StrategySet reevaluate(const StrategySet& set, const ReservoirConfig& cfg,
                       const InflowEnsemble& ensemble, MefBasis basis,
                       double storage0, ExecMode mode) {
  StrategySet out = set;
  EvalConfig ec;
  ec.ensemble = &ensemble;
  ec.sample_size = ensemble.size();
  ec.sample_seed = 0;
  ec.mef_basis = basis;
  ec.storage0 = storage0;
  for (auto& s : out) {
    s.objectives = evaluate(s.policy, s.formulation, cfg, ec, mode);
  }
  return out;
}

std::array<double, 12> monthly_mef_reliability(const PolicyParams& p,
                                               Formulation form,
                                               const ReservoirConfig& cfg,
                                               const InflowEnsemble& ensemble,
                                               double storage0, MefBasis basis) {
  const std::size_t nr = ensemble.size();
  std::vector<std::array<std::uint64_t, 12>> ok(nr), total(nr);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(nr); ++i) {
    ok[std::size_t(i)] = {};
    total[std::size_t(i)] = {};
    const SimTrace tr =
        simulate(ensemble.realizations[std::size_t(i)], storage0, form, p, cfg);
    std::int64_t dn = day_number(tr.start);
    for (std::size_t t = 0; t < tr.size(); ++t, ++dn) {
      const DayStamp d = from_day_number(dn);
      const int slot = water_year_slot(d);
      const double flow = basis == MefBasis::EfrOnly ? tr.efr[t] : tr.release(t);
      ++total[std::size_t(i)][d.month - 1];
      if (flow >= cfg.mef.mef[slot]) ++ok[std::size_t(i)][d.month - 1];
    }
  }
  std::array<double, 12> out{};
  for (int m = 0; m < 12; ++m) {
    std::uint64_t o = 0, t = 0;
    for (std::size_t i = 0; i < nr; ++i) {
      o += ok[i][m];
      t += total[i][m];
    }
    out[m] = t == 0 ? 0.0 : 100.0 * double(o) / double(t);
  }
  return out;
}

namespace {

std::array<double, 5> quartiles_lower(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  auto at = [&](double frac) {
    return v[std::size_t(std::floor(frac * double(n - 1)))];
  };
  return {v.front(), at(0.25), at(0.5), at(0.75), v.back()};
}

}  // namespace

std::vector<SweepRow> sensitivity_sweep(const std::vector<double>& fractions,
                                        const SweepInputs& in) {
  if (in.historical == nullptr) throw std::invalid_argument("sweep needs history");
  std::vector<SweepRow> rows;
  for (double f : fractions) {
    ReservoirConfig cfg = in.reservoir;
    cfg.mef = percent_of_maf(*in.historical, f);
    for (Formulation form : in.formulations) {
      auto factory = [&](std::uint64_t run_seed) {
        return make_reservoir_problem(cfg, form, in.eval, run_seed);
      };
      const MultiSeedResult res = run_multiseed_factory(factory, in.moea);

      StrategySet set;
      for (std::size_t i = 0; i < res.merged.size(); ++i) {
        Strategy s;
        s.label = "f" + std::to_string(f) + "_" + to_string(form) + "_" +
                  std::to_string(i);
        s.formulation = form;
        const std::size_t k = res.merged[i].genome.size() / 2;
        s.policy.centers.assign(res.merged[i].genome.begin(),
                                res.merged[i].genome.begin() + std::ptrdiff_t(k));
        s.policy.radii.assign(res.merged[i].genome.begin() + std::ptrdiff_t(k),
                              res.merged[i].genome.end());
        std::array<double, 4> m{};
        std::copy_n(res.merged[i].objectives.begin(), 4, m.begin());
        s.objectives = ObjectiveVector::from_minimized(m);
        set.push_back(std::move(s));
      }
      const StrategySet front = pareto_sort(set);

      SweepRow row;
      row.fraction = f;
      row.formulation = form;
      row.strategies = front.size();
      for (int obj = 0; obj < 4; ++obj) {
        std::vector<double> vals;
        for (const auto& s : front) {
          const double v = obj == 0   ? s.objectives.hydropower_gwh
                           : obj == 1 ? s.objectives.deficit_mm3
                           : obj == 2 ? s.objectives.mef_reliability_pct
                                      : s.objectives.flood_reliability_pct;
          vals.push_back(v);
        }
        row.quartiles[obj] = quartiles_lower(std::move(vals));
      }
      rows.push_back(row);
    }
  }
  return rows;
}

SelectionCriteria::SelectionCriteria() {
  min_bound.fill(-std::numeric_limits<double>::infinity());
  max_bound.fill(std::numeric_limits<double>::infinity());
}

Strategy select_strategy(const StrategySet& set, const SelectionCriteria& criteria) {
  if (set.empty()) throw std::invalid_argument("select_strategy on empty set");
  auto value_of = [](const Strategy& s, int obj) {
    switch (obj) {
      case 0: return s.objectives.hydropower_gwh;
      case 1: return s.objectives.deficit_mm3;
      case 2: return s.objectives.mef_reliability_pct;
      default: return s.objectives.flood_reliability_pct;
    }
  };

  std::vector<std::size_t> feasible;
  for (std::size_t i = 0; i < set.size(); ++i) {
    bool ok = true;
    for (int obj = 0; obj < 4; ++obj) {
      const double v = value_of(set[i], obj);
      if (v < criteria.min_bound[obj] || v > criteria.max_bound[obj]) ok = false;
    }
    if (ok) feasible.push_back(i);
  }

  if (feasible.empty()) {
    // report the nearest misses by total bound violation
    std::vector<std::pair<double, std::size_t>> misses;
    for (std::size_t i = 0; i < set.size(); ++i) {
      double viol = 0.0;
      for (int obj = 0; obj < 4; ++obj) {
        const double v = value_of(set[i], obj);
        viol += std::max(0.0, criteria.min_bound[obj] - v);
        viol += std::max(0.0, v - criteria.max_bound[obj]);
      }
      misses.emplace_back(viol, i);
    }
    std::sort(misses.begin(), misses.end());
    std::ostringstream msg;
    msg << "no strategy meets the bounds; nearest misses:";
    for (std::size_t k = 0; k < std::min<std::size_t>(3, misses.size()); ++k) {
      msg << ' ' << set[misses[k].second].label << " (violation "
          << misses[k].first << ')';
    }
    throw std::runtime_error(msg.str());
  }

  // lexicographic comparison along the priority list, each objective in its
  // preferred direction (senses: max, min, max, max)
  auto better = [&](std::size_t a, std::size_t b) {
    for (int obj : criteria.priority) {
      const double va = value_of(set[a], obj), vb = value_of(set[b], obj);
      const bool minimize = obj == 1;
      if (va == vb) continue;
      return minimize ? va < vb : va > vb;
    }
    return false;
  };
  std::size_t best = feasible[0];
  for (std::size_t i : feasible) {
    if (i != best && better(i, best)) best = i;
  }
  return set[best];
}

void write_strategies_csv(const std::string& path, const StrategySet& set) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# senses: hydropower_gwh=max, deficit_mm3=min, mef_reliability_pct=max, "
         "flood_reliability_pct=max\n";
  out << "label,formulation,seed,hydropower_gwh,deficit_mm3,mef_reliability_pct,"
         "flood_reliability_pct,rbf_count,genes\n";
  char buf[64];
  for (const auto& s : set) {
    out << s.label << ',' << to_string(s.formulation) << ',' << s.seed << ',';
    const double vals[4] = {s.objectives.hydropower_gwh, s.objectives.deficit_mm3,
                            s.objectives.mef_reliability_pct,
                            s.objectives.flood_reliability_pct};
    for (double v : vals) {
      std::snprintf(buf, sizeof buf, "%.17g,", v);
      out << buf;
    }
    out << s.policy.rbf_count() << ',';
    for (std::size_t k = 0; k < s.policy.rbf_count(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g;", s.policy.centers[k]);
      out << buf;
    }
    for (std::size_t k = 0; k < s.policy.rbf_count(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g%s", s.policy.radii[k],
                    k + 1 < s.policy.rbf_count() ? ";" : "");
      out << buf;
    }
    out << '\n';
  }
}

StrategySet load_strategies_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  StrategySet set;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("label,", 0) == 0) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 9) throw std::runtime_error(path + ": malformed strategy row");
    Strategy s;
    s.label = fields[0];
    s.formulation = formulation_from_string(fields[1]);
    s.seed = std::stoull(fields[2]);
    s.objectives.hydropower_gwh = std::stod(fields[3]);
    s.objectives.deficit_mm3 = std::stod(fields[4]);
    s.objectives.mef_reliability_pct = std::stod(fields[5]);
    s.objectives.flood_reliability_pct = std::stod(fields[6]);
    const std::size_t k = std::stoul(fields[7]);
    std::istringstream genes(fields[8]);
    std::vector<double> g;
    while (std::getline(genes, field, ';')) g.push_back(std::stod(field));
    if (g.size() != 2 * k) throw std::runtime_error(path + ": bad gene count");
    s.policy.centers.assign(g.begin(), g.begin() + std::ptrdiff_t(k));
    s.policy.radii.assign(g.begin() + std::ptrdiff_t(k), g.end());
    set.push_back(std::move(s));
  }
  return set;
}

void write_hv_trajectory_csv(const std::string& path,
                             const std::vector<RunResult>& runs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "seed,nfe,archive_size,eps_progress,hv_estimate\n";
  for (const auto& run : runs) {
    for (const auto& rec : run.log) {
      out << run.seed << ',' << rec.nfe << ',' << rec.archive_size << ','
          << rec.eps_progress << ',' << rec.hv_estimate << '\n';
    }
  }
}

void write_run_log_csv(const std::string& path, const RunResult& run) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "nfe,archive_size,eps_progress,p_sbx_pm,p_de,p_pcx,p_spx,p_undx,p_um,"
         "hv_estimate\n";
  for (const auto& rec : run.log) {
    out << rec.nfe << ',' << rec.archive_size << ',' << rec.eps_progress;
    for (double p : rec.operator_probs) out << ',' << p;
    out << ',' << rec.hv_estimate << '\n';
  }
}

void write_sensitivity_csv(const std::string& path,
                           const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "fraction,formulation,strategies,objective,min,q1,median,q3,max\n";
  for (const auto& row : rows) {
    for (int obj = 0; obj < 4; ++obj) {
      out << row.fraction << ',' << to_string(row.formulation) << ','
          << row.strategies << ',' << ObjectiveVector::names[obj];
      for (double v : row.quartiles[obj]) out << ',' << v;
      out << '\n';
    }
  }
}

void write_monthly_reliability_csv(
    const std::string& path,
    const std::vector<std::pair<std::string, std::array<double, 12>>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "strategy,jan,feb,mar,apr,may,jun,jul,aug,sep,oct,nov,dec\n";
  for (const auto& [label, vals] : rows) {
    out << label;
    for (double v : vals) out << ',' << v;
    out << '\n';
  }
}

}  // namespace resopt
