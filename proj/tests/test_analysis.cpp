#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "resopt/analysis.hpp"
#include "resopt/fixture.hpp"
#include "resopt/rng.hpp"

using namespace resopt;

namespace {

Strategy strat(const std::string& label, double hp, double def, double mef,
               double flood, Formulation form = Formulation::MefFirst) {
  Strategy s;
  s.label = label;
  s.formulation = form;
  s.policy = PolicyParams{{0.5}, {0.5}};
  s.objectives = {hp, def, mef, flood};
  return s;
}

}  // namespace

TEST_CASE("pareto sort: textbook dominance (minimization)") {
  // encode minimize {(1,2),(2,1),(2,2)} on the (-hp, deficit) axes
  StrategySet set;
  set.push_back(strat("a", -1.0, 2.0, 0.0, 0.0));
  set.push_back(strat("b", -2.0, 1.0, 0.0, 0.0));
  set.push_back(strat("c", -2.0, 2.0, 0.0, 0.0));
  const auto front = pareto_sort(set);
  REQUIRE(front.size() == 2);
  CHECK(front[0].label == "a");
  CHECK(front[1].label == "b");
}

TEST_CASE("pareto sort: identical points are mutually nondominated") {
  StrategySet set;
  for (int i = 0; i < 4; ++i) set.push_back(strat("p" + std::to_string(i), 5, 5, 5, 5));
  CHECK(pareto_sort(set).size() == 4);
}

TEST_CASE("pareto sort: idempotent and equal to brute force on random sets") {
  Rng rng(606);
  for (int trial = 0; trial < 100; ++trial) {
    StrategySet set;
    for (int i = 0; i < 200; ++i) {
      set.push_back(strat("r" + std::to_string(i), rng.uniform(1000, 4000),
                          rng.uniform(0, 2500), rng.uniform(0, 100),
                          rng.uniform(90, 100)));
    }
    const auto front = pareto_sort(set);
    // brute force O(n^2)
    std::vector<std::string> expect;
    for (std::size_t i = 0; i < set.size(); ++i) {
      const auto fi = set[i].objectives.minimized();
      bool dominated = false;
      for (std::size_t j = 0; j < set.size() && !dominated; ++j) {
        if (i == j) continue;
        const auto fj = set[j].objectives.minimized();
        bool all = true, strict = false;
        for (int k = 0; k < 4; ++k) {
          if (fj[k] > fi[k]) all = false;
          if (fj[k] < fi[k]) strict = true;
        }
        dominated = all && strict;
      }
      if (!dominated) expect.push_back(set[i].label);
    }
    REQUIRE(front.size() == expect.size());
    for (std::size_t i = 0; i < front.size(); ++i) CHECK(front[i].label == expect[i]);

    const auto again = pareto_sort(front);
    CHECK(again.size() == front.size());
  }
}

TEST_CASE("hypervolume: unit box and strip decomposition") {
  CHECK(hypervolume({{1.0, 1.0}}, {2.0, 2.0}).value == doctest::Approx(1.0));
  const auto hv = hypervolume({{1.0, 3.0}, {3.0, 1.0}}, {4.0, 4.0});
  CHECK(std::abs(hv.value - 5.0) < 1e-12);
  CHECK(hv.std_error == 0.0);
}

TEST_CASE("hypervolume: dominated points and duplicates do not change the value") {
  const auto a = hypervolume({{1.0, 3.0}, {3.0, 1.0}}, {4.0, 4.0});
  const auto b = hypervolume({{1.0, 3.0}, {3.0, 1.0}, {3.5, 3.5}, {1.0, 3.0}},
                             {4.0, 4.0});
  CHECK(a.value == doctest::Approx(b.value));
}

TEST_CASE("hypervolume: empty set and excluded violators") {
  CHECK(hypervolume({}, {1.0, 1.0}).value == 0.0);
  const auto hv = hypervolume({{2.0, 2.0}}, {1.0, 1.0});
  CHECK(hv.value == 0.0);
  CHECK(hv.excluded == 1);
}

TEST_CASE("hypervolume 3D: axis-aligned boxes with known union") {
  // single point: volume of its box to the reference
  const auto one = hypervolume({{1.0, 2.0, 3.0}}, {4.0, 4.0, 4.0});
  CHECK(one.value == doctest::Approx(3.0 * 2.0 * 1.0).epsilon(1e-12));
  // two points with computable union: |A| + |B| - |A∩B|
  const auto two = hypervolume({{1.0, 3.0, 2.0}, {2.0, 1.0, 3.0}}, {4.0, 4.0, 4.0});
  const double a = 3.0 * 1.0 * 2.0, b = 2.0 * 3.0 * 1.0;
  const double inter = 2.0 * 1.0 * 1.0;  // max per coordinate
  CHECK(two.value == doctest::Approx(a + b - inter).epsilon(1e-12));
}

TEST_CASE("hypervolume monotone under supersets") {
  Rng rng(17);
  std::vector<std::vector<double>> pts;
  const std::vector<double> ref = {1.0, 1.0, 1.0};
  double prev = 0.0;
  for (int i = 0; i < 30; ++i) {
    pts.push_back({rng.next_double(), rng.next_double(), rng.next_double()});
    const double v = hypervolume(pts, ref).value;
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
}

TEST_CASE("hypervolume 4D Monte Carlo: within 3 SE of inclusion-exclusion") {
  const std::vector<double> ref = {4.0, 4.0, 4.0, 4.0};
  const std::vector<std::vector<double>> pts = {{1.0, 3.0, 2.0, 3.0},
                                                {2.0, 1.0, 3.0, 2.0}};
  auto vol = [&](const std::vector<double>& p) {
    double v = 1.0;
    for (int i = 0; i < 4; ++i) v *= ref[std::size_t(i)] - p[std::size_t(i)];
    return v;
  };
  std::vector<double> meet(4);
  for (int i = 0; i < 4; ++i) {
    meet[std::size_t(i)] = std::max(pts[0][std::size_t(i)], pts[1][std::size_t(i)]);
  }
  const double exact = vol(pts[0]) + vol(pts[1]) - vol(meet);

  HvOptions opts;
  opts.samples = 2'000'000;
  const auto hv = hypervolume(pts, ref, opts);
  CHECK(hv.std_error > 0.0);
  CHECK(std::abs(hv.value - exact) <= 3.0 * hv.std_error);
}

TEST_CASE("hypervolume MC: serial equals parallel bit-for-bit") {
  Rng rng(23);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 12; ++i) {
    pts.push_back({rng.next_double(), rng.next_double(), rng.next_double(),
                   rng.next_double()});
  }
  const std::vector<double> ref = {1.1, 1.1, 1.1, 1.1};
  HvOptions par, ser;
  par.samples = ser.samples = 300000;
  par.mode = ExecMode::Parallel;
  ser.mode = ExecMode::Serial;
  CHECK(hypervolume(pts, ref, par).value == hypervolume(pts, ref, ser).value);
}

TEST_CASE("hv_reference adds a margin beyond the worst point") {
  const auto ref = hv_reference({{-3000.0, 100.0}, {-2000.0, 700.0}});
  CHECK(ref[0] > -2000.0);
  CHECK(ref[1] > 700.0);
}

TEST_CASE("select_strategy: bounds, argmin, and infeasible error") {
  StrategySet set;
  set.push_back(strat("s1", 3600, 700, 93, 99));
  set.push_back(strat("s2", 3500, 50, 90, 99));
  set.push_back(strat("s3", 3650, 1000, 97, 98));

  {
    const auto chosen = select_strategy(set, SelectionCriteria{});
    CHECK(chosen.label == "s2");
  }
  {
    SelectionCriteria c;
    c.min_bound[2] = 95.0;  // MEF reliability at least 95
    CHECK(select_strategy(set, c).label == "s3");
  }
  {
    SelectionCriteria c;
    c.min_bound[0] = 5000.0;  // impossible hydropower bound
    CHECK_THROWS_WITH_AS(select_strategy(set, c), doctest::Contains("nearest"),
                         std::runtime_error);
  }
  {
    SelectionCriteria c;
    c.min_bound[2] = 90.0;
    CHECK(select_strategy({set[0]}, c).label == "s1");  // singleton admit
  }
}

TEST_CASE("reevaluate refreshes objectives but not genomes") {
  const auto hist = fixture::ns_like_inflow(12, 31);
  auto cfg = fixture::ns_like_reservoir(hist);
  const auto model = fit(hist);
  GenConfig gc;
  gc.seed = 9;
  gc.nr = 10;
  gc.years = 2;
  const auto ensemble = generate(model, gc);
  cfg.ns_denominator = cfg.live_capacity + ensemble.max_value();

  StrategySet set;
  set.push_back(strat("a", 0, 0, 0, 0));
  set.back().policy = PolicyParams{{0.1}, {0.4}};
  set.push_back(strat("b", 0, 0, 0, 0, Formulation::DemandFirst));
  set.back().policy = PolicyParams{{0.6}, {0.2}};

  const auto out = reevaluate(set, cfg, ensemble, MefBasis::EfrOnly, 2866.5);
  REQUIRE(out.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(out[i].policy.centers == set[i].policy.centers);
    CHECK(out[i].objectives.hydropower_gwh > 0.0);
  }

  // streamed variant over the same indices gives identical numbers
  const auto streamed = reevaluate(set, cfg, model, gc, MefBasis::EfrOnly, 2866.5);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(streamed[i].objectives.hydropower_gwh ==
          doctest::Approx(out[i].objectives.hydropower_gwh).epsilon(1e-12));
    CHECK(streamed[i].objectives.deficit_mm3 ==
          doctest::Approx(out[i].objectives.deficit_mm3).epsilon(1e-12));
  }

  // hand-averaged oracle for one strategy
  ObjectiveVector mean;
  for (std::size_t r = 0; r < ensemble.size(); ++r) {
    const auto tr = simulate(ensemble.realizations[r], 2866.5,
                             set[0].formulation, set[0].policy, cfg);
    const auto j = objectives_of_trace(tr, cfg, MefBasis::EfrOnly);
    mean.hydropower_gwh += j.hydropower_gwh / double(ensemble.size());
    mean.deficit_mm3 += j.deficit_mm3 / double(ensemble.size());
  }
  CHECK(out[0].objectives.hydropower_gwh ==
        doctest::Approx(mean.hydropower_gwh).epsilon(1e-9));
  CHECK(out[0].objectives.deficit_mm3 ==
        doctest::Approx(mean.deficit_mm3).epsilon(1e-9));
}

TEST_CASE("monthly reliability: zero thresholds give 100% everywhere") {
  const auto hist = fixture::ns_like_inflow(12, 31);
  auto cfg = fixture::ns_like_reservoir(hist);
  cfg.mef.mef.fill(0.0);
  const auto model = fit(hist);
  GenConfig gc;
  gc.seed = 4;
  gc.nr = 5;
  gc.years = 2;
  const auto ensemble = generate(model, gc);
  cfg.ns_denominator = cfg.live_capacity + ensemble.max_value();
  const auto rel = monthly_mef_reliability(PolicyParams{{0.3}, {0.4}},
                                           Formulation::MefFirst, cfg, ensemble,
                                           2000.0);
  for (double v : rel) CHECK(v == doctest::Approx(100.0));
}

TEST_CASE("monthly reliability: day-weighted mean equals overall J_EF") {
  const auto hist = fixture::ns_like_inflow(12, 31);
  auto cfg = fixture::ns_like_reservoir(hist);
  const auto model = fit(hist);
  GenConfig gc;
  gc.seed = 6;
  gc.nr = 4;
  gc.years = 3;
  const auto ensemble = generate(model, gc);
  cfg.ns_denominator = cfg.live_capacity + ensemble.max_value();
  const PolicyParams p{{0.2}, {0.3}};

  const auto rel = monthly_mef_reliability(p, Formulation::DemandFirst, cfg,
                                           ensemble, 2866.5);

  // pooled day counts per month across the ensemble span
  std::array<double, 12> days{};
  double ok_total = 0.0, n_total = 0.0;
  for (const auto& r : ensemble.realizations) {
    std::int64_t dn = day_number(r.start());
    for (std::size_t i = 0; i < r.size(); ++i, ++dn) {
      ++days[from_day_number(dn).month - 1];
    }
  }
  for (int m = 0; m < 12; ++m) {
    ok_total += rel[m] * days[m];
    n_total += days[m];
  }
  // overall J_EF from evaluate on the full ensemble
  EvalConfig ec;
  ec.ensemble = &ensemble;
  ec.sample_size = ensemble.size();
  ec.sample_seed = 0;
  ec.storage0 = 2866.5;
  const auto j = evaluate(p, Formulation::DemandFirst, cfg, ec);
  CHECK(ok_total / n_total == doctest::Approx(j.mef_reliability_pct).epsilon(1e-9));
}

TEST_CASE("sensitivity sweep emits fractions x formulations rows with scaling") {
  const auto hist = fixture::ns_like_inflow(12, 31);
  SweepInputs in;
  in.historical = &hist;
  in.reservoir = fixture::ns_like_reservoir(hist);
  in.moea.nfe = 150;
  in.moea.population = 16;
  in.moea.seeds = {1};
  in.moea.epsilons = {50.0, 50.0, 0.01, 0.01};
  in.moea.lower = {-1.0, 1e-6};
  in.moea.upper = {1.0, 1.0};

  const auto model = fit(hist);
  GenConfig gc;
  gc.seed = 2;
  gc.nr = 6;
  gc.years = 2;
  const auto ensemble = generate(model, gc);
  in.reservoir.ns_denominator = in.reservoir.live_capacity + ensemble.max_value();
  in.eval.ensemble = &ensemble;
  in.eval.sample_size = 4;
  in.eval.sample_seed = 1;
  in.eval.storage0 = 2866.5;

  const auto rows = sensitivity_sweep({0.3, 0.8}, in);
  REQUIRE(rows.size() == 4);  // 2 fractions x 2 formulations
  CHECK(rows[0].fraction == 0.3);
  CHECK(rows[2].fraction == 0.8);
  for (const auto& row : rows) {
    CHECK(row.strategies >= 1);
    for (int obj = 0; obj < 4; ++obj) {
      CHECK(row.quartiles[obj][0] <= row.quartiles[obj][2]);
      CHECK(row.quartiles[obj][2] <= row.quartiles[obj][4]);
    }
  }
  // thresholds scale by 8/3 pointwise between the two fractions
  const auto lo = percent_of_maf(hist, 0.3);
  const auto hi = percent_of_maf(hist, 0.8);
  for (int slot = 0; slot < 365; ++slot) {
    CHECK(hi.mef[slot] == doctest::Approx(lo.mef[slot] * (0.8 / 0.3)).epsilon(1e-9));
  }
}

TEST_CASE("strategies csv round trip") {
  StrategySet set;
  set.push_back(strat("alpha", 3601.25, 700.5, 93.125, 99.0625));
  set.back().policy = PolicyParams{{0.123456789, -0.5}, {0.25, 0.75}};
  set.back().seed = 17;
  set.push_back(strat("beta", 3500, 60, 77, 97.5, Formulation::DemandFirst));

  write_strategies_csv("/tmp/resopt_strats.csv", set);
  const auto loaded = load_strategies_csv("/tmp/resopt_strats.csv");
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].label == "alpha");
  CHECK(loaded[0].seed == 17);
  CHECK(loaded[0].policy.centers == set[0].policy.centers);
  CHECK(loaded[0].policy.radii == set[0].policy.radii);
  CHECK(loaded[0].objectives.hydropower_gwh == set[0].objectives.hydropower_gwh);
  CHECK(loaded[1].formulation == Formulation::DemandFirst);
}
