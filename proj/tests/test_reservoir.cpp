#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "resopt/reservoir.hpp"
#include "resopt/rng.hpp"

using namespace resopt;

namespace {

ReservoirConfig toy_config(double mef = 0.0, double demand = 0.0,
                           double capacity = 5733.0, double max_inflow = 1000.0) {
  ReservoirConfig cfg;
  cfg.live_capacity = capacity;
  cfg.hp_release_cap = 101.9;
  cfg.hp_power_cap = 0.96;
  cfg.efficiency = 0.9;
  cfg.specific_weight = 9810.0;
  cfg.elevation_storage = {{0.0, 60.0}, {capacity, 120.0}};
  cfg.demand.fill(demand);
  cfg.mef.mef.fill(mef);
  cfg.flood.ft = 500.0;
  cfg.ns_denominator = capacity + max_inflow;
  return cfg;
}

PolicyParams policy(double c, double r) { return PolicyParams{{c}, {r}}; }

}  // namespace

TEST_CASE("normalized storage") {
  auto cfg = toy_config();
  CHECK(normalized_storage(0.0, cfg) == 0.0);
  CHECK(normalized_storage(2866.5, cfg) == doctest::Approx(2866.5 / 6733.0));
  cfg.ns_denominator = 5733.0;  // max inflow 0
  CHECK(normalized_storage(5733.0, cfg) == doctest::Approx(1.0));
}

TEST_CASE("rbf release hits the cap at the center") {
  const auto cfg = toy_config();
  CHECK(rbf_release(0.5, policy(0.5, 0.3), cfg) == doctest::Approx(101.9));
}

TEST_CASE("rbf release: hand value one radius from the center") {
  const auto cfg = toy_config();
  // exponent ((0.75-0.5)/0.25)^2 = 1 -> Q_HP * e^-1
  CHECK(rbf_release(0.75, policy(0.5, 0.25), cfg) ==
        doctest::Approx(101.9 * std::exp(-1.0)).epsilon(1e-12));
  CHECK(101.9 * std::exp(-1.0) == doctest::Approx(37.49).epsilon(1e-3));
}

TEST_CASE("rbf release decays to zero for tiny radii") {
  const auto cfg = toy_config();
  CHECK(rbf_release(0.9, policy(0.2, 1e-6), cfg) == doctest::Approx(0.0));
}

TEST_CASE("rbf release invariant under reordering of (c, r) pairs") {
  const auto cfg = toy_config();
  PolicyParams a{{0.2, 0.7, -0.3}, {0.4, 0.1, 0.9}};
  PolicyParams b{{0.7, -0.3, 0.2}, {0.1, 0.9, 0.4}};
  for (double ns = 0.0; ns <= 1.0; ns += 0.01) {
    CHECK(rbf_release(ns, a, cfg) == doctest::Approx(rbf_release(ns, b, cfg)));
  }
}

TEST_CASE("rbf release stays within [0, Q_HP] for K > 1") {
  const auto cfg = toy_config();
  PolicyParams p{{0.1, 0.1}, {1.0, 1.0}};
  for (double ns = 0.0; ns <= 1.0; ns += 0.05) {
    const double r = rbf_release(ns, p, cfg);
    CHECK(r >= 0.0);
    CHECK(r <= cfg.hp_release_cap);
  }
}

TEST_CASE("step: plentiful MEF-first day matches hand allocation") {
  auto cfg = toy_config(50.0, 100.0);
  // rbf target 80: center at ns of s_prev, scaled cap via custom Q_HP
  cfg.hp_release_cap = 80.0;
  const double ns = normalized_storage(1000.0, cfg);
  const auto f = step(1000.0, 200.0, 0, Formulation::MefFirst, policy(ns, 0.5), cfg);
  CHECK(f.efr == doctest::Approx(50.0));
  CHECK(f.dr == doctest::Approx(100.0));
  CHECK(f.hpr == doctest::Approx(80.0));
  CHECK(f.ewr == doctest::Approx(0.0));
  CHECK(f.storage == doctest::Approx(970.0));
}

TEST_CASE("step: scarcity exhibits the priority flip") {
  auto cfg = toy_config(50.0, 100.0);
  cfg.hp_release_cap = 80.0;
  const auto p = policy(0.0, 0.5);  // ns(0) = 0 -> rbf = 80 (center at 0)

  const auto mef_first = step(0.0, 120.0, 0, Formulation::MefFirst, p, cfg);
  CHECK(mef_first.efr == doctest::Approx(50.0));
  CHECK(mef_first.dr == doctest::Approx(70.0));
  CHECK(mef_first.hpr == doctest::Approx(0.0));
  CHECK(mef_first.storage == doctest::Approx(0.0));

  const auto demand_first = step(0.0, 120.0, 0, Formulation::DemandFirst, p, cfg);
  CHECK(demand_first.dr == doctest::Approx(100.0));
  CHECK(demand_first.hpr == doctest::Approx(20.0));
  CHECK(demand_first.efr == doctest::Approx(0.0));
  CHECK(demand_first.storage == doctest::Approx(0.0));
}

TEST_CASE("step: spill caps storage at live capacity") {
  auto cfg = toy_config(0.0, 0.0);
  const auto f = step(5733.0, 300.0, 0, Formulation::MefFirst, policy(0.9, 1e-6), cfg);
  CHECK(f.ewr == doctest::Approx(300.0));
  CHECK(f.storage == doctest::Approx(5733.0));
}

TEST_CASE("priority dominance under scarcity (randomized states)") {
  Rng rng(404);
  auto cfg = toy_config();
  for (int trial = 0; trial < 2000; ++trial) {
    const double mef = rng.uniform(0.0, 80.0);
    const double dd = rng.uniform(0.0, 120.0);
    cfg.mef.mef.fill(mef);
    cfg.demand.fill(dd);
    cfg.hp_release_cap = rng.uniform(0.0, 120.0) + 1e-9;
    const double s_prev = rng.uniform(0.0, 40.0);
    const double q = rng.uniform(0.0, mef + dd);  // guarantees A may fall short
    const auto p = policy(rng.uniform(-1.0, 1.0), rng.uniform(0.05, 1.0));

    const auto a = step(s_prev, q, 0, Formulation::MefFirst, p, cfg);
    const auto b = step(s_prev, q, 0, Formulation::DemandFirst, p, cfg);
    CHECK(a.efr >= b.efr - 1e-12);
    CHECK(b.dr >= a.dr - 1e-12);
  }
}

TEST_CASE("simulate: no-flux fixed point") {
  auto cfg = toy_config(0.0, 0.0);
  const DailySeries q({2000, 6, 1}, std::vector<double>(100, 0.0));
  const auto tr = simulate(q, 1234.0, Formulation::MefFirst, policy(0.9, 1e-6), cfg);
  for (std::size_t t = 0; t < tr.size(); ++t) {
    CHECK(tr.storage[t] == doctest::Approx(1234.0));
    CHECK(tr.release(t) == doctest::Approx(0.0));
  }
}

TEST_CASE("simulate: 10-day trace equals the hand-computed table") {
  // toy with capacity 100, mef 5, demand 10, Q_HP 20, policy centered at 0
  auto cfg = toy_config(5.0, 10.0, 100.0, 100.0);
  cfg.hp_release_cap = 20.0;
  // wide radius so the rbf is ~flat: exact targets computed per day below
  const auto p = policy(0.0, 1.0);
  const std::vector<double> inflow = {30, 0, 0, 50, 80, 120, 0, 0, 10, 5};
  const auto tr = simulate(DailySeries({2001, 6, 1}, inflow), 20.0,
                           Formulation::MefFirst, p, cfg);

  // hand mass balance: replay the allocation rules in scalar code
  double s = 20.0;
  for (std::size_t t = 0; t < inflow.size(); ++t) {
    const double ns = s / cfg.ns_denominator;
    const double target = 20.0 * std::exp(-ns * ns);
    double avail = s + inflow[t];
    const double efr = std::min(5.0, avail);
    avail -= efr;
    const double dr = std::min(10.0, avail);
    avail -= dr;
    const double hpr = std::min(target, avail);
    avail -= hpr;
    const double ewr = std::max(avail - 100.0, 0.0);
    s = avail - ewr;
    CHECK(tr.efr[t] == doctest::Approx(efr).epsilon(1e-12));
    CHECK(tr.dr[t] == doctest::Approx(dr).epsilon(1e-12));
    CHECK(tr.hpr[t] == doctest::Approx(hpr).epsilon(1e-12));
    CHECK(tr.ewr[t] == doctest::Approx(ewr).epsilon(1e-12));
    CHECK(tr.storage[t] == doctest::Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("simulate: telescoped mass balance") {
  Rng rng(777);
  auto cfg = toy_config(20.0, 35.0);
  std::vector<double> q(730);
  for (auto& v : q) v = 150.0 * rng.next_double();
  const auto tr = simulate(DailySeries({2000, 6, 1}, q), 2000.0,
                           Formulation::DemandFirst, policy(0.3, 0.4), cfg);
  double sum_q = 0.0, sum_out = 0.0;
  for (std::size_t t = 0; t < tr.size(); ++t) {
    sum_q += tr.inflow[t];
    sum_out += tr.efr[t] + tr.dr[t] + tr.hpr[t] + tr.ewr[t];
  }
  CHECK(std::abs(tr.storage.back() - 2000.0 - sum_q + sum_out) <=
        1e-9 * std::max(1.0, sum_q));
}

TEST_CASE("simulate: flux bounds and spill-only-at-capacity invariants") {
  Rng rng(31337);
  auto cfg = toy_config(15.0, 40.0, 800.0);
  cfg.hp_release_cap = 60.0;
  std::vector<double> q(365);
  for (auto& v : q) v = 200.0 * rng.next_double();
  const auto tr = simulate(DailySeries({2001, 6, 1}, q), 400.0,
                           Formulation::MefFirst, policy(-0.2, 0.7), cfg);
  for (std::size_t t = 0; t < tr.size(); ++t) {
    CHECK(tr.efr[t] <= 15.0 + 1e-12);
    CHECK(tr.dr[t] <= 40.0 + 1e-12);
    CHECK(tr.hpr[t] <= 60.0 + 1e-12);
    CHECK(tr.storage[t] >= 0.0);
    CHECK(tr.storage[t] <= 800.0 + 1e-12);
    if (tr.ewr[t] > 0.0) CHECK(tr.storage[t] == doctest::Approx(800.0));
  }
}

TEST_CASE("head interpolation on a two-point table") {
  auto cfg = toy_config();
  cfg.elevation_storage = {{0.0, 60.0}, {5733.0, 120.0}};
  CHECK(head(0.0, cfg) == 60.0);
  CHECK(head(5733.0, cfg) == 120.0);
  CHECK(head(2866.5, cfg) == doctest::Approx(90.0));
}

TEST_CASE("head is monotone on a multi-point table") {
  auto cfg = toy_config();
  cfg.elevation_storage = {{0, 75}, {1000, 92}, {2000, 103}, {5733, 125}};
  double prev = -1.0;
  for (double s = 0.0; s <= 5733.0; s += 13.7) {
    const double h = head(s, cfg);
    CHECK(h >= prev);
    prev = h;
  }
}

TEST_CASE("config and policy validation") {
  auto cfg = toy_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.efficiency = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  PolicyParams bad{{0.5}, {0.0}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  PolicyParams bad2{{2.0}, {0.5}};
  CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
  PolicyParams bad3{{0.1, 0.2}, {0.5}};
  CHECK_THROWS_AS(bad3.validate(), std::invalid_argument);
}

TEST_CASE("trace years: whole water years vs fractional") {
  auto cfg = toy_config();
  const std::int64_t nd = day_number({2002, 5, 31}) - day_number({2000, 6, 1}) + 1;
  const DailySeries q({2000, 6, 1},
                      std::vector<double>(static_cast<std::size_t>(nd), 1.0));
  const auto tr = simulate(q, 0.0, Formulation::MefFirst, policy(0.5, 0.5), cfg);
  CHECK(tr.years() == doctest::Approx(2.0));

  const DailySeries q10({2000, 6, 1}, std::vector<double>(10, 1.0));
  const auto tr10 = simulate(q10, 0.0, Formulation::MefFirst, policy(0.5, 0.5), cfg);
  CHECK(tr10.years() == doctest::Approx(10.0 / 365.25));
}
