#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "resopt/moea.hpp"
#include "resopt/rng.hpp"

using namespace resopt;

namespace {

Individual make_ind(std::vector<double> f, std::vector<double> genome = {}) {
  Individual x;
  x.objectives = std::move(f);
  x.genome = genome.empty() ? x.objectives : std::move(genome);
  return x;
}

// Exhaustive ε-nondominated filter: group points by box, keep the
// corner-nearest occupant per box, then drop box-dominated boxes.
std::vector<Individual> brute_force_filter(const std::vector<Individual>& pts,
                                           const std::vector<double>& eps) {
  auto corner_dist = [&](const Individual& x, const std::vector<std::int64_t>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
      const double c = double(b[i]) * eps[i];
      d += (x.objectives[i] - c) * (x.objectives[i] - c);
    }
    return d;
  };
  std::map<std::vector<std::int64_t>, Individual> best;
  for (const auto& p : pts) {
    const auto b = box_index(p.objectives, eps);
    auto it = best.find(b);
    if (it == best.end() || corner_dist(p, b) < corner_dist(it->second, b)) {
      best.insert_or_assign(b, p);
    }
  }
  auto box_dom = [](const std::vector<std::int64_t>& a,
                    const std::vector<std::int64_t>& b) {
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] > b[i]) return false;
      if (a[i] < b[i]) strict = true;
    }
    return strict;
  };
  std::vector<Individual> out;
  for (const auto& [b, x] : best) {
    bool dominated = false;
    for (const auto& [b2, x2] : best) {
      if (box_dom(b2, b)) dominated = true;
    }
    if (!dominated) out.push_back(x);
  }
  return out;
}

// canonical multiset of objective vectors for set-equality checks
std::vector<std::vector<double>> canon(std::vector<Individual> v) {
  std::vector<std::vector<double>> out;
  for (auto& x : v) out.push_back(x.objectives);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("box index: floor arithmetic and boundaries") {
  CHECK(box_index({120.0, 30.0}, {50.0, 50.0}) ==
        std::vector<std::int64_t>{2, 0});
  CHECK(box_index({100.0, 50.0}, {50.0, 50.0}) ==
        std::vector<std::int64_t>{2, 1});
  CHECK(box_index({3.0, -4.0}, {1.0, 1.0}) == std::vector<std::int64_t>{3, -4});
  CHECK(box_index({-0.5}, {1.0}) == std::vector<std::int64_t>{-1});
  CHECK_THROWS_AS(box_index({std::nan("")}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(box_index({1.0}, {0.0}), std::invalid_argument);
}

TEST_CASE("archive: dominating candidate evicts occupants") {
  EpsilonArchive a({50.0, 50.0});
  CHECK(a.insert(make_ind({120.0, 30.0})) == InsertOutcome::Accepted);  // box (2,0)
  CHECK(a.insert(make_ind({60.0, 20.0})) == InsertOutcome::Accepted);   // box (1,0)
  CHECK(a.size() == 1);  // (1,0) dominates (2,0) componentwise
  CHECK(a.members()[0].objectives == std::vector<double>{60.0, 20.0});
}

TEST_CASE("archive: same-box corner rule keeps the nearer point") {
  EpsilonArchive a({50.0, 50.0});
  // both in box (2,0); corner (100, 0); distances 36.06 vs 56.57
  CHECK(a.insert(make_ind({120.0, 30.0})) == InsertOutcome::Accepted);
  CHECK(a.insert(make_ind({140.0, 40.0})) == InsertOutcome::SameBoxRejected);
  CHECK(a.size() == 1);
  CHECK(a.members()[0].objectives == std::vector<double>{120.0, 30.0});
  // reversed arrival order: the nearer point replaces
  EpsilonArchive b({50.0, 50.0});
  CHECK(b.insert(make_ind({140.0, 40.0})) == InsertOutcome::Accepted);
  CHECK(b.insert(make_ind({120.0, 30.0})) == InsertOutcome::SameBoxReplaced);
  CHECK(b.members()[0].objectives == std::vector<double>{120.0, 30.0});
}

TEST_CASE("archive: equal candidate is rejected without eps-progress") {
  EpsilonArchive a({1.0, 1.0});
  a.insert(make_ind({0.5, 0.5}));
  const auto progress = a.eps_progress();
  CHECK(a.insert(make_ind({0.5, 0.5})) == InsertOutcome::SameBoxRejected);
  CHECK(a.eps_progress() == progress);
}

TEST_CASE("archive: dominated candidate rejected") {
  EpsilonArchive a({1.0, 1.0});
  a.insert(make_ind({1.0, 1.0}));
  CHECK(a.insert(make_ind({5.0, 5.0})) == InsertOutcome::Dominated);
  CHECK(a.size() == 1);
}

TEST_CASE("archive: eps-progress counts only new nondominated boxes") {
  EpsilonArchive a({1.0, 1.0});
  CHECK(a.eps_progress() == 0);
  a.insert(make_ind({3.0, 0.5}));
  CHECK(a.eps_progress() == 1);
  a.insert(make_ind({0.5, 3.0}));  // incomparable box
  CHECK(a.eps_progress() == 2);
  a.insert(make_ind({3.2, 0.7}));  // same box as the first, farther
  CHECK(a.eps_progress() == 2);
}

TEST_CASE("archive never holds mutually eps-dominating occupants") {
  Rng rng(2024);
  EpsilonArchive a({0.1, 0.1, 0.1});
  for (int i = 0; i < 500; ++i) {
    a.insert(make_ind({rng.next_double(), rng.next_double(), rng.next_double()}));
    const auto& boxes = a.members();
    for (std::size_t x = 0; x < boxes.size(); ++x) {
      const auto bx = box_index(boxes[x].objectives, a.eps());
      for (std::size_t y = 0; y < boxes.size(); ++y) {
        if (x == y) continue;
        const auto by = box_index(boxes[y].objectives, a.eps());
        bool dom = true, strict = false;
        for (std::size_t k = 0; k < bx.size(); ++k) {
          if (bx[k] > by[k]) dom = false;
          if (bx[k] < by[k]) strict = true;
        }
        CHECK_FALSE((dom && strict));
      }
    }
  }
}

TEST_CASE("archive equals brute-force filter on random 4-objective sets") {
  Rng rng(555);
  const std::vector<double> eps = {50.0, 50.0, 0.01, 0.01};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Individual> pts;
    for (int i = 0; i < 200; ++i) {
      pts.push_back(make_ind({rng.uniform(-4000.0, -1000.0),
                              rng.uniform(0.0, 2500.0), rng.uniform(-100.0, 0.0),
                              rng.uniform(-100.0, -90.0)}));
    }
    EpsilonArchive a(eps);
    for (const auto& p : pts) a.insert(p);
    CHECK(canon(a.members()) == canon(brute_force_filter(pts, eps)));
  }
}

TEST_CASE("archive result is independent of insertion order") {
  Rng rng(808);
  const std::vector<double> eps = {0.25, 0.25};
  std::vector<Individual> pts;
  for (int i = 0; i < 80; ++i) {
    pts.push_back(make_ind({rng.next_double() * 3, rng.next_double() * 3}));
  }
  EpsilonArchive forward(eps), backward(eps), shuffled(eps);
  for (const auto& p : pts) forward.insert(p);
  for (auto it = pts.rbegin(); it != pts.rend(); ++it) backward.insert(*it);
  std::vector<Individual> mixed(pts);
  for (std::size_t i = mixed.size(); i > 1; --i) {
    std::swap(mixed[i - 1], mixed[std::size_t(rng.bounded(i))]);
  }
  for (const auto& p : mixed) shuffled.insert(p);
  CHECK(canon(forward.members()) == canon(backward.members()));
  CHECK(canon(forward.members()) == canon(shuffled.members()));
}

TEST_CASE("evolve: constant landscape collapses to one box") {
  MoeaConfig cfg;
  cfg.nfe = 300;
  cfg.population = 20;
  cfg.epsilons = {0.1, 0.1};
  cfg.lower = {0.0};
  cfg.upper = {1.0};
  const Problem constant = [](const std::vector<double>&, std::uint64_t) {
    return std::vector<double>{1.0, 1.0};
  };
  const auto res = evolve(constant, cfg, 1);
  CHECK(res.archive.size() == 1);
  CHECK(res.evaluations == 300);
}

TEST_CASE("evolve: convex two-objective toy approximates the analytic front") {
  MoeaConfig cfg;
  cfg.nfe = 4000;
  cfg.population = 50;
  cfg.epsilons = {0.01, 0.01};
  cfg.lower = {-2.0};
  cfg.upper = {2.0};
  const Problem convex = [](const std::vector<double>& g, std::uint64_t) {
    return std::vector<double>{g[0] * g[0], (g[0] - 1.0) * (g[0] - 1.0)};
  };
  const auto res = evolve(convex, cfg, 7);
  CHECK(res.evaluations == 4000);
  CHECK(res.archive.size() > 10);
  for (const auto& ind : res.archive) {
    // front is theta in [0,1]; allow one eps-box width of slack
    CHECK(ind.genome[0] > -0.05);
    CHECK(ind.genome[0] < 1.05);
  }
}

TEST_CASE("evolve: identical seeds give bit-identical archives") {
  MoeaConfig cfg;
  cfg.nfe = 1500;
  cfg.population = 30;
  cfg.epsilons = {0.02, 0.02};
  cfg.lower = {-1.0, -1.0};
  cfg.upper = {1.0, 1.0};
  const Problem p = [](const std::vector<double>& g, std::uint64_t) {
    return std::vector<double>{g[0] * g[0] + 0.1 * g[1] * g[1],
                               (g[0] - 1) * (g[0] - 1) + 0.1 * (g[1] + 1) * (g[1] + 1)};
  };
  const auto a = evolve(p, cfg, 42);
  const auto b = evolve(p, cfg, 42);
  REQUIRE(a.archive.size() == b.archive.size());
  for (std::size_t i = 0; i < a.archive.size(); ++i) {
    CHECK(a.archive[i].genome == b.archive[i].genome);
    CHECK(a.archive[i].objectives == b.archive[i].objectives);
  }
  const auto c = evolve(p, cfg, 43);
  CHECK(canon(a.archive) != canon(c.archive));
}

TEST_CASE("evolve: genes always within bounds, budget never exceeded") {
  MoeaConfig cfg;
  cfg.nfe = 800;
  cfg.population = 25;
  cfg.epsilons = {0.05, 0.05};
  cfg.lower = {-1.0, 1e-6};
  cfg.upper = {1.0, 1.0};
  std::uint64_t count = 0;
  const Problem p = [&count](const std::vector<double>& g, std::uint64_t) {
    ++count;
    return std::vector<double>{std::abs(g[0] - 0.3) + g[1],
                               std::abs(g[0] + 0.3) + 1.0 / (g[1] + 0.1)};
  };
  const auto res = evolve(p, cfg, 11);
  CHECK(count == 800);
  CHECK(res.evaluations == 800);
  for (const auto& ind : res.archive) {
    CHECK(ind.genome[0] >= -1.0);
    CHECK(ind.genome[0] <= 1.0);
    CHECK(ind.genome[1] >= 1e-6);
    CHECK(ind.genome[1] <= 1.0);
  }
}

TEST_CASE("evolve: stochastic fitness keyed by evaluation counter is reproducible") {
  MoeaConfig cfg;
  cfg.nfe = 600;
  cfg.population = 20;
  cfg.epsilons = {0.05, 0.05};
  cfg.lower = {0.0};
  cfg.upper = {1.0};
  const Problem noisy = [](const std::vector<double>& g, std::uint64_t eval) {
    Rng r(derive_stream(99, eval));
    const double n = 0.05 * r.normal();
    return std::vector<double>{g[0] * g[0] + n, (g[0] - 1) * (g[0] - 1) - n};
  };
  const auto a = evolve(noisy, cfg, 3);
  const auto b = evolve(noisy, cfg, 3);
  CHECK(canon(a.archive) == canon(b.archive));
}

TEST_CASE("evolve: run log is populated with operator probabilities") {
  MoeaConfig cfg;
  cfg.nfe = 500;
  cfg.population = 20;
  cfg.epsilons = {0.05, 0.05};
  cfg.lower = {0.0};
  cfg.upper = {1.0};
  cfg.checkpoint_interval = 100;
  const Problem p = [](const std::vector<double>& g, std::uint64_t) {
    return std::vector<double>{g[0], 1.0 - g[0]};
  };
  int checkpoints = 0;
  const auto res = evolve(p, cfg, 5, {}, [&checkpoints](const LogRecord& rec,
                                                        const std::vector<Individual>& m) {
    ++checkpoints;
    CHECK(rec.archive_size == m.size());
  });
  CHECK(res.log.size() >= 5);
  CHECK(checkpoints == int(res.log.size()));
  for (const auto& rec : res.log) {
    double s = 0.0;
    for (double q : rec.operator_probs) {
      CHECK(q >= 0.0);
      s += q;
    }
    CHECK(s == doctest::Approx(1.0));
  }
  CHECK(res.log.back().nfe == 500);
}

TEST_CASE("run_multiseed: single seed is identity, duplicates merge idempotently") {
  MoeaConfig cfg;
  cfg.nfe = 400;
  cfg.population = 20;
  cfg.epsilons = {0.02, 0.02};
  cfg.lower = {-2.0};
  cfg.upper = {2.0};
  const Problem convex = [](const std::vector<double>& g, std::uint64_t) {
    return std::vector<double>{g[0] * g[0], (g[0] - 1.0) * (g[0] - 1.0)};
  };
  cfg.seeds = {9};
  const auto one = run_multiseed(convex, cfg);
  CHECK(canon(one.merged) == canon(one.runs[0].archive));

  cfg.seeds = {9, 9};
  const auto dup = run_multiseed(convex, cfg);
  CHECK(canon(dup.merged) == canon(one.merged));
}

TEST_CASE("run_multiseed: merged front weakly improves on each run") {
  MoeaConfig cfg;
  cfg.nfe = 600;
  cfg.population = 20;
  cfg.epsilons = {0.02, 0.02};
  cfg.lower = {-2.0};
  cfg.upper = {2.0};
  cfg.seeds = {1, 2, 3, 4, 5};
  const Problem convex = [](const std::vector<double>& g, std::uint64_t) {
    return std::vector<double>{g[0] * g[0], (g[0] - 1.0) * (g[0] - 1.0)};
  };
  const auto res = run_multiseed(convex, cfg);
  CHECK(res.runs.size() == 5);
  // every merged member is eps-nondominated against every run member
  for (const auto& m : res.merged) {
    const auto bm = box_index(m.objectives, cfg.epsilons);
    for (const auto& run : res.runs) {
      for (const auto& x : run.archive) {
        const auto bx = box_index(x.objectives, cfg.epsilons);
        bool dom = true, strict = false;
        for (std::size_t k = 0; k < bx.size(); ++k) {
          if (bx[k] > bm[k]) dom = false;
          if (bx[k] < bm[k]) strict = true;
        }
        CHECK_FALSE((dom && strict));
      }
    }
  }
}
