#include "resopt/moea.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "resopt/rng.hpp"

namespace resopt {

namespace {

// Strict Pareto dominance on minimized vectors.
bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strict = true;
  }
  return strict;
}

bool box_dominates(const std::vector<std::int64_t>& a,
                   const std::vector<std::int64_t>& b) {
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strict = true;
  }
  return strict;
}

double corner_distance_sq(const std::vector<double>& f,
                          const std::vector<std::int64_t>& box,
                          const std::vector<double>& eps) {
  double d = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double c = double(box[i]) * eps[i];
    d += (f[i] - c) * (f[i] - c);
  }
  return d;
}

}  // namespace

std::vector<std::int64_t> box_index(const std::vector<double>& f,
                                    const std::vector<double>& eps) {
  if (f.size() != eps.size()) throw std::invalid_argument("objective/eps size mismatch");
  std::vector<std::int64_t> idx(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::isfinite(f[i])) throw std::invalid_argument("non-finite objective");
    if (!(eps[i] > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    idx[i] = std::int64_t(std::floor(f[i] / eps[i]));
  }
  return idx;
}

EpsilonArchive::EpsilonArchive(std::vector<double> eps) : eps_(std::move(eps)) {
  for (double e : eps_) {
    if (!(e > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  }
}

InsertOutcome EpsilonArchive::insert(Individual x) {
  const auto bx = box_index(x.objectives, eps_);

  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (boxes_[i] == bx) {
      const double dn = corner_distance_sq(x.objectives, bx, eps_);
      const double dc = corner_distance_sq(members_[i].objectives, bx, eps_);
      if (dn < dc) {
        members_[i] = std::move(x);
        return InsertOutcome::SameBoxReplaced;
      }
      return InsertOutcome::SameBoxRejected;
    }
    if (box_dominates(boxes_[i], bx)) return InsertOutcome::Dominated;
  }

  // evict occupants in boxes dominated by the candidate's box
  std::size_t w = 0;
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (!box_dominates(bx, boxes_[i])) {
      if (w != i) {
        members_[w] = std::move(members_[i]);
        boxes_[w] = std::move(boxes_[i]);
      }
      ++w;
    }
  }
  members_.resize(w);
  boxes_.resize(w);

  members_.push_back(std::move(x));
  boxes_.push_back(bx);
  ++progress_;
  return InsertOutcome::Accepted;
}

std::vector<Individual> EpsilonArchive::sorted_members() const {
  std::vector<std::size_t> order(members_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
    return boxes_[a] < boxes_[b];
  });
  std::vector<Individual> out;
  out.reserve(order.size());
  for (std::size_t i : order) out.push_back(members_[i]);
  return out;
}

namespace {

class Variation {
 public:
  Variation(const MoeaConfig& cfg, Rng& rng) : cfg_(cfg), rng_(rng) {}

  int arity(int op) const {
    switch (op) {
      case 0: return 2;                    // SBX + PM
      case 1: return 4;                    // DE rand/1/bin
      case 2:
      case 3:
      case 4: return cfg_.multiparent;     // PCX / SPX / UNDX
      default: return 1;                   // UM
    }
  }

  std::vector<double> apply(int op, const std::vector<std::vector<double>>& parents) {
    switch (op) {
      case 0: return pm(sbx(parents[0], parents[1]));
      case 1: return de(parents);
      case 2: return pcx(parents);
      case 3: return spx(parents);
      case 4: return undx(parents);
      default: return um(parents[0]);
    }
  }

 private:
  std::size_t dim() const { return cfg_.lower.size(); }

  void reflect(std::vector<double>& x) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double lo = cfg_.lower[j], hi = cfg_.upper[j];
      double v = x[j];
      for (int it = 0; it < 16 && (v < lo || v > hi); ++it) {
        if (v < lo) v = lo + (lo - v);
        if (v > hi) v = hi - (v - hi);
      }
      x[j] = std::clamp(v, lo, hi);
    }
  }

  std::vector<double> sbx(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> c(dim());
    for (std::size_t j = 0; j < dim(); ++j) {
      double x = a[j];
      if (rng_.next_double() < cfg_.sbx_rate && std::abs(a[j] - b[j]) > 1e-14) {
        const double u = rng_.next_double();
        const double beta =
            u <= 0.5 ? std::pow(2.0 * u, 1.0 / (cfg_.sbx_index + 1.0))
                     : std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (cfg_.sbx_index + 1.0));
        x = rng_.next_double() < 0.5 ? 0.5 * ((1 + beta) * a[j] + (1 - beta) * b[j])
                                     : 0.5 * ((1 - beta) * a[j] + (1 + beta) * b[j]);
      }
      c[j] = x;
    }
    reflect(c);
    return c;
  }

  std::vector<double> pm(std::vector<double> x) {
    const double rate = 1.0 / double(dim());
    for (std::size_t j = 0; j < dim(); ++j) {
      if (rng_.next_double() >= rate) continue;
      const double lo = cfg_.lower[j], hi = cfg_.upper[j];
      const double u = rng_.next_double();
      const double delta =
          u < 0.5 ? std::pow(2.0 * u, 1.0 / (cfg_.pm_index + 1.0)) - 1.0
                  : 1.0 - std::pow(2.0 * (1.0 - u), 1.0 / (cfg_.pm_index + 1.0));
      x[j] += delta * (hi - lo);
    }
    reflect(x);
    return x;
  }

  std::vector<double> um(std::vector<double> x) {
    const double rate = 1.0 / double(dim());
    for (std::size_t j = 0; j < dim(); ++j) {
      if (rng_.next_double() < rate) {
        x[j] = rng_.uniform(cfg_.lower[j], cfg_.upper[j]);
      }
    }
    return x;
  }

  std::vector<double> de(const std::vector<std::vector<double>>& p) {
    // offspring = p0 crossed with p1 + F (p2 - p3)
    std::vector<double> c(p[0]);
    const std::size_t jrand = std::size_t(rng_.bounded(dim()));
    for (std::size_t j = 0; j < dim(); ++j) {
      if (j == jrand || rng_.next_double() < cfg_.de_cr) {
        c[j] = p[1][j] + cfg_.de_step * (p[2][j] - p[3][j]);
      }
    }
    reflect(c);
    return c;
  }

  // Orthonormal basis of the complement of span(dirs) in R^n (Gram-Schmidt
  // against the coordinate axes).
  std::vector<std::vector<double>> complement(std::vector<std::vector<double>> dirs) {
    const std::size_t n = dim();
    std::vector<std::vector<double>> basis;
    auto project_out = [&](std::vector<double>& v) {
      for (const auto& b : basis) {
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += v[j] * b[j];
        for (std::size_t j = 0; j < n; ++j) v[j] -= dot * b[j];
      }
    };
    auto norm_of = [&](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x * x;
      return std::sqrt(s);
    };
    std::size_t span_rank = 0;
    for (auto& d : dirs) {
      project_out(d);
      const double nn = norm_of(d);
      if (nn > 1e-10) {
        for (double& x : d) x /= nn;
        basis.push_back(d);
        ++span_rank;
      }
    }
    std::vector<std::vector<double>> comp;
    for (std::size_t axis = 0; axis < n && basis.size() < n; ++axis) {
      std::vector<double> e(n, 0.0);
      e[axis] = 1.0;
      project_out(e);
      const double nn = norm_of(e);
      if (nn > 1e-10) {
        for (double& x : e) x /= nn;
        basis.push_back(e);
        comp.push_back(e);
      }
    }
    return comp;
  }

  std::vector<double> pcx(const std::vector<std::vector<double>>& p) {
    const std::size_t n = dim(), mu = p.size();
    std::vector<double> g(n, 0.0);
    for (const auto& x : p)
      for (std::size_t j = 0; j < n; ++j) g[j] += x[j] / double(mu);
    std::vector<double> d(n);
    double dn = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      d[j] = p[0][j] - g[j];
      dn += d[j] * d[j];
    }
    dn = std::sqrt(dn);
    if (dn < 1e-12) return pm(p[0]);

    // mean perpendicular distance of the other parents to the (g, d) axis
    double dbar = 0.0;
    for (std::size_t i = 1; i < mu; ++i) {
      double dot = 0.0, norm2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double v = p[i][j] - g[j];
        dot += v * d[j] / dn;
        norm2 += v * v;
      }
      dbar += std::sqrt(std::max(norm2 - dot * dot, 0.0));
    }
    dbar /= double(mu - 1);

    std::vector<double> c(p[0]);
    const double wz = rng_.normal() * cfg_.pcx_zeta;
    for (std::size_t j = 0; j < n; ++j) c[j] += wz * d[j];
    for (const auto& e : complement({d})) {
      const double we = rng_.normal() * cfg_.pcx_eta * dbar;
      for (std::size_t j = 0; j < n; ++j) c[j] += we * e[j];
    }
    reflect(c);
    return c;
  }

  std::vector<double> spx(const std::vector<std::vector<double>>& p) {
    const std::size_t n = dim(), mu = p.size();
    const double expansion = std::sqrt(double(mu + 1));
    std::vector<double> g(n, 0.0);
    for (const auto& x : p)
      for (std::size_t j = 0; j < n; ++j) g[j] += x[j] / double(mu);

    std::vector<std::vector<double>> ex(mu, std::vector<double>(n));
    for (std::size_t i = 0; i < mu; ++i)
      for (std::size_t j = 0; j < n; ++j)
        ex[i][j] = g[j] + expansion * (p[i][j] - g[j]);

    std::vector<double> c(n, 0.0);
    for (std::size_t i = 1; i < mu; ++i) {
      const double r = std::pow(rng_.next_double(), 1.0 / double(i + 1));
      for (std::size_t j = 0; j < n; ++j) {
        c[j] = r * (ex[i - 1][j] - ex[i][j] + c[j]);
      }
    }
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = ex[mu - 1][j] + c[j];
    reflect(out);
    return out;
  }

  std::vector<double> undx(const std::vector<std::vector<double>>& p) {
    const std::size_t n = dim(), mu = p.size();
    std::vector<double> g(n, 0.0);
    for (std::size_t i = 0; i + 1 < mu; ++i)
      for (std::size_t j = 0; j < n; ++j) g[j] += p[i][j] / double(mu - 1);

    std::vector<std::vector<double>> dirs;
    for (std::size_t i = 0; i + 1 < mu; ++i) {
      std::vector<double> d(n);
      for (std::size_t j = 0; j < n; ++j) d[j] = p[i][j] - g[j];
      dirs.push_back(std::move(d));
    }
    const double zeta = cfg_.undx_zeta / std::sqrt(double(std::max<std::size_t>(mu - 2, 1)));
    std::vector<double> c(g);
    for (const auto& d : dirs) {
      const double w = rng_.normal() * zeta;
      for (std::size_t j = 0; j < n; ++j) c[j] += w * d[j];
    }
    // orthogonal component scaled by the distance of the extra parent
    const auto comp = complement(dirs);
    if (!comp.empty()) {
      std::vector<double> v(n);
      for (std::size_t j = 0; j < n; ++j) v[j] = p[mu - 1][j] - g[j];
      double dist2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) dist2 += v[j] * v[j];
      for (const auto& d : dirs) {
        double dd = 0.0, dv = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          dd += d[j] * d[j];
          dv += d[j] * v[j];
        }
        if (dd > 1e-14) dist2 -= dv * dv / dd;
      }
      const double dist = std::sqrt(std::max(dist2, 0.0));
      const double eta = cfg_.undx_eta / std::sqrt(double(n));
      for (const auto& e : comp) {
        const double w = rng_.normal() * eta * dist;
        for (std::size_t j = 0; j < n; ++j) c[j] += w * e[j];
      }
    }
    reflect(c);
    return c;
  }

  const MoeaConfig& cfg_;
  Rng& rng_;
};

}  // namespace

RunResult evolve(const Problem& problem, const MoeaConfig& cfg, std::uint64_t seed,
                 const ArchiveMetric& hv_fn, const CheckpointFn& on_checkpoint) {
  const std::size_t dim = cfg.lower.size();
  if (dim == 0 || cfg.upper.size() != dim) {
    throw std::invalid_argument("moea needs matching gene bounds");
  }
  if (cfg.epsilons.empty()) throw std::invalid_argument("moea needs epsilons");
  if (cfg.nfe < cfg.population) {
    throw std::invalid_argument("NFE budget below population size");
  }

  Rng rng(derive_stream(seed, 0));
  Variation vary(cfg, rng);
  EpsilonArchive archive(cfg.epsilons);
  RunResult result;
  result.seed = seed;

  const std::uint64_t checkpoint =
      cfg.checkpoint_interval > 0 ? cfg.checkpoint_interval
                                  : std::max<std::uint64_t>(cfg.nfe / 50, 100);

  std::uint64_t nfe = 0;
  auto evaluate_into = [&](Individual& ind) {
    ind.objectives = problem(ind.genome, nfe);
    ++nfe;
  };

  // counts of archive members per originating operator, +1 smoothing
  auto operator_probs = [&]() {
    std::array<double, 6> probs{};
    if (!cfg.adaptive_operators) {
      probs.fill(1.0 / 6.0);
      return probs;
    }
    double total = 0.0;
    for (int op = 0; op < 6; ++op) {
      double c = 1.0;
      for (const auto& m : archive.members()) {
        if (m.op_origin == op) c += 1.0;
      }
      probs[op] = c;
      total += c;
    }
    for (auto& p : probs) p /= total;
    return probs;
  };

  auto log_checkpoint = [&]() {
    LogRecord rec;
    rec.nfe = nfe;
    rec.archive_size = archive.size();
    rec.eps_progress = archive.eps_progress();
    rec.operator_probs = operator_probs();
    rec.hv_estimate =
        hv_fn ? hv_fn(archive.members()) : std::numeric_limits<double>::quiet_NaN();
    result.log.push_back(rec);
    if (on_checkpoint) on_checkpoint(rec, archive.sorted_members());
  };

  std::vector<Individual> pop(cfg.population);
  for (auto& ind : pop) {
    ind.genome.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      ind.genome[j] = rng.uniform(cfg.lower[j], cfg.upper[j]);
    }
    evaluate_into(ind);
    archive.insert(ind);
  }

  auto tournament_pick = [&]() -> const Individual& {
    std::size_t best = std::size_t(rng.bounded(pop.size()));
    for (int t = 1; t < cfg.tournament; ++t) {
      const std::size_t ch = std::size_t(rng.bounded(pop.size()));
      if (dominates(pop[ch].objectives, pop[best].objectives)) best = ch;
    }
    return pop[best];
  };

  std::uint64_t last_progress = archive.eps_progress();
  std::uint64_t last_progress_nfe = nfe;
  std::uint64_t next_restart_check = nfe + std::uint64_t(cfg.stall_window);
  std::uint64_t next_checkpoint = nfe + checkpoint;
  log_checkpoint();

  while (nfe < cfg.nfe) {
    const auto probs = operator_probs();
    int op = 5;
    {
      const double u = rng.next_double();
      double acc = 0.0;
      for (int i = 0; i < 6; ++i) {
        acc += probs[i];
        if (u <= acc) {
          op = i;
          break;
        }
      }
    }

    const int arity = vary.arity(op);
    std::vector<std::vector<double>> parents;
    parents.reserve(std::size_t(arity));
    // one parent from the archive, the rest by tournament from the population
    if (archive.size() > 0) {
      parents.push_back(
          archive.members()[std::size_t(rng.bounded(archive.size()))].genome);
    } else {
      parents.push_back(tournament_pick().genome);
    }
    while (parents.size() < std::size_t(arity)) {
      parents.push_back(tournament_pick().genome);
    }

    Individual child;
    child.genome = vary.apply(op, parents);
    child.op_origin = op;
    evaluate_into(child);
    archive.insert(child);

    // steady-state population update
    std::vector<std::size_t> beaten;
    bool child_dominated = false;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (dominates(child.objectives, pop[i].objectives)) {
        beaten.push_back(i);
      } else if (dominates(pop[i].objectives, child.objectives)) {
        child_dominated = true;
      }
    }
    if (!beaten.empty()) {
      pop[beaten[std::size_t(rng.bounded(beaten.size()))]] = child;
    } else if (!child_dominated) {
      pop[std::size_t(rng.bounded(pop.size()))] = child;
    }

    if (archive.eps_progress() > last_progress) {
      last_progress = archive.eps_progress();
      last_progress_nfe = nfe;
    }

    if (nfe >= next_restart_check && nfe < cfg.nfe) {
      const double ratio = double(pop.size()) / double(std::max<std::size_t>(archive.size(), 1));
      const bool stalled = nfe - last_progress_nfe >= std::uint64_t(cfg.stall_window);
      if (stalled || ratio < cfg.pop_ratio_lo || ratio > cfg.pop_ratio_hi) {
        ++result.restarts;
        const auto& keep = archive.members();
        const std::size_t target = std::max<std::size_t>(
            std::size_t(cfg.restart_pop_factor * double(keep.size())), 16);
        std::vector<Individual> fresh;
        fresh.reserve(target);
        for (const auto& m : keep) {
          if (fresh.size() < target) fresh.push_back(m);
        }
        while (fresh.size() < target && nfe < cfg.nfe) {
          Individual ind;
          const auto& src = keep[std::size_t(rng.bounded(keep.size()))];
          ind.genome = src.genome;
          const double rate = 1.0 / double(dim);
          for (std::size_t j = 0; j < dim; ++j) {
            if (rng.next_double() < rate) {
              ind.genome[j] = rng.uniform(cfg.lower[j], cfg.upper[j]);
            }
          }
          ind.op_origin = 5;
          evaluate_into(ind);
          archive.insert(ind);
          fresh.push_back(std::move(ind));
        }
        if (!fresh.empty()) pop = std::move(fresh);
        last_progress = archive.eps_progress();
        last_progress_nfe = nfe;
      }
      next_restart_check = nfe + std::uint64_t(cfg.stall_window);
    }

    if (nfe >= next_checkpoint) {
      log_checkpoint();
      next_checkpoint = nfe + checkpoint;
    }
  }

  log_checkpoint();
  result.archive = archive.sorted_members();
  result.evaluations = nfe;
  return result;
}

MultiSeedResult run_multiseed(const Problem& problem, const MoeaConfig& cfg,
                              const ArchiveMetric& hv_fn) {
  if (cfg.seeds.empty()) throw std::invalid_argument("run_multiseed needs >= 1 seed");
  MultiSeedResult out;
  for (std::uint64_t seed : cfg.seeds) {
    out.runs.push_back(evolve(problem, cfg, seed, hv_fn));
  }
  EpsilonArchive merged(cfg.epsilons);
  for (const auto& run : out.runs) {
    for (const auto& ind : run.archive) merged.insert(ind);
  }
  out.merged = merged.sorted_members();
  return out;
}

}  // namespace resopt
