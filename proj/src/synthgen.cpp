#include "resopt/synthgen.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "resopt/rng.hpp"

namespace resopt {

namespace {

// Pearson correlation of the columns of an n x 12 matrix.
Matrix12 column_correlation(const std::vector<std::array<double, 12>>& rows) {
  const double n = double(rows.size());
  std::array<double, 12> mean{}, sd{};
  for (const auto& r : rows)
    for (int j = 0; j < 12; ++j) mean[j] += r[j];
  for (int j = 0; j < 12; ++j) mean[j] /= n;
  for (const auto& r : rows)
    for (int j = 0; j < 12; ++j) sd[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
  for (int j = 0; j < 12; ++j) sd[j] = std::sqrt(sd[j] / (n - 1.0));

  Matrix12 c{};
  for (int a = 0; a < 12; ++a) {
    for (int b = 0; b < 12; ++b) {
      double s = 0.0;
      for (const auto& r : rows) s += (r[a] - mean[a]) * (r[b] - mean[b]);
      c[a][b] = s / ((n - 1.0) * sd[a] * sd[b]);
    }
    c[a][a] = 1.0;
  }
  return c;
}

// Clip negative eigenvalues to 1e-10, re-normalize the diagonal, factorize.
// Returns the upper factor U with corr = U^T U.
Matrix12 condition_and_factor(Matrix12& corr) {
  Eigen::Matrix<double, 12, 12> a;
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) a(i, j) = 0.5 * (corr[i][j] + corr[j][i]);

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 12, 12>> eig(a);
  Eigen::Matrix<double, 12, 1> ev = eig.eigenvalues().cwiseMax(1e-10);
  a = eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
  for (int i = 0; i < 12; ++i) {
    for (int j = 0; j < 12; ++j) {
      if (i != j) a(i, j) /= std::sqrt(a(i, i) * a(j, j));
    }
  }
  for (int i = 0; i < 12; ++i) a(i, i) = 1.0;

  double ridge = 0.0;
  for (int attempt = 0; attempt < 6; ++attempt) {
    Eigen::LLT<Eigen::Matrix<double, 12, 12>> llt(
        a + ridge * Eigen::Matrix<double, 12, 12>::Identity());
    if (llt.info() == Eigen::Success) {
      const Eigen::Matrix<double, 12, 12> u = llt.matrixU();
      Matrix12 out{};
      for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) {
          corr[i][j] = a(i, j);
          out[i][j] = u(i, j);
        }
      return out;
    }
    ridge = ridge == 0.0 ? 1e-12 : ridge * 100.0;
  }
  throw std::runtime_error("correlation factorization failed after conditioning");
}

std::array<double, 12> apply_upper(const std::array<double, 12>& row,
                                   const Matrix12& u) {
  // z = row * U  (U upper triangular: z_j = sum_{a<=j} row_a * U[a][j])
  std::array<double, 12> out{};
  for (int j = 0; j < 12; ++j) {
    double s = 0.0;
    for (int a = 0; a <= j; ++a) s += row[a] * u[a][j];
    out[j] = s;
  }
  return out;
}

unsigned wy_month_to_calendar(int m) { return unsigned((m + 5) % 12 + 1); }

}  // namespace

std::uint64_t GeneratorModel::hash() const {
  std::uint64_t h = fnv1a64(&n_years, sizeof n_years);
  h = fnv1a64(&start_water_year, sizeof start_water_year, h);
  h = fnv1a64(log_mean.data(), sizeof log_mean, h);
  h = fnv1a64(log_sd.data(), sizeof log_sd, h);
  for (const auto& row : z) h = fnv1a64(row.data(), sizeof row, h);
  h = fnv1a64(&inter_annual, sizeof inter_annual, h);
  h = fnv1a64(&source_hash, sizeof source_hash, h);
  return h;
}

GeneratorModel fit(const DailySeries& historical, bool inter_annual) {
  auto [first, lastwy] = historical.complete_water_years();
  const int n = lastwy - first + 1;
  if (n < 10) {
    throw std::runtime_error("generator fit needs >= 10 complete water years, got " +
                             std::to_string(std::max(n, 0)));
  }

  GeneratorModel m;
  m.n_years = n;
  m.start_water_year = first;
  m.inter_annual = inter_annual;
  m.z.resize(static_cast<std::size_t>(n));
  m.monthly_totals.resize(static_cast<std::size_t>(n));
  m.proportions.resize(static_cast<std::size_t>(n));

  const std::int64_t base = day_number(historical.start());
  std::vector<std::array<double, 12>> log_totals(static_cast<std::size_t>(n));
  for (int y = 0; y < n; ++y) {
    const int wy = first + y;
    for (int mm = 0; mm < 12; ++mm) {
      const unsigned month = wy_month_to_calendar(mm);
      const int cal_year = month >= 6 ? wy : wy + 1;
      const unsigned ndays = days_in_month(cal_year, month);
      std::vector<double> days(ndays);
      double total = 0.0;
      const std::int64_t d0 = day_number(DayStamp{cal_year, month, 1}) - base;
      for (unsigned d = 0; d < ndays; ++d) {
        days[d] = historical[std::size_t(d0 + d)];
        total += days[d];
      }
      if (!(total > 0.0)) {
        throw std::runtime_error("degenerate record: non-positive total in " +
                                 DayStamp{cal_year, month, 1}.str().substr(0, 7));
      }
      for (double& v : days) v /= total;
      m.monthly_totals[std::size_t(y)][mm] = total;
      m.proportions[std::size_t(y)][mm] = std::move(days);
      log_totals[std::size_t(y)][mm] = std::log(total);
    }
  }

  for (int mm = 0; mm < 12; ++mm) {
    double mu = 0.0;
    for (int y = 0; y < n; ++y) mu += log_totals[std::size_t(y)][mm];
    mu /= double(n);
    double ss = 0.0;
    for (int y = 0; y < n; ++y) {
      const double d = log_totals[std::size_t(y)][mm] - mu;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / double(n - 1));
    if (!(sd > 1e-12)) {
      throw std::runtime_error("degenerate record: zero variance in month index " +
                               std::to_string(mm));
    }
    m.log_mean[mm] = mu;
    m.log_sd[mm] = sd;
    for (int y = 0; y < n; ++y) {
      m.z[std::size_t(y)][mm] = (log_totals[std::size_t(y)][mm] - mu) / sd;
    }
  }

  m.corr = column_correlation(m.z);
  m.chol_upper = condition_and_factor(m.corr);

  if (inter_annual) {
    std::vector<std::array<double, 12>> shifted(static_cast<std::size_t>(n - 1));
    for (int y = 0; y + 1 < n; ++y) {
      for (int j = 0; j < 12; ++j) {
        shifted[std::size_t(y)][j] =
            j < 6 ? m.z[std::size_t(y)][j + 6] : m.z[std::size_t(y + 1)][j - 6];
      }
    }
    m.corr_shifted = column_correlation(shifted);
    m.chol_shifted_upper = condition_and_factor(m.corr_shifted);
  }

  m.source_hash = fnv1a64(historical.values().data(),
                          historical.values().size() * sizeof(double));
  return m;
}

namespace {

// Nowak-style disaggregation: choose a historical year by k-NN on the monthly
// total (k = ceil(sqrt(n)), kernel weights 1/rank), then scale its daily
// proportion vector to the synthetic total.
std::size_t knn_pick_year(const GeneratorModel& model, int month_idx, double total,
                          double u) {
  const int n = model.n_years;
  const int k = int(std::ceil(std::sqrt(double(n))));
  std::vector<std::pair<double, int>> dist(static_cast<std::size_t>(n));
  for (int y = 0; y < n; ++y) {
    dist[std::size_t(y)] = {std::abs(model.monthly_totals[std::size_t(y)][month_idx] -
                                     total),
                            y};
  }
  std::stable_sort(dist.begin(), dist.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  double wsum = 0.0;
  for (int i = 1; i <= k; ++i) wsum += 1.0 / double(i);
  double acc = 0.0;
  for (int i = 1; i <= k; ++i) {
    acc += (1.0 / double(i)) / wsum;
    if (u <= acc || i == k) return std::size_t(dist[std::size_t(i - 1)].second);
  }
  return std::size_t(dist[std::size_t(k - 1)].second);
}

// Scale a proportion vector to `ndays` entries (day-count differences only
// occur in February) and renormalize to sum 1.
std::vector<double> adapt_proportions(const std::vector<double>& p,
                                      unsigned ndays) {
  std::vector<double> q(p);
  while (q.size() < ndays) q.push_back(q.back());
  q.resize(ndays);
  const double s = std::accumulate(q.begin(), q.end(), 0.0);
  for (double& v : q) v /= s;
  return q;
}

// Clamp to the floor while preserving the monthly total: floored entries are
// fixed and the remainder is rescaled; repeats until stable.
void apply_floor(std::vector<double>& v, double floor, double total) {
  if (total <= floor * double(v.size())) {
    for (double& x : v) x = floor;
    return;
  }
  for (int iter = 0; iter < 40; ++iter) {
    double rest = 0.0;
    double floored = 0.0;
    bool any_below = false;
    for (double x : v) {
      if (x <= floor) {
        floored += floor;
      } else {
        rest += x;
      }
    }
    const double target_rest = total - floored;
    const double scale = target_rest / rest;
    for (double& x : v) {
      if (x <= floor) {
        x = floor;
      } else {
        x *= scale;
        if (x < floor) any_below = true;
      }
    }
    if (!any_below) return;
  }
}

}  // namespace

DailySeries generate_realization(const GeneratorModel& model, const GenConfig& cfg,
                                 std::size_t index) {
  if (model.n_years == 0) throw std::invalid_argument("generator model not fitted");
  const int ny = cfg.years;
  if (ny < 1) throw std::invalid_argument("years must be >= 1");

  Rng rng(derive_stream(cfg.seed, index));
  const std::size_t nh = std::size_t(model.n_years);

  // Bootstrap matrix C: (ny + 1) x 12, each entry an independently sampled
  // historical standardized value for that month. Filled row-major so the
  // draw order is fixed.
  std::vector<std::array<double, 12>> c(static_cast<std::size_t>(ny) + 1);
  for (auto& row : c) {
    for (int j = 0; j < 12; ++j) row[j] = model.z[rng.bounded(nh)][j];
  }

  std::vector<std::array<double, 12>> zline(static_cast<std::size_t>(ny) + 1);
  for (std::size_t i = 0; i < c.size(); ++i) zline[i] = apply_upper(c[i], model.chol_upper);

  std::vector<std::array<double, 12>> syn(static_cast<std::size_t>(ny));
  if (model.inter_annual) {
    for (int y = 0; y < ny; ++y) {
      std::array<double, 12> cs{};
      for (int j = 0; j < 12; ++j) {
        cs[j] = j < 6 ? c[std::size_t(y)][j + 6] : c[std::size_t(y) + 1][j - 6];
      }
      const auto zs = apply_upper(cs, model.chol_shifted_upper);
      for (int j = 0; j < 12; ++j) {
        syn[std::size_t(y)][j] = j < 6 ? zs[j + 6] : zline[std::size_t(y) + 1][j];
      }
    }
  } else {
    for (int y = 0; y < ny; ++y) syn[std::size_t(y)] = zline[std::size_t(y) + 1];
  }

  std::vector<double> values;
  values.reserve(std::size_t(ny) * 366);
  for (int y = 0; y < ny; ++y) {
    const int wy = cfg.start_water_year + y;
    for (int mm = 0; mm < 12; ++mm) {
      const unsigned month = wy_month_to_calendar(mm);
      const int cal_year = month >= 6 ? wy : wy + 1;
      const unsigned ndays = days_in_month(cal_year, month);
      const double total = std::exp(model.log_mean[mm] +
                                    model.log_sd[mm] * syn[std::size_t(y)][mm]);
      const std::size_t hist_year = knn_pick_year(model, mm, total, rng.next_double());
      auto p = adapt_proportions(model.proportions[hist_year][mm], ndays);
      std::vector<double> month_values(ndays);
      for (unsigned d = 0; d < ndays; ++d) month_values[d] = total * p[d];
      apply_floor(month_values, cfg.jitter_floor, total);
      values.insert(values.end(), month_values.begin(), month_values.end());
    }
  }
  return DailySeries(DayStamp{cfg.start_water_year, 6, 1}, std::move(values));
}

InflowEnsemble generate(const GeneratorModel& model, const GenConfig& cfg,
                        ExecMode mode) {
  InflowEnsemble e;
  e.realizations.resize(cfg.nr);
  e.years_per_realization = cfg.years;
  if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(cfg.nr); ++i) {
      e.realizations[std::size_t(i)] =
          generate_realization(model, cfg, std::size_t(i));
    }
  } else {
    for (std::size_t i = 0; i < cfg.nr; ++i) {
      e.realizations[i] = generate_realization(model, cfg, i);
    }
  }
  e.steps_per_realization = e.realizations.empty() ? 0 : e.realizations[0].size();
  return e;
}

double ensemble_max_inflow(const GeneratorModel& model, const GenConfig& cfg,
                           ExecMode mode) {
  double mx = 0.0;
  if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic) reduction(max : mx)
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(cfg.nr); ++i) {
      const DailySeries r = generate_realization(model, cfg, std::size_t(i));
      for (double v : r.values()) mx = std::max(mx, v);
    }
  } else {
    for (std::size_t i = 0; i < cfg.nr; ++i) {
      const DailySeries r = generate_realization(model, cfg, i);
      for (double v : r.values()) mx = std::max(mx, v);
    }
  }
  return mx;
}

std::vector<std::size_t> sample_indices(std::size_t nr, std::size_t k,
                                        std::uint64_t seed) {
  if (k < 1 || k > nr) {
    throw std::invalid_argument("sample size " + std::to_string(k) +
                              " out of range [1, " + std::to_string(nr) + "]");
  }
  std::vector<std::size_t> idx(nr);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(derive_stream(seed, 0));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + std::size_t(rng.bounded(nr - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

InflowEnsemble sample_subset(const InflowEnsemble& e, std::size_t k,
                             std::uint64_t seed) {
  const auto idx = sample_indices(e.size(), k, seed);
  InflowEnsemble out;
  out.years_per_realization = e.years_per_realization;
  out.steps_per_realization = e.steps_per_realization;
  out.realizations.reserve(k);
  for (std::size_t i : idx) out.realizations.push_back(e.realizations[i]);
  return out;
}

}  // namespace resopt
