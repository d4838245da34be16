#include "resopt/objectives.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "resopt/synthgen.hpp"

namespace resopt {

const std::array<const char*, 4> ObjectiveVector::names = {
    "hydropower_gwh", "deficit_mm3", "mef_reliability_pct", "flood_reliability_pct"};
const std::array<const char*, 4> ObjectiveVector::senses = {"max", "min", "max", "max"};

MefBasis mef_basis_from_string(const std::string& name) {
  if (name == "efr_only") return MefBasis::EfrOnly;
  if (name == "total_downstream") return MefBasis::TotalDownstream;
  throw std::invalid_argument("unknown mef_basis '" + name +
                              "' (expected efr_only or total_downstream)");
}

std::string to_string(MefBasis basis) {
  return basis == MefBasis::EfrOnly ? "efr_only" : "total_downstream";
}

double daily_energy(double hpr_mm3day, double head_m, const ReservoirConfig& cfg) {
  const double q_m3s = hpr_mm3day * 1e6 / 86400.0;
  const double power_gw =
      std::min(cfg.efficiency * cfg.specific_weight * q_m3s * head_m * 1e-9,
               cfg.hp_power_cap);
  return 24.0 * power_gw;
}

ObjectiveVector objectives_of_trace(const SimTrace& trace, const ReservoirConfig& cfg,
                                    MefBasis basis) {
  const std::size_t n = trace.size();
  if (n == 0) throw std::invalid_argument("empty trace");
  const double years = trace.years();

  double energy = 0.0, deficit = 0.0;
  std::size_t mef_ok = 0, flood_ok = 0;
  std::int64_t dn = day_number(trace.start);
  for (std::size_t t = 0; t < n; ++t, ++dn) {
    const int slot = water_year_slot(from_day_number(dn));
    energy += daily_energy(trace.hpr[t], trace.head[t], cfg);
    deficit += std::max(cfg.demand[slot] - trace.dr[t], 0.0);
    const double r = trace.release(t);
    const double mef_flow = basis == MefBasis::EfrOnly ? trace.efr[t] : r;
    if (mef_flow >= cfg.mef.mef[slot]) ++mef_ok;
    if (r < cfg.flood.ft) ++flood_ok;
  }

  ObjectiveVector j;
  j.hydropower_gwh = energy / years;
  j.deficit_mm3 = deficit / years;
  j.mef_reliability_pct = 100.0 * double(mef_ok) / double(n);
  j.flood_reliability_pct = 100.0 * double(flood_ok) / double(n);
  return j;
}

ObjectiveVector evaluate(const PolicyParams& p, Formulation form,
                         const ReservoirConfig& cfg, const EvalConfig& ec,
                         ExecMode mode) {
  if (ec.ensemble == nullptr || ec.ensemble->size() == 0) {
    throw std::invalid_argument("evaluate needs a nonempty ensemble");
  }
  const auto idx = sample_indices(ec.ensemble->size(), ec.sample_size, ec.sample_seed);

  // One slot per sampled realization; reduction in index order afterwards so
  // the result does not depend on scheduling.
  std::vector<ObjectiveVector> slot(idx.size());
  if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(idx.size()); ++i) {
      const SimTrace tr =
          simulate(ec.ensemble->realizations[idx[i]], ec.storage0, form, p, cfg);
      slot[i] = objectives_of_trace(tr, cfg, ec.mef_basis);
    }
  } else {
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(idx.size()); ++i) {
      const SimTrace tr =
          simulate(ec.ensemble->realizations[idx[i]], ec.storage0, form, p, cfg);
      slot[i] = objectives_of_trace(tr, cfg, ec.mef_basis);
    }
  }

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

ObjectiveVector evaluate_historical(const SimTrace& trace, const ReservoirConfig& cfg,
                                    MefBasis basis) {
  return objectives_of_trace(trace, cfg, basis);
}

SimTrace load_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace CSV: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty trace");

  SimTrace tr;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 9) {
      throw std::runtime_error(path + ": expected 9 columns per trace row");
    }
    const DayStamp d = DayStamp::parse(fields[0]);
    if (first) {
      tr.start = d;
      first = false;
    }
    tr.storage.push_back(std::stod(fields[1]));
    tr.inflow.push_back(std::stod(fields[2]));
    tr.efr.push_back(std::stod(fields[3]));
    tr.dr.push_back(std::stod(fields[4]));
    tr.hpr.push_back(std::stod(fields[5]));
    tr.ewr.push_back(std::stod(fields[6]));
    tr.head.push_back(std::stod(fields[8]));
  }
  if (tr.storage.empty()) throw std::runtime_error(path + ": no trace rows");
  // storage0 reconstructed from the first day's balance
  tr.storage0 = tr.storage[0] - tr.inflow[0] + tr.efr[0] + tr.dr[0] + tr.hpr[0] +
                tr.ewr[0];
  return tr;
}

}  // namespace resopt
