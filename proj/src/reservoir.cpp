#include "resopt/reservoir.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace resopt {

void ReservoirConfig::validate() const {
  if (!(live_capacity > 0.0)) throw std::invalid_argument("live_capacity must be > 0");
  if (!(hp_release_cap > 0.0)) throw std::invalid_argument("hp_release_cap must be > 0");
  if (!(efficiency > 0.0 && efficiency <= 1.0)) {
    throw std::invalid_argument("efficiency must be in (0,1]");
  }
  if (!(specific_weight > 0.0)) throw std::invalid_argument("specific_weight must be > 0");
  if (elevation_storage.size() < 2) {
    throw std::invalid_argument("elevation_storage needs >= 2 points");
  }
  for (std::size_t i = 1; i < elevation_storage.size(); ++i) {
    if (!(elevation_storage[i].first > elevation_storage[i - 1].first) ||
        !(elevation_storage[i].second > elevation_storage[i - 1].second)) {
      throw std::invalid_argument("elevation_storage must be strictly increasing");
    }
  }
  for (double d : demand) {
    if (!(d >= 0.0)) throw std::invalid_argument("demand must be >= 0");
  }
  for (double v : mef.mef) {
    if (!(v >= 0.0)) throw std::invalid_argument("mef thresholds must be >= 0");
  }
  if (!(ns_denominator >= live_capacity)) {
    throw std::invalid_argument("ns_denominator must be >= live capacity");
  }
}

void PolicyParams::validate() const {
  if (centers.empty() || centers.size() != radii.size()) {
    throw std::invalid_argument("policy needs equal, nonzero center/radius counts");
  }
  for (double c : centers) {
    if (!(c >= -1.0 && c <= 1.0)) throw std::invalid_argument("center outside [-1,1]");
  }
  for (double r : radii) {
    if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("radius outside (0,1]");
  }
}

std::string to_string(Formulation f) {
  return f == Formulation::MefFirst ? "mef-first" : "demand-first";
}

Formulation formulation_from_string(const std::string& name) {
  if (name == "mef-first") return Formulation::MefFirst;
  if (name == "demand-first") return Formulation::DemandFirst;
  throw std::invalid_argument("unknown formulation '" + name +
                              "' (expected mef-first or demand-first)");
}

double normalized_storage(double storage, const ReservoirConfig& cfg) {
  return storage / cfg.ns_denominator;
}

double rbf_release(double ns, const PolicyParams& p, const ReservoirConfig& cfg) {
  double sum = 0.0;
  for (std::size_t k = 0; k < p.centers.size(); ++k) {
    const double u = (ns - p.centers[k]) / p.radii[k];
    sum += std::exp(-u * u);
  }
  const double release = cfg.hp_release_cap * sum / double(p.centers.size());
  return std::min(release, cfg.hp_release_cap);
}

double head(double storage, const ReservoirConfig& cfg) {
  const auto& tab = cfg.elevation_storage;
  if (storage <= tab.front().first) return tab.front().second;
  if (storage >= tab.back().first) return tab.back().second;
  auto it = std::upper_bound(tab.begin(), tab.end(), storage,
                             [](double s, const auto& p) { return s < p.first; });
  const auto& [s1, h1] = *it;
  const auto& [s0, h0] = *(it - 1);
  return h0 + (h1 - h0) * (storage - s0) / (s1 - s0);
}

DayFlux step(double storage_prev, double inflow, int wy_slot, Formulation form,
             const PolicyParams& p, const ReservoirConfig& cfg) {
  const double mef_t = cfg.mef.mef[wy_slot];
  const double dd_t = cfg.demand[wy_slot];
  const double hp_target = rbf_release(normalized_storage(storage_prev, cfg), p, cfg);

  double avail = storage_prev + inflow;
  DayFlux f;
  auto take = [&avail](double target) {
    const double v = std::min(target, avail);
    avail -= v;
    return v;
  };

  if (form == Formulation::MefFirst) {
    f.efr = take(mef_t);
    f.dr = take(dd_t);
    f.hpr = take(hp_target);
  } else {
    f.dr = take(dd_t);
    f.hpr = take(hp_target);
    f.efr = take(mef_t);
  }

  if (avail > cfg.live_capacity) {
    f.ewr = avail - cfg.live_capacity;
    f.storage = cfg.live_capacity;
  } else {
    f.storage = avail;
  }
  return f;
}

double SimTrace::years() const {
  const std::size_t n = size();
  const DayStamp end = from_day_number(day_number(start) + std::int64_t(n) - 1);
  if (start.month == 6 && start.day == 1 && end.month == 5 && end.day == 31) {
    return double(water_year_of(end) - water_year_of(start) + 1);
  }
  return double(n) / 365.25;
}

SimTrace simulate(const DailySeries& inflow, double storage0, Formulation form,
                  const PolicyParams& p, const ReservoirConfig& cfg) {
  if (!(storage0 >= 0.0 && storage0 <= cfg.live_capacity)) {
    throw std::invalid_argument("initial storage outside [0, live_capacity]");
  }
  p.validate();

  const std::size_t n = inflow.size();
  SimTrace tr;
  tr.start = inflow.start();
  tr.storage0 = storage0;
  tr.storage.resize(n);
  tr.inflow.resize(n);
  tr.efr.resize(n);
  tr.dr.resize(n);
  tr.hpr.resize(n);
  tr.ewr.resize(n);
  tr.head.resize(n);

  double s = storage0;
  std::int64_t dn = day_number(inflow.start());
  for (std::size_t t = 0; t < n; ++t, ++dn) {
    const int slot = water_year_slot(from_day_number(dn));
    tr.head[t] = head(s, cfg);
    const DayFlux f = step(s, inflow[t], slot, form, p, cfg);
    tr.inflow[t] = inflow[t];
    tr.efr[t] = f.efr;
    tr.dr[t] = f.dr;
    tr.hpr[t] = f.hpr;
    tr.ewr[t] = f.ewr;
    tr.storage[t] = f.storage;
    s = f.storage;
  }
  return tr;
}

void write_trace_csv(const std::string& path, const SimTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace CSV: " + path);
  out << "date,s,q,efr,dr,hpr,ewr,r,head\n";
  char buf[256];
  std::int64_t dn = day_number(trace.start);
  for (std::size_t t = 0; t < trace.size(); ++t, ++dn) {
    std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.6g\n",
                  from_day_number(dn).str().c_str(), trace.storage[t], trace.inflow[t],
                  trace.efr[t], trace.dr[t], trace.hpr[t], trace.ewr[t],
                  trace.release(t), trace.head[t]);
    out << buf;
  }
}

}  // namespace resopt
