#include "resopt/ensemble_io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace resopt {

namespace {

constexpr char kMagic[17] = "RESOPT-ENSEMBLE1";  // 16 bytes on the wire

template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

void save_ensemble_binary(const std::string& path, const InflowEnsemble& e,
                          const EnsembleMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write ensemble: " + path);
  out.write(kMagic, 16);
  put<std::uint32_t>(out, 1);  // version
  put<std::uint32_t>(out, std::uint32_t(e.size()));
  put<std::uint32_t>(out, std::uint32_t(e.years_per_realization));
  put<std::uint64_t>(out, std::uint64_t(e.steps_per_realization));
  const DayStamp start = e.realizations.empty() ? DayStamp{} : e.realizations[0].start();
  put<std::int32_t>(out, start.year);
  put<std::uint32_t>(out, start.month);
  put<std::uint32_t>(out, start.day);
  put<std::uint64_t>(out, meta.seed);
  put<std::uint64_t>(out, meta.model_hash);
  for (const auto& r : e.realizations) {
    if (r.size() != e.steps_per_realization) {
      throw std::runtime_error("ragged ensemble cannot be persisted");
    }
    out.write(reinterpret_cast<const char*>(r.values().data()),
              std::streamsize(r.size() * sizeof(double)));
  }
}

InflowEnsemble load_ensemble_binary(const std::string& path, EnsembleMeta* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open ensemble: " + path);
  char magic[16];
  in.read(magic, 16);
  if (std::memcmp(magic, kMagic, 16) != 0) {
    throw std::runtime_error(path + ": bad magic (not a RESOPT-ENSEMBLE1 container)");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != 1) throw std::runtime_error(path + ": unsupported container version");
  const auto nr = get<std::uint32_t>(in);
  const auto years = get<std::uint32_t>(in);
  const auto steps = get<std::uint64_t>(in);
  DayStamp start;
  start.year = get<std::int32_t>(in);
  start.month = get<std::uint32_t>(in);
  start.day = get<std::uint32_t>(in);
  EnsembleMeta m;
  m.seed = get<std::uint64_t>(in);
  m.model_hash = get<std::uint64_t>(in);
  if (meta) *meta = m;

  InflowEnsemble e;
  e.years_per_realization = int(years);
  e.steps_per_realization = std::size_t(steps);
  e.realizations.reserve(nr);
  for (std::uint32_t i = 0; i < nr; ++i) {
    std::vector<double> values(steps);
    in.read(reinterpret_cast<char*>(values.data()),
            std::streamsize(steps * sizeof(double)));
    if (!in) throw std::runtime_error(path + ": truncated container");
    e.realizations.emplace_back(start, std::move(values));
  }
  return e;
}

void save_ensemble_csv(const std::string& dir, const InflowEnsemble& e,
                       const EnsembleMeta& meta) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  char name[64];
  for (std::size_t i = 0; i < e.size(); ++i) {
    std::snprintf(name, sizeof name, "realization_%05zu.csv", i);
    write_daily_csv((fs::path(dir) / name).string(), e.realizations[i]);
  }
  nlohmann::json j;
  j["seed"] = meta.seed;
  j["model_hash"] = meta.model_hash;
  j["nr"] = e.size();
  j["years"] = e.years_per_realization;
  j["steps"] = e.steps_per_realization;
  std::ofstream out(fs::path(dir) / "ensemble_manifest.json");
  out << j.dump(2) << '\n';
}

InflowEnsemble load_ensemble_csv(const std::string& dir, EnsembleMeta* meta) {
  namespace fs = std::filesystem;
  std::ifstream min(fs::path(dir) / "ensemble_manifest.json");
  if (!min) throw std::runtime_error(dir + ": missing ensemble_manifest.json");
  nlohmann::json j;
  min >> j;
  const std::size_t nr = j.at("nr").get<std::size_t>();
  if (meta) {
    meta->seed = j.at("seed").get<std::uint64_t>();
    meta->model_hash = j.at("model_hash").get<std::uint64_t>();
  }
  InflowEnsemble e;
  e.years_per_realization = j.at("years").get<int>();
  e.steps_per_realization = j.at("steps").get<std::size_t>();
  char name[64];
  for (std::size_t i = 0; i < nr; ++i) {
    std::snprintf(name, sizeof name, "realization_%05zu.csv", i);
    e.realizations.push_back(load_daily_csv((fs::path(dir) / name).string()));
  }
  return e;
}

InflowEnsemble load_ensemble(const std::string& path, EnsembleMeta* meta) {
  if (std::filesystem::is_directory(path)) return load_ensemble_csv(path, meta);
  return load_ensemble_binary(path, meta);
}

}  // namespace resopt
