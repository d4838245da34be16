#include "resopt/config.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "resopt/fixture.hpp"
#include "resopt/rng.hpp"
#include "resopt/thresholds.hpp"

namespace resopt {

using nlohmann::json;

ThresholdMethod threshold_method_from_string(const std::string& name) {
  if (name == "percent_of_maf") return ThresholdMethod::PercentOfMaf;
  if (name == "moefcc") return ThresholdMethod::Moefcc;
  throw std::invalid_argument("unknown threshold method '" + name +
                              "' (expected percent_of_maf or moefcc)");
}

std::string to_string(ThresholdMethod m) {
  return m == ThresholdMethod::PercentOfMaf ? "percent_of_maf" : "moefcc";
}

namespace {

void check_keys(const json& j, const std::vector<std::string>& allowed,
                const std::string& where) {
  if (!j.is_object()) throw std::runtime_error("config: " + where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw std::runtime_error("config: unknown key '" + key + "' in " + where);
    }
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  // default demand: the NS-like schedule (7435 irrigation + 1000 domestic)
  c.reservoir.demand_monthly_mm3 = fixture::ns_like_irrigation_monthly();
  c.reservoir.elevation_storage = fixture::ns_like_elevation_storage();

  check_keys(j,
             {"paths", "window", "reservoir", "generator", "thresholds",
              "optimization", "evaluation", "report"},
             "top level");

  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    check_keys(p, {"inflow_csv", "release_history_csv", "output_dir"}, "paths");
    read(p, "inflow_csv", c.paths.inflow_csv);
    read(p, "release_history_csv", c.paths.release_history_csv);
    read(p, "output_dir", c.paths.output_dir);
  }
  if (j.contains("window")) {
    const auto& w = j.at("window");
    check_keys(w, {"start", "end"}, "window");
    if (w.contains("start")) c.window.start = DayStamp::parse(w.at("start").get<std::string>());
    if (w.contains("end")) c.window.end = DayStamp::parse(w.at("end").get<std::string>());
  }
  if (j.contains("reservoir")) {
    const auto& r = j.at("reservoir");
    check_keys(r,
               {"live_capacity_mm3", "hp_release_cap_mm3day", "hp_power_cap_gw",
                "efficiency", "specific_weight_nm3", "elevation_storage",
                "demand_monthly_mm3", "domestic_demand_mm3yr", "demand_csv",
                "initial_storage_frac", "ns_denominator_mm3",
                "flood_threshold_mm3day"},
               "reservoir");
    read(r, "live_capacity_mm3", c.reservoir.live_capacity_mm3);
    read(r, "hp_release_cap_mm3day", c.reservoir.hp_release_cap_mm3day);
    read(r, "hp_power_cap_gw", c.reservoir.hp_power_cap_gw);
    read(r, "efficiency", c.reservoir.efficiency);
    read(r, "specific_weight_nm3", c.reservoir.specific_weight_nm3);
    if (r.contains("elevation_storage")) {
      c.reservoir.elevation_storage.clear();
      for (const auto& pt : r.at("elevation_storage")) {
        if (!pt.is_array() || pt.size() != 2) {
          throw std::runtime_error("config: elevation_storage entries must be [storage, head]");
        }
        c.reservoir.elevation_storage.emplace_back(pt[0].get<double>(),
                                                   pt[1].get<double>());
      }
    }
    if (r.contains("demand_monthly_mm3")) {
      const auto& dm = r.at("demand_monthly_mm3");
      if (!dm.is_array() || dm.size() != 12) {
        throw std::runtime_error("config: demand_monthly_mm3 needs 12 entries (Jun..May)");
      }
      for (int i = 0; i < 12; ++i) c.reservoir.demand_monthly_mm3[i] = dm[i].get<double>();
    }
    read(r, "domestic_demand_mm3yr", c.reservoir.domestic_demand_mm3yr);
    read(r, "demand_csv", c.reservoir.demand_csv);
    read(r, "initial_storage_frac", c.reservoir.initial_storage_frac);
    read(r, "ns_denominator_mm3", c.reservoir.ns_denominator_mm3);
    read(r, "flood_threshold_mm3day", c.reservoir.flood_threshold_mm3day);
  }
  if (j.contains("generator")) {
    const auto& g = j.at("generator");
    check_keys(g,
               {"seed", "nr", "years", "jitter_floor_mm3day", "inter_annual",
                "start_water_year", "format", "validation_mean_tol",
                "validation_sd_tol"},
               "generator");
    read(g, "seed", c.generator.seed);
    read(g, "nr", c.generator.nr);
    read(g, "years", c.generator.years);
    read(g, "jitter_floor_mm3day", c.generator.jitter_floor_mm3day);
    read(g, "inter_annual", c.generator.inter_annual);
    read(g, "start_water_year", c.generator.start_water_year);
    read(g, "format", c.generator.format);
    read(g, "validation_mean_tol", c.generator.validation_mean_tol);
    read(g, "validation_sd_tol", c.generator.validation_sd_tol);
    if (c.generator.format != "binary" && c.generator.format != "csv") {
      throw std::runtime_error("config: generator.format must be binary or csv");
    }
  }
  if (j.contains("thresholds")) {
    const auto& t = j.at("thresholds");
    check_keys(t, {"method", "fraction"}, "thresholds");
    if (t.contains("method")) {
      c.thresholds.method = threshold_method_from_string(t.at("method").get<std::string>());
    }
    read(t, "fraction", c.thresholds.fraction);
    if (!(c.thresholds.fraction > 0.0 && c.thresholds.fraction <= 1.0)) {
      throw std::runtime_error("config: thresholds.fraction must be in (0,1]");
    }
  }
  if (j.contains("optimization")) {
    const auto& o = j.at("optimization");
    check_keys(o,
               {"nfe", "population", "seeds", "epsilons", "formulations",
                "rbf_count", "stall_window", "adaptive_operators",
                "checkpoint_interval"},
               "optimization");
    read(o, "nfe", c.optimization.nfe);
    read(o, "population", c.optimization.population);
    if (o.contains("seeds")) {
      c.optimization.seeds = o.at("seeds").get<std::vector<std::uint64_t>>();
      if (c.optimization.seeds.empty()) {
        throw std::runtime_error("config: optimization.seeds must be nonempty");
      }
    }
    if (o.contains("epsilons")) {
      const auto& e = o.at("epsilons");
      if (!e.is_array() || e.size() != 4) {
        throw std::runtime_error("config: optimization.epsilons needs 4 entries");
      }
      for (int i = 0; i < 4; ++i) c.optimization.epsilons[i] = e[i].get<double>();
    }
    if (o.contains("formulations")) {
      c.optimization.formulations = o.at("formulations").get<std::vector<std::string>>();
      for (const auto& f : c.optimization.formulations) formulation_from_string(f);
    }
    read(o, "rbf_count", c.optimization.rbf_count);
    read(o, "stall_window", c.optimization.stall_window);
    read(o, "adaptive_operators", c.optimization.adaptive_operators);
    read(o, "checkpoint_interval", c.optimization.checkpoint_interval);
  }
  if (j.contains("evaluation")) {
    const auto& e = j.at("evaluation");
    check_keys(e, {"sample_size", "sample_seed", "mef_basis"}, "evaluation");
    read(e, "sample_size", c.evaluation.sample_size);
    read(e, "sample_seed", c.evaluation.sample_seed);
    read(e, "mef_basis", c.evaluation.mef_basis);
    mef_basis_from_string(c.evaluation.mef_basis);
  }
  if (j.contains("report")) {
    const auto& r = j.at("report");
    check_keys(r, {"reeval_nr", "hv_samples", "monthly_reliability_nr"}, "report");
    read(r, "reeval_nr", c.report.reeval_nr);
    read(r, "hv_samples", c.report.hv_samples);
    read(r, "monthly_reliability_nr", c.report.monthly_reliability_nr);
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

json ExperimentConfig::resolved() const {
  json j;
  j["paths"] = {{"inflow_csv", paths.inflow_csv},
                {"release_history_csv", paths.release_history_csv},
                {"output_dir", paths.output_dir}};
  json w;
  if (window.start) w["start"] = window.start->str();
  if (window.end) w["end"] = window.end->str();
  j["window"] = w;
  json es = json::array();
  for (const auto& [s, h] : reservoir.elevation_storage) es.push_back({s, h});
  j["reservoir"] = {{"live_capacity_mm3", reservoir.live_capacity_mm3},
                    {"hp_release_cap_mm3day", reservoir.hp_release_cap_mm3day},
                    {"hp_power_cap_gw", reservoir.hp_power_cap_gw},
                    {"efficiency", reservoir.efficiency},
                    {"specific_weight_nm3", reservoir.specific_weight_nm3},
                    {"elevation_storage", es},
                    {"demand_monthly_mm3", reservoir.demand_monthly_mm3},
                    {"domestic_demand_mm3yr", reservoir.domestic_demand_mm3yr},
                    {"demand_csv", reservoir.demand_csv},
                    {"initial_storage_frac", reservoir.initial_storage_frac},
                    {"ns_denominator_mm3", reservoir.ns_denominator_mm3},
                    {"flood_threshold_mm3day", reservoir.flood_threshold_mm3day}};
  j["generator"] = {{"seed", generator.seed},
                    {"nr", generator.nr},
                    {"years", generator.years},
                    {"jitter_floor_mm3day", generator.jitter_floor_mm3day},
                    {"inter_annual", generator.inter_annual},
                    {"start_water_year", generator.start_water_year},
                    {"format", generator.format},
                    {"validation_mean_tol", generator.validation_mean_tol},
                    {"validation_sd_tol", generator.validation_sd_tol}};
  j["thresholds"] = {{"method", to_string(thresholds.method)},
                     {"fraction", thresholds.fraction}};
  j["optimization"] = {{"nfe", optimization.nfe},
                       {"population", optimization.population},
                       {"seeds", optimization.seeds},
                       {"epsilons", optimization.epsilons},
                       {"formulations", optimization.formulations},
                       {"rbf_count", optimization.rbf_count},
                       {"stall_window", optimization.stall_window},
                       {"adaptive_operators", optimization.adaptive_operators},
                       {"checkpoint_interval", optimization.checkpoint_interval}};
  j["evaluation"] = {{"sample_size", evaluation.sample_size},
                     {"sample_seed", evaluation.sample_seed},
                     {"mef_basis", evaluation.mef_basis}};
  j["report"] = {{"reeval_nr", report.reeval_nr},
                 {"hv_samples", report.hv_samples},
                 {"monthly_reliability_nr", report.monthly_reliability_nr}};
  return j;
}

std::uint64_t ExperimentConfig::hash() const {
  const std::string s = resolved().dump();
  return fnv1a64(s.data(), s.size());
}

namespace {

DailySeries apply_window(DailySeries s, const ExperimentConfig::Window& w) {
  if (!w.start && !w.end) return s;
  const DayStamp from = w.start.value_or(s.start());
  const DayStamp to = w.end.value_or(s.last());
  return s.window(from, to);
}

}  // namespace

DailySeries load_inflow(const ExperimentConfig& cfg) {
  if (cfg.paths.inflow_csv.empty()) {
    throw std::runtime_error("config: paths.inflow_csv is required");
  }
  return apply_window(load_daily_csv(cfg.paths.inflow_csv), cfg.window);
}

DailySeries load_release_history(const ExperimentConfig& cfg) {
  if (cfg.paths.release_history_csv.empty()) {
    throw std::runtime_error(
        "config: paths.release_history_csv is required unless "
        "reservoir.flood_threshold_mm3day is set");
  }
  return apply_window(load_daily_csv(cfg.paths.release_history_csv), cfg.window);
}

ReservoirConfig build_reservoir(const ExperimentConfig& cfg,
                                const DailySeries& historical,
                                double max_ensemble_inflow,
                                std::optional<double> fraction_override) {
  ReservoirConfig r;
  r.live_capacity = cfg.reservoir.live_capacity_mm3;
  r.hp_release_cap = cfg.reservoir.hp_release_cap_mm3day;
  r.hp_power_cap = cfg.reservoir.hp_power_cap_gw;
  r.efficiency = cfg.reservoir.efficiency;
  r.specific_weight = cfg.reservoir.specific_weight_nm3;
  r.elevation_storage = cfg.reservoir.elevation_storage;

  if (!cfg.reservoir.demand_csv.empty()) {
    const MefSchedule d = load_schedule_csv(cfg.reservoir.demand_csv);
    r.demand = d.mef;
  } else {
    const double domestic = cfg.reservoir.domestic_demand_mm3yr / 365.0;
    for (int slot = 0; slot < 365; ++slot) {
      const DayStamp d = slot_to_date(2001, slot);
      const int mm = (int(d.month) + 6) % 12;
      r.demand[slot] = cfg.reservoir.demand_monthly_mm3[std::size_t(mm)] /
                           double(days_in_month(2001, d.month)) +
                       domestic;
    }
  }

  const double fraction = fraction_override.value_or(cfg.thresholds.fraction);
  r.mef = cfg.thresholds.method == ThresholdMethod::PercentOfMaf
              ? percent_of_maf(historical, fraction)
              : moefcc(historical);

  if (cfg.reservoir.flood_threshold_mm3day > 0.0) {
    r.flood = FloodThreshold{cfg.reservoir.flood_threshold_mm3day};
  } else {
    r.flood = flood_threshold(load_release_history(cfg));
  }

  if (cfg.reservoir.ns_denominator_mm3 > 0.0) {
    r.ns_denominator = cfg.reservoir.ns_denominator_mm3;
  } else {
    double mx = max_ensemble_inflow;
    if (mx <= 0.0) {
      for (double v : historical.values()) mx = std::max(mx, v);
    }
    r.ns_denominator = r.live_capacity + mx;
  }
  r.validate();
  return r;
}

std::uint64_t file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot hash missing file: " + path);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    h = fnv1a64(buf, std::size_t(in.gcount()), h);
  }
  return h;
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const ExperimentConfig& cfg,
                    const std::vector<std::string>& input_paths,
                    const json& extra) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  json j;
  j["command"] = command;
  j["config"] = cfg.resolved();
  char hex[24];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(cfg.hash()));
  j["config_hash"] = hex;
  json inputs;
  for (const auto& p : input_paths) {
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(file_hash(p)));
    inputs[p] = hex;
  }
  j["inputs"] = inputs;
  j["seeds"] = {{"generator", cfg.generator.seed},
                {"optimization", cfg.optimization.seeds},
                {"evaluation_sample", cfg.evaluation.sample_seed}};
  j["extra"] = extra;
  std::ofstream out(fs::path(out_dir) / ("manifest_" + command + ".json"));
  out << j.dump(2) << '\n';
}

PolicyParams load_policy_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open policy file: " + path);
  json j;
  in >> j;
  check_keys(j, {"centers", "radii"}, "policy file");
  PolicyParams p;
  p.centers = j.at("centers").get<std::vector<double>>();
  p.radii = j.at("radii").get<std::vector<double>>();
  p.validate();
  return p;
}

void write_policy_json(const std::string& path, const PolicyParams& p) {
  json j;
  j["centers"] = p.centers;
  j["radii"] = p.radii;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write policy file: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace resopt
