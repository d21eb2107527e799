#include "thermpc/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json_fields.hpp"
#include "thermpc/errors.hpp"

namespace thermpc {

using nlohmann::json;
using namespace fields;
namespace fs = std::filesystem;

std::string_view to_string(ControllerKind k) { return k == ControllerKind::Mpc ? "mpc" : "baseline"; }

namespace {

std::string resolve(const std::string& base_dir, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() || base_dir.empty() ? path : fs::path(base_dir) / path).lexically_normal().string();
}

std::string existing_file(const json& doc, const char* key, const std::string& base_dir) {
  const std::string p = resolve(base_dir, string_field(doc, key, ""));
  if (!fs::is_regular_file(p)) throw ValidationError(key, "file '" + p + "' does not exist");
  return p;
}

OccupancySchedule parse_occupancy(const json& j) {
  OccupancySchedule occ;
  if (!j.is_object()) throw ValidationError("occupancy", "expected an object keyed by zone id");
  for (const auto& [zone, entries] : j.items()) {
    const std::string p = at("occupancy", zone);
    get_array(entries, p);
    auto& list = occ.zones[zone];
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const std::string pi = at(p, i);
      const double gain = number_field(entries[i], "heat_gain", pi);
      const int start = clock_field(entries[i], "start", pi);
      const int end = clock_field(entries[i], "end", pi);
      for (int d : parse_days(entries[i], pi)) list.push_back({{d, start, end}, gain});
    }
  }
  occ.validate();
  return occ;
}

SupplySchedule parse_supply(const json& j) {
  SupplySchedule sup;
  if (!j.is_object()) throw ValidationError("supply", "expected an object keyed by channel name");
  for (const auto& [name, body] : j.items()) {
    const std::string p = at("supply", name);
    SupplySchedule::Channel ch;
    if (body.is_number()) {
      ch.default_value = get_number(body, p);
    } else {
      ch.default_value = number_field(body, "default", p);
      if (auto it = body.find("entries"); it != body.end()) {
        const std::string pe = at(p, "entries");
        get_array(*it, pe);
        for (std::size_t i = 0; i < it->size(); ++i) {
          const json& e = (*it)[i];
          const std::string pi = at(pe, i);
          const double value = number_field(e, "value", pi);
          const int start = clock_field(e, "start", pi);
          const int end = clock_field(e, "end", pi);
          for (int d : parse_days(e, pi)) ch.entries.push_back({{d, start, end}, value});
        }
      }
    }
    sup.channels.emplace(name, std::move(ch));
  }
  return sup;
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text, const std::string& base_dir) {
  const json doc = parse_json_document(text);
  if (!doc.is_object()) throw ValidationError("<document>", "top level must be an object");
  ScenarioConfig c;
  c.name = optional_string(doc, "name", "");
  c.building_path = existing_file(doc, "building", base_dir);
  c.weather_path = existing_file(doc, "weather", base_dir);
  try {
    c.start = parse_iso8601(string_field(doc, "start", ""));
  } catch (const ValidationError&) {
    throw;
  } catch (const InputError& e) {
    throw ValidationError("start", e.what());
  }
  if (doc.contains("utc_offset_hours")) c.utc_offset_hours = number_field(doc, "utc_offset_hours", "");
  if (std::abs(c.utc_offset_hours) > 14) throw ValidationError("utc_offset_hours", "must be within [-14, 14]");
  const auto integer = [&](const char* key, double lo) {
    const double v = number_field(doc, key, "");
    if (v != std::floor(v) || v < lo) throw ValidationError(key, "must be an integer >= " + std::to_string(static_cast<long long>(lo)));
    return v;
  };
  if (doc.contains("Ts")) c.ts = static_cast<std::int64_t>(integer("Ts", 1));
  if (doc.contains("substeps")) c.substeps = static_cast<int>(integer("substeps", 1));
  c.duration_steps = static_cast<std::size_t>(integer("duration_steps", 0));
  if (doc.contains("initial_temperature")) c.initial_temperature = number_field(doc, "initial_temperature", "");
  if (doc.contains("occupancy")) c.occupancy = parse_occupancy(doc["occupancy"]);
  if (doc.contains("supply")) c.supply = parse_supply(doc["supply"]);
  c.price = PriceSchedule::from_json(require(doc, "price", ""));
  const std::string forecast = doc.contains("forecast") ? string_field(doc, "forecast", "") : "perfect";
  if (forecast == "perfect") c.forecast = ForecastMode::Perfect;
  else if (forecast == "persistence") c.forecast = ForecastMode::Persistence;
  else throw ValidationError("forecast", "must be 'perfect' or 'persistence'");
  const std::string controller = doc.contains("controller") ? string_field(doc, "controller", "") : "mpc";
  if (controller == "mpc") c.controller = ControllerKind::Mpc;
  else if (controller == "baseline") c.controller = ControllerKind::Baseline;
  else throw ValidationError("controller", "must be 'mpc' or 'baseline'");
  c.mpc.ts = static_cast<double>(c.ts);
  if (doc.contains("mpc")) {
    c.mpc = MpcConfig::from_json(doc["mpc"]);
    if (!doc["mpc"].contains("Ts")) c.mpc.ts = static_cast<double>(c.ts);
    if (c.mpc.ts != static_cast<double>(c.ts)) throw ValidationError("mpc.Ts", "must equal the scenario Ts");
  }
  if (doc.contains("baseline")) c.baseline = HysteresisConfig::from_json(doc["baseline"]);
  if (doc.contains("plant_perturbation_pct")) c.plant_perturbation_pct = number_field(doc, "plant_perturbation_pct", "");
  if (!(c.plant_perturbation_pct > -100)) throw ValidationError("plant_perturbation_pct", "must be > -100");
  if (doc.contains("output_dir")) c.output_dir = resolve(base_dir, string_field(doc, "output_dir", ""));
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  return parse_scenario(read_text_file(path), fs::path(path).parent_path().string());
}

PreparedScenario prepare_scenario(const ScenarioConfig& cfg) {
  PreparedScenario s;
  s.config = cfg;
  s.building = load_building(cfg.building_path);
  for (const auto& [zone, entries] : cfg.occupancy.zones) {
    if (!s.building.find_zone(zone)) throw UnresolvedReference("occupancy", zone);
  }
  for (const auto& [name, ch] : cfg.supply.channels) {
    if (!s.building.find_channel(name)) throw UnresolvedReference("supply", name);
  }
  const auto ts = static_cast<double>(cfg.ts);
  s.model = std::make_shared<const DiscreteBilinearModel>(build_model(s.building, ts, cfg.substeps));
  if (cfg.plant_perturbation_pct != 0) {
    s.plant = std::make_shared<const DiscreteBilinearModel>(
        build_model(s.building, ts, cfg.substeps, 1.0 + cfg.plant_perturbation_pct / 100.0));
  } else {
    s.plant = s.model;
  }

  const TimeBase tb = cfg.time_base();
  const std::size_t rows = cfg.duration_steps == 0 ? 0 : cfg.duration_steps + cfg.mpc.N - 1;
  const auto weather = load_weather_file(cfg.weather_path);
  auto series = std::make_shared<DisturbanceSeries>(
      build_disturbance_series(s.building, weather, cfg.occupancy, cfg.supply, tb, rows));

  LoopContext& ctx = s.context;
  for (const auto& z : s.building.zones) ctx.zone_ids.push_back(z.id);
  ctx.actuators = ActuatorTable::from_building(s.building);
  ctx.schedule = ControlSchedule::for_building(s.building, tb, cfg.price);
  ctx.disturbances = std::move(series);
  for (const auto& c : s.building.disturbances) ctx.disturbance_units.emplace_back(c.unit());
  ctx.x0 = Vector::Constant(static_cast<Eigen::Index>(s.model->n()), cfg.initial_temperature);
  return s;
}

std::unique_ptr<Controller> make_controller(const PreparedScenario& s, ControllerKind kind,
                                            std::shared_ptr<const Forecaster> forecaster) {
  if (kind == ControllerKind::Baseline) {
    return std::make_unique<BaselineController>(s.context.actuators, s.context.schedule, s.config.baseline,
                                                s.model->labels.zone_states);
  }
  if (!forecaster) {
    forecaster = std::make_shared<ForecastProvider>(
        ForecastProvider::for_building(s.config.forecast, s.context.disturbances, s.building));
  }
  MpcSetup setup;
  setup.model = s.model.get();
  setup.actuators = s.context.actuators;
  setup.schedule = s.context.schedule;
  setup.config = s.config.mpc;
  return std::make_unique<MpcController>(std::move(setup), std::move(forecaster));
}

SimulationResult run_scenario(const PreparedScenario& s, ControllerKind kind) {
  auto controller = make_controller(s, kind);
  return run_closed_loop(*s.plant, *controller, s.context, s.config.duration_steps);
}

std::string metrics_document(const Metrics& m) { return m.to_json().dump(2) + "\n"; }

void write_simulation_outputs(const SimulationResult& result, const std::string& dir) {
  write_stream_csvs(result.streams, dir);
  const auto write = [&](const char* file, const std::string& content) {
    const fs::path p = fs::path(dir) / file;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw InputError("cannot write '" + p.string() + "'");
    f << content;
  };
  write("metrics.json", metrics_document(result.metrics));
  std::string lines;
  for (const auto& d : result.diagnostics) lines += d.dump() + "\n";
  write("diagnostics.jsonl", lines);
}

std::optional<double> savings_pct(double baseline, double mpc) {
  if (baseline == 0) return std::nullopt;
  return 100.0 * (baseline - mpc) / baseline;
}

json Comparison::to_json(const std::string& scenario_name) const {
  const auto pct = [](std::optional<double> v) { return v ? json(*v) : json("n/a"); };
  return {{"scenario", scenario_name},
          {"controllers", {{"baseline", baseline.to_json()}, {"mpc", mpc.to_json()}}},
          {"savings_pct",
           {{"cost", pct(savings_pct(baseline.cost, mpc.cost))},
            {"energy_kwh", pct(savings_pct(baseline.energy_kwh_total, mpc.energy_kwh_total))},
            {"discomfort_kh", pct(savings_pct(baseline.discomfort_kh_total, mpc.discomfort_kh_total))}}}};
}

std::string Comparison::table() const {
  const auto row = [](const char* label, double b, double m) {
    const auto s = savings_pct(b, m);
    char buf[160];
    if (s) std::snprintf(buf, sizeof buf, "%-16s %14.4f %14.4f %11.2f%%\n", label, b, m, *s);
    else std::snprintf(buf, sizeof buf, "%-16s %14.4f %14.4f %12s\n", label, b, m, "n/a");
    return std::string(buf);
  };
  char head[160];
  std::snprintf(head, sizeof head, "%-16s %14s %14s %12s\n", "metric", "baseline", "mpc", "savings");
  std::string out = head;
  out += row("cost", baseline.cost, mpc.cost);
  out += row("energy_kwh", baseline.energy_kwh_total, mpc.energy_kwh_total);
  out += row("discomfort_kh", baseline.discomfort_kh_total, mpc.discomfort_kh_total);
  out += row("peak_power_kw", baseline.peak_power_kw, mpc.peak_power_kw);
  return out;
}

}  // namespace thermpc
