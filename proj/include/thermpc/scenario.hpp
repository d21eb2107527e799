#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "thermpc/baseline.hpp"
#include "thermpc/building.hpp"
#include "thermpc/disturbance.hpp"
#include "thermpc/mpc.hpp"
#include "thermpc/schedule.hpp"
#include "thermpc/simloop.hpp"
#include "thermpc/statespace.hpp"

namespace thermpc {

enum class ControllerKind { Mpc, Baseline };
std::string_view to_string(ControllerKind k);

struct ScenarioConfig {
  std::string name;
  std::string building_path;  // resolved against the scenario file's directory
  std::string weather_path;
  std::int64_t start = 0;     // UTC seconds of step 0
  double utc_offset_hours = 0;
  std::int64_t ts = 600;
  int substeps = 10;
  std::size_t duration_steps = 0;
  double initial_temperature = 21.0;  // uniform initial state, degC
  OccupancySchedule occupancy;
  SupplySchedule supply;
  PriceSchedule price;
  ForecastMode forecast = ForecastMode::Perfect;
  ControllerKind controller = ControllerKind::Mpc;
  MpcConfig mpc;
  HysteresisConfig baseline;
  double plant_perturbation_pct = 0;  // plant capacitances scaled by 1 + pct/100
  std::string output_dir;             // empty when not given

  TimeBase time_base() const { return {start, ts, utc_offset_hours}; }
};

/// Relative paths are resolved against `base_dir`. Referenced files must exist.
ScenarioConfig parse_scenario(std::string_view text, const std::string& base_dir);
ScenarioConfig load_scenario(const std::string& path);

/// Loaded building, controller model, plant, disturbances and loop context of a scenario.
struct PreparedScenario {
  ScenarioConfig config;
  BuildingDescription building;
  std::shared_ptr<const DiscreteBilinearModel> model;
  std::shared_ptr<const DiscreteBilinearModel> plant;
  LoopContext context;
};

PreparedScenario prepare_scenario(const ScenarioConfig& cfg);

std::unique_ptr<Controller> make_controller(const PreparedScenario& s, ControllerKind kind,
                                            std::shared_ptr<const Forecaster> forecaster = nullptr);

SimulationResult run_scenario(const PreparedScenario& s, ControllerKind kind);

/// Writes states/inputs/disturbances/derived CSV, metrics.json and diagnostics.jsonl.
void write_simulation_outputs(const SimulationResult& result, const std::string& dir);
std::string metrics_document(const Metrics& m);

/// (baseline - mpc) / baseline as a percentage; nullopt when the baseline value is 0.
std::optional<double> savings_pct(double baseline, double mpc);

struct Comparison {
  Metrics baseline;
  Metrics mpc;
  nlohmann::json to_json(const std::string& scenario_name) const;
  std::string table() const;
};

}  // namespace thermpc
