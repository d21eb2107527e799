#pragma once

#include <vector>

#include "json.hpp"
#include "thermpc/schedule.hpp"
#include "thermpc/statespace.hpp"

namespace thermpc {

struct HysteresisConfig {
  double margin = 1.0;        // K below/above the band midpoint
  double deadband = 0.5;      // K
  double ahu_fraction = 0.3;  // ventilation command while occupied

  void validate() const;
  static HysteresisConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct ZoneSetpoints {
  double heat = 0;
  double cool = 0;
};

ZoneSetpoints setpoints_for(const ComfortBand& band, const HysteresisConfig& cfg);

/// Per-zone on/off memory of the heating and cooling loops.
struct HysteresisState {
  std::vector<bool> heating;
  std::vector<bool> cooling;
  friend bool operator==(const HysteresisState&, const HysteresisState&) = default;
};

struct BaselineDecision {
  Vector u;
  HysteresisState state;
};

/// Bang-bang heating/cooling with hysteresis around the setpoints of the active band; ventilation
/// at the occupied fraction while occupied. `bands` and `occupied` are per zone.
BaselineDecision baseline_step(const Vector& zone_temps, const std::vector<ComfortBand>& bands,
                               const std::vector<bool>& occupied, const ActuatorTable& act,
                               const HysteresisConfig& cfg, const HysteresisState& prev);

}  // namespace thermpc
