#include "thermpc/baseline.hpp"

#include <algorithm>
#include <cmath>

#include "json_fields.hpp"
#include "thermpc/errors.hpp"

namespace thermpc {

using nlohmann::json;
using namespace fields;

void HysteresisConfig::validate() const {
  if (!(deadband >= 0) || !std::isfinite(deadband)) throw ValidationError("baseline.deadband", "must be >= 0");
  if (!std::isfinite(margin)) throw ValidationError("baseline.margin", "must be finite");
  if (!(margin > deadband)) {
    throw ValidationError("baseline.margin", "heating setpoint + deadband must stay below cooling setpoint - deadband");
  }
  if (!(ahu_fraction >= 0 && ahu_fraction <= 1)) throw ValidationError("baseline.ahu_fraction", "must be in [0, 1]");
}

HysteresisConfig HysteresisConfig::from_json(const json& j) {
  HysteresisConfig c;
  if (!j.is_object()) throw ValidationError("baseline", "expected an object");
  if (j.contains("margin")) c.margin = number_field(j, "margin", "baseline");
  if (j.contains("deadband")) c.deadband = number_field(j, "deadband", "baseline");
  if (j.contains("ahu_fraction")) c.ahu_fraction = number_field(j, "ahu_fraction", "baseline");
  c.validate();
  return c;
}

json HysteresisConfig::to_json() const { return {{"margin", margin}, {"deadband", deadband}, {"ahu_fraction", ahu_fraction}}; }

ZoneSetpoints setpoints_for(const ComfortBand& band, const HysteresisConfig& cfg) {
  const double mid = 0.5 * (band.t_min + band.t_max);
  return {mid - cfg.margin, mid + cfg.margin};
}

BaselineDecision baseline_step(const Vector& zone_temps, const std::vector<ComfortBand>& bands,
                               const std::vector<bool>& occupied, const ActuatorTable& act,
                               const HysteresisConfig& cfg, const HysteresisState& prev) {
  const std::size_t nz = static_cast<std::size_t>(zone_temps.size());
  if (bands.size() != nz || occupied.size() != nz) throw DimensionError("baseline_step: per-zone inputs disagree in size");
  BaselineDecision out;
  out.state.heating = prev.heating.size() == nz ? prev.heating : std::vector<bool>(nz, false);
  out.state.cooling = prev.cooling.size() == nz ? prev.cooling : std::vector<bool>(nz, false);
  for (std::size_t z = 0; z < nz; ++z) {
    const double T = zone_temps[static_cast<Eigen::Index>(z)];
    const ZoneSetpoints sp = setpoints_for(bands[z], cfg);
    if (T < sp.heat - cfg.deadband) out.state.heating[z] = true;
    else if (T > sp.heat + cfg.deadband) out.state.heating[z] = false;
    if (T > sp.cool + cfg.deadband) out.state.cooling[z] = true;
    else if (T < sp.cool - cfg.deadband) out.state.cooling[z] = false;
  }

  out.u = Vector::Zero(static_cast<Eigen::Index>(act.size()));
  for (std::size_t i = 0; i < act.size(); ++i) {
    const std::size_t z = act.zones[i];
    if (z >= nz) throw DimensionError("baseline_step: actuator zone out of range");
    double cmd = 0;
    switch (act.kinds[i]) {
      case ActuatorKind::FancoilHeat: cmd = out.state.heating[z] ? 1.0 : 0.0; break;
      case ActuatorKind::FancoilCool: cmd = out.state.cooling[z] ? 1.0 : 0.0; break;
      case ActuatorKind::AhuVent: cmd = occupied[z] ? cfg.ahu_fraction : 0.0; break;
    }
    out.u[static_cast<Eigen::Index>(i)] = std::clamp(cmd, act.bounds[i][0], act.bounds[i][1]);
  }
  return out;
}

}  // namespace thermpc
