#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "thermpc/timebase.hpp"

namespace thermpc {

enum class Orientation { N, S, E, W, Core };
enum class ElementKind { Wall, Window, FloorSlab };
enum class ActuatorKind { FancoilHeat, FancoilCool, AhuVent };
enum class ChannelKind { AmbientTemperature, GroundTemperature, SolarIrradiance, InternalGain, SupplyTemperature };

std::string_view to_string(Orientation o);
std::string_view to_string(ElementKind k);
std::string_view to_string(ActuatorKind k);
std::string_view to_string(ChannelKind k);

/// Boundary node names usable in ConstructionElement::boundary.
inline constexpr std::string_view kAmbient = "AMBIENT";
inline constexpr std::string_view kGround = "GROUND";

/// A volume of air at one uniform temperature.
struct Zone {
  std::string id;
  double floor_area = 0;         // m2
  double volume = 0;             // m3
  double air_heat_capacity = 0;  // J/K, including furnishings
  Orientation orientation = Orientation::Core;
  std::string comfort_schedule_id;
  std::string usage;  // free-form tag (laboratory, office, hallway, ...)
  std::string notes;

  friend bool operator==(const Zone&, const Zone&) = default;
};

struct Layer {
  double thermal_resistance = 0;   // K m2 / W
  double areal_heat_capacity = 0;  // J / (K m2)

  bool massive() const { return areal_heat_capacity > 0; }
  friend bool operator==(const Layer&, const Layer&) = default;
};

/// Wall, window or slab between two nodes. Layers run from boundary[0] to boundary[1].
struct ConstructionElement {
  std::string id;
  ElementKind kind = ElementKind::Wall;
  double area = 0;  // m2
  std::array<std::string, 2> boundary;
  std::vector<Layer> layers;
  double solar_transmittance = 0;

  friend bool operator==(const ConstructionElement&, const ConstructionElement&) = default;
};

/// Zone terminal whose heat flux is u * gain * (T_source - T_zone).
struct HvacActuator {
  std::string id;
  ActuatorKind kind = ActuatorKind::FancoilHeat;
  std::string zone_id;
  double gain_coefficient = 0;  // W/K at u = 1
  std::string reference_signal;  // disturbance channel carrying T_source
  std::array<double, 2> input_bounds{0.0, 1.0};
  double electrical_conversion = 0;     // W electrical per W thermal
  std::optional<double> design_delta_t;  // K; defaults to |nominal source - 20 C|

  friend bool operator==(const HvacActuator&, const HvacActuator&) = default;
};

struct ComfortBand {
  double t_min = 0;
  double t_max = 0;

  bool contains(const ComfortBand& inner) const { return t_min <= inner.t_min && inner.t_max <= t_max; }
  double violation(double t) const {
    if (t < t_min) return t_min - t;
    if (t > t_max) return t - t_max;
    return 0.0;
  }
  friend bool operator==(const ComfortBand&, const ComfortBand&) = default;
};

/// Occupied/unoccupied temperature bands plus the weekly occupied windows.
struct ComfortSchedule {
  ComfortBand occupied;
  ComfortBand unoccupied;
  std::vector<WeeklyInterval> occupancy_windows;

  bool occupied_at(const LocalTime& t) const;
  const ComfortBand& band_at(const LocalTime& t) const { return occupied_at(t) ? occupied : unoccupied; }
  friend bool operator==(const ComfortSchedule&, const ComfortSchedule&) = default;
};

/// One column of the disturbance vector v.
struct DisturbanceChannel {
  std::string name;
  ChannelKind kind = ChannelKind::AmbientTemperature;
  std::optional<Orientation> orientation;  // solar_irradiance only
  std::string zone_id;                     // internal_gain only
  std::string supply;                      // supply_temperature only: hot_water | chilled_water | supply_air
  std::optional<double> nominal;           // default value for temperatures

  bool is_boundary_temperature() const {
    return kind == ChannelKind::AmbientTemperature || kind == ChannelKind::GroundTemperature;
  }
  std::string_view unit() const;
  /// Declared nominal value, else the conventional default for the channel kind
  /// (hot water 70 C, chilled water 7 C, supply air 18 C, ground 10 C).
  std::optional<double> effective_nominal() const;
  friend bool operator==(const DisturbanceChannel&, const DisturbanceChannel&) = default;
};

struct BuildingDescription {
  std::string name;
  std::vector<Zone> zones;
  std::vector<ConstructionElement> elements;
  std::vector<HvacActuator> actuators;
  std::map<std::string, ComfortSchedule> comfort_schedules;
  std::vector<DisturbanceChannel> disturbances;

  std::optional<std::size_t> find_zone(std::string_view id) const;
  std::optional<std::size_t> find_channel(std::string_view name) const;
  std::size_t zone_index(std::string_view id) const;        // throws UnresolvedReference
  std::size_t channel_index(std::string_view name) const;   // throws UnresolvedReference
  std::optional<std::size_t> channel_of_kind(ChannelKind kind) const;
  std::optional<std::size_t> solar_channel(Orientation o) const;
  std::optional<std::size_t> gain_channel(std::string_view zone_id) const;
  const ComfortSchedule& comfort_for(std::size_t zone) const;

  /// Rated electrical power at u = 1, kW. Used by the energy cost and the meters.
  double rated_electrical_kw(std::size_t actuator) const;

  friend bool operator==(const BuildingDescription&, const BuildingDescription&) = default;
};

/// Parse and fully validate a building-description JSON document.
BuildingDescription parse_building(std::string_view text);
BuildingDescription load_building(const std::string& path);

/// Check every invariant; throws ValidationError / UnresolvedReference / DisconnectedNetwork.
void validate(const BuildingDescription& desc);

nlohmann::json to_json(const BuildingDescription& desc);
std::string serialize_building(const BuildingDescription& desc);

/// Turns a nlohmann parse failure at byte `offset` into a SyntaxError with line/column.
[[noreturn]] void throw_syntax_error(std::string_view text, std::size_t offset, const std::string& what);

/// Array of {"day"|"days", "start", "end"} objects, expanded to one interval per weekday.
std::vector<WeeklyInterval> parse_weekly_windows(const nlohmann::json& arr, const std::string& path);

std::string read_text_file(const std::string& path);

}  // namespace thermpc
