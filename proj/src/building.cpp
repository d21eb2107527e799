#include "thermpc/building.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json_fields.hpp"
#include "thermpc/errors.hpp"

namespace thermpc {

using nlohmann::json;
using namespace fields;

std::string_view to_string(Orientation o) {
  switch (o) {
    case Orientation::N: return "N";
    case Orientation::S: return "S";
    case Orientation::E: return "E";
    case Orientation::W: return "W";
    case Orientation::Core: return "core";
  }
  return "?";
}

std::string_view to_string(ElementKind k) {
  switch (k) {
    case ElementKind::Wall: return "wall";
    case ElementKind::Window: return "window";
    case ElementKind::FloorSlab: return "floor_slab";
  }
  return "?";
}

std::string_view to_string(ActuatorKind k) {
  switch (k) {
    case ActuatorKind::FancoilHeat: return "fancoil_heat";
    case ActuatorKind::FancoilCool: return "fancoil_cool";
    case ActuatorKind::AhuVent: return "ahu_vent";
  }
  return "?";
}

std::string_view to_string(ChannelKind k) {
  switch (k) {
    case ChannelKind::AmbientTemperature: return "ambient_temperature";
    case ChannelKind::GroundTemperature: return "ground_temperature";
    case ChannelKind::SolarIrradiance: return "solar_irradiance";
    case ChannelKind::InternalGain: return "internal_gain";
    case ChannelKind::SupplyTemperature: return "supply_temperature";
  }
  return "?";
}

std::string_view DisturbanceChannel::unit() const {
  switch (kind) {
    case ChannelKind::SolarIrradiance: return "W/m2";
    case ChannelKind::InternalGain: return "W";
    default: return "degC";
  }
}

std::optional<double> DisturbanceChannel::effective_nominal() const {
  if (nominal) return nominal;
  if (kind == ChannelKind::GroundTemperature) return 10.0;
  if (kind == ChannelKind::SupplyTemperature) {
    if (supply == "hot_water") return 70.0;
    if (supply == "chilled_water") return 7.0;
    if (supply == "supply_air") return 18.0;
  }
  return std::nullopt;
}

bool ComfortSchedule::occupied_at(const LocalTime& t) const {
  return std::any_of(occupancy_windows.begin(), occupancy_windows.end(),
                     [&](const WeeklyInterval& w) { return w.contains(t.weekday, t.minute_of_day); });
}

// ---------------------------------------------------------------------------
// lookups

std::optional<std::size_t> BuildingDescription::find_zone(std::string_view id) const {
  for (std::size_t i = 0; i < zones.size(); ++i) {
    if (zones[i].id == id) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> BuildingDescription::find_channel(std::string_view channel) const {
  for (std::size_t i = 0; i < disturbances.size(); ++i) {
    if (disturbances[i].name == channel) return i;
  }
  return std::nullopt;
}

std::size_t BuildingDescription::zone_index(std::string_view id) const {
  if (auto i = find_zone(id)) return *i;
  throw UnresolvedReference("zone", std::string(id));
}

std::size_t BuildingDescription::channel_index(std::string_view channel) const {
  if (auto i = find_channel(channel)) return *i;
  throw UnresolvedReference("disturbance channel", std::string(channel));
}

std::optional<std::size_t> BuildingDescription::channel_of_kind(ChannelKind kind) const {
  for (std::size_t i = 0; i < disturbances.size(); ++i) {
    if (disturbances[i].kind == kind) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> BuildingDescription::solar_channel(Orientation o) const {
  for (std::size_t i = 0; i < disturbances.size(); ++i) {
    if (disturbances[i].kind == ChannelKind::SolarIrradiance && disturbances[i].orientation == o) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> BuildingDescription::gain_channel(std::string_view zone_id) const {
  for (std::size_t i = 0; i < disturbances.size(); ++i) {
    if (disturbances[i].kind == ChannelKind::InternalGain && disturbances[i].zone_id == zone_id) return i;
  }
  return std::nullopt;
}

const ComfortSchedule& BuildingDescription::comfort_for(std::size_t zone) const {
  const auto& id = zones.at(zone).comfort_schedule_id;
  auto it = comfort_schedules.find(id);
  if (it == comfort_schedules.end()) throw UnresolvedReference("zones[" + std::to_string(zone) + "].comfort_schedule_id", id);
  return it->second;
}

double BuildingDescription::rated_electrical_kw(std::size_t actuator) const {
  const HvacActuator& a = actuators.at(actuator);
  double delta_t = 0;
  if (a.design_delta_t) {
    delta_t = *a.design_delta_t;
  } else {
    const auto nominal = disturbances.at(channel_index(a.reference_signal)).effective_nominal();
    if (!nominal) {
      throw ValidationError("actuators[" + a.id + "].design_delta_t",
                            "required when the reference channel has no nominal value");
    }
    delta_t = std::abs(*nominal - 20.0);
  }
  return a.electrical_conversion * a.gain_coefficient * delta_t / 1000.0;
}

// ---------------------------------------------------------------------------
// parsing

namespace {

Orientation parse_orientation(const std::string& s, const std::string& path) {
  if (s == "N") return Orientation::N;
  if (s == "S") return Orientation::S;
  if (s == "E") return Orientation::E;
  if (s == "W") return Orientation::W;
  if (s == "core") return Orientation::Core;
  throw ValidationError(path, "must be one of N, S, E, W, core");
}

ElementKind parse_element_kind(const std::string& s, const std::string& path) {
  if (s == "wall") return ElementKind::Wall;
  if (s == "window") return ElementKind::Window;
  if (s == "floor_slab") return ElementKind::FloorSlab;
  throw ValidationError(path, "must be one of wall, window, floor_slab");
}

ActuatorKind parse_actuator_kind(const std::string& s, const std::string& path) {
  if (s == "fancoil_heat") return ActuatorKind::FancoilHeat;
  if (s == "fancoil_cool") return ActuatorKind::FancoilCool;
  if (s == "ahu_vent") return ActuatorKind::AhuVent;
  throw ValidationError(path, "must be one of fancoil_heat, fancoil_cool, ahu_vent");
}

ChannelKind parse_channel_kind(const std::string& s, const std::string& path) {
  if (s == "ambient_temperature") return ChannelKind::AmbientTemperature;
  if (s == "ground_temperature") return ChannelKind::GroundTemperature;
  if (s == "solar_irradiance") return ChannelKind::SolarIrradiance;
  if (s == "internal_gain") return ChannelKind::InternalGain;
  if (s == "supply_temperature") return ChannelKind::SupplyTemperature;
  throw ValidationError(path, "must be one of ambient_temperature, ground_temperature, solar_irradiance, "
                              "internal_gain, supply_temperature");
}

}  // namespace

std::vector<WeeklyInterval> parse_weekly_windows(const json& arr, const std::string& path) {
  std::vector<WeeklyInterval> out;
  get_array(arr, path);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = at(path, i);
    const int start = clock_field(arr[i], "start", p);
    const int end = clock_field(arr[i], "end", p);
    for (int d : parse_days(arr[i], p)) out.push_back({d, start, end});
  }
  return out;
}

void throw_syntax_error(std::string_view text, std::size_t offset, const std::string& what) {
  std::size_t line = 1;
  std::size_t column = 1;
  const std::size_t limit = std::min(offset, text.size());
  for (std::size_t i = 0; i + 1 < limit; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  throw SyntaxError(what, line, column);
}

BuildingDescription parse_building(std::string_view text) {
  const json doc = parse_json_document(text);
  if (!doc.is_object()) throw ValidationError("<document>", "top level must be an object");

  BuildingDescription desc;
  desc.name = optional_string(doc, "name", "");

  const json& zones = get_array(require(doc, "zones", ""), "zones");
  for (std::size_t i = 0; i < zones.size(); ++i) {
    const std::string p = at("zones", i);
    Zone z;
    z.id = string_field(zones[i], "id", p);
    z.floor_area = number_field(zones[i], "floor_area", p);
    z.volume = number_field(zones[i], "volume", p);
    z.air_heat_capacity = number_field(zones[i], "air_heat_capacity", p);
    z.orientation = parse_orientation(string_field(zones[i], "orientation", p), at(p, "orientation"));
    z.comfort_schedule_id = string_field(zones[i], "comfort_schedule_id", p);
    z.usage = optional_string(zones[i], "usage", p);
    z.notes = optional_string(zones[i], "notes", p);
    desc.zones.push_back(std::move(z));
  }

  const json& elements = get_array(require(doc, "elements", ""), "elements");
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const std::string p = at("elements", i);
    ConstructionElement e;
    e.id = string_field(elements[i], "id", p);
    e.kind = parse_element_kind(string_field(elements[i], "kind", p), at(p, "kind"));
    e.area = number_field(elements[i], "area", p);
    const json& b = get_array(require(elements[i], "boundary", p), at(p, "boundary"));
    if (b.size() != 2) throw ValidationError(at(p, "boundary"), "expected exactly two node references");
    e.boundary = {get_string(b[0], at(at(p, "boundary"), 0)), get_string(b[1], at(at(p, "boundary"), 1))};
    const json& layers = get_array(require(elements[i], "layers", p), at(p, "layers"));
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const std::string lp = at(at(p, "layers"), l);
      e.layers.push_back({number_field(layers[l], "thermal_resistance", lp),
                          number_field(layers[l], "areal_heat_capacity", lp)});
    }
    if (auto it = elements[i].find("solar_transmittance"); it != elements[i].end()) {
      e.solar_transmittance = get_number(*it, at(p, "solar_transmittance"));
    }
    desc.elements.push_back(std::move(e));
  }

  const json& actuators = get_array(require(doc, "actuators", ""), "actuators");
  for (std::size_t i = 0; i < actuators.size(); ++i) {
    const std::string p = at("actuators", i);
    HvacActuator a;
    a.id = string_field(actuators[i], "id", p);
    a.kind = parse_actuator_kind(string_field(actuators[i], "kind", p), at(p, "kind"));
    a.zone_id = string_field(actuators[i], "zone_id", p);
    a.gain_coefficient = number_field(actuators[i], "gain_coefficient", p);
    a.electrical_conversion = number_field(actuators[i], "electrical_conversion", p);
    const json& ref = require(actuators[i], "reference_signal", p);
    // integer references index into the disturbance layout; resolved to names below
    a.reference_signal = ref.is_number_integer() ? "#" + std::to_string(ref.get<long long>())
                                                 : get_string(ref, at(p, "reference_signal"));
    if (auto it = actuators[i].find("input_bounds"); it != actuators[i].end()) {
      const ComfortBand b = parse_band(*it, at(p, "input_bounds"));
      a.input_bounds = {b.t_min, b.t_max};
    }
    if (auto it = actuators[i].find("design_delta_t"); it != actuators[i].end() && !it->is_null()) {
      a.design_delta_t = get_number(*it, at(p, "design_delta_t"));
    }
    desc.actuators.push_back(std::move(a));
  }

  const json& schedules = require(doc, "comfort_schedules", "");
  if (!schedules.is_object()) throw ValidationError("comfort_schedules", "expected an object keyed by schedule id");
  for (const auto& [id, s] : schedules.items()) {
    const std::string p = at("comfort_schedules", id);
    ComfortSchedule cs;
    cs.occupied = parse_band(require(s, "occupied", p), at(p, "occupied"));
    cs.unoccupied = parse_band(require(s, "unoccupied", p), at(p, "unoccupied"));
    if (auto it = s.find("occupancy_windows"); it != s.end()) {
      cs.occupancy_windows = parse_weekly_windows(*it, at(p, "occupancy_windows"));
    }
    desc.comfort_schedules.emplace(id, std::move(cs));
  }

  const json& channels = get_array(require(doc, "disturbances", ""), "disturbances");
  std::vector<std::pair<long long, DisturbanceChannel>> indexed;
  bool any_index = false;
  bool all_index = true;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const std::string p = at("disturbances", i);
    DisturbanceChannel c;
    c.name = string_field(channels[i], "name", p);
    c.kind = parse_channel_kind(string_field(channels[i], "kind", p), at(p, "kind"));
    if (c.kind == ChannelKind::SolarIrradiance) {
      c.orientation = parse_orientation(string_field(channels[i], "orientation", p), at(p, "orientation"));
    }
    if (c.kind == ChannelKind::InternalGain) c.zone_id = string_field(channels[i], "zone", p);
    if (c.kind == ChannelKind::SupplyTemperature) c.supply = string_field(channels[i], "supply", p);
    if (auto it = channels[i].find("nominal"); it != channels[i].end() && !it->is_null()) {
      c.nominal = get_number(*it, at(p, "nominal"));
    }
    long long index = static_cast<long long>(i);
    if (auto it = channels[i].find("index"); it != channels[i].end()) {
      if (!it->is_number_integer()) throw ValidationError(at(p, "index"), "expected an integer");
      index = it->get<long long>();
      any_index = true;
    } else {
      all_index = false;
    }
    indexed.emplace_back(index, std::move(c));
  }
  if (any_index) {
    if (!all_index) throw ValidationError("disturbances", "either every channel declares 'index' or none does");
    std::vector<bool> seen(indexed.size(), false);
    for (std::size_t i = 0; i < indexed.size(); ++i) {
      const long long idx = indexed[i].first;
      const std::string p = at(at("disturbances", i), "index");
      if (idx < 0 || idx >= static_cast<long long>(indexed.size())) {
        throw ValidationError(p, "indices must be dense and 0-based");
      }
      if (seen[static_cast<std::size_t>(idx)]) throw ValidationError(p, "index collides with another channel");
      seen[static_cast<std::size_t>(idx)] = true;
    }
    std::sort(indexed.begin(), indexed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  }
  for (auto& [idx, c] : indexed) desc.disturbances.push_back(std::move(c));

  // integer reference signals index into the layout
  for (std::size_t i = 0; i < desc.actuators.size(); ++i) {
    auto& ref = desc.actuators[i].reference_signal;
    if (!ref.empty() && ref[0] == '#') {
      const long long idx = std::stoll(ref.substr(1));
      if (idx < 0 || idx >= static_cast<long long>(desc.disturbances.size())) {
        throw UnresolvedReference(at(at("actuators", i), "reference_signal"), ref.substr(1));
      }
      ref = desc.disturbances[static_cast<std::size_t>(idx)].name;
    }
  }

  validate(desc);
  return desc;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

BuildingDescription load_building(const std::string& path) { return parse_building(read_text_file(path)); }

// ---------------------------------------------------------------------------
// validation

namespace {

bool is_boundary(std::string_view s) { return s == kAmbient || s == kGround; }

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

void validate(const BuildingDescription& desc) {
  if (desc.zones.empty()) throw ValidationError("zones", "at least one zone is required");

  std::set<std::string> ids;
  for (std::size_t i = 0; i < desc.zones.size(); ++i) {
    const Zone& z = desc.zones[i];
    const std::string p = at("zones", i);
    if (z.id.empty()) throw ValidationError(at(p, "id"), "must be non-empty");
    if (is_boundary(z.id)) throw ValidationError(at(p, "id"), "AMBIENT and GROUND are reserved");
    if (!ids.insert(z.id).second) throw ValidationError(at(p, "id"), "duplicate zone id '" + z.id + "'");
    if (!(z.floor_area > 0)) throw ValidationError(at(p, "floor_area"), "must be > 0");
    if (!(z.volume > 0)) throw ValidationError(at(p, "volume"), "must be > 0");
    if (!(z.air_heat_capacity > 0)) throw ValidationError(at(p, "air_heat_capacity"), "must be > 0");
    if (!desc.comfort_schedules.count(z.comfort_schedule_id)) {
      throw UnresolvedReference(at(p, "comfort_schedule_id"), z.comfort_schedule_id);
    }
  }

  for (const auto& [id, s] : desc.comfort_schedules) {
    const std::string p = at("comfort_schedules", id);
    if (!(s.occupied.t_min < s.occupied.t_max)) throw ValidationError(at(p, "occupied"), "T_min must be < T_max");
    if (!(s.unoccupied.t_min < s.unoccupied.t_max)) throw ValidationError(at(p, "unoccupied"), "T_min must be < T_max");
    if (!s.unoccupied.contains(s.occupied)) {
      throw ValidationError(at(p, "unoccupied"), "unoccupied band must contain the occupied band");
    }
    for (std::size_t i = 0; i < s.occupancy_windows.size(); ++i) {
      const auto& w = s.occupancy_windows[i];
      if (!(w.start_min < w.end_min)) throw ValidationError(at(at(p, "occupancy_windows"), i), "start must be before end");
      for (std::size_t j = 0; j < i; ++j) {
        if (w.overlaps(s.occupancy_windows[j])) {
          throw ValidationError(at(at(p, "occupancy_windows"), i), "overlaps another window on the same day");
        }
      }
    }
  }

  std::set<std::string> channel_names;
  int ambient_count = 0;
  int ground_count = 0;
  std::set<Orientation> solar_orientations;
  std::set<std::string> gain_zones;
  for (std::size_t i = 0; i < desc.disturbances.size(); ++i) {
    const auto& c = desc.disturbances[i];
    const std::string p = at("disturbances", i);
    if (c.name.empty()) throw ValidationError(at(p, "name"), "must be non-empty");
    if (!channel_names.insert(c.name).second) throw ValidationError(at(p, "name"), "duplicate channel '" + c.name + "'");
    switch (c.kind) {
      case ChannelKind::AmbientTemperature: ++ambient_count; break;
      case ChannelKind::GroundTemperature: ++ground_count; break;
      case ChannelKind::SolarIrradiance:
        if (!c.orientation || *c.orientation == Orientation::Core) {
          throw ValidationError(at(p, "orientation"), "solar channels need one of N, S, E, W");
        }
        if (!solar_orientations.insert(*c.orientation).second) {
          throw ValidationError(at(p, "orientation"), "only one irradiance channel per orientation");
        }
        break;
      case ChannelKind::InternalGain:
        if (!desc.find_zone(c.zone_id)) throw UnresolvedReference(at(p, "zone"), c.zone_id);
        if (!gain_zones.insert(c.zone_id).second) throw ValidationError(at(p, "zone"), "only one gain channel per zone");
        break;
      case ChannelKind::SupplyTemperature:
        if (c.supply != "hot_water" && c.supply != "chilled_water" && c.supply != "supply_air") {
          throw ValidationError(at(p, "supply"), "must be one of hot_water, chilled_water, supply_air");
        }
        break;
    }
  }
  if (ambient_count != 1) throw ValidationError("disturbances", "exactly one ambient_temperature channel is required");
  if (ground_count > 1) throw ValidationError("disturbances", "at most one ground_temperature channel is allowed");

  std::set<std::string> element_ids;
  bool uses_ground = false;
  for (std::size_t i = 0; i < desc.elements.size(); ++i) {
    const auto& e = desc.elements[i];
    const std::string p = at("elements", i);
    if (e.id.empty()) throw ValidationError(at(p, "id"), "must be non-empty");
    if (!element_ids.insert(e.id).second) throw ValidationError(at(p, "id"), "duplicate element id '" + e.id + "'");
    if (!(e.area > 0)) throw ValidationError(at(p, "area"), "must be > 0");
    for (std::size_t b = 0; b < 2; ++b) {
      if (!is_boundary(e.boundary[b]) && !desc.find_zone(e.boundary[b])) {
        throw UnresolvedReference(at(at(p, "boundary"), b), e.boundary[b]);
      }
      if (e.boundary[b] == kGround) uses_ground = true;
    }
    if (e.boundary[0] == e.boundary[1]) throw ValidationError(at(p, "boundary"), "endpoints must be distinct");
    if (is_boundary(e.boundary[0]) && is_boundary(e.boundary[1])) {
      throw ValidationError(at(p, "boundary"), "at least one endpoint must be a zone");
    }
    if (e.layers.empty()) throw ValidationError(at(p, "layers"), "at least one layer is required");
    for (std::size_t l = 0; l < e.layers.size(); ++l) {
      const std::string lp = at(at(p, "layers"), l);
      if (!(e.layers[l].thermal_resistance > 0)) throw ValidationError(at(lp, "thermal_resistance"), "must be > 0");
      if (!(e.layers[l].areal_heat_capacity >= 0)) throw ValidationError(at(lp, "areal_heat_capacity"), "must be >= 0");
    }
    if (!(e.solar_transmittance >= 0 && e.solar_transmittance <= 1)) {
      throw ValidationError(at(p, "solar_transmittance"), "must lie in [0, 1]");
    }
    if (e.kind == ElementKind::Window) {
      if (e.layers.size() != 1 || e.layers[0].massive()) {
        throw ValidationError(at(p, "layers"), "windows have exactly one layer with zero heat capacity");
      }
    } else if (e.solar_transmittance != 0) {
      throw ValidationError(at(p, "solar_transmittance"), "only windows transmit solar radiation");
    }
    if (e.solar_transmittance > 0) {
      const bool b0 = e.boundary[0] == kAmbient;
      const bool b1 = e.boundary[1] == kAmbient;
      if (b0 == b1) throw ValidationError(at(p, "boundary"), "a transmitting window must separate a zone from AMBIENT");
      const Zone& z = desc.zones[*desc.find_zone(e.boundary[b0 ? 1 : 0])];
      if (z.orientation == Orientation::Core) {
        throw ValidationError(at(p, "solar_transmittance"), "zone '" + z.id + "' has core orientation and receives no sun");
      }
      if (!desc.solar_channel(z.orientation)) {
        throw ValidationError("disturbances", "no solar_irradiance channel for orientation " +
                                                  std::string(to_string(z.orientation)) + " (needed by " + e.id + ")");
      }
    }
  }
  if (uses_ground && ground_count != 1) {
    throw ValidationError("disturbances", "a ground_temperature channel is required by GROUND boundaries");
  }

  std::set<std::string> actuator_ids;
  for (std::size_t i = 0; i < desc.actuators.size(); ++i) {
    const auto& a = desc.actuators[i];
    const std::string p = at("actuators", i);
    if (a.id.empty()) throw ValidationError(at(p, "id"), "must be non-empty");
    if (!actuator_ids.insert(a.id).second) throw ValidationError(at(p, "id"), "duplicate actuator id '" + a.id + "'");
    if (!desc.find_zone(a.zone_id)) throw UnresolvedReference(at(p, "zone_id"), a.zone_id);
    if (!(a.gain_coefficient > 0)) throw ValidationError(at(p, "gain_coefficient"), "must be > 0");
    if (!(a.electrical_conversion > 0)) throw ValidationError(at(p, "electrical_conversion"), "must be > 0");
    const auto ch = desc.find_channel(a.reference_signal);
    if (!ch) throw UnresolvedReference(at(p, "reference_signal"), a.reference_signal);
    const auto kind = desc.disturbances[*ch].kind;
    if (kind == ChannelKind::SolarIrradiance || kind == ChannelKind::InternalGain) {
      throw ValidationError(at(p, "reference_signal"), "must name a temperature channel");
    }
    if (!(0 <= a.input_bounds[0] && a.input_bounds[0] <= a.input_bounds[1] && a.input_bounds[1] <= 1)) {
      throw ValidationError(at(p, "input_bounds"), "must satisfy 0 <= lower <= upper <= 1");
    }
    if (a.design_delta_t && !(*a.design_delta_t > 0)) throw ValidationError(at(p, "design_delta_t"), "must be > 0");
    if (!a.design_delta_t && !desc.disturbances[*ch].effective_nominal()) {
      throw ValidationError(at(p, "design_delta_t"), "required when the reference channel has no nominal value");
    }
  }

  // Zones plus the exterior (AMBIENT and GROUND merged) must form one connected graph.
  const std::size_t exterior = desc.zones.size();
  DisjointSets sets(desc.zones.size() + 1);
  auto vertex = [&](const std::string& ref) { return is_boundary(ref) ? exterior : *desc.find_zone(ref); };
  for (const auto& e : desc.elements) sets.unite(vertex(e.boundary[0]), vertex(e.boundary[1]));
  std::vector<std::string> isolated;
  for (std::size_t i = 0; i < desc.zones.size(); ++i) {
    if (sets.find(i) != sets.find(exterior)) isolated.push_back(desc.zones[i].id);
  }
  if (!isolated.empty()) {
    std::string names;
    for (const auto& n : isolated) names += (names.empty() ? "" : ", ") + n;
    throw DisconnectedNetwork("zones {" + names + "} have no thermal path to AMBIENT/GROUND");
  }
}

// ---------------------------------------------------------------------------
// serialization

json to_json(const BuildingDescription& desc) {
  json doc = json::object();
  if (!desc.name.empty()) doc["name"] = desc.name;

  json zones = json::array();
  for (const auto& z : desc.zones) {
    json jz = {{"id", z.id},
               {"floor_area", z.floor_area},
               {"volume", z.volume},
               {"air_heat_capacity", z.air_heat_capacity},
               {"orientation", to_string(z.orientation)},
               {"comfort_schedule_id", z.comfort_schedule_id}};
    if (!z.usage.empty()) jz["usage"] = z.usage;
    if (!z.notes.empty()) jz["notes"] = z.notes;
    zones.push_back(std::move(jz));
  }
  doc["zones"] = std::move(zones);

  json elements = json::array();
  for (const auto& e : desc.elements) {
    json layers = json::array();
    for (const auto& l : e.layers) {
      layers.push_back({{"thermal_resistance", l.thermal_resistance}, {"areal_heat_capacity", l.areal_heat_capacity}});
    }
    elements.push_back({{"id", e.id},
                        {"kind", to_string(e.kind)},
                        {"area", e.area},
                        {"boundary", {e.boundary[0], e.boundary[1]}},
                        {"layers", std::move(layers)},
                        {"solar_transmittance", e.solar_transmittance}});
  }
  doc["elements"] = std::move(elements);

  json actuators = json::array();
  for (const auto& a : desc.actuators) {
    json ja = {{"id", a.id},
               {"kind", to_string(a.kind)},
               {"zone_id", a.zone_id},
               {"gain_coefficient", a.gain_coefficient},
               {"reference_signal", a.reference_signal},
               {"input_bounds", {a.input_bounds[0], a.input_bounds[1]}},
               {"electrical_conversion", a.electrical_conversion}};
    if (a.design_delta_t) ja["design_delta_t"] = *a.design_delta_t;
    actuators.push_back(std::move(ja));
  }
  doc["actuators"] = std::move(actuators);

  json schedules = json::object();
  for (const auto& [id, s] : desc.comfort_schedules) {
    json windows = json::array();
    for (const auto& w : s.occupancy_windows) {
      windows.push_back({{"day", weekday_name(w.day)}, {"start", format_clock(w.start_min)}, {"end", format_clock(w.end_min)}});
    }
    schedules[id] = {{"occupied", {s.occupied.t_min, s.occupied.t_max}},
                     {"unoccupied", {s.unoccupied.t_min, s.unoccupied.t_max}},
                     {"occupancy_windows", std::move(windows)}};
  }
  doc["comfort_schedules"] = std::move(schedules);

  json channels = json::array();
  for (std::size_t i = 0; i < desc.disturbances.size(); ++i) {
    const auto& c = desc.disturbances[i];
    json jc = {{"index", i}, {"name", c.name}, {"kind", to_string(c.kind)}};
    if (c.orientation) jc["orientation"] = to_string(*c.orientation);
    if (!c.zone_id.empty()) jc["zone"] = c.zone_id;
    if (!c.supply.empty()) jc["supply"] = c.supply;
    if (c.nominal) jc["nominal"] = *c.nominal;
    channels.push_back(std::move(jc));
  }
  doc["disturbances"] = std::move(channels);
  return doc;
}

std::string serialize_building(const BuildingDescription& desc) { return to_json(desc).dump(2); }

}  // namespace thermpc
