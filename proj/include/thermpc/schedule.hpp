#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "json.hpp"
#include "thermpc/building.hpp"
#include "thermpc/timebase.hpp"

namespace thermpc {

/// Energy price, currency per kWh: flat, or a daily peak window (local time).
struct PriceSchedule {
  enum class Kind { Flat, TimeOfUse };
  Kind kind = Kind::Flat;
  double flat = 0.2;
  double peak = 0.3;
  double off_peak = 0.1;
  int peak_start_min = 8 * 60;
  int peak_end_min = 20 * 60;
  std::vector<int> peak_days{0, 1, 2, 3, 4, 5, 6};

  double at(const LocalTime& t) const;
  double max_price() const { return kind == Kind::Flat ? flat : std::max(peak, off_peak); }
  void validate() const;

  static PriceSchedule from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Static actuator data a controller needs.
struct ActuatorTable {
  std::vector<std::string> ids;
  std::vector<ActuatorKind> kinds;
  std::vector<std::size_t> zones;
  std::vector<std::array<double, 2>> bounds;
  std::vector<double> rated_kw;

  std::size_t size() const { return ids.size(); }
  double mean_kw() const;
  static ActuatorTable from_building(const BuildingDescription& desc);
};

/// Time-dependent, schedule-known information: comfort bands, occupancy and prices per control step.
struct ControlSchedule {
  TimeBase time;
  PriceSchedule price;
  std::vector<ComfortSchedule> comfort;  // per zone

  ComfortBand band(std::size_t zone, std::int64_t step) const;
  bool occupied(std::size_t zone, std::int64_t step) const;
  double price_at(std::int64_t step) const { return price.at(time.local_at_step(step)); }

  static ControlSchedule for_building(const BuildingDescription& desc, const TimeBase& time, PriceSchedule price);
};

/// Input bounds at `step`: declared bounds, with ventilation raised to `ventilation_min` while
/// its zone is occupied (never above the declared upper bound).
std::array<double, 2> input_bounds_at(const ActuatorTable& act, const ControlSchedule& sched, std::size_t i,
                                      std::int64_t step, double ventilation_min);

}  // namespace thermpc
