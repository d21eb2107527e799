#include "thermpc/schedule.hpp"

#include <cmath>

#include "json_fields.hpp"
#include "thermpc/errors.hpp"

namespace thermpc {

using nlohmann::json;
using namespace fields;

double PriceSchedule::at(const LocalTime& t) const {
  if (kind == Kind::Flat) return flat;
  const bool day = std::find(peak_days.begin(), peak_days.end(), t.weekday) != peak_days.end();
  return day && t.minute_of_day >= peak_start_min && t.minute_of_day < peak_end_min ? peak : off_peak;
}

void PriceSchedule::validate() const {
  const auto check = [](double v, const char* field) {
    if (!std::isfinite(v) || v < 0) throw ValidationError(std::string("price.") + field, "must be finite and >= 0");
  };
  if (kind == Kind::Flat) {
    check(flat, "price");
    return;
  }
  check(peak, "peak");
  check(off_peak, "off_peak");
  if (!(peak_start_min < peak_end_min)) throw ValidationError("price.peak_start", "must be before peak_end");
}

PriceSchedule PriceSchedule::from_json(const json& j) {
  PriceSchedule p;
  const std::string type = string_field(j, "type", "price");
  if (type == "flat") {
    p.kind = Kind::Flat;
    p.flat = number_field(j, "price", "price");
  } else if (type == "tou") {
    p.kind = Kind::TimeOfUse;
    p.peak = number_field(j, "peak", "price");
    p.off_peak = number_field(j, "off_peak", "price");
    if (j.contains("peak_start")) p.peak_start_min = clock_field(j, "peak_start", "price");
    if (j.contains("peak_end")) p.peak_end_min = clock_field(j, "peak_end", "price");
    if (j.contains("days")) p.peak_days = parse_days(j, "price");
  } else {
    throw ValidationError("price.type", "must be 'flat' or 'tou'");
  }
  p.validate();
  return p;
}

json PriceSchedule::to_json() const {
  if (kind == Kind::Flat) return {{"type", "flat"}, {"price", flat}};
  json days = json::array();
  for (int d : peak_days) days.push_back(std::string(weekday_name(d)));
  return {{"type", "tou"},
          {"peak", peak},
          {"off_peak", off_peak},
          {"peak_start", format_clock(peak_start_min)},
          {"peak_end", format_clock(peak_end_min)},
          {"days", days}};
}

double ActuatorTable::mean_kw() const {
  if (rated_kw.empty()) return 0.0;
  double sum = 0;
  for (double kw : rated_kw) sum += kw;
  return sum / static_cast<double>(rated_kw.size());
}

ActuatorTable ActuatorTable::from_building(const BuildingDescription& desc) {
  ActuatorTable t;
  for (std::size_t i = 0; i < desc.actuators.size(); ++i) {
    const auto& a = desc.actuators[i];
    t.ids.push_back(a.id);
    t.kinds.push_back(a.kind);
    t.zones.push_back(desc.zone_index(a.zone_id));
    t.bounds.push_back(a.input_bounds);
    t.rated_kw.push_back(desc.rated_electrical_kw(i));
  }
  return t;
}

ComfortBand ControlSchedule::band(std::size_t zone, std::int64_t step) const {
  return comfort.at(zone).band_at(time.local_at_step(step));
}

bool ControlSchedule::occupied(std::size_t zone, std::int64_t step) const {
  return comfort.at(zone).occupied_at(time.local_at_step(step));
}

ControlSchedule ControlSchedule::for_building(const BuildingDescription& desc, const TimeBase& time, PriceSchedule price) {
  ControlSchedule s;
  s.time = time;
  s.price = std::move(price);
  for (std::size_t z = 0; z < desc.zones.size(); ++z) s.comfort.push_back(desc.comfort_for(z));
  return s;
}

std::array<double, 2> input_bounds_at(const ActuatorTable& act, const ControlSchedule& sched, std::size_t i,
                                      std::int64_t step, double ventilation_min) {
  auto b = act.bounds.at(i);
  if (act.kinds[i] == ActuatorKind::AhuVent && sched.occupied(act.zones[i], step)) {
    b[0] = std::min(std::max(b[0], ventilation_min), b[1]);
  }
  return b;
}

}  // namespace thermpc
