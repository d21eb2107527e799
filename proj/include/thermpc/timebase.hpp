#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace thermpc {

/// Day of week, Monday = 0.
int parse_weekday(std::string_view name);
std::string_view weekday_name(int day);

/// "HH:MM" -> minutes after midnight; "24:00" is accepted as 1440.
int parse_clock(std::string_view hhmm);
std::string format_clock(int minutes);

/// Half-open interval [start, end) of local clock time on one weekday.
struct WeeklyInterval {
  int day = 0;
  int start_min = 0;
  int end_min = 0;

  bool contains(int weekday, double minute_of_day) const {
    return weekday == day && minute_of_day >= start_min && minute_of_day < end_min;
  }
  bool overlaps(const WeeklyInterval& other) const {
    return day == other.day && start_min < other.end_min && other.start_min < end_min;
  }
  friend bool operator==(const WeeklyInterval&, const WeeklyInterval&) = default;
};

struct LocalTime {
  int weekday = 0;           // Monday = 0
  double minute_of_day = 0;  // [0, 1440)
};

/// Maps control-step indices to UTC seconds and to local wall-clock time.
struct TimeBase {
  std::int64_t t0 = 0;         // UTC seconds of step 0
  std::int64_t ts = 600;       // sampling time, seconds
  double utc_offset_hours = 0;  // local = UTC + offset

  std::int64_t time_of(std::int64_t step) const { return t0 + step * ts; }
  LocalTime local(std::int64_t utc_seconds) const;
  LocalTime local_at_step(std::int64_t step) const { return local(time_of(step)); }
};

/// UTC seconds <-> "YYYY-MM-DDTHH:MM:SSZ". Parsing also accepts "+HH:MM"/"-HH:MM" offsets.
std::string format_iso8601(std::int64_t utc_seconds);
std::int64_t parse_iso8601(std::string_view text);

}  // namespace thermpc
