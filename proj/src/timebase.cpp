#include "thermpc/timebase.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cctype>
#include <cstdio>

#include "thermpc/errors.hpp"

namespace thermpc {
namespace {

constexpr std::array<std::string_view, 7> kDays = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};

int to_int(std::string_view s, std::string_view context) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw InputError("invalid number '" + std::string(s) + "' in " + std::string(context));
  }
  return value;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

int parse_weekday(std::string_view name) {
  std::string lower;
  for (char c : name.substr(0, 3)) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (std::size_t i = 0; i < kDays.size(); ++i) {
    if (kDays[i] == lower) return static_cast<int>(i);
  }
  throw InputError("unknown weekday '" + std::string(name) + "'");
}

std::string_view weekday_name(int day) { return kDays.at(static_cast<std::size_t>(day)); }

int parse_clock(std::string_view hhmm) {
  const auto colon = hhmm.find(':');
  if (colon == std::string_view::npos) throw InputError("clock time '" + std::string(hhmm) + "' is not HH:MM");
  const int h = to_int(hhmm.substr(0, colon), "clock time");
  const int m = to_int(hhmm.substr(colon + 1), "clock time");
  if (h < 0 || m < 0 || m >= 60 || h > 24 || (h == 24 && m != 0)) {
    throw InputError("clock time '" + std::string(hhmm) + "' out of range");
  }
  return h * 60 + m;
}

std::string format_clock(int minutes) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d:%02d", minutes / 60, minutes % 60);
  return buf;
}

LocalTime TimeBase::local(std::int64_t utc_seconds) const {
  const double shifted = static_cast<double>(utc_seconds) + utc_offset_hours * 3600.0;
  const auto whole = static_cast<std::int64_t>(std::floor(shifted));
  const std::int64_t days = floor_div(whole, 86400);
  const double sec_of_day = shifted - static_cast<double>(days) * 86400.0;
  // 1970-01-01 was a Thursday (index 3).
  const int weekday = static_cast<int>(((days % 7) + 7 + 3) % 7);
  return {weekday, sec_of_day / 60.0};
}

std::string format_iso8601(std::int64_t utc_seconds) {
  using namespace std::chrono;
  const std::int64_t days = floor_div(utc_seconds, 86400);
  const std::int64_t rem = utc_seconds - days * 86400;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3600), static_cast<int>((rem / 60) % 60), static_cast<int>(rem % 60));
  return buf;
}

std::int64_t parse_iso8601(std::string_view text) {
  using namespace std::chrono;
  // YYYY-MM-DDTHH:MM:SS followed by Z or +HH:MM / -HH:MM
  if (text.size() < 20 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':' || text[16] != ':') {
    throw InputError("timestamp '" + std::string(text) + "' is not ISO-8601 (YYYY-MM-DDTHH:MM:SSZ)");
  }
  const int y = to_int(text.substr(0, 4), "timestamp");
  const int mo = to_int(text.substr(5, 2), "timestamp");
  const int d = to_int(text.substr(8, 2), "timestamp");
  const int hh = to_int(text.substr(11, 2), "timestamp");
  const int mm = to_int(text.substr(14, 2), "timestamp");
  const int ss = to_int(text.substr(17, 2), "timestamp");
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) {
    throw InputError("timestamp '" + std::string(text) + "' is not a valid date/time");
  }
  std::int64_t offset = 0;
  const std::string_view zone = text.substr(19);
  if (zone == "Z") {
    offset = 0;
  } else if (zone.size() == 6 && (zone[0] == '+' || zone[0] == '-') && zone[3] == ':') {
    offset = (to_int(zone.substr(1, 2), "timestamp offset") * 3600 + to_int(zone.substr(4, 2), "timestamp offset") * 60) *
             (zone[0] == '-' ? -1 : 1);
  } else {
    throw InputError("timestamp '" + std::string(text) + "' has an unsupported zone designator");
  }
  const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  return days * 86400 + hh * 3600 + mm * 60 + ss - offset;
}

}  // namespace thermpc
