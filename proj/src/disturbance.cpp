#include "thermpc/disturbance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "thermpc/errors.hpp"

namespace thermpc {

double WeatherRecord::irradiance_on(Orientation o) const {
  switch (o) {
    case Orientation::N: return irradiance[0];
    case Orientation::S: return irradiance[1];
    case Orientation::E: return irradiance[2];
    case Orientation::W: return irradiance[3];
    case Orientation::Core: return 0.0;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

std::vector<WeatherRecord> load_weather_csv(std::string_view text) {
  static constexpr std::array<std::string_view, 6> kHeader = {"timestamp", "ambient_temp", "irr_n", "irr_s", "irr_e", "irr_w"};
  std::vector<WeatherRecord> records;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    const std::string_view line = trim(text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos));
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (!header_seen) {
      if (fields.size() != kHeader.size() || !std::equal(fields.begin(), fields.end(), kHeader.begin())) {
        throw InputError("weather CSV line " + std::to_string(line_no) +
                         ": expected header 'timestamp,ambient_temp,irr_n,irr_s,irr_e,irr_w'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != kHeader.size()) {
      throw InputError("weather CSV line " + std::to_string(line_no) + ": expected 6 fields, found " +
                       std::to_string(fields.size()));
    }
    double values[6];
    for (std::size_t i = 0; i < 6; ++i) {
      if (!parse_double(fields[i], values[i])) {
        throw InputError("weather CSV line " + std::to_string(line_no) + ": field '" + std::string(kHeader[i]) +
                         "' is not a number ('" + std::string(fields[i]) + "')");
      }
    }
    if (values[0] != std::floor(values[0])) {
      throw InputError("weather CSV line " + std::to_string(line_no) + ": timestamp must be whole seconds");
    }
    WeatherRecord r;
    r.timestamp = static_cast<std::int64_t>(values[0]);
    r.ambient_temp = values[1];
    for (std::size_t i = 0; i < 4; ++i) {
      if (values[2 + i] < 0) {
        throw InputError("weather CSV line " + std::to_string(line_no) + ": irradiance must be >= 0");
      }
      r.irradiance[i] = values[2 + i];
    }
    if (!records.empty() && r.timestamp <= records.back().timestamp) {
      throw InputError("weather CSV line " + std::to_string(line_no) + ": non-monotonic timestamp " +
                       std::to_string(r.timestamp) + " (previous " + std::to_string(records.back().timestamp) + ")");
    }
    records.push_back(r);
  }
  if (!header_seen) throw InputError("weather CSV: missing header");
  return records;
}

std::vector<WeatherRecord> load_weather_file(const std::string& path) { return load_weather_csv(read_text_file(path)); }

WeatherRecord interpolate_weather(const std::vector<WeatherRecord>& records, std::int64_t t) {
  if (records.empty() || t < records.front().timestamp || t > records.back().timestamp) {
    throw CoverageError("weather does not cover t = " + format_iso8601(t));
  }
  auto hi = std::lower_bound(records.begin(), records.end(), t,
                             [](const WeatherRecord& r, std::int64_t value) { return r.timestamp < value; });
  if (hi->timestamp == t) return *hi;
  auto lo = hi - 1;
  const double w = static_cast<double>(t - lo->timestamp) / static_cast<double>(hi->timestamp - lo->timestamp);
  WeatherRecord out;
  out.timestamp = t;
  out.ambient_temp = lo->ambient_temp + w * (hi->ambient_temp - lo->ambient_temp);
  for (std::size_t i = 0; i < 4; ++i) out.irradiance[i] = lo->irradiance[i] + w * (hi->irradiance[i] - lo->irradiance[i]);
  return out;
}

// ---------------------------------------------------------------------------
// schedules

double OccupancySchedule::gain_at(const std::string& zone_id, const LocalTime& t) const {
  auto it = zones.find(zone_id);
  if (it == zones.end()) return 0.0;
  for (const auto& e : it->second) {
    if (e.interval.contains(t.weekday, t.minute_of_day)) return e.heat_gain;
  }
  return 0.0;
}

void OccupancySchedule::validate() const {
  for (const auto& [zone, entries] : zones) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const std::string p = "occupancy." + zone + "[" + std::to_string(i) + "]";
      if (!(entries[i].heat_gain >= 0)) throw ValidationError(p + ".heat_gain", "must be >= 0");
      if (!(entries[i].interval.start_min < entries[i].interval.end_min)) {
        throw ValidationError(p, "start must be before end");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (entries[i].interval.overlaps(entries[j].interval)) {
          throw ValidationError(p, "overlaps another interval of the same zone and day");
        }
      }
    }
  }
}

double SupplySchedule::value_at(const DisturbanceChannel& channel, const LocalTime& t) const {
  auto it = channels.find(channel.name);
  if (it == channels.end()) {
    const auto nominal = channel.effective_nominal();
    if (!nominal) throw ValidationError("supply." + channel.name, "no value configured and no nominal value declared");
    return *nominal;
  }
  for (const auto& e : it->second.entries) {
    if (e.interval.contains(t.weekday, t.minute_of_day)) return e.value;
  }
  return it->second.default_value;
}

// ---------------------------------------------------------------------------
// series

void DisturbanceSeries::validate() const {
  if (values.cols() != static_cast<Eigen::Index>(layout.size())) {
    throw DimensionError("disturbance series has " + std::to_string(values.cols()) + " columns but the layout has " +
                         std::to_string(layout.size()));
  }
  if (!values.allFinite()) throw NumericalError("disturbance series contains non-finite entries");
}

DisturbanceSeries build_disturbance_series(const BuildingDescription& desc, const std::vector<WeatherRecord>& weather,
                                           const OccupancySchedule& occupancy, const SupplySchedule& supply,
                                           const TimeBase& time, std::size_t steps) {
  DisturbanceSeries series;
  series.t0 = time.t0;
  series.ts = time.ts;
  for (const auto& c : desc.disturbances) series.layout.push_back(c.name);
  series.values.resize(static_cast<Eigen::Index>(steps), static_cast<Eigen::Index>(desc.disturbances.size()));
  if (steps == 0) return series;

  const std::int64_t first = time.time_of(0);
  const std::int64_t last = time.time_of(static_cast<std::int64_t>(steps) - 1);
  if (weather.empty() || first < weather.front().timestamp || last > weather.back().timestamp) {
    const std::string have = weather.empty() ? std::string("nothing")
                                             : "[" + format_iso8601(weather.front().timestamp) + ", " +
                                                   format_iso8601(weather.back().timestamp) + "]";
    std::string missing;
    if (weather.empty()) {
      missing = "[" + format_iso8601(first) + ", " + format_iso8601(last) + "]";
    } else if (first < weather.front().timestamp) {
      missing = "[" + format_iso8601(first) + ", " + format_iso8601(std::min(last, weather.front().timestamp)) + ")";
    } else {
      missing = "(" + format_iso8601(std::max(first, weather.back().timestamp)) + ", " + format_iso8601(last) + "]";
    }
    throw CoverageError("weather covers " + have + "; missing interval " + missing);
  }

  for (std::size_t k = 0; k < steps; ++k) {
    const std::int64_t t = time.time_of(static_cast<std::int64_t>(k));
    const WeatherRecord w = interpolate_weather(weather, t);
    const LocalTime local = time.local(t);
    for (std::size_t c = 0; c < desc.disturbances.size(); ++c) {
      const auto& ch = desc.disturbances[c];
      double value = 0;
      switch (ch.kind) {
        case ChannelKind::AmbientTemperature: value = w.ambient_temp; break;
        case ChannelKind::SolarIrradiance: value = w.irradiance_on(*ch.orientation); break;
        case ChannelKind::InternalGain: value = occupancy.gain_at(ch.zone_id, local); break;
        case ChannelKind::GroundTemperature:
        case ChannelKind::SupplyTemperature: value = supply.value_at(ch, local); break;
      }
      series.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = value;
    }
  }
  series.validate();
  return series;
}

// ---------------------------------------------------------------------------
// forecasts

ForecastProvider::ForecastProvider(ForecastMode mode, std::shared_ptr<const DisturbanceSeries> source,
                                   std::vector<bool> schedule_known_channels)
    : mode_(mode), source_(std::move(source)), schedule_known_(std::move(schedule_known_channels)) {
  if (!source_) throw InputError("forecast provider needs a source series");
  if (schedule_known_.empty()) schedule_known_.assign(source_->layout.size(), false);
  if (schedule_known_.size() != source_->layout.size()) throw DimensionError("schedule-known mask does not match the layout");
}

ForecastProvider ForecastProvider::for_building(ForecastMode mode, std::shared_ptr<const DisturbanceSeries> source,
                                                const BuildingDescription& desc) {
  std::vector<bool> known;
  for (const auto& c : desc.disturbances) known.push_back(c.kind == ChannelKind::InternalGain);
  return ForecastProvider(mode, std::move(source), std::move(known));
}

Matrix ForecastProvider::forecast(std::size_t k, std::size_t horizon) const {
  if (horizon < 1) throw InputError("forecast horizon must be >= 1");
  const std::size_t available = source_->rows();
  const bool needs_window = mode_ == ForecastMode::Perfect ||
                            std::find(schedule_known_.begin(), schedule_known_.end(), true) != schedule_known_.end();
  if (k >= available || (needs_window && k + horizon > available)) {
    throw CoverageError("forecast window [" + std::to_string(k) + ", " + std::to_string(k + horizon) +
                        ") exceeds the " + std::to_string(available) + " available disturbance rows");
  }
  const auto N = static_cast<Eigen::Index>(horizon);
  const auto row = static_cast<Eigen::Index>(k);
  if (mode_ == ForecastMode::Perfect) return source_->values.middleRows(row, N);

  Matrix out = source_->values.row(row).replicate(N, 1);
  for (std::size_t c = 0; c < schedule_known_.size(); ++c) {
    if (schedule_known_[c]) {
      const auto col = static_cast<Eigen::Index>(c);
      out.col(col) = source_->values.col(col).segment(row, N);
    }
  }
  return out;
}

}  // namespace thermpc
