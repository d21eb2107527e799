#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "thermpc/building.hpp"
#include "thermpc/statespace.hpp"
#include "thermpc/timebase.hpp"

namespace thermpc {

struct WeatherRecord {
  std::int64_t timestamp = 0;  // UTC seconds
  double ambient_temp = 0;     // degC
  std::array<double, 4> irradiance{};  // W/m2 on N, S, E, W facades

  double irradiance_on(Orientation o) const;
};

/// Header `timestamp,ambient_temp,irr_n,irr_s,irr_e,irr_w`; timestamps strictly increasing.
std::vector<WeatherRecord> load_weather_csv(std::string_view text);
std::vector<WeatherRecord> load_weather_file(const std::string& path);

/// Linear interpolation between bracketing records; throws CoverageError outside the span.
WeatherRecord interpolate_weather(const std::vector<WeatherRecord>& records, std::int64_t t);

struct OccupancyEntry {
  WeeklyInterval interval;
  double heat_gain = 0;  // W
  friend bool operator==(const OccupancyEntry&, const OccupancyEntry&) = default;
};

/// Weekly occupancy heat gains per zone, in local time.
struct OccupancySchedule {
  std::map<std::string, std::vector<OccupancyEntry>> zones;

  double gain_at(const std::string& zone_id, const LocalTime& t) const;
  /// Non-overlapping intervals per zone and day, non-negative gains.
  void validate() const;
};

/// Values for channels that are not weather: supply temperatures and the ground temperature.
/// Channels without an entry use their nominal value.
struct SupplySchedule {
  struct Entry {
    WeeklyInterval interval;
    double value = 0;
  };
  struct Channel {
    double default_value = 0;
    std::vector<Entry> entries;
  };
  std::map<std::string, Channel> channels;

  double value_at(const DisturbanceChannel& channel, const LocalTime& t) const;
};

/// Time-indexed disturbance vectors v[k], one row per control step.
struct DisturbanceSeries {
  std::vector<std::string> layout;
  Matrix values;  // T x n_v
  std::int64_t t0 = 0;
  std::int64_t ts = 600;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  Vector row(std::size_t k) const { return values.row(static_cast<Eigen::Index>(k)).transpose(); }
  void validate() const;
};

DisturbanceSeries build_disturbance_series(const BuildingDescription& desc, const std::vector<WeatherRecord>& weather,
                                           const OccupancySchedule& occupancy, const SupplySchedule& supply,
                                           const TimeBase& time, std::size_t steps);

/// Source of predicted disturbance windows for the controller.
class Forecaster {
 public:
  virtual ~Forecaster() = default;
  /// Rows k .. k+N-1 of the predicted disturbance trajectory (N x n_v).
  virtual Matrix forecast(std::size_t k, std::size_t horizon) const = 0;
};

enum class ForecastMode { Perfect, Persistence };

/// Perfect mode replays the true series. Persistence holds row k over the window, except
/// internal-gain channels, which follow the (known) occupancy schedule.
class ForecastProvider final : public Forecaster {
 public:
  ForecastProvider(ForecastMode mode, std::shared_ptr<const DisturbanceSeries> source,
                   std::vector<bool> schedule_known_channels = {});
  static ForecastProvider for_building(ForecastMode mode, std::shared_ptr<const DisturbanceSeries> source,
                                       const BuildingDescription& desc);

  Matrix forecast(std::size_t k, std::size_t horizon) const override;
  ForecastMode mode() const { return mode_; }
  const DisturbanceSeries& source() const { return *source_; }

 private:
  ForecastMode mode_;
  std::shared_ptr<const DisturbanceSeries> source_;
  std::vector<bool> schedule_known_;
};

}  // namespace thermpc
