#include <memory>

#include "doctest.h"
#include "support.hpp"
#include "thermpc/building.hpp"
#include "thermpc/disturbance.hpp"
#include "thermpc/errors.hpp"
#include "thermpc/timebase.hpp"

using namespace thermpc;
namespace ts = testing_support;

namespace {

const char* kHeader = "timestamp,ambient_temp,irr_n,irr_s,irr_e,irr_w\n";

BuildingDescription two_zone_building() {
  auto j = ts::minimal_building();
  j["zones"].push_back({{"id", "Z1"}, {"floor_area", 10.0}, {"volume", 30.0}, {"air_heat_capacity", 1e5},
                        {"orientation", "N"}, {"comfort_schedule_id", "room"}});
  j["elements"].push_back({{"id", "W2"}, {"kind", "wall"}, {"area", 5.0}, {"boundary", {"Z1", "AMBIENT"}},
                           {"layers", {{{"thermal_resistance", 0.5}, {"areal_heat_capacity", 0.0}}}}});
  j["disturbances"].push_back({{"name", "I_S"}, {"kind", "solar_irradiance"}, {"orientation", "S"}});
  j["disturbances"].push_back({{"name", "Q_Z1"}, {"kind", "internal_gain"}, {"zone", "Z1"}});
  return parse_building(j.dump());
}

std::vector<WeatherRecord> constant_weather(std::int64_t t0, int rows, std::int64_t spacing) {
  std::vector<WeatherRecord> w;
  for (int i = 0; i < rows; ++i) w.push_back({t0 + i * spacing, 4.0, {0, 100, 0, 0}});
  return w;
}

}  // namespace

TEST_CASE("weather CSV parsing") {
  SUBCASE("two rows") {
    const auto r = load_weather_csv(std::string(kHeader) + "0,1.5,0,10,0,0\n600,2.5,0,20,0,0\n");
    REQUIRE(r.size() == 2);
    CHECK(r[1].timestamp == 600);
    CHECK(r[1].ambient_temp == 2.5);
    CHECK(r[1].irradiance_on(Orientation::S) == 20);
  }
  SUBCASE("out of order names line 3") {
    try {
      load_weather_csv(std::string(kHeader) + "600,1,0,0,0,0\n0,1,0,0,0,0\n");
      FAIL("expected an error");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SUBCASE("malformed field") {
    CHECK_THROWS_AS(load_weather_csv(std::string(kHeader) + "0,abc,0,0,0,0\n"), InputError);
    CHECK_THROWS_AS(load_weather_csv(std::string(kHeader) + "0,1,0,0\n"), InputError);
    CHECK_THROWS_AS(load_weather_csv("time,temp\n"), InputError);
    CHECK_THROWS_AS(load_weather_csv(std::string(kHeader) + "0,1,-5,0,0,0\n"), InputError);
  }
  SUBCASE("bundled winter week") {
    const auto r = load_weather_file(ts::data_path("winter_week.csv"));
    CHECK(r.size() == 1008);
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i].timestamp - r[i - 1].timestamp == 600);
  }
}

TEST_CASE("series from constant weather and no occupancy has identical rows") {
  const auto desc = two_zone_building();
  const TimeBase tb{0, 600, 0};
  const auto s = build_disturbance_series(desc, constant_weather(0, 20, 600), {}, {}, tb, 12);
  REQUIRE(s.rows() == 12);
  for (std::size_t k = 1; k < 12; ++k) CHECK(s.row(k) == s.row(0));
  CHECK(s.row(0)(1) == 70.0);  // nominal hot water
}

TEST_CASE("occupancy gain follows its window exactly") {
  const auto desc = two_zone_building();
  OccupancySchedule occ;
  occ.zones["Z1"] = {{WeeklyInterval{parse_weekday("mon"), 9 * 60, 17 * 60}, 500.0}};
  // 2026-01-05 is a Monday
  const TimeBase tb{parse_iso8601("2026-01-05T00:00:00Z"), 600, 0};
  const auto weather = constant_weather(tb.t0, 200, 600);
  const auto s = build_disturbance_series(desc, weather, occ, {}, tb, 144);
  const auto col = static_cast<Eigen::Index>(desc.channel_index("Q_Z1"));
  for (std::size_t k = 0; k < 144; ++k) {
    const double minute = static_cast<double>(k) * 10.0;
    const bool inside = minute >= 9 * 60 && minute < 17 * 60;
    CHECK(s.values(static_cast<Eigen::Index>(k), col) == (inside ? 500.0 : 0.0));
  }
}

TEST_CASE("occupancy respects the local offset") {
  const auto desc = two_zone_building();
  OccupancySchedule occ;
  occ.zones["Z1"] = {{WeeklyInterval{0, 9 * 60, 17 * 60}, 300.0}};
  const TimeBase tb{parse_iso8601("2026-01-05T07:00:00Z"), 600, 2.0};  // 09:00 local
  const auto s = build_disturbance_series(desc, constant_weather(tb.t0 - 600, 10, 600), occ, {}, tb, 2);
  const auto col = static_cast<Eigen::Index>(desc.channel_index("Q_Z1"));
  CHECK(s.values(0, col) == 300.0);
}

TEST_CASE("hourly weather is interpolated linearly") {
  const auto desc = two_zone_building();
  std::vector<WeatherRecord> w{{0, 2.0, {0, 0, 0, 0}}, {3600, 8.0, {0, 60, 0, 0}}};
  const auto s = build_disturbance_series(desc, w, {}, {}, TimeBase{0, 600, 0}, 7);
  CHECK(s.values(3, 0) == doctest::Approx(5.0));
  CHECK(s.values(3, 2) == doctest::Approx(30.0));
  CHECK(s.values(6, 0) == 8.0);
}

TEST_CASE("coverage gaps report the missing interval") {
  const auto desc = two_zone_building();
  try {
    build_disturbance_series(desc, constant_weather(0, 5, 600), {}, {}, TimeBase{0, 600, 0}, 10);
    FAIL("expected a coverage error");
  } catch (const CoverageError& e) {
    CHECK(std::string(e.what()).find("missing interval") != std::string::npos);
  }
}

TEST_CASE("series does not depend on occupancy declaration order") {
  const auto desc = two_zone_building();
  OccupancySchedule a, b;
  const OccupancyEntry e1{WeeklyInterval{0, 8 * 60, 12 * 60}, 100.0}, e2{WeeklyInterval{0, 13 * 60, 17 * 60}, 200.0};
  a.zones["Z1"] = {e1, e2};
  b.zones["Z1"] = {e2, e1};
  const TimeBase tb{parse_iso8601("2026-01-05T00:00:00Z"), 600, 0};
  const auto weather = constant_weather(tb.t0, 200, 600);
  CHECK(build_disturbance_series(desc, weather, a, {}, tb, 144).values ==
        build_disturbance_series(desc, weather, b, {}, tb, 144).values);
}

TEST_CASE("overlapping occupancy is rejected") {
  OccupancySchedule occ;
  occ.zones["Z1"] = {{WeeklyInterval{0, 8 * 60, 12 * 60}, 100.0}, {WeeklyInterval{0, 11 * 60, 13 * 60}, 100.0}};
  CHECK_THROWS_AS(occ.validate(), ValidationError);
}

TEST_CASE("perfect forecasts replay the source window") {
  auto src = std::make_shared<DisturbanceSeries>();
  src->layout = {"a", "b"};
  src->values.resize(8, 2);
  for (Eigen::Index k = 0; k < 8; ++k) src->values.row(k) << static_cast<double>(k), 10.0 * static_cast<double>(k);
  const ForecastProvider p(ForecastMode::Perfect, src);
  for (std::size_t N = 1; N <= 8; ++N) {
    for (std::size_t k = 0; k + N <= 8; ++k) {
      const Matrix f = p.forecast(k, N);
      REQUIRE(f.rows() == static_cast<Eigen::Index>(N));
      for (std::size_t j = 0; j < N; ++j) CHECK(f.row(static_cast<Eigen::Index>(j)) == src->values.row(static_cast<Eigen::Index>(k + j)));
    }
    CHECK_THROWS_AS(p.forecast(9 - N, N), CoverageError);
  }
  CHECK_THROWS_AS(p.forecast(0, 0), InputError);
}

TEST_CASE("persistence holds weather but follows the occupancy schedule") {
  auto src = std::make_shared<DisturbanceSeries>();
  src->layout = {"T_amb", "I_S", "Q"};
  src->values.resize(6, 3);
  for (Eigen::Index k = 0; k < 6; ++k) src->values.row(k) << -3.0 + static_cast<double>(k), 50.0 * static_cast<double>(k), 100.0 * static_cast<double>(k % 2);
  const ForecastProvider p(ForecastMode::Persistence, src, {false, false, true});
  const Matrix f = p.forecast(0, 4);
  CHECK((f.col(0).array() == -3.0).all());
  CHECK(f(3, 1) < src->values(3, 1));
  CHECK(f.col(2) == src->values.col(2).head(4));
}

TEST_CASE("persistence under-predicts morning sun on the bundled week") {
  const auto desc = load_building(ts::data_path("precis_floor.json"));
  const TimeBase tb{parse_iso8601("2026-01-04T22:00:00Z"), 600, 2.0};
  auto src = std::make_shared<DisturbanceSeries>(
      build_disturbance_series(desc, load_weather_file(ts::data_path("winter_week.csv")), {}, {}, tb, 400));
  const auto col = static_cast<Eigen::Index>(*desc.solar_channel(Orientation::S));
  std::size_t sunrise = 0;
  while (src->values(static_cast<Eigen::Index>(sunrise), col) == 0.0) ++sunrise;
  const std::size_t k = sunrise - 1, N = 48;
  const auto perfect = ForecastProvider::for_building(ForecastMode::Perfect, src, desc).forecast(k, N);
  const auto persist = ForecastProvider::for_building(ForecastMode::Persistence, src, desc).forecast(k, N);
  CHECK(perfect(static_cast<Eigen::Index>(N - 1), col) == src->values(static_cast<Eigen::Index>(k + N - 1), col));
  CHECK(persist(static_cast<Eigen::Index>(N - 1), col) < src->values(static_cast<Eigen::Index>(k + N - 1), col));
}
