#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "support.hpp"
#include "thermpc/errors.hpp"
#include "thermpc/scenario.hpp"

using namespace thermpc;
namespace ts = testing_support;
namespace fs = std::filesystem;

namespace {

nlohmann::json day_document() {
  std::ifstream f(ts::data_path("single_zone_day.json"));
  return nlohmann::json::parse(f);
}

ScenarioConfig parse(const nlohmann::json& doc) { return parse_scenario(doc.dump(), ts::data_path("")); }

std::string error_of(const nlohmann::json& doc) {
  try {
    parse(doc);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("bundled scenarios parse") {
  const auto c = parse(day_document());
  CHECK(c.name == "single_zone_day");
  CHECK(c.duration_steps == 144);
  CHECK(c.ts == 600);
  CHECK(c.mpc.N == 48);
  CHECK(c.mpc.ts == 600.0);
  CHECK(c.utc_offset_hours == 2.0);
  CHECK(c.start == parse_iso8601("2026-01-04T22:00:00Z"));
  CHECK(fs::path(c.building_path).filename() == "single_zone.json");
  const auto w = load_scenario(ts::data_path("winter_mpc.json"));
  CHECK(w.controller == ControllerKind::Mpc);
  CHECK(load_scenario(ts::data_path("winter_baseline.json")).controller == ControllerKind::Baseline);
}

TEST_CASE("scenario errors name the offending field") {
  auto doc = day_document();
  doc["building"] = "no_such_building.json";
  CHECK(error_of(doc).find("no_such_building.json") != std::string::npos);

  doc = day_document();
  doc.erase("price");
  CHECK(error_of(doc).find("price") != std::string::npos);

  doc = day_document();
  doc["forecast"] = "oracle";
  CHECK(error_of(doc).find("forecast") != std::string::npos);

  doc = day_document();
  doc["mpc"]["Ts"] = 300;
  CHECK(error_of(doc).find("mpc.Ts") != std::string::npos);

  doc = day_document();
  doc["duration_steps"] = 1.5;
  CHECK(error_of(doc).find("duration_steps") != std::string::npos);

  doc = day_document();
  doc["occupancy"]["R9"] = doc["occupancy"]["R1"];
  CHECK_THROWS_AS(prepare_scenario(parse(doc)), UnresolvedReference);

  CHECK_THROWS_AS(load_scenario(ts::data_path("missing_scenario.json")), InputError);
  CHECK_THROWS_AS(parse_scenario("{\"name\": ", ts::data_path("")), SyntaxError);
}

TEST_CASE("prepared scenario is consistent") {
  const auto s = prepare_scenario(load_scenario(ts::data_path("single_zone_day.json")));
  CHECK(s.context.zone_ids == std::vector<std::string>{"R1"});
  CHECK(s.context.actuators.size() == s.model->n_u());
  CHECK(s.context.disturbances->rows() >= s.config.duration_steps + s.config.mpc.N - 1);
  CHECK((s.context.x0.array() == 19.0).all());
}

TEST_CASE("savings percentages") {
  CHECK(*savings_pct(10.0, 6.0) == doctest::Approx(40.0));
  CHECK(*savings_pct(10.0, 12.0) == doctest::Approx(-20.0));
  CHECK_FALSE(savings_pct(0.0, 1.0).has_value());

  Comparison c;
  c.baseline.cost = 4.0;
  c.mpc.cost = 3.0;
  c.baseline.discomfort_kh_total = 0.0;
  c.mpc.discomfort_kh_total = 0.25;
  const auto j = c.to_json("x");
  CHECK(j["savings_pct"]["cost"] == doctest::Approx(25.0));
  CHECK(j["savings_pct"]["discomfort_kh"] == "n/a");
  CHECK(j["controllers"]["baseline"].contains("discomfort_kh"));
  CHECK(j["controllers"]["mpc"].contains("discomfort_kh"));
  CHECK(c.table().find("n/a") != std::string::npos);
}

TEST_CASE("metrics documents round trip") {
  Metrics m;
  m.energy_kwh = {{"a", 1.25}, {"b", 0.5}};
  m.energy_kwh_total = 1.75;
  m.cost = 0.35;
  m.discomfort_kh = {{"Z", 0.125}};
  m.discomfort_kh_total = 0.125;
  m.peak_power_kw = 2.0;
  m.solver_stats.steps = 3;
  const auto back = Metrics::from_json(nlohmann::json::parse(metrics_document(m)));
  CHECK(back.energy_kwh == m.energy_kwh);
  CHECK(back.cost == m.cost);
  CHECK(back.discomfort_kh == m.discomfort_kh);
  CHECK(back.solver_stats == m.solver_stats);
}

TEST_CASE("simulation outputs on disk") {
  auto cfg = load_scenario(ts::data_path("single_zone_day.json"));
  cfg.duration_steps = 24;
  const auto s = prepare_scenario(cfg);
  const auto r = run_scenario(s, ControllerKind::Mpc);
  const fs::path dir = fs::temp_directory_path() / "thermpc_scenario_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_simulation_outputs(r, dir.string());
  for (const char* f : {"states.csv", "inputs.csv", "disturbances.csv", "derived.csv", "metrics.json"}) {
    CHECK(fs::exists(dir / f));
  }
  std::ifstream diag(dir / "diagnostics.jsonl");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(diag, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["step"] == lines);
    ++lines;
  }
  CHECK(lines == 24);
  CHECK(read_stream_csvs(dir.string()) == r.streams);
  std::ifstream mf(dir / "metrics.json");
  std::stringstream text;
  text << mf.rdbuf();
  CHECK(text.str() == metrics_document(r.metrics));
  CHECK(r.metrics.solver_stats.steps == 24);
  fs::remove_all(dir);
}
