#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "thermpc/errors.hpp"
#include "thermpc/scenario.hpp"
#include "thermpc/simloop.hpp"
#include "thermpc/streams.hpp"

using namespace thermpc;
namespace ts = testing_support;

namespace {

const PreparedScenario& day() {
  static const PreparedScenario s = prepare_scenario(load_scenario(ts::data_path("single_zone_day.json")));
  return s;
}

class ZeroController final : public Controller {
 public:
  explicit ZeroController(std::size_t n_u) : n_u_(n_u) {}
  std::string name() const override { return "zero"; }
  Vector control(std::int64_t, const Vector&) override { return Vector::Zero(static_cast<Eigen::Index>(n_u_)); }

 private:
  std::size_t n_u_;
};

class RandomController final : public Controller {
 public:
  RandomController(std::size_t n_u, std::uint64_t seed) : n_u_(n_u), rng_(seed) {}
  std::string name() const override { return "random"; }
  Vector control(std::int64_t, const Vector&) override {
    return ts::random_vector(rng_, static_cast<Eigen::Index>(n_u_), 0.0, 1.0);
  }

 private:
  std::size_t n_u_;
  ts::Rng rng_;
};

class FailingController final : public Controller {
 public:
  std::string name() const override { return "failing"; }
  Vector control(std::int64_t k, const Vector&) override {
    if (k == 5) throw NumericalError("solver blew up");
    return Vector::Zero(1);
  }
};

// Zone temperatures at t_{k+1} and zero inputs at t_k for `temps.size()` steps.
StreamStore synthetic_store(const LoopContext& ctx, const std::vector<double>& temps) {
  StreamStore st;
  st.declare(zone_stream(ctx.zone_ids[0]), "degC", StreamGroup::States);
  for (const auto& id : ctx.actuators.ids) st.declare(input_stream(id), "1", StreamGroup::Inputs);
  const auto& tb = ctx.schedule.time;
  for (std::size_t k = 0; k < temps.size(); ++k) {
    const auto kk = static_cast<std::int64_t>(k);
    for (const auto& id : ctx.actuators.ids) st.append(input_stream(id), tb.time_of(kk), 0.0);
    st.append(zone_stream(ctx.zone_ids[0]), tb.time_of(kk + 1), temps[k]);
  }
  return st;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

}  // namespace

TEST_CASE("zero steps give empty streams and zero metrics") {
  const auto& s = day();
  ZeroController c(s.context.actuators.size());
  const auto r = run_closed_loop(*s.plant, c, s.context, 0);
  for (const auto& st : r.streams.streams()) CHECK(st.values.empty());
  CHECK(r.metrics.energy_kwh_total == 0);
  CHECK(r.metrics.cost == 0);
  CHECK(r.metrics.discomfort_kh_total == 0);
  CHECK(r.diagnostics.empty());
  CHECK(r.final_state == s.context.x0);
}

TEST_CASE("baseline energy equals the integral of the exported input stream") {
  const auto& s = day();
  const auto r = run_scenario(s, ControllerKind::Baseline);
  const std::string csv = export_csv(r.streams, StreamGroup::Inputs);
  std::stringstream in(csv);
  std::string line;
  std::getline(in, line);
  const auto header = split(line);
  const auto& act = s.context.actuators;
  double energy = 0;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    const auto f = split(line);
    REQUIRE(f.size() == header.size());
    for (std::size_t i = 0; i < act.size(); ++i) energy += std::stod(f[i + 1]) * act.rated_kw[i] * (600.0 / 3600.0);
    ++rows;
  }
  CHECK(rows == 144);
  CHECK(energy > 0);
  CHECK(std::abs(r.metrics.energy_kwh_total - energy) <= 1e-12 * energy);
  CHECK(r.metrics.cost == doctest::Approx(0.2 * energy).epsilon(1e-12));
}

TEST_CASE("one kelvin below the band for one hour is one kelvin-hour") {
  const auto& ctx = day().context;
  std::vector<double> temps;
  for (std::int64_t k = 0; k < 144; ++k) {
    const auto band = ctx.schedule.band(0, k + 1);
    temps.push_back(0.5 * (band.t_min + band.t_max));
  }
  CHECK(compute_metrics(synthetic_store(ctx, temps), ctx).discomfort_kh_total == 0.0);
  for (std::int64_t k = 30; k < 36; ++k) temps[static_cast<std::size_t>(k)] = ctx.schedule.band(0, k + 1).t_min - 1.0;
  const auto m = compute_metrics(synthetic_store(ctx, temps), ctx);
  CHECK(m.discomfort_kh_total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.energy_kwh_total == 0.0);
}

TEST_CASE("metrics match per-sample summation on random trajectories") {
  const auto& s = day();
  const auto& ctx = s.context;
  RandomController c(ctx.actuators.size(), 77);
  const auto r = run_closed_loop(*s.plant, c, ctx, 144);
  const double h = 600.0 / 3600.0;
  const auto& u = r.streams.get(input_stream(ctx.actuators.ids[0]));
  const auto& T = r.streams.get(zone_stream(ctx.zone_ids[0]));
  double energy = 0, cost = 0, discomfort = 0, peak = 0;
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    const double p = u.values[k] * ctx.actuators.rated_kw[0];
    energy += p * h;
    cost += ctx.schedule.price_at(static_cast<std::int64_t>(k)) * p * h;
    peak = std::max(peak, p);
    const auto band = ctx.schedule.band(0, static_cast<std::int64_t>(k + 1));
    const double t = T.values[k];
    discomfort += (t < band.t_min ? band.t_min - t : t > band.t_max ? t - band.t_max : 0.0) * h;
  }
  CHECK(std::abs(r.metrics.energy_kwh_total - energy) <= 1e-9);
  CHECK(std::abs(r.metrics.cost - cost) <= 1e-9);
  CHECK(std::abs(r.metrics.discomfort_kh_total - discomfort) <= 1e-9);
  CHECK(r.metrics.peak_power_kw == doctest::Approx(peak));
  CHECK(r.streams.get(kCumulativeCostStream).values.back() == doctest::Approx(cost).epsilon(1e-12));
}

TEST_CASE("disabled actuators use no energy and cost nothing") {
  const auto& s = day();
  ZeroController c(s.context.actuators.size());
  const auto r = run_closed_loop(*s.plant, c, s.context, 144);
  CHECK(r.metrics.energy_kwh_total == 0.0);
  CHECK(r.metrics.cost == 0.0);
  CHECK(r.metrics.peak_power_kw == 0.0);
  CHECK(r.metrics.discomfort_kh_total > 0.0);
}

TEST_CASE("totals are the sum of their parts on the floor plan") {
  auto cfg = load_scenario(ts::data_path("winter_baseline.json"));
  cfg.duration_steps = 36;
  const auto s = prepare_scenario(cfg);
  const auto r = run_scenario(s, ControllerKind::Baseline);
  double e = 0, d = 0;
  for (const auto& [id, v] : r.metrics.energy_kwh) e += v;
  for (const auto& [id, v] : r.metrics.discomfort_kh) d += v;
  CHECK(r.metrics.energy_kwh.size() == s.context.actuators.size());
  CHECK(r.metrics.discomfort_kh.size() == s.context.zone_ids.size());
  CHECK(r.metrics.energy_kwh_total == doctest::Approx(e).epsilon(1e-14));
  CHECK(r.metrics.discomfort_kh_total == doctest::Approx(d).epsilon(1e-14));
  CHECK(r.diagnostics.size() == 36);
}

TEST_CASE("closed-loop runs are deterministic") {
  const auto& s = day();
  const auto a = run_scenario(s, ControllerKind::Baseline);
  const auto b = run_scenario(s, ControllerKind::Baseline);
  CHECK(a.streams == b.streams);
  CHECK(a.metrics.to_json() == b.metrics.to_json());
}

TEST_CASE("controller failures carry the step index") {
  const auto& s = day();
  FailingController c;
  try {
    run_closed_loop(*s.plant, c, s.context, 20);
    FAIL("expected a step error");
  } catch (const StepError& e) {
    CHECK(e.step() == 5);
    CHECK(std::string(e.what()).find("solver blew up") != std::string::npos);
  }
}

TEST_CASE("horizon beyond the disturbance rows is a coverage error") {
  const auto& s = day();
  ZeroController c(1);
  CHECK_THROWS_AS(run_closed_loop(*s.plant, c, s.context, s.context.disturbances->rows() + 1), CoverageError);
}

TEST_CASE("stream store bookkeeping") {
  StreamStore st;
  st.declare("a", "degC", StreamGroup::States);
  CHECK_THROWS_AS(st.declare("a", "degC", StreamGroup::States), InputError);
  st.append("a", 0, 1.0);
  CHECK_THROWS_AS(st.append("a", 0, 2.0), InputError);
  CHECK_THROWS_AS(st.append("b", 10, 2.0), InputError);
  try {
    st.get("missing_stream");
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("missing_stream") != std::string::npos);
  }
}

TEST_CASE("stream export formats") {
  SUBCASE("empty store exports headers only") {
    StreamStore st;
    st.declare("a", "degC", StreamGroup::States);
    const auto csv = export_csv(st, StreamGroup::States);
    CHECK(csv == "timestamp,a [degC]\n");
  }
  SUBCASE("two streams with three samples give three rows") {
    StreamStore st;
    st.declare("a", "degC", StreamGroup::States);
    st.declare("b", "degC", StreamGroup::States);
    for (int k = 0; k < 3; ++k) {
      st.append("a", 600 * k, k);
      st.append("b", 600 * k, -k);
    }
    const auto csv = export_csv(st, StreamGroup::States);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(csv.find("1970-01-01T00:10:00Z") != std::string::npos);
  }
  SUBCASE("CSV and JSON round trips are exact") {
    ts::Rng rng(5);
    StreamStore st;
    st.declare("T_x", "degC", StreamGroup::States);
    st.declare("u_x", "1", StreamGroup::Inputs);
    st.declare("v_x", "W", StreamGroup::Disturbances);
    st.declare("p", "kW", StreamGroup::Derived);
    for (int k = 0; k < 50; ++k) {
      for (const char* n : {"T_x", "u_x", "v_x", "p"}) st.append(n, 1767564000 + 600 * k, ts::uniform(rng, -1e3, 1e3) / 3.0);
    }
    StreamStore back;
    for (StreamGroup g : kAllStreamGroups) import_csv(export_csv(st, g), g, back);
    CHECK(back == st);
    CHECK(import_json(export_json(st)) == st);
  }
  SUBCASE("malformed CSV is rejected") {
    StreamStore st;
    CHECK_THROWS_AS(import_csv("time,a [degC]\n", StreamGroup::States, st), InputError);
    CHECK_THROWS_AS(import_csv("timestamp,a\n", StreamGroup::States, st), InputError);
    CHECK_THROWS_AS(import_csv("timestamp,a [degC]\n1970-01-01T00:00:00Z,x\n", StreamGroup::States, st), InputError);
  }
}
