#include "thermpc/simloop.hpp"

#include <algorithm>
#include <cmath>

#include "thermpc/errors.hpp"

namespace thermpc {

using nlohmann::json;

json SolverStats::to_json() const {
  return {{"steps", steps},
          {"qp_iterations_total", qp_iterations_total},
          {"qp_iterations_max", qp_iterations_max},
          {"sl_iterations_total", sl_iterations_total},
          {"sl_iterations_max", sl_iterations_max},
          {"sl_not_converged", sl_not_converged},
          {"qp_not_converged", qp_not_converged},
          {"kkt_residual_max", kkt_residual_max}};
}

json Metrics::to_json() const {
  return {{"energy_kwh", {{"per_actuator", energy_kwh}, {"total", energy_kwh_total}}},
          {"cost", cost},
          {"discomfort_kh", {{"per_zone", discomfort_kh}, {"total", discomfort_kh_total}}},
          {"peak_power_kw", peak_power_kw},
          {"solver_stats", solver_stats.to_json()}};
}

Metrics Metrics::from_json(const json& j) {
  Metrics m;
  try {
    m.energy_kwh = j.at("energy_kwh").at("per_actuator").get<std::map<std::string, double>>();
    m.energy_kwh_total = j.at("energy_kwh").at("total").get<double>();
    m.cost = j.at("cost").get<double>();
    m.discomfort_kh = j.at("discomfort_kh").at("per_zone").get<std::map<std::string, double>>();
    m.discomfort_kh_total = j.at("discomfort_kh").at("total").get<double>();
    m.peak_power_kw = j.at("peak_power_kw").get<double>();
    const json& s = j.at("solver_stats");
    m.solver_stats.steps = s.at("steps").get<std::int64_t>();
    m.solver_stats.qp_iterations_total = s.at("qp_iterations_total").get<std::int64_t>();
    m.solver_stats.qp_iterations_max = s.at("qp_iterations_max").get<std::int64_t>();
    m.solver_stats.sl_iterations_total = s.at("sl_iterations_total").get<std::int64_t>();
    m.solver_stats.sl_iterations_max = s.at("sl_iterations_max").get<std::int64_t>();
    m.solver_stats.sl_not_converged = s.at("sl_not_converged").get<std::int64_t>();
    m.solver_stats.qp_not_converged = s.at("qp_not_converged").get<std::int64_t>();
    m.solver_stats.kkt_residual_max = s.at("kkt_residual_max").get<double>();
  } catch (const json::exception& e) {
    throw InputError(std::string("metrics document: ") + e.what());
  }
  return m;
}

// ---------------------------------------------------------------------------
// controllers

MpcController::MpcController(MpcSetup setup, std::shared_ptr<const Forecaster> forecaster)
    : setup_(std::move(setup)), forecaster_(std::move(forecaster)) {
  if (!setup_.model) throw InputError("MPC controller needs a model");
  if (!forecaster_) throw InputError("MPC controller needs a forecaster");
  setup_.config.validate();
}

Vector MpcController::control(std::int64_t k, const Vector& x) {
  last_ = mpc_step(setup_, x, *forecaster_, k, warm_);
  warm_ = last_.warm_start;
  const MpcDiagnostics& d = last_.diagnostics;
  stats_.steps += 1;
  stats_.qp_iterations_total += d.qp_iterations;
  stats_.qp_iterations_max = std::max<std::int64_t>(stats_.qp_iterations_max, d.qp_iterations);
  stats_.sl_iterations_total += d.sl_iterations;
  stats_.sl_iterations_max = std::max<std::int64_t>(stats_.sl_iterations_max, d.sl_iterations);
  if (!d.sl_converged) ++stats_.sl_not_converged;
  if (d.qp_status != to_string(QpStatus::Solved)) ++stats_.qp_not_converged;
  stats_.kkt_residual_max = std::max(stats_.kkt_residual_max, d.kkt_residual);
  return last_.u0;
}

json MpcController::diagnostics() const { return last_.diagnostics.to_json(); }

BaselineController::BaselineController(ActuatorTable actuators, ControlSchedule schedule, HysteresisConfig config,
                                       std::vector<std::size_t> zone_states)
    : actuators_(std::move(actuators)),
      schedule_(std::move(schedule)),
      config_(config),
      zone_states_(std::move(zone_states)) {
  config_.validate();
  if (zone_states_.size() != schedule_.comfort.size()) throw DimensionError("baseline: zone count mismatch");
}

Vector BaselineController::control(std::int64_t k, const Vector& x) {
  const std::size_t nz = zone_states_.size();
  Vector temps(static_cast<Eigen::Index>(nz));
  std::vector<ComfortBand> bands;
  std::vector<bool> occupied;
  for (std::size_t z = 0; z < nz; ++z) {
    temps[static_cast<Eigen::Index>(z)] = x[static_cast<Eigen::Index>(zone_states_[z])];
    bands.push_back(schedule_.band(z, k));
    occupied.push_back(schedule_.occupied(z, k));
  }
  BaselineDecision d = baseline_step(temps, bands, occupied, actuators_, config_, state_);
  state_ = std::move(d.state);
  stats_.steps += 1;
  return d.u;
}

json BaselineController::diagnostics() const {
  json heating = json::array(), cooling = json::array();
  for (bool b : state_.heating) heating.push_back(b);
  for (bool b : state_.cooling) cooling.push_back(b);
  return {{"heating", heating}, {"cooling", cooling}};
}

// ---------------------------------------------------------------------------
// harness

std::string zone_stream(const std::string& zone_id) { return "T_" + zone_id; }
std::string input_stream(const std::string& actuator_id) { return "u_" + actuator_id; }

SimulationResult run_closed_loop(const DiscreteBilinearModel& plant, Controller& controller, const LoopContext& ctx,
                                 std::size_t steps) {
  const std::size_t nz = ctx.zone_ids.size();
  if (plant.labels.zone_states.size() != nz) throw DimensionError("closed loop: zone list does not match the plant");
  if (ctx.actuators.size() != plant.n_u()) throw DimensionError("closed loop: actuator table does not match the plant");
  if (static_cast<std::size_t>(ctx.x0.size()) != plant.n()) throw DimensionError("closed loop: initial state has the wrong size");
  if (!ctx.disturbances) throw InputError("closed loop: no disturbance series");
  const DisturbanceSeries& dist = *ctx.disturbances;
  if (dist.layout.size() != plant.n_v()) throw DimensionError("closed loop: disturbance layout does not match the plant");
  if (steps > dist.rows()) {
    throw CoverageError("closed loop: " + std::to_string(steps) + " steps requested but the disturbance series has " +
                        std::to_string(dist.rows()) + " rows");
  }

  SimulationResult res;
  StreamStore& st = res.streams;
  for (const auto& z : ctx.zone_ids) st.declare(zone_stream(z), "degC", StreamGroup::States);
  for (const auto& a : ctx.actuators.ids) st.declare(input_stream(a), "1", StreamGroup::Inputs);
  for (std::size_t c = 0; c < dist.layout.size(); ++c) {
    st.declare(dist.layout[c], c < ctx.disturbance_units.size() ? ctx.disturbance_units[c] : "", StreamGroup::Disturbances);
  }
  st.declare(kPowerStream, "kW", StreamGroup::Derived);
  st.declare(kCumulativeCostStream, "currency", StreamGroup::Derived);

  const TimeBase& tb = ctx.schedule.time;
  const double hours = static_cast<double>(tb.ts) / 3600.0;
  Vector x = ctx.x0;
  double cumulative = 0;
  for (std::size_t k = 0; k < steps; ++k) {
    const auto kk = static_cast<std::int64_t>(k);
    try {
      const Vector u = controller.control(kk, x);
      const Vector v = dist.row(k);
      const Vector next = step(plant, x, u, v);
      const std::int64_t t = tb.time_of(kk);
      const std::int64_t t_next = tb.time_of(kk + 1);
      double power = 0;
      for (std::size_t i = 0; i < ctx.actuators.size(); ++i) {
        const double ui = u[static_cast<Eigen::Index>(i)];
        st.append(input_stream(ctx.actuators.ids[i]), t, ui);
        power += ui * ctx.actuators.rated_kw[i];
      }
      for (std::size_t c = 0; c < dist.layout.size(); ++c) st.append(dist.layout[c], t, v[static_cast<Eigen::Index>(c)]);
      for (std::size_t z = 0; z < nz; ++z) {
        st.append(zone_stream(ctx.zone_ids[z]), t_next, next[static_cast<Eigen::Index>(plant.labels.zone_states[z])]);
      }
      cumulative += ctx.schedule.price_at(kk) * power * hours;
      st.append(kPowerStream, t, power);
      st.append(kCumulativeCostStream, t_next, cumulative);
      json d = controller.diagnostics();
      d["step"] = k;
      d["timestamp"] = format_iso8601(t);
      res.diagnostics.push_back(std::move(d));
      x = next;
    } catch (const StepError&) {
      throw;
    } catch (const Error& e) {
      throw StepError(k, e.what());
    }
  }
  res.final_state = x;
  res.metrics = compute_metrics(st, ctx);
  res.metrics.solver_stats = controller.stats();
  return res;
}

Metrics compute_metrics(const StreamStore& store, const LoopContext& ctx) {
  Metrics m;
  const TimeBase& tb = ctx.schedule.time;
  const double hours = static_cast<double>(tb.ts) / 3600.0;

  std::vector<const Stream*> inputs;
  for (const auto& id : ctx.actuators.ids) inputs.push_back(&store.get(input_stream(id)));
  std::size_t samples = inputs.empty() ? 0 : inputs.front()->values.size();
  for (const Stream* s : inputs) {
    if (s->values.size() != samples || s->timestamps != inputs.front()->timestamps) {
      throw InputError("input stream '" + s->name + "' is not aligned with the other inputs");
    }
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    double e = 0;
    for (double u : inputs[i]->values) e += u * ctx.actuators.rated_kw[i] * hours;
    m.energy_kwh[ctx.actuators.ids[i]] = e;
    m.energy_kwh_total += e;
  }
  for (std::size_t k = 0; k < samples; ++k) {
    double power = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) power += inputs[i]->values[k] * ctx.actuators.rated_kw[i];
    m.peak_power_kw = std::max(m.peak_power_kw, power);
    m.cost += ctx.schedule.price.at(tb.local(inputs.front()->timestamps[k])) * power * hours;
  }

  for (std::size_t z = 0; z < ctx.zone_ids.size(); ++z) {
    const Stream& s = store.get(zone_stream(ctx.zone_ids[z]));
    double d = 0;
    for (std::size_t k = 0; k < s.values.size(); ++k) {
      d += ctx.schedule.comfort.at(z).band_at(tb.local(s.timestamps[k])).violation(s.values[k]) * hours;
    }
    m.discomfort_kh[ctx.zone_ids[z]] = d;
    m.discomfort_kh_total += d;
  }
  return m;
}

}  // namespace thermpc
