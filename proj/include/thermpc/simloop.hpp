#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "thermpc/baseline.hpp"
#include "thermpc/disturbance.hpp"
#include "thermpc/mpc.hpp"
#include "thermpc/schedule.hpp"
#include "thermpc/statespace.hpp"
#include "thermpc/streams.hpp"

namespace thermpc {

struct SolverStats {
  std::int64_t steps = 0;
  std::int64_t qp_iterations_total = 0;
  std::int64_t qp_iterations_max = 0;
  std::int64_t sl_iterations_total = 0;
  std::int64_t sl_iterations_max = 0;
  std::int64_t sl_not_converged = 0;
  std::int64_t qp_not_converged = 0;
  double kkt_residual_max = 0;

  nlohmann::json to_json() const;
  friend bool operator==(const SolverStats&, const SolverStats&) = default;
};

struct Metrics {
  std::map<std::string, double> energy_kwh;  // per actuator id
  double energy_kwh_total = 0;
  double cost = 0;
  std::map<std::string, double> discomfort_kh;  // per zone id
  double discomfort_kh_total = 0;
  double peak_power_kw = 0;
  SolverStats solver_stats;

  nlohmann::json to_json() const;
  static Metrics from_json(const nlohmann::json& j);
};

/// Closed-loop controller seen by the harness: full-state feedback at step k.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::string name() const = 0;
  virtual Vector control(std::int64_t k, const Vector& x) = 0;
  /// Diagnostics of the most recent call to control().
  virtual nlohmann::json diagnostics() const { return nlohmann::json::object(); }
  virtual SolverStats stats() const { return {}; }
};

class MpcController final : public Controller {
 public:
  MpcController(MpcSetup setup, std::shared_ptr<const Forecaster> forecaster);
  std::string name() const override { return "mpc"; }
  Vector control(std::int64_t k, const Vector& x) override;
  nlohmann::json diagnostics() const override;
  SolverStats stats() const override { return stats_; }
  const ControlDecision& last_decision() const { return last_; }

 private:
  MpcSetup setup_;
  std::shared_ptr<const Forecaster> forecaster_;
  MpcWarmStart warm_;
  ControlDecision last_;
  SolverStats stats_;
};

class BaselineController final : public Controller {
 public:
  BaselineController(ActuatorTable actuators, ControlSchedule schedule, HysteresisConfig config,
                     std::vector<std::size_t> zone_states);
  std::string name() const override { return "baseline"; }
  Vector control(std::int64_t k, const Vector& x) override;
  nlohmann::json diagnostics() const override;
  SolverStats stats() const override { return stats_; }

 private:
  ActuatorTable actuators_;
  ControlSchedule schedule_;
  HysteresisConfig config_;
  std::vector<std::size_t> zone_states_;
  HysteresisState state_;
  SolverStats stats_;
};

/// What the harness and the metrics need besides plant and controller.
struct LoopContext {
  std::vector<std::string> zone_ids;
  ActuatorTable actuators;
  ControlSchedule schedule;
  std::shared_ptr<const DisturbanceSeries> disturbances;  // true values, row k at t_k
  std::vector<std::string> disturbance_units;
  Vector x0;
};

struct SimulationResult {
  StreamStore streams;
  Metrics metrics;
  std::vector<nlohmann::json> diagnostics;  // one record per control step
  Vector final_state;
};

/// Stream names used by the harness.
std::string zone_stream(const std::string& zone_id);
std::string input_stream(const std::string& actuator_id);
inline constexpr const char* kPowerStream = "power_el_kw";
inline constexpr const char* kCumulativeCostStream = "cumulative_cost";

/// Zone temperatures are recorded at t_{k+1}; inputs, disturbances and power at t_k; the
/// cumulative cost after interval k at t_{k+1}. Failures are rethrown as StepError(k).
SimulationResult run_closed_loop(const DiscreteBilinearModel& plant, Controller& controller, const LoopContext& ctx,
                                 std::size_t steps);

/// Rectangle-rule energy and cost over Ts; discomfort against the band at each temperature sample.
Metrics compute_metrics(const StreamStore& store, const LoopContext& ctx);

}  // namespace thermpc
