#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "thermpc/disturbance.hpp"
#include "thermpc/qp.hpp"
#include "thermpc/schedule.hpp"
#include "thermpc/stagewise_kkt.hpp"
#include "thermpc/statespace.hpp"

namespace thermpc {

struct MpcConfig {
  std::size_t N = 48;
  double ts = 600;
  double input_reg = 1e-4;
  std::optional<double> slack_penalty;  // currency/(K h); default 10 x peak price x mean actuator kW
  int sl_max_iters = 10;
  double sl_tol = 1e-3;
  double qp_tol = 1e-6;
  int qp_max_iters = 20000;
  double ventilation_min = 0.3;

  void validate() const;
  double effective_slack_penalty(const ActuatorTable& act, const PriceSchedule& price) const;

  static MpcConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Linearization of the bilinear model around a nominal input plan (first-order in x and u,
/// exact at the nominal trajectory).
LtvModel linearize_along(const DiscreteBilinearModel& m, const Vector& x0, const Matrix& u_nom, const Matrix& v_fore);

/// Horizon data for one QP, row k referring to input step k and predicted state k + 1.
struct HorizonData {
  Vector price;          // N, currency/kWh
  Matrix t_min, t_max;   // N x zones, band at the time of state k + 1
  Matrix u_lb, u_ub;     // N x n_u
  Vector rated_kw;       // n_u
  double slack_penalty = 0;
};

/// Condensed horizon QP. The structured pieces are kept so the solver can use the stagewise
/// backend; `to_problem` materializes the explicit dense form.
struct HorizonQp {
  LtvModel model;
  Vector x0;
  HorizonLayout layout;
  Vector hessian_diagonal;
  Vector g, lb, ub, h;
  Matrix free_zone_temps;  // N x zones, predicted with u = 0

  QpProblem to_problem() const;
  StagewiseKktSystem kkt() const { return StagewiseKktSystem(model, layout, hessian_diagonal); }
  Matrix inputs(const Vector& z) const;   // N x n_u
  Matrix slacks(const Vector& z) const;   // N x zones
};

HorizonQp build_qp(const LtvModel& ltv, const Vector& x0, const std::vector<std::size_t>& zone_states,
                   const HorizonData& data, const MpcConfig& cfg);

/// Everything carried from one control step to the next.
struct MpcWarmStart {
  Matrix plan;  // N x n_u
  QpWarmStart qp;
  std::vector<ComfortRow> rows;

  bool empty() const { return plan.size() == 0; }
};

struct MpcDiagnostics {
  int sl_iterations = 0;
  bool sl_converged = false;
  double sl_last_change = 0;
  int qp_iterations = 0;       // summed over SL iterations
  int qp_factorizations = 0;
  std::string qp_status;
  bool qp_polished = false;
  double kkt_residual = 0;
  double cost = 0;             // QP objective of the final plan

  nlohmann::json to_json() const;
};

struct ControlDecision {
  Vector u0;
  Matrix planned;    // N x n_u
  Matrix predicted;  // (N + 1) x n
  MpcDiagnostics diagnostics;
  MpcWarmStart warm_start;
};

/// Static controller context.
struct MpcSetup {
  const DiscreteBilinearModel* model = nullptr;
  ActuatorTable actuators;
  ControlSchedule schedule;
  MpcConfig config;
};

HorizonData horizon_data(const MpcSetup& setup, std::int64_t k);

/// One receding-horizon step at control step k from state x0.
ControlDecision mpc_step(const MpcSetup& setup, const Vector& x0, const Forecaster& forecaster, std::int64_t k,
                         const MpcWarmStart& warm = {});

}  // namespace thermpc
