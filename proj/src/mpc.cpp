#include "thermpc/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "json_fields.hpp"
#include "thermpc/errors.hpp"

namespace thermpc {

using nlohmann::json;
using namespace fields;

void MpcConfig::validate() const {
  if (N < 1) throw ValidationError("mpc.N", "must be >= 1");
  if (!(ts > 0)) throw ValidationError("mpc.Ts", "must be > 0");
  if (!(input_reg > 0) || !std::isfinite(input_reg)) throw ValidationError("mpc.input_reg", "must be > 0");
  if (slack_penalty && !(*slack_penalty > 0 && std::isfinite(*slack_penalty))) {
    throw ValidationError("mpc.slack_penalty", "must be > 0");
  }
  if (sl_max_iters < 1) throw ValidationError("mpc.sl_max_iters", "must be >= 1");
  if (!(sl_tol > 0)) throw ValidationError("mpc.sl_tol", "must be > 0");
  if (!(qp_tol > 0)) throw ValidationError("mpc.qp_tol", "must be > 0");
  if (qp_max_iters < 1) throw ValidationError("mpc.qp_max_iters", "must be >= 1");
  if (!(ventilation_min >= 0 && ventilation_min <= 1)) throw ValidationError("mpc.ventilation_min", "must be in [0, 1]");
}

double MpcConfig::effective_slack_penalty(const ActuatorTable& act, const PriceSchedule& price) const {
  if (slack_penalty) return *slack_penalty;
  const double p = 10.0 * price.max_price() * act.mean_kw();
  return p > 0 ? p : 1.0;
}

MpcConfig MpcConfig::from_json(const json& j) {
  MpcConfig c;
  if (!j.is_object()) throw ValidationError("mpc", "expected an object");
  const auto size_field = [&](const char* key, std::size_t& out) {
    if (!j.contains(key)) return;
    const double v = number_field(j, key, "mpc");
    if (v != std::floor(v) || v < 0) throw ValidationError(at("mpc", key), "must be a non-negative integer");
    out = static_cast<std::size_t>(v);
  };
  const auto int_field = [&](const char* key, int& out) {
    std::size_t v = static_cast<std::size_t>(out);
    size_field(key, v);
    out = static_cast<int>(v);
  };
  const auto dbl = [&](const char* key, double& out) {
    if (j.contains(key)) out = number_field(j, key, "mpc");
  };
  size_field("N", c.N);
  dbl("Ts", c.ts);
  dbl("input_reg", c.input_reg);
  if (j.contains("slack_penalty") && !j["slack_penalty"].is_null()) c.slack_penalty = number_field(j, "slack_penalty", "mpc");
  int_field("sl_max_iters", c.sl_max_iters);
  dbl("sl_tol", c.sl_tol);
  dbl("qp_tol", c.qp_tol);
  int_field("qp_max_iters", c.qp_max_iters);
  dbl("ventilation_min", c.ventilation_min);
  c.validate();
  return c;
}

json MpcConfig::to_json() const {
  json j = {{"N", N},           {"Ts", ts},         {"input_reg", input_reg}, {"sl_max_iters", sl_max_iters},
            {"sl_tol", sl_tol}, {"qp_tol", qp_tol}, {"qp_max_iters", qp_max_iters}, {"ventilation_min", ventilation_min}};
  j["slack_penalty"] = slack_penalty ? json(*slack_penalty) : json(nullptr);
  return j;
}

LtvModel linearize_along(const DiscreteBilinearModel& m, const Vector& x0, const Matrix& u_nom, const Matrix& v_fore) {
  const auto n = static_cast<Eigen::Index>(m.n());
  const auto nu = static_cast<Eigen::Index>(m.n_u());
  const Eigen::Index N = u_nom.rows();
  if (x0.size() != n || u_nom.cols() != nu || v_fore.rows() < N || v_fore.cols() != static_cast<Eigen::Index>(m.n_v())) {
    throw DimensionError("linearize_along: inconsistent dimensions");
  }
  LtvModel ltv;
  ltv.A.reserve(static_cast<std::size_t>(N));
  ltv.B.reserve(static_cast<std::size_t>(N));
  ltv.c.reserve(static_cast<std::size_t>(N));
  Vector x = x0;
  for (Eigen::Index k = 0; k < N; ++k) {
    const Vector u = u_nom.row(k).transpose();
    const Vector v = v_fore.row(k).transpose();
    Matrix A = m.A;
    Matrix B = m.Bu;
    Vector next = m.A * x + m.Bu * u + m.Bv * v + m.d;
    for (Eigen::Index i = 0; i < nu; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      const Vector bx = m.Bxu[ii] * x;
      const Vector bv = m.Bvu[ii] * v;
      A += u[i] * m.Bxu[ii];
      B.col(i) += bx + bv;
      next += u[i] * (bx + bv);
    }
    if (!next.allFinite()) throw NumericalError("linearize_along: nominal trajectory is not finite at step " + std::to_string(k));
    Vector c = next - A * x - B * u;
    ltv.A.push_back(std::move(A));
    ltv.B.push_back(std::move(B));
    ltv.c.push_back(std::move(c));
    x = std::move(next);
  }
  return ltv;
}

HorizonQp build_qp(const LtvModel& ltv, const Vector& x0, const std::vector<std::size_t>& zone_states,
                   const HorizonData& data, const MpcConfig& cfg) {
  const std::size_t N = ltv.horizon();
  const auto NN = static_cast<Eigen::Index>(N);
  const auto nu = ltv.n_u();
  const auto nz = static_cast<Eigen::Index>(zone_states.size());
  if (N < 1) throw DimensionError("build_qp: empty horizon");
  if (x0.size() != ltv.n() || data.price.size() < NN || data.t_min.rows() < NN || data.t_max.rows() < NN ||
      data.t_min.cols() != nz || data.t_max.cols() != nz || data.u_lb.rows() < NN || data.u_ub.rows() < NN ||
      data.u_lb.cols() != nu || data.u_ub.cols() != nu || data.rated_kw.size() != nu) {
    throw DimensionError("build_qp: horizon data does not match the model");
  }
  if (!data.price.head(NN).allFinite() || !data.rated_kw.allFinite()) throw InputError("build_qp: prices must be finite");
  for (Eigen::Index k = 0; k < NN; ++k) {
    for (Eigen::Index j = 0; j < nz; ++j) {
      if (std::isnan(data.t_min(k, j)) || std::isnan(data.t_max(k, j)) || data.t_min(k, j) > data.t_max(k, j)) {
        throw InputError("build_qp: invalid comfort band at stage " + std::to_string(k + 1));
      }
    }
  }

  HorizonQp qp;
  qp.model = ltv;
  qp.x0 = x0;
  qp.layout.N = N;
  qp.layout.n_u = static_cast<std::size_t>(nu);
  qp.layout.zone_states = zone_states;

  qp.free_zone_temps.resize(NN, nz);
  const std::vector<Vector> free = ltv.propagate(x0, Matrix::Zero(NN, nu));
  for (Eigen::Index k = 0; k < NN; ++k) {
    for (Eigen::Index j = 0; j < nz; ++j) {
      qp.free_zone_temps(k, j) = free[static_cast<std::size_t>(k + 1)][static_cast<Eigen::Index>(zone_states[static_cast<std::size_t>(j)])];
    }
  }

  std::vector<double> h;
  for (std::size_t stage = 1; stage <= N; ++stage) {
    const auto k = static_cast<Eigen::Index>(stage - 1);
    for (Eigen::Index j = 0; j < nz; ++j) {
      const double T = qp.free_zone_temps(k, j);
      if (std::isfinite(data.t_min(k, j))) {
        qp.layout.rows.push_back({stage, static_cast<std::size_t>(j), -1});
        h.push_back(T - data.t_min(k, j));
      }
      if (std::isfinite(data.t_max(k, j))) {
        qp.layout.rows.push_back({stage, static_cast<std::size_t>(j), 1});
        h.push_back(data.t_max(k, j) - T);
      }
    }
  }
  qp.h = Eigen::Map<const Vector>(h.data(), static_cast<Eigen::Index>(h.size()));

  const Eigen::Index n_vars = qp.layout.num_vars();
  qp.hessian_diagonal = Vector::Zero(n_vars);
  qp.g = Vector::Zero(n_vars);
  qp.lb = Vector::Zero(n_vars);
  qp.ub = Vector::Constant(n_vars, kInf);
  const double hours = cfg.ts / 3600.0;
  for (std::size_t k = 0; k < N; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    for (Eigen::Index i = 0; i < nu; ++i) {
      const auto idx = qp.layout.input_index(k, static_cast<std::size_t>(i));
      qp.hessian_diagonal[idx] = 2 * cfg.input_reg;
      qp.g[idx] = data.price[kk] * hours * data.rated_kw[i];
      qp.lb[idx] = data.u_lb(kk, i);
      qp.ub[idx] = data.u_ub(kk, i);
    }
  }
  for (std::size_t stage = 1; stage <= N; ++stage) {
    for (std::size_t j = 0; j < zone_states.size(); ++j) {
      const auto idx = qp.layout.slack_index(stage, j);
      qp.hessian_diagonal[idx] = 2 * cfg.input_reg;
      qp.g[idx] = data.slack_penalty * hours;
    }
  }
  return qp;
}

QpProblem HorizonQp::to_problem() const {
  QpProblem p;
  p.H = hessian_diagonal.asDiagonal();
  p.g = g;
  p.lb = lb;
  p.ub = ub;
  p.G = kkt().dense_G();
  p.h = h;
  return p;
}

Matrix HorizonQp::inputs(const Vector& z) const {
  Matrix u(static_cast<Eigen::Index>(layout.N), static_cast<Eigen::Index>(layout.n_u));
  for (std::size_t k = 0; k < layout.N; ++k) {
    for (std::size_t i = 0; i < layout.n_u; ++i) {
      u(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = z[layout.input_index(k, i)];
    }
  }
  return u;
}

Matrix HorizonQp::slacks(const Vector& z) const {
  Matrix s(static_cast<Eigen::Index>(layout.N), static_cast<Eigen::Index>(layout.n_zones()));
  for (std::size_t stage = 1; stage <= layout.N; ++stage) {
    for (std::size_t j = 0; j < layout.n_zones(); ++j) {
      s(static_cast<Eigen::Index>(stage - 1), static_cast<Eigen::Index>(j)) = z[layout.slack_index(stage, j)];
    }
  }
  return s;
}

json MpcDiagnostics::to_json() const {
  return {{"sl_iterations", sl_iterations}, {"sl_converged", sl_converged},       {"sl_last_change", sl_last_change},
          {"qp_iterations", qp_iterations}, {"qp_factorizations", qp_factorizations}, {"qp_status", qp_status},
          {"qp_polished", qp_polished},     {"kkt_residual", kkt_residual},       {"cost", cost}};
}

HorizonData horizon_data(const MpcSetup& setup, std::int64_t k) {
  const MpcConfig& cfg = setup.config;
  const auto N = static_cast<Eigen::Index>(cfg.N);
  const std::size_t nz = setup.schedule.comfort.size();
  const std::size_t nu = setup.actuators.size();
  HorizonData d;
  d.price.resize(N);
  d.t_min.resize(N, static_cast<Eigen::Index>(nz));
  d.t_max.resize(N, static_cast<Eigen::Index>(nz));
  d.u_lb.resize(N, static_cast<Eigen::Index>(nu));
  d.u_ub.resize(N, static_cast<Eigen::Index>(nu));
  d.rated_kw = Eigen::Map<const Vector>(setup.actuators.rated_kw.data(), static_cast<Eigen::Index>(nu));
  d.slack_penalty = cfg.effective_slack_penalty(setup.actuators, setup.schedule.price);
  for (Eigen::Index i = 0; i < N; ++i) {
    const std::int64_t step = k + i;
    d.price[i] = setup.schedule.price_at(step);
    for (std::size_t z = 0; z < nz; ++z) {
      const ComfortBand b = setup.schedule.band(z, step + 1);
      d.t_min(i, static_cast<Eigen::Index>(z)) = b.t_min;
      d.t_max(i, static_cast<Eigen::Index>(z)) = b.t_max;
    }
    for (std::size_t a = 0; a < nu; ++a) {
      const auto b = input_bounds_at(setup.actuators, setup.schedule, a, step, cfg.ventilation_min);
      d.u_lb(i, static_cast<Eigen::Index>(a)) = b[0];
      d.u_ub(i, static_cast<Eigen::Index>(a)) = b[1];
    }
  }
  return d;
}

namespace {

/// Shift the previous solution one step forward; the last stage repeats the previous last stage.
QpWarmStart shifted_warm_start(const MpcWarmStart& prev, const HorizonQp& qp) {
  QpWarmStart w;
  const HorizonLayout& L = qp.layout;
  if (prev.qp.z.size() != L.num_vars() || (prev.rows.empty() && !L.rows.empty())) return w;
  const std::size_t nz = L.n_zones();
  const auto src = [&](std::size_t k) { return std::min(k + 1, L.N - 1); };
  w.z = Vector::Zero(L.num_vars());
  w.y_box = Vector::Zero(L.num_vars());
  const bool have_box = prev.qp.y_box.size() == L.num_vars();
  for (std::size_t k = 0; k < L.N; ++k) {
    for (std::size_t i = 0; i < L.n_u; ++i) {
      w.z[L.input_index(k, i)] = prev.qp.z[L.input_index(src(k), i)];
      if (have_box) w.y_box[L.input_index(k, i)] = prev.qp.y_box[L.input_index(src(k), i)];
    }
    for (std::size_t j = 0; j < nz; ++j) {
      w.z[L.slack_index(k + 1, j)] = prev.qp.z[L.slack_index(src(k) + 1, j)];
      if (have_box) w.y_box[L.slack_index(k + 1, j)] = prev.qp.y_box[L.slack_index(src(k) + 1, j)];
    }
  }
  w.y_rows = Vector::Zero(static_cast<Eigen::Index>(L.rows.size()));
  if (prev.qp.y_rows.size() == static_cast<Eigen::Index>(prev.rows.size())) {
    std::map<std::tuple<std::size_t, std::size_t, int>, double> old;
    for (std::size_t r = 0; r < prev.rows.size(); ++r) {
      old[{prev.rows[r].stage, prev.rows[r].zone, prev.rows[r].sign}] = prev.qp.y_rows[static_cast<Eigen::Index>(r)];
    }
    for (std::size_t r = 0; r < L.rows.size(); ++r) {
      auto it = old.find({src(L.rows[r].stage - 1) + 1, L.rows[r].zone, L.rows[r].sign});
      if (it != old.end()) w.y_rows[static_cast<Eigen::Index>(r)] = it->second;
    }
  }
  return w;
}

Matrix clamp_rows(const Matrix& u, const Matrix& lo, const Matrix& hi) { return u.cwiseMax(lo).cwiseMin(hi); }

constexpr int kLineSearchHalvings = 7;

/// The horizon QP objective evaluated on the bilinear prediction, with each slack at the band
/// violation it has to cover.
double plan_merit(const DiscreteBilinearModel& m, const Vector& x0, const Matrix& u, const Matrix& v,
                  const HorizonData& data, const MpcConfig& cfg) {
  const double hours = cfg.ts / 3600.0;
  const std::vector<std::size_t>& zones = m.labels.zone_states;
  const Matrix x = simulate(m, x0, u, v);
  double J = 0;
  for (Eigen::Index k = 0; k < u.rows(); ++k) {
    J += data.price[k] * hours * u.row(k).dot(data.rated_kw) + cfg.input_reg * u.row(k).squaredNorm();
    for (std::size_t j = 0; j < zones.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double T = x(k + 1, static_cast<Eigen::Index>(zones[j]));
      const double s = std::max({0.0, data.t_min(k, jj) - T, T - data.t_max(k, jj)});
      J += data.slack_penalty * hours * s + cfg.input_reg * s * s;
    }
  }
  return J;
}

}  // namespace

ControlDecision mpc_step(const MpcSetup& setup, const Vector& x0, const Forecaster& forecaster, std::int64_t k,
                         const MpcWarmStart& warm) {
  if (!setup.model) throw InputError("mpc_step: no model");
  const DiscreteBilinearModel& m = *setup.model;
  const MpcConfig& cfg = setup.config;
  cfg.validate();
  if (std::abs(cfg.ts - m.ts) > 1e-9) throw ValidationError("mpc.Ts", "differs from the model sampling time");
  if (setup.actuators.size() != m.n_u()) throw DimensionError("mpc_step: actuator table does not match the model");
  if (static_cast<std::size_t>(x0.size()) != m.n()) throw DimensionError("mpc_step: state has the wrong size");
  if (k < 0) throw InputError("mpc_step: negative step index");

  const auto N = static_cast<Eigen::Index>(cfg.N);
  const auto nu = static_cast<Eigen::Index>(m.n_u());
  const Matrix v_fore = forecaster.forecast(static_cast<std::size_t>(k), cfg.N);
  if (v_fore.rows() != N || v_fore.cols() != static_cast<Eigen::Index>(m.n_v())) {
    throw DimensionError("mpc_step: forecast window has the wrong shape");
  }
  const HorizonData data = horizon_data(setup, k);

  Matrix u_nom = Matrix::Zero(N, nu);
  if (warm.plan.rows() == N && warm.plan.cols() == nu) u_nom.topRows(N - 1) = warm.plan.bottomRows(N - 1);
  u_nom = clamp_rows(u_nom, data.u_lb, data.u_ub);

  QpSettings qs;
  qs.tol = cfg.qp_tol;
  qs.max_iters = cfg.qp_max_iters;

  ControlDecision out;
  MpcDiagnostics& diag = out.diagnostics;
  QpWarmStart qp_warm;
  bool first = true;
  QpSolution sol;
  std::vector<ComfortRow> rows;
  double merit = m.is_linear() ? 0.0 : plan_merit(m, x0, u_nom, v_fore, data, cfg);
  for (int it = 1; it <= cfg.sl_max_iters; ++it) {
    const LtvModel ltv = linearize_along(m, x0, u_nom, v_fore);
    const HorizonQp qp = build_qp(ltv, x0, m.labels.zone_states, data, cfg);
    if (first && !warm.empty()) qp_warm = shifted_warm_start(warm, qp);
    first = false;
    StagewiseKktSystem kkt = qp.kkt();
    sol = solve_qp(kkt, qp.g, qp.lb, qp.ub, qp.h, qs, qp_warm.z.size() > 0 ? &qp_warm : nullptr);
    if (sol.status == QpStatus::PrimalInfeasible) {
      throw NumericalError("mpc_step: horizon QP reported infeasible at step " + std::to_string(k));
    }
    diag.sl_iterations = it;
    diag.qp_iterations += sol.iterations;
    diag.qp_factorizations += sol.factorizations;

    // Step towards the QP plan, backtracking while the bilinear merit gets worse: the
    // linearization can overshoot, and full steps then cycle between plans.
    const Matrix step = clamp_rows(qp.inputs(sol.z), data.u_lb, data.u_ub) - u_nom;
    qp_warm = {sol.z, sol.y_box, sol.y_rows};
    rows = qp.layout.rows;
    if (m.is_linear()) {
      u_nom += step;
      diag.sl_last_change = step.cwiseAbs().maxCoeff();
      diag.sl_converged = true;
      break;
    }
    double lambda = 1;
    bool accepted = false;
    for (int h = 0; h <= kLineSearchHalvings; ++h, lambda /= 2) {
      const Matrix trial = u_nom + lambda * step;
      const double J = plan_merit(m, x0, trial, v_fore, data, cfg);
      if (J <= merit + 1e-12 * std::abs(merit)) {
        u_nom = trial;
        merit = J;
        accepted = true;
        break;
      }
    }
    diag.sl_last_change = accepted ? lambda * step.cwiseAbs().maxCoeff() : 0.0;
    if (diag.sl_last_change < cfg.sl_tol) {
      diag.sl_converged = true;
      break;
    }
  }
  diag.qp_status = std::string(to_string(sol.status));
  diag.qp_polished = sol.polished;
  diag.kkt_residual = sol.residual.max();
  diag.cost = sol.objective;

  out.planned = u_nom;
  out.u0 = u_nom.row(0).transpose();
  out.predicted = simulate(m, x0, u_nom, v_fore);
  out.warm_start.plan = u_nom;
  out.warm_start.qp = std::move(qp_warm);
  out.warm_start.rows = std::move(rows);
  return out;
}

}  // namespace thermpc
