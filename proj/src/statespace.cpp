#include "thermpc/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "thermpc/errors.hpp"
#include "thermpc/log.hpp"

namespace thermpc {

using nlohmann::json;

// ---------------------------------------------------------------------------
// continuous model

double ContinuousBilinearModel::conservation_defect() const {
  double worst = 0;
  for (Eigen::Index i = 0; i < Ac.rows(); ++i) {
    double sum = Ac.row(i).sum();
    for (std::size_t c : labels.boundary_channels) sum += Bvc(i, static_cast<Eigen::Index>(c));
    const double scale = std::max(std::abs(Ac(i, i)), 1e-300);
    worst = std::max(worst, std::abs(sum) / scale);
  }
  return worst;
}

void ContinuousBilinearModel::check_invariants() const {
  const auto nn = static_cast<Eigen::Index>(n());
  if (Ac.cols() != nn || Buc.rows() != nn || Bvc.rows() != nn || dc.size() != nn ||
      Buc.cols() != static_cast<Eigen::Index>(n_u()) || Bvuc.size() != n_u()) {
    throw DimensionError("continuous model blocks have inconsistent dimensions");
  }
  for (std::size_t i = 0; i < n_u(); ++i) {
    if (Bxuc[i].rows() != nn || Bxuc[i].cols() != nn || Bvuc[i].rows() != nn || Bvuc[i].cols() != Bvc.cols()) {
      throw DimensionError("bilinear block " + std::to_string(i) + " has inconsistent dimensions");
    }
  }
  for (Eigen::Index i = 0; i < nn; ++i) {
    if (Ac(i, i) > 0) throw NumericalError("Ac has a positive diagonal entry at row " + std::to_string(i));
    for (Eigen::Index j = 0; j < nn; ++j) {
      if (i != j && Ac(i, j) < 0) throw NumericalError("Ac is not Metzler at (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
  }
  if (conservation_defect() > 1e-9) {
    throw NumericalError("thermal-equilibrium conservation violated (defect " + std::to_string(conservation_defect()) + ")");
  }
}

ContinuousBilinearModel assemble(const RcNetwork& net, const BuildingDescription& desc) {
  const auto n = static_cast<Eigen::Index>(net.size());
  const auto nu = static_cast<Eigen::Index>(desc.actuators.size());
  const auto nv = static_cast<Eigen::Index>(desc.disturbances.size());

  ContinuousBilinearModel m;
  m.Ac = Matrix::Zero(n, n);
  m.Buc = Matrix::Zero(n, nu);
  m.Bvc = Matrix::Zero(n, nv);
  m.dc = Vector::Zero(n);
  m.Bxuc.assign(static_cast<std::size_t>(nu), Matrix::Zero(n, n));
  m.Bvuc.assign(static_cast<std::size_t>(nu), Matrix::Zero(n, nv));

  const auto ambient = desc.channel_of_kind(ChannelKind::AmbientTemperature);
  const auto ground = desc.channel_of_kind(ChannelKind::GroundTemperature);

  auto cap = [&](std::size_t i) { return net.nodes[i].capacitance; };
  for (const auto& c : net.conductances) {
    const auto a = static_cast<Eigen::Index>(c.a);
    m.Ac(a, a) -= c.value / cap(c.a);
    if (c.b.is_node()) {
      const auto b = static_cast<Eigen::Index>(c.b.node);
      m.Ac(a, b) += c.value / cap(c.a);
      m.Ac(b, b) -= c.value / cap(c.b.node);
      m.Ac(b, a) += c.value / cap(c.b.node);
    } else {
      const auto channel = c.b.kind == Endpoint::Kind::Ambient ? ambient : ground;
      if (!channel) throw ValidationError("disturbances", "missing boundary temperature channel");
      m.Bvc(a, static_cast<Eigen::Index>(*channel)) += c.value / cap(c.a);
    }
  }

  for (const auto& inj : net.injections) {
    const auto z = static_cast<Eigen::Index>(inj.node);
    const double c = cap(inj.node);
    switch (inj.source) {
      case FluxInjection::Source::Actuator: {
        const auto& act = desc.actuators[inj.index];
        const auto src = static_cast<Eigen::Index>(desc.channel_index(act.reference_signal));
        m.Bxuc[inj.index](z, z) -= inj.coefficient / c;
        m.Bvuc[inj.index](z, src) += inj.coefficient / c;
        break;
      }
      case FluxInjection::Source::Solar:
      case FluxInjection::Source::InternalGain:
        m.Bvc(z, static_cast<Eigen::Index>(inj.index)) += inj.coefficient / c;
        break;
    }
  }

  for (const auto& node : net.nodes) m.labels.states.push_back(node.label);
  for (const auto& a : desc.actuators) m.labels.inputs.push_back(a.id);
  for (const auto& ch : desc.disturbances) m.labels.disturbances.push_back(ch.name);
  for (std::size_t i = 0; i < net.zone_count; ++i) m.labels.zone_states.push_back(i);
  if (ambient) m.labels.boundary_channels.push_back(*ambient);
  if (ground) m.labels.boundary_channels.push_back(*ground);
  std::sort(m.labels.boundary_channels.begin(), m.labels.boundary_channels.end());
  m.labels.node_time_constants.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m.labels.node_time_constants(i) = cap(static_cast<std::size_t>(i)) / net.total_conductance(static_cast<std::size_t>(i));
  }

  m.check_invariants();
  return m;
}

// ---------------------------------------------------------------------------
// discretization

DiscreteBilinearModel discretize(const ContinuousBilinearModel& cont, double ts, int substeps) {
  if (!(ts > 0)) throw InputError("sampling time must be > 0");
  if (substeps < 1) throw InputError("substeps must be >= 1");
  const auto n = static_cast<Eigen::Index>(cont.n());
  const std::size_t nu = cont.n_u();
  const double h = ts / substeps;

  // Worst-case diagonal over the input box: every actuator fully open.
  Vector worst_diag = cont.Ac.diagonal();
  for (const auto& b : cont.Bxuc) worst_diag += b.diagonal().cwiseMin(0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (worst_diag(i) >= 0) continue;
    const double tau = -1.0 / worst_diag(i);
    if (!(h < 2.0 * tau)) {
      std::ostringstream msg;
      msg << "forward-Euler step " << h << " s is unstable: node '" << cont.labels.states[static_cast<std::size_t>(i)]
          << "' has time constant " << tau << " s (limit h < " << 2.0 * tau << " s); increase substeps";
      throw InstabilityError(msg.str());
    }
  }

  const Matrix I = Matrix::Identity(n, n);
  const Matrix F0 = I + h * cont.Ac;

  DiscreteBilinearModel m;
  m.ts = ts;
  m.substeps = substeps;
  m.labels = cont.labels;
  m.A = I;
  m.Bu = Matrix::Zero(n, cont.Buc.cols());
  m.Bv = Matrix::Zero(n, cont.Bvc.cols());
  m.d = Vector::Zero(n);
  m.Bxu.assign(nu, Matrix::Zero(n, n));
  m.Bvu.assign(nu, Matrix::Zero(n, cont.Bvc.cols()));

  // Each substep advances every block with the same Euler map; products of a bilinear
  // block with the accumulated A, Bv and d keep the terms that stay first order in u.
  for (int s = 0; s < substeps; ++s) {
    for (std::size_t i = 0; i < nu; ++i) {
      Matrix bxu = F0 * m.Bxu[i] + h * cont.Bxuc[i] * m.A;
      Matrix bvu = F0 * m.Bvu[i] + h * cont.Bvuc[i] + h * cont.Bxuc[i] * m.Bv;
      m.Bxu[i] = std::move(bxu);
      m.Bvu[i] = std::move(bvu);
    }
    Matrix bu = F0 * m.Bu + h * cont.Buc;
    for (std::size_t i = 0; i < nu; ++i) bu.col(static_cast<Eigen::Index>(i)) += h * cont.Bxuc[i] * m.d;
    m.Bu = std::move(bu);
    m.Bv = F0 * m.Bv + h * cont.Bvc;
    m.d = F0 * m.d + h * cont.dc;
    m.A = F0 * m.A;
  }

  const double rho = m.spectral_radius();
  if (rho > 1.0 + 1e-9) {
    throw InstabilityError("discrete model has spectral radius " + std::to_string(rho) + " > 1");
  }
  return m;
}

DiscreteBilinearModel build_model(const BuildingDescription& desc, double ts, int substeps, double capacitance_scale) {
  RcNetwork net = build_rc_network(desc);
  if (capacitance_scale != 1.0) net = scale_capacitances(std::move(net), capacitance_scale);
  return discretize(assemble(net, desc), ts, substeps);
}

bool DiscreteBilinearModel::is_linear() const {
  for (const auto& b : Bxu) {
    if (!b.isZero(0.0)) return false;
  }
  for (const auto& b : Bvu) {
    if (!b.isZero(0.0)) return false;
  }
  return true;
}

double DiscreteBilinearModel::spectral_radius() const {
  if (A.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(A, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// update law

Vector step(const DiscreteBilinearModel& m, const Vector& x, const Vector& u_in, const Vector& v) {
  if (x.size() != static_cast<Eigen::Index>(m.n()) || u_in.size() != static_cast<Eigen::Index>(m.n_u()) ||
      v.size() != static_cast<Eigen::Index>(m.n_v())) {
    std::ostringstream msg;
    msg << "step: expected x[" << m.n() << "], u[" << m.n_u() << "], v[" << m.n_v() << "] but got x[" << x.size()
        << "], u[" << u_in.size() << "], v[" << v.size() << "]";
    throw DimensionError(msg.str());
  }
  if (!x.allFinite() || !u_in.allFinite() || !v.allFinite()) throw NumericalError("step: non-finite input");

  Vector u = u_in;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double violation = std::max(u(i) - 1.0, -u(i));
    if (violation <= 0) continue;
    if (violation < 1e-9) {
      log::warn("step: input " + m.labels.inputs.at(static_cast<std::size_t>(i)) + " clamped into [0, 1]");
      u(i) = std::clamp(u(i), 0.0, 1.0);
    } else {
      throw InputError("step: input " + std::to_string(i) + " = " + std::to_string(u(i)) + " outside [0, 1]");
    }
  }

  Vector next = m.A * x + m.Bu * u + m.Bv * v + m.d;
  for (std::size_t i = 0; i < m.n_u(); ++i) {
    const double ui = u(static_cast<Eigen::Index>(i));
    if (ui == 0.0) continue;
    next.noalias() += ui * (m.Bxu[i] * x);
    next.noalias() += ui * (m.Bvu[i] * v);
  }
  return next;
}

Matrix simulate(const DiscreteBilinearModel& m, const Vector& x0, const Matrix& u_seq, const Matrix& v_seq) {
  if (u_seq.rows() != v_seq.rows()) {
    throw DimensionError("simulate: u_seq has " + std::to_string(u_seq.rows()) + " rows but v_seq has " +
                         std::to_string(v_seq.rows()));
  }
  const Eigen::Index T = u_seq.rows();
  Matrix traj(T + 1, x0.size());
  traj.row(0) = x0.transpose();
  Vector x = x0;
  for (Eigen::Index k = 0; k < T; ++k) {
    x = step(m, x, u_seq.row(k).transpose(), v_seq.row(k).transpose());
    traj.row(k + 1) = x.transpose();
  }
  return traj;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) throw InputError("model." + name + ": wrong row count");
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw InputError("model." + name + ": row " + std::to_string(i) + " has the wrong length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) M(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return M;
}

}  // namespace

json to_json(const DiscreteBilinearModel& m) {
  json j;
  j["Ts"] = m.ts;
  j["substeps"] = m.substeps;
  j["n"] = m.n();
  j["n_u"] = m.n_u();
  j["n_v"] = m.n_v();
  j["state_labels"] = m.labels.states;
  j["input_labels"] = m.labels.inputs;
  j["disturbance_labels"] = m.labels.disturbances;
  j["zone_states"] = m.labels.zone_states;
  j["boundary_channels"] = m.labels.boundary_channels;
  j["node_time_constants_s"] = std::vector<double>(m.labels.node_time_constants.data(),
                                                   m.labels.node_time_constants.data() + m.labels.node_time_constants.size());
  j["A"] = matrix_to_json(m.A);
  j["Bu"] = matrix_to_json(m.Bu);
  j["Bv"] = matrix_to_json(m.Bv);
  j["d"] = std::vector<double>(m.d.data(), m.d.data() + m.d.size());
  j["Bxu"] = json::array();
  for (const auto& b : m.Bxu) j["Bxu"].push_back(matrix_to_json(b));
  j["Bvu"] = json::array();
  for (const auto& b : m.Bvu) j["Bvu"].push_back(matrix_to_json(b));
  return j;
}

DiscreteBilinearModel model_from_json(const json& j) {
  try {
    DiscreteBilinearModel m;
    m.ts = j.at("Ts").get<double>();
    m.substeps = j.at("substeps").get<int>();
    m.labels.states = j.at("state_labels").get<std::vector<std::string>>();
    m.labels.inputs = j.at("input_labels").get<std::vector<std::string>>();
    m.labels.disturbances = j.at("disturbance_labels").get<std::vector<std::string>>();
    m.labels.zone_states = j.at("zone_states").get<std::vector<std::size_t>>();
    m.labels.boundary_channels = j.value("boundary_channels", std::vector<std::size_t>{});
    const auto tc = j.value("node_time_constants_s", std::vector<double>{});
    m.labels.node_time_constants = Eigen::Map<const Vector>(tc.data(), static_cast<Eigen::Index>(tc.size()));
    const auto n = static_cast<Eigen::Index>(m.labels.states.size());
    const auto nu = static_cast<Eigen::Index>(m.labels.inputs.size());
    const auto nv = static_cast<Eigen::Index>(m.labels.disturbances.size());
    m.A = matrix_from_json(j.at("A"), n, n, "A");
    m.Bu = matrix_from_json(j.at("Bu"), n, nu, "Bu");
    m.Bv = matrix_from_json(j.at("Bv"), n, nv, "Bv");
    const auto d = j.at("d").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(d.size()) != n) throw InputError("model.d: wrong length");
    m.d = Eigen::Map<const Vector>(d.data(), n);
    if (j.at("Bxu").size() != static_cast<std::size_t>(nu) || j.at("Bvu").size() != static_cast<std::size_t>(nu)) {
      throw InputError("model: Bxu/Bvu must hold one matrix per input");
    }
    for (Eigen::Index i = 0; i < nu; ++i) {
      m.Bxu.push_back(matrix_from_json(j.at("Bxu")[static_cast<std::size_t>(i)], n, n, "Bxu"));
      m.Bvu.push_back(matrix_from_json(j.at("Bvu")[static_cast<std::size_t>(i)], n, nv, "Bvu"));
    }
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("model document: ") + e.what());
  }
}

}  // namespace thermpc
