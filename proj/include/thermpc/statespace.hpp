#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "thermpc/building.hpp"
#include "thermpc/rc_network.hpp"

namespace thermpc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Names and structural indices shared by the continuous and discrete models.
struct ModelLabels {
  std::vector<std::string> states;
  std::vector<std::string> inputs;
  std::vector<std::string> disturbances;
  std::vector<std::size_t> zone_states;         // state index of each zone air node, zone order
  std::vector<std::size_t> boundary_channels;   // ambient/ground columns of v
  Vector node_time_constants;                   // C_i / sum of passive conductances, seconds

  friend bool operator==(const ModelLabels&, const ModelLabels&) = default;
};

/// dx/dt = Ac x + Buc u + sum_i Bxuc_i x u_i + Bvc v + sum_i Bvuc_i v u_i + dc
struct ContinuousBilinearModel {
  Matrix Ac;
  Matrix Buc;
  std::vector<Matrix> Bxuc;
  Matrix Bvc;
  std::vector<Matrix> Bvuc;
  Vector dc;
  ModelLabels labels;

  std::size_t n() const { return static_cast<std::size_t>(Ac.rows()); }
  std::size_t n_u() const { return Bxuc.size(); }
  std::size_t n_v() const { return static_cast<std::size_t>(Bvc.cols()); }

  /// Metzler structure, dimension consistency and per-row thermal-equilibrium conservation.
  void check_invariants() const;
  /// Max over rows of |sum_j Ac(i,j) + sum_{boundary c} Bvc(i,c)| relative to the row scale.
  double conservation_defect() const;
};

/// x[k+1] = A x + Bu u + sum_i Bxu_i x u_i + Bv v + sum_i Bvu_i v u_i + d
struct DiscreteBilinearModel {
  Matrix A;
  Matrix Bu;
  std::vector<Matrix> Bxu;
  Matrix Bv;
  std::vector<Matrix> Bvu;
  Vector d;
  double ts = 600;
  int substeps = 1;
  ModelLabels labels;

  std::size_t n() const { return static_cast<std::size_t>(A.rows()); }
  std::size_t n_u() const { return Bxu.size(); }
  std::size_t n_v() const { return static_cast<std::size_t>(Bv.cols()); }

  /// True when every Bxu_i and Bvu_i is zero.
  bool is_linear() const;
  double spectral_radius() const;
};

ContinuousBilinearModel assemble(const RcNetwork& net, const BuildingDescription& desc);

/// Sub-stepped forward Euler with u and v held over ts. Throws InstabilityError when
/// ts / substeps >= 2 * min_i C_i / (sum of conductances and actuator gains at node i).
DiscreteBilinearModel discretize(const ContinuousBilinearModel& cont, double ts, int substeps);

/// Convenience: parse-free path from a description to the discrete model.
DiscreteBilinearModel build_model(const BuildingDescription& desc, double ts = 600, int substeps = 10,
                                  double capacitance_scale = 1.0);

/// One application of the update law. Inputs within 1e-9 of [0, 1] are clamped with a warning.
Vector step(const DiscreteBilinearModel& m, const Vector& x, const Vector& u, const Vector& v);

/// Rows of the result are states 0..T; u_seq is T x n_u and v_seq is T x n_v.
Matrix simulate(const DiscreteBilinearModel& m, const Vector& x0, const Matrix& u_seq, const Matrix& v_seq);

nlohmann::json to_json(const DiscreteBilinearModel& m);
DiscreteBilinearModel model_from_json(const nlohmann::json& j);

}  // namespace thermpc
