#pragma once

#include <cstddef>
#include <vector>

#include "thermpc/qp.hpp"

namespace thermpc {

/// x[k+1] = A_k x[k] + B_k u[k] + c_k, k = 0..N-1.
struct LtvModel {
  std::vector<Matrix> A;
  std::vector<Matrix> B;
  std::vector<Vector> c;

  std::size_t horizon() const { return A.size(); }
  Eigen::Index n() const { return A.empty() ? 0 : A.front().rows(); }
  Eigen::Index n_u() const { return B.empty() ? 0 : B.front().cols(); }
  /// States x[0..N] from x0 under inputs u (N x n_u).
  std::vector<Vector> propagate(const Vector& x0, const Matrix& u) const;
};

/// One comfort row: sign * T_zone[k] - s[k, zone] <= h, sign = -1 for the lower band edge.
struct ComfortRow {
  std::size_t stage = 0;  // 1..N
  std::size_t zone = 0;
  int sign = 1;
};

/// Decision vector layout z = (u[0..N-1] flattened, s[1..N] per zone).
struct HorizonLayout {
  std::size_t N = 0;
  std::size_t n_u = 0;
  std::vector<std::size_t> zone_states;
  std::vector<ComfortRow> rows;

  std::size_t n_zones() const { return zone_states.size(); }
  Eigen::Index num_vars() const { return static_cast<Eigen::Index>(N * (n_u + n_zones())); }
  Eigen::Index input_index(std::size_t k, std::size_t i) const { return static_cast<Eigen::Index>(k * n_u + i); }
  Eigen::Index slack_index(std::size_t stage, std::size_t zone) const {
    return static_cast<Eigen::Index>(N * n_u + (stage - 1) * n_zones() + zone);
  }
};

/// KKT backend for horizon QPs with diagonal Hessian: eliminates the slacks per stage and runs a
/// Riccati recursion over the time-varying dynamics, so each factorization and solve is linear in N.
class StagewiseKktSystem final : public KktSystem {
 public:
  StagewiseKktSystem(LtvModel model, HorizonLayout layout, Vector hessian_diagonal);

  Eigen::Index num_vars() const override { return layout_.num_vars(); }
  Eigen::Index num_rows() const override { return static_cast<Eigen::Index>(layout_.rows.size()); }
  void multiply_H(const Vector& z, Vector& out) const override { out = hdiag_.cwiseProduct(z); }
  void multiply_G(const Vector& z, Vector& out) const override;
  void multiply_Gt(const Vector& y, Vector& out) const override;
  void factor(double sigma, const Vector& rho_box, const Vector& rho_rows) override;
  void solve(const Vector& rhs, Vector& out) const override;
  void scaled_norms(const Vector& d, const Vector& e, Vector& h_cols, Vector& g_cols, Vector& g_rows) const override;

  /// Explicit G, for checks and the dense route.
  Matrix dense_G() const;

 private:
  LtvModel model_;
  HorizonLayout layout_;
  Vector hdiag_;
  std::vector<std::vector<std::ptrdiff_t>> lower_row_, upper_row_;  // [stage][zone] -> row or -1
  mutable Matrix abs_G_;  // built on first use by scaled_norms

  // factorization
  Vector d_;                 // diagonal of H + sigma I + diag(rho_box)
  Vector rho_rows_;
  std::vector<Vector> Qz_;   // [stage] reduced zone-state weight
  std::vector<Eigen::LLT<Matrix>> Huu_;
  std::vector<Matrix> Hux_;
  std::vector<Matrix> K_;
};

}  // namespace thermpc
