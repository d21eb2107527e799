#include "thermpc/stagewise_kkt.hpp"

#include "thermpc/errors.hpp"

namespace thermpc {

std::vector<Vector> LtvModel::propagate(const Vector& x0, const Matrix& u) const {
  std::vector<Vector> x{x0};
  x.reserve(horizon() + 1);
  for (std::size_t k = 0; k < horizon(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    x.push_back(A[k] * x.back() + B[k] * u.row(kk).transpose() + c[k]);
  }
  return x;
}

StagewiseKktSystem::StagewiseKktSystem(LtvModel model, HorizonLayout layout, Vector hessian_diagonal)
    : model_(std::move(model)), layout_(std::move(layout)), hdiag_(std::move(hessian_diagonal)) {
  const std::size_t N = layout_.N;
  if (model_.horizon() != N || model_.B.size() != N) throw DimensionError("stagewise KKT: model horizon mismatch");
  if (static_cast<std::size_t>(model_.n_u()) != layout_.n_u) throw DimensionError("stagewise KKT: input count mismatch");
  if (hdiag_.size() != layout_.num_vars()) throw DimensionError("stagewise KKT: Hessian diagonal has the wrong size");
  for (std::size_t z : layout_.zone_states) {
    if (static_cast<Eigen::Index>(z) >= model_.n()) throw DimensionError("stagewise KKT: zone state out of range");
  }
  lower_row_.assign(N + 1, std::vector<std::ptrdiff_t>(layout_.n_zones(), -1));
  upper_row_ = lower_row_;
  for (std::size_t r = 0; r < layout_.rows.size(); ++r) {
    const auto& row = layout_.rows[r];
    if (row.stage < 1 || row.stage > N || row.zone >= layout_.n_zones() || (row.sign != 1 && row.sign != -1)) {
      throw DimensionError("stagewise KKT: malformed comfort row " + std::to_string(r));
    }
    auto& slot = row.sign > 0 ? upper_row_[row.stage][row.zone] : lower_row_[row.stage][row.zone];
    if (slot >= 0) throw DimensionError("stagewise KKT: duplicate comfort row " + std::to_string(r));
    slot = static_cast<std::ptrdiff_t>(r);
  }
}

void StagewiseKktSystem::multiply_G(const Vector& z, Vector& out) const {
  const std::size_t N = layout_.N, nu = layout_.n_u;
  out.resize(num_rows());
  Vector x = Vector::Zero(model_.n());
  for (std::size_t k = 0; k < N; ++k) {
    x = model_.A[k] * x + model_.B[k] * z.segment(layout_.input_index(k, 0), static_cast<Eigen::Index>(nu));
    const std::size_t stage = k + 1;
    for (std::size_t j = 0; j < layout_.n_zones(); ++j) {
      const double T = x[static_cast<Eigen::Index>(layout_.zone_states[j])];
      const double s = z[layout_.slack_index(stage, j)];
      if (lower_row_[stage][j] >= 0) out[lower_row_[stage][j]] = -T - s;
      if (upper_row_[stage][j] >= 0) out[upper_row_[stage][j]] = T - s;
    }
  }
}

void StagewiseKktSystem::multiply_Gt(const Vector& y, Vector& out) const {
  const std::size_t N = layout_.N, nu = layout_.n_u;
  out.setZero(num_vars());
  Vector lambda = Vector::Zero(model_.n());
  for (std::size_t stage = N; stage >= 1; --stage) {
    if (stage < N) lambda = model_.A[stage].transpose() * lambda;
    for (std::size_t j = 0; j < layout_.n_zones(); ++j) {
      const auto zs = static_cast<Eigen::Index>(layout_.zone_states[j]);
      const auto si = layout_.slack_index(stage, j);
      if (lower_row_[stage][j] >= 0) {
        const double yr = y[lower_row_[stage][j]];
        lambda[zs] -= yr;
        out[si] -= yr;
      }
      if (upper_row_[stage][j] >= 0) {
        const double yr = y[upper_row_[stage][j]];
        lambda[zs] += yr;
        out[si] -= yr;
      }
    }
    out.segment(layout_.input_index(stage - 1, 0), static_cast<Eigen::Index>(nu)) = model_.B[stage - 1].transpose() * lambda;
  }
}

void StagewiseKktSystem::factor(double sigma, const Vector& rho_box, const Vector& rho_rows) {
  const std::size_t N = layout_.N, nu = layout_.n_u, nz = layout_.n_zones();
  const Eigen::Index n = model_.n();
  d_ = hdiag_.array() + sigma + rho_box.array();
  rho_rows_ = rho_rows;
  Qz_.assign(N + 1, Vector::Zero(static_cast<Eigen::Index>(nz)));
  for (std::size_t stage = 1; stage <= N; ++stage) {
    for (std::size_t j = 0; j < nz; ++j) {
      const double rl = lower_row_[stage][j] >= 0 ? rho_rows[lower_row_[stage][j]] : 0.0;
      const double ru = upper_row_[stage][j] >= 0 ? rho_rows[upper_row_[stage][j]] : 0.0;
      const double D = rl + ru + d_[layout_.slack_index(stage, j)];
      const double a = rl - ru;
      Qz_[stage][static_cast<Eigen::Index>(j)] = rl + ru - a * a / D;
    }
  }
  Huu_.assign(N, {});
  Hux_.assign(N, {});
  K_.assign(N, {});
  Matrix P = Matrix::Zero(n, n);
  for (std::size_t j = 0; j < nz; ++j) {
    const auto zs = static_cast<Eigen::Index>(layout_.zone_states[j]);
    P(zs, zs) += Qz_[N][static_cast<Eigen::Index>(j)];
  }
  Matrix PB, PA, Huu;
  for (std::size_t k = N; k-- > 0;) {
    const Matrix& A = model_.A[k];
    const Matrix& B = model_.B[k];
    PB.noalias() = P * B;
    PA.noalias() = P * A;
    Huu.noalias() = B.transpose() * PB;
    Huu.diagonal() += d_.segment(layout_.input_index(k, 0), static_cast<Eigen::Index>(nu));
    Hux_[k].noalias() = B.transpose() * PA;
    Huu_[k].compute(Huu);
    if (Huu_[k].info() != Eigen::Success) throw NumericalError("stagewise KKT: stage Hessian is not positive definite");
    K_[k] = -Huu_[k].solve(Hux_[k]);
    if (k == 0) break;
    Matrix Pn = A.transpose() * PA;
    Pn.noalias() += Hux_[k].transpose() * K_[k];
    for (std::size_t j = 0; j < nz; ++j) {
      const auto zs = static_cast<Eigen::Index>(layout_.zone_states[j]);
      Pn(zs, zs) += Qz_[k][static_cast<Eigen::Index>(j)];
    }
    P = 0.5 * (Pn + Pn.transpose());
  }
}

void StagewiseKktSystem::solve(const Vector& rhs, Vector& out) const {
  const std::size_t N = layout_.N, nu = layout_.n_u, nz = layout_.n_zones();
  const Eigen::Index n = model_.n();
  const auto NU = static_cast<Eigen::Index>(nu);

  // Linear zone-state terms left after eliminating the slacks.
  const auto add_q = [&](std::size_t stage, Vector& p) {
    for (std::size_t j = 0; j < nz; ++j) {
      const double rl = lower_row_[stage][j] >= 0 ? rho_rows_[lower_row_[stage][j]] : 0.0;
      const double ru = upper_row_[stage][j] >= 0 ? rho_rows_[upper_row_[stage][j]] : 0.0;
      const auto si = layout_.slack_index(stage, j);
      const double D = rl + ru + d_[si];
      p[static_cast<Eigen::Index>(layout_.zone_states[j])] += (rl - ru) * rhs[si] / D;
    }
  };

  std::vector<Vector> kappa(N);
  Vector p = Vector::Zero(n);
  add_q(N, p);
  for (std::size_t k = N; k-- > 0;) {
    const Vector hu = model_.B[k].transpose() * p - rhs.segment(layout_.input_index(k, 0), NU);
    kappa[k] = -Huu_[k].solve(hu);
    if (k == 0) break;
    Vector pn = model_.A[k].transpose() * p + Hux_[k].transpose() * kappa[k];
    add_q(k, pn);
    p = std::move(pn);
  }

  out.resize(num_vars());
  Vector x = Vector::Zero(n);
  for (std::size_t k = 0; k < N; ++k) {
    const Vector u = K_[k] * x + kappa[k];
    out.segment(layout_.input_index(k, 0), NU) = u;
    x = model_.A[k] * x + model_.B[k] * u;
    const std::size_t stage = k + 1;
    for (std::size_t j = 0; j < nz; ++j) {
      const double rl = lower_row_[stage][j] >= 0 ? rho_rows_[lower_row_[stage][j]] : 0.0;
      const double ru = upper_row_[stage][j] >= 0 ? rho_rows_[upper_row_[stage][j]] : 0.0;
      const auto si = layout_.slack_index(stage, j);
      const double D = rl + ru + d_[si];
      const double T = x[static_cast<Eigen::Index>(layout_.zone_states[j])];
      out[si] = (rhs[si] - (rl - ru) * T) / D;
    }
  }
}

Matrix StagewiseKktSystem::dense_G() const {
  const std::size_t N = layout_.N, nz = layout_.n_zones();
  Matrix G = Matrix::Zero(num_rows(), num_vars());
  const auto NU = static_cast<Eigen::Index>(layout_.n_u);
  Vector v;
  for (std::size_t stage = 1; stage <= N; ++stage) {
    for (std::size_t j = 0; j < nz; ++j) {
      const auto lo = lower_row_[stage][j], up = upper_row_[stage][j];
      if (lo < 0 && up < 0) continue;
      // Row of d T_j(stage) / d u, by a backward sweep.
      Eigen::RowVectorXd sens = Eigen::RowVectorXd::Zero(num_vars());
      v = Vector::Unit(model_.n(), static_cast<Eigen::Index>(layout_.zone_states[j]));
      for (std::size_t i = stage; i-- > 0;) {
        sens.segment(layout_.input_index(i, 0), NU) = v.transpose() * model_.B[i];
        if (i > 0) v = model_.A[i].transpose() * v;
      }
      const auto si = layout_.slack_index(stage, j);
      if (lo >= 0) {
        G.row(lo) = -sens;
        G(lo, si) = -1;
      }
      if (up >= 0) {
        G.row(up) = sens;
        G(up, si) = -1;
      }
    }
  }
  return G;
}

void StagewiseKktSystem::scaled_norms(const Vector& d, const Vector& e, Vector& h_cols, Vector& g_cols,
                                      Vector& g_rows) const {
  if (abs_G_.size() == 0 && num_rows() > 0) abs_G_ = dense_G().cwiseAbs();
  h_cols = hdiag_.cwiseAbs().cwiseProduct(d).cwiseProduct(d);
  g_cols = Vector::Zero(num_vars());
  g_rows = Vector::Zero(num_rows());
  if (num_rows() == 0) return;
  for (Eigen::Index j = 0; j < abs_G_.cols(); ++j) {
    const auto col = abs_G_.col(j).cwiseProduct(e);
    g_cols[j] = col.maxCoeff() * d[j];
    g_rows = g_rows.cwiseMax(col * d[j]);
  }
}

}  // namespace thermpc
