#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <memory>
#include <string_view>

#include <Eigen/Dense>

namespace thermpc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// minimize 0.5 z'Hz + g'z  subject to  lb <= z <= ub,  G z <= h.
struct QpProblem {
  Matrix H;
  Vector g;
  Vector lb;
  Vector ub;
  Matrix G;
  Vector h;

  Eigen::Index num_vars() const { return g.size(); }
  Eigen::Index num_rows() const { return h.size(); }
  /// Dimensions, symmetry of H (1e-12), finite rows, lb <= ub. Throws on violation.
  void validate() const;
  double objective(const Vector& z) const { return 0.5 * z.dot(H * z) + g.dot(z); }
};

struct QpSettings {
  double tol = 1e-6;       // each KKT residual component, infinity norm
  int max_iters = 20000;
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;      // over-relaxation
  bool adaptive_rho = true;
  int rho_update_interval = 100;  // minimum iterations between rho updates
  int scaling_iters = 10;         // Ruiz equilibration passes, 0 disables
  int check_interval = 10;
  bool polish = true;
  double polish_delta = 1e-6;
  int polish_refine_iters = 10;
  double infeasibility_tol = 1e-5;
};

enum class QpStatus { Solved, MaxIterations, PrimalInfeasible };
std::string_view to_string(QpStatus s);

struct KktResidual {
  double stationarity = kInf;
  double primal = kInf;
  double complementarity = kInf;

  double max() const { return std::max({stationarity, primal, complementarity}); }
};

/// Multipliers follow the sign convention y > 0 at an active upper bound, y < 0 at an
/// active lower bound, so stationarity reads H z + g + y_box + G' y_rows = 0.
struct QpSolution {
  Vector z;
  Vector y_box;
  Vector y_rows;
  QpStatus status = QpStatus::MaxIterations;
  int iterations = 0;
  int factorizations = 0;
  bool polished = false;
  KktResidual residual;
  double objective = 0;

  bool converged() const { return status == QpStatus::Solved; }
};

struct QpWarmStart {
  Vector z;
  Vector y_box;
  Vector y_rows;
};

/// Linear algebra behind the splitting iteration: products with H, G, G' and solves with
/// H + sigma I + diag(rho_box) + G' diag(rho_rows) G. Backends may exploit problem structure.
class KktSystem {
 public:
  virtual ~KktSystem() = default;
  virtual Eigen::Index num_vars() const = 0;
  virtual Eigen::Index num_rows() const = 0;
  virtual void multiply_H(const Vector& z, Vector& out) const = 0;
  virtual void multiply_G(const Vector& z, Vector& out) const = 0;
  virtual void multiply_Gt(const Vector& y, Vector& out) const = 0;
  virtual void factor(double sigma, const Vector& rho_box, const Vector& rho_rows) = 0;
  virtual void solve(const Vector& rhs, Vector& out) const = 0;
  /// Column infinity norms of diag(d) H diag(d) and diag(e) G diag(d), and row norms of the latter.
  virtual void scaled_norms(const Vector& d, const Vector& e, Vector& h_cols, Vector& g_cols, Vector& g_rows) const = 0;
};

/// Dense Cholesky backend; works for any QpProblem.
class DenseKktSystem final : public KktSystem {
 public:
  explicit DenseKktSystem(const QpProblem& p);
  Eigen::Index num_vars() const override { return H_.rows(); }
  Eigen::Index num_rows() const override { return G_.rows(); }
  void multiply_H(const Vector& z, Vector& out) const override { out.noalias() = H_ * z; }
  void multiply_G(const Vector& z, Vector& out) const override { out.noalias() = G_ * z; }
  void multiply_Gt(const Vector& y, Vector& out) const override { out.noalias() = G_.transpose() * y; }
  void factor(double sigma, const Vector& rho_box, const Vector& rho_rows) override;
  void solve(const Vector& rhs, Vector& out) const override;
  void scaled_norms(const Vector& d, const Vector& e, Vector& h_cols, Vector& g_cols, Vector& g_rows) const override;

 private:
  const Matrix& H_;
  const Matrix& G_;
  Eigen::LDLT<Matrix> ldlt_;
};

/// Splitting iteration on an arbitrary backend.
QpSolution solve_qp(KktSystem& kkt, const Vector& g, const Vector& lb, const Vector& ub, const Vector& h,
                    const QpSettings& settings = {}, const QpWarmStart* warm = nullptr);

/// Validates `p` and solves it with the dense backend.
QpSolution solve_qp(const QpProblem& p, const QpSettings& settings = {}, const QpWarmStart* warm = nullptr);

/// KKT residual of a primal/dual pair (see QpSolution for the multiplier convention).
KktResidual kkt_residual(const KktSystem& kkt, const Vector& g, const Vector& lb, const Vector& ub, const Vector& h,
                         const Vector& z, const Vector& y_box, const Vector& y_rows);

}  // namespace thermpc
