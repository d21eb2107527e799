#include "thermpc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <functional>
#include <vector>

#include "thermpc/errors.hpp"

namespace thermpc {

std::string_view to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Solved: return "solved";
    case QpStatus::MaxIterations: return "max_iterations";
    case QpStatus::PrimalInfeasible: return "primal_infeasible";
  }
  return "unknown";
}

void QpProblem::validate() const {
  const Eigen::Index n = g.size();
  const auto dims = [](const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); };
  if (H.rows() != n || H.cols() != n) throw DimensionError("QP: H is " + dims(H) + ", expected " + std::to_string(n) + " square");
  if (lb.size() != n || ub.size() != n) throw DimensionError("QP: bound vectors must have " + std::to_string(n) + " entries");
  if (G.rows() != h.size()) throw DimensionError("QP: G has " + std::to_string(G.rows()) + " rows but h has " + std::to_string(h.size()));
  if (G.rows() > 0 && G.cols() != n) throw DimensionError("QP: G is " + dims(G) + ", expected " + std::to_string(n) + " columns");
  if (!H.allFinite() || !g.allFinite()) throw InputError("QP: H and g must be finite");
  if (!G.allFinite() || !h.allFinite()) throw InputError("QP: inequality rows must be finite");
  if (n > 0) {
    const double asym = (H - H.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, H.cwiseAbs().maxCoeff())) {
      throw InputError("QP: H is not symmetric (max asymmetry " + std::to_string(asym) + ")");
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isnan(lb[i]) || std::isnan(ub[i]) || lb[i] == kInf || ub[i] == -kInf || lb[i] > ub[i]) {
      throw InputError("QP: invalid bounds on variable " + std::to_string(i));
    }
  }
}

DenseKktSystem::DenseKktSystem(const QpProblem& p) : H_(p.H), G_(p.G) {}

void DenseKktSystem::factor(double sigma, const Vector& rho_box, const Vector& rho_rows) {
  Matrix M = H_;
  M.diagonal().array() += sigma + rho_box.array();
  if (G_.rows() > 0) {
    const Matrix weighted = G_.array().colwise() * rho_rows.array();
    M.noalias() += G_.transpose() * weighted;
  }
  ldlt_.compute(M);
  if (ldlt_.info() != Eigen::Success) throw NumericalError("QP: KKT factorization failed");
}

void DenseKktSystem::solve(const Vector& rhs, Vector& out) const { out = ldlt_.solve(rhs); }

void DenseKktSystem::scaled_norms(const Vector& d, const Vector& e, Vector& h_cols, Vector& g_cols,
                                  Vector& g_rows) const {
  const Eigen::Index n = H_.rows(), m = G_.rows();
  h_cols = Vector::Zero(n);
  g_cols = Vector::Zero(n);
  g_rows = Vector::Zero(m);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (n > 0) h_cols[j] = H_.col(j).cwiseAbs().cwiseProduct(d).maxCoeff() * d[j];
    if (m > 0) {
      const Vector col = G_.col(j).cwiseAbs().cwiseProduct(e) * d[j];
      g_cols[j] = col.maxCoeff();
      g_rows = g_rows.cwiseMax(col);
    }
  }
}

namespace {

constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kEqualityScale = 1e3;
constexpr int kPolishGap = 50;
constexpr int kPolishRepairs = 10;

double inf_norm(const Vector& v) { return v.size() > 0 ? v.lpNorm<Eigen::Infinity>() : 0.0; }

struct Evaluation {
  KktResidual residual;
  Vector Hz, Gz, Aty;
};

Evaluation evaluate(const KktSystem& kkt, const Vector& g, const Vector& lb, const Vector& ub, const Vector& h,
                    const Vector& z, const Vector& y_box, const Vector& y_rows) {
  Evaluation e;
  kkt.multiply_H(z, e.Hz);
  e.Aty = y_box;
  if (h.size() > 0) {
    Vector Gty;
    kkt.multiply_Gt(y_rows, Gty);
    e.Aty += Gty;
    kkt.multiply_G(z, e.Gz);
  } else {
    e.Gz.resize(0);
  }
  e.residual.stationarity = inf_norm(e.Hz + g + e.Aty);

  double primal = 0, comp = 0;
  const auto term = [](double y, double gap_upper, double gap_lower) {
    if (y > 0) return std::isinf(gap_upper) ? y : y * std::abs(gap_upper);
    if (y < 0) return std::isinf(gap_lower) ? -y : -y * std::abs(gap_lower);
    return 0.0;
  };
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    primal = std::max({primal, lb[i] - z[i], z[i] - ub[i]});
    comp = std::max(comp, term(y_box[i], ub[i] - z[i], z[i] - lb[i]));
  }
  for (Eigen::Index r = 0; r < h.size(); ++r) {
    primal = std::max(primal, e.Gz[r] - h[r]);
    comp = std::max(comp, term(y_rows[r], h[r] - e.Gz[r], kInf));
  }
  e.residual.primal = primal;
  e.residual.complementarity = comp;
  return e;
}

struct Iterate {
  Vector x, y_box, y_rows;
  KktResidual residual;
};

/// Residual of an iterate measured on the original, unscaled problem.
using ResidualFn = std::function<KktResidual(const Iterate&)>;

/// Ruiz equilibration: the solver works on zs = z / d, rows scaled by e, cost scaled by c. Box
/// rows scaled by b enter as per-variable weights (b d)^2 on rho_box.
struct Scaling {
  Vector d, e, box_weight;
  double c = 1;

  static Scaling identity(Eigen::Index n, Eigen::Index m) {
    return {Vector::Ones(n), Vector::Ones(m), Vector::Ones(n), 1.0};
  }
  void unscale(const Iterate& in, Iterate& out) const {
    out.x = d.cwiseProduct(in.x);
    out.y_box = in.y_box.cwiseQuotient(d) / c;
    out.y_rows = e.cwiseProduct(in.y_rows) / c;
  }
};

double clamp_scale(double norm) { return norm < 1e-4 ? 1.0 : std::clamp(1 / std::sqrt(norm), 1e-4, 1e4); }

Scaling ruiz_scaling(const KktSystem& kkt, const Vector& g, const Vector& lb, const Vector& ub, int passes) {
  const Eigen::Index n = kkt.num_vars(), m = kkt.num_rows();
  Scaling sc = Scaling::identity(n, m);
  Vector box(n);  // b d for bounded variables, 0 for free ones
  Vector hc, gc, gr;
  for (int pass = 0; pass < passes; ++pass) {
    kkt.scaled_norms(sc.d, sc.e, hc, gc, gr);
    for (Eigen::Index j = 0; j < n; ++j) {
      const bool bounded = std::isfinite(lb[j]) || std::isfinite(ub[j]);
      box[j] = bounded ? sc.box_weight[j] * sc.d[j] : 0.0;
      const double col = std::max({sc.c * hc[j], gc[j], box[j]});
      if (bounded) sc.box_weight[j] *= clamp_scale(box[j]);
      sc.d[j] *= clamp_scale(col);
    }
    for (Eigen::Index r = 0; r < m; ++r) sc.e[r] *= clamp_scale(gr[r]);
  }
  kkt.scaled_norms(sc.d, sc.e, hc, gc, gr);
  const double cost = std::max(n > 0 ? hc.mean() : 0.0, inf_norm(sc.d.cwiseProduct(g)));
  sc.c = cost < 1e-4 ? 1.0 : std::clamp(1 / cost, 1e-4, 1e4);
  for (Eigen::Index j = 0; j < n; ++j) sc.box_weight[j] = std::pow(sc.box_weight[j] * sc.d[j], 2);
  return sc;
}

/// The backend seen through a scaling: H -> c D H D, G -> E G D.
class ScaledKktSystem final : public KktSystem {
 public:
  ScaledKktSystem(KktSystem& inner, const Scaling& sc) : inner_(inner), sc_(sc) {}
  Eigen::Index num_vars() const override { return inner_.num_vars(); }
  Eigen::Index num_rows() const override { return inner_.num_rows(); }
  void multiply_H(const Vector& z, Vector& out) const override {
    inner_.multiply_H(sc_.d.cwiseProduct(z), tmp_);
    out = sc_.c * sc_.d.cwiseProduct(tmp_);
  }
  void multiply_G(const Vector& z, Vector& out) const override {
    inner_.multiply_G(sc_.d.cwiseProduct(z), tmp_);
    out = sc_.e.cwiseProduct(tmp_);
  }
  void multiply_Gt(const Vector& y, Vector& out) const override {
    inner_.multiply_Gt(sc_.e.cwiseProduct(y), tmp_);
    out = sc_.d.cwiseProduct(tmp_);
  }
  void factor(double sigma, const Vector& rho_box, const Vector& rho_rows) override {
    const Vector box = ((rho_box.array() + sigma) / (sc_.c * sc_.d.array().square())).matrix();
    const Vector rows = (sc_.e.array().square() * rho_rows.array() / sc_.c).matrix();
    inner_.factor(0.0, box, rows);
  }
  void solve(const Vector& rhs, Vector& out) const override {
    inner_.solve(rhs.cwiseQuotient(sc_.d), tmp_);
    out = tmp_.cwiseQuotient(sc_.d) / sc_.c;
  }
  void scaled_norms(const Vector& d, const Vector& e, Vector& h_cols, Vector& g_cols, Vector& g_rows) const override {
    inner_.scaled_norms(d.cwiseProduct(sc_.d), e.cwiseProduct(sc_.e), h_cols, g_cols, g_rows);
    h_cols *= sc_.c;
  }

 private:
  KktSystem& inner_;
  const Scaling& sc_;
  mutable Vector tmp_;
};

/// Guessed active set: -1 lower, +1 upper (or fixed), 0 inactive.
struct ActiveSet {
  std::vector<signed char> box, rows;
  friend bool operator==(const ActiveSet&, const ActiveSet&) = default;
};

ActiveSet guess_active(const Vector& lb, const Vector& ub, const Vector& h, const Vector& w_box, const Vector& w_rows,
                       const Vector& y_box, const Vector& y_rows) {
  ActiveSet a;
  a.box.assign(static_cast<std::size_t>(lb.size()), 0);
  a.rows.assign(static_cast<std::size_t>(h.size()), 0);
  for (Eigen::Index i = 0; i < lb.size(); ++i) {
    auto& slot = a.box[static_cast<std::size_t>(i)];
    if (lb[i] == ub[i] || ub[i] - w_box[i] < y_box[i]) slot = 1;
    else if (w_box[i] - lb[i] < -y_box[i]) slot = -1;
  }
  for (Eigen::Index r = 0; r < h.size(); ++r) {
    if (h[r] - w_rows[r] < y_rows[r]) a.rows[static_cast<std::size_t>(r)] = 1;
  }
  return a;
}

/// Active set implied by multiplier signs alone.
ActiveSet active_from_multipliers(const Vector& lb, const Vector& ub, const Vector& y_box, const Vector& y_rows) {
  ActiveSet a;
  a.box.assign(static_cast<std::size_t>(lb.size()), 0);
  a.rows.assign(static_cast<std::size_t>(y_rows.size()), 0);
  for (Eigen::Index i = 0; i < lb.size(); ++i) {
    auto& slot = a.box[static_cast<std::size_t>(i)];
    if (lb[i] == ub[i] || (y_box[i] > 0 && std::isfinite(ub[i]))) slot = 1;
    else if (y_box[i] < 0 && std::isfinite(lb[i])) slot = -1;
  }
  for (Eigen::Index r = 0; r < y_rows.size(); ++r) {
    if (y_rows[r] > 0) a.rows[static_cast<std::size_t>(r)] = 1;
  }
  return a;
}

/// Solves the equality-constrained problem on a guessed active set with a regularized KKT
/// system and iterative refinement against the exact one.
bool polish_once(KktSystem& kkt, const Vector& g, const Vector& lb, const Vector& ub, const Vector& h,
                 const ActiveSet& active, const QpSettings& s, const ResidualFn& residual_of, Iterate& out,
                 int& factorizations) {
  const Eigen::Index n = g.size(), m = h.size();
  const double delta = s.polish_delta;
  Vector rho_box = Vector::Zero(n), rho_rows = Vector::Zero(m);
  Vector b_box = Vector::Zero(n), b_rows = Vector::Zero(m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto side = active.box[static_cast<std::size_t>(i)];
    if (side != 0) {
      rho_box[i] = 1 / delta;
      b_box[i] = side > 0 ? ub[i] : lb[i];
    }
  }
  for (Eigen::Index r = 0; r < m; ++r) {
    if (active.rows[static_cast<std::size_t>(r)] != 0) {
      rho_rows[r] = 1 / delta;
      b_rows[r] = h[r];
    }
  }
  kkt.factor(delta, rho_box, rho_rows);
  ++factorizations;

  const Vector act_box = (rho_box.array() > 0).cast<double>();
  const Vector act_rows = (rho_rows.array() > 0).cast<double>();

  // Correction for residual (rx, ry_box, ry_rows) of the regularized system.
  Vector x = Vector::Zero(n), yb = Vector::Zero(n), yr = Vector::Zero(m);
  Vector rx = -g, ryb = b_box.cwiseProduct(act_box), ryr = b_rows.cwiseProduct(act_rows);
  Vector rhs, dx, Gdx, Gty, Hx;
  for (int it = 0; it <= s.polish_refine_iters; ++it) {
    rhs = rx + ryb.cwiseProduct(rho_box);
    if (m > 0) {
      kkt.multiply_Gt(ryr.cwiseProduct(rho_rows), Gty);
      rhs += Gty;
    }
    kkt.solve(rhs, dx);
    x += dx;
    yb += (dx - ryb).cwiseProduct(rho_box);
    if (m > 0) {
      kkt.multiply_G(dx, Gdx);
      yr += (Gdx - ryr).cwiseProduct(rho_rows);
    }
    // Residual of the exact system.
    kkt.multiply_H(x, Hx);
    rx = -g - Hx - yb;
    ryb = (b_box - x).cwiseProduct(act_box);
    if (m > 0) {
      kkt.multiply_Gt(yr, Gty);
      rx -= Gty;
      kkt.multiply_G(x, Gdx);
      ryr = (b_rows - Gdx).cwiseProduct(act_rows);
    }
    const double res = std::max({inf_norm(rx), inf_norm(ryb), inf_norm(ryr)});
    if (!std::isfinite(res)) return false;
    if (res <= 1e-3 * s.tol) break;
  }
  out.x = std::move(x);
  out.y_box = std::move(yb);
  out.y_rows = std::move(yr);
  out.residual = residual_of(out);
  return std::isfinite(out.residual.max());
}

/// Polishes on `active`, then repairs the guess one constraint at a time: the most violated
/// inactive constraint joins the set, or the active constraint with the most wrong-signed
/// multiplier leaves it. Leaving is paired with a ratio test, as in a simplex pivot: on nearly
/// linear problems the point moves far once a constraint is released, and the first constraint
/// it runs into along the way joins the set in its place. Gives up after two rounds without
/// progress or `max_repairs` rounds.
bool polish(KktSystem& kkt, const Vector& g, const Vector& lb, const Vector& ub, const Vector& h, ActiveSet active,
            const QpSettings& s, const ResidualFn& residual_of, int max_repairs, Iterate& out, int& factorizations) {
  const Eigen::Index n = g.size(), m = h.size();
  Vector Gx, Gd;
  Iterate released;
  double best = kInf;
  int stalled = 0;
  for (int round = 0;; ++round) {
    if (!polish_once(kkt, g, lb, ub, h, active, s, residual_of, out, factorizations)) return false;
    const double res = out.residual.max();
    if (res <= s.tol) return true;
    if (res < best) {
      best = res;
      stalled = 0;
    } else if (++stalled == 2) {
      return false;
    }
    if (round == max_repairs) return false;

    // Worst mismatch: (is_row, index, new slot value).
    double worst = 0;
    bool worst_row = false;
    Eigen::Index worst_idx = -1;
    signed char worst_value = 0;
    const auto consider = [&](double amount, bool is_row, Eigen::Index idx, signed char v) {
      if (amount > s.tol && amount > worst) {
        worst = amount;
        worst_row = is_row;
        worst_idx = idx;
        worst_value = v;
      }
    };
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto slot = active.box[static_cast<std::size_t>(i)];
      if (lb[i] == ub[i]) continue;
      if (slot == 0) {
        consider(lb[i] - out.x[i], false, i, -1);
        consider(out.x[i] - ub[i], false, i, 1);
      } else {
        consider(slot < 0 ? out.y_box[i] : -out.y_box[i], false, i, 0);
      }
    }
    if (m > 0) kkt.multiply_G(out.x, Gx);
    for (Eigen::Index r = 0; r < m; ++r) {
      const auto slot = active.rows[static_cast<std::size_t>(r)];
      consider(slot == 0 ? Gx[r] - h[r] : -out.y_rows[r], true, r, slot == 0 ? 1 : 0);
    }
    if (worst_idx < 0) return false;
    auto& target = worst_row ? active.rows[static_cast<std::size_t>(worst_idx)] : active.box[static_cast<std::size_t>(worst_idx)];
    target = worst_value;
    if (worst_value != 0) continue;

    // Ratio test from the current point towards the solution without the released constraint,
    // over the inactive constraints the current point satisfies.
    if (!polish_once(kkt, g, lb, ub, h, active, s, residual_of, released, factorizations)) return false;
    const Vector d = released.x - out.x;
    double t_min = 1;
    bool block_row = false;
    Eigen::Index block_idx = -1;
    signed char block_value = 0;
    const auto block = [&](double gap, double rate, bool is_row, Eigen::Index idx, signed char v) {
      if (rate <= 0 || gap < -s.tol) return;
      const double t = std::max(gap, 0.0) / rate;
      if (t < t_min) {
        t_min = t;
        block_row = is_row;
        block_idx = idx;
        block_value = v;
      }
    };
    for (Eigen::Index i = 0; i < n; ++i) {
      if (active.box[static_cast<std::size_t>(i)] != 0 || (!worst_row && i == worst_idx)) continue;
      block(out.x[i] - lb[i], -d[i], false, i, -1);
      block(ub[i] - out.x[i], d[i], false, i, 1);
    }
    if (m > 0) kkt.multiply_G(d, Gd);
    for (Eigen::Index r = 0; r < m; ++r) {
      if (active.rows[static_cast<std::size_t>(r)] != 0 || (worst_row && r == worst_idx)) continue;
      block(h[r] - Gx[r], Gd[r], true, r, 1);
    }
    if (block_idx >= 0) {
      (block_row ? active.rows[static_cast<std::size_t>(block_idx)] : active.box[static_cast<std::size_t>(block_idx)]) =
          block_value;
    }
  }
}

}  // namespace

KktResidual kkt_residual(const KktSystem& kkt, const Vector& g, const Vector& lb, const Vector& ub, const Vector& h,
                         const Vector& z, const Vector& y_box, const Vector& y_rows) {
  return evaluate(kkt, g, lb, ub, h, z, y_box, y_rows).residual;
}

QpSolution solve_qp(KktSystem& kkt, const Vector& g, const Vector& lb, const Vector& ub, const Vector& h,
                    const QpSettings& s, const QpWarmStart* warm) {
  const Eigen::Index n = kkt.num_vars(), m = kkt.num_rows();
  if (g.size() != n || lb.size() != n || ub.size() != n || h.size() != m) {
    throw DimensionError("QP: vector sizes do not match the KKT backend");
  }
  if (!(s.tol > 0) || s.max_iters < 1 || !(s.rho > 0) || !(s.sigma > 0) || !(s.alpha > 0 && s.alpha < 2) ||
      s.check_interval < 1 || s.rho_update_interval < 1 || s.scaling_iters < 0) {
    throw InputError("QP: invalid solver settings");
  }

  QpSolution sol;
  Vector x0 = Vector::Zero(n), y_box0 = Vector::Zero(n), y_rows0 = Vector::Zero(m);
  if (warm) {
    if (warm->z.size() == n && warm->z.allFinite()) x0 = warm->z;
    if (warm->y_box.size() == n && warm->y_box.allFinite()) y_box0 = warm->y_box;
    if (warm->y_rows.size() == m && warm->y_rows.allFinite()) y_rows0 = warm->y_rows;
  }
  const auto finish = [&](Iterate it) {
    sol.z = std::move(it.x);
    // Unscaling leaves fixed variables a rounding error away from their value.
    for (Eigen::Index i = 0; i < n; ++i) {
      if (lb[i] == ub[i]) sol.z[i] = lb[i];
    }
    sol.y_box = std::move(it.y_box);
    sol.y_rows = std::move(it.y_rows);
    sol.residual = it.residual;
    Vector Hz;
    kkt.multiply_H(sol.z, Hz);
    sol.objective = 0.5 * sol.z.dot(Hz) + g.dot(sol.z);
    return sol;
  };
  const ResidualFn plain_residual = [&](const Iterate& it) {
    return evaluate(kkt, g, lb, ub, h, it.x, it.y_box, it.y_rows).residual;
  };

  // A warm start often carries the optimal active set already.
  ActiveSet last_guess;
  if (warm && s.polish) {
    last_guess = active_from_multipliers(lb, ub, y_box0, y_rows0);
    Iterate p;
    if (polish(kkt, g, lb, ub, h, last_guess, s, plain_residual, kPolishRepairs, p, sol.factorizations) &&
        p.residual.max() <= s.tol) {
      sol.status = QpStatus::Solved;
      sol.polished = true;
      return finish(std::move(p));
    }
  }

  // Everything below works on the equilibrated problem.
  const Scaling sc = s.scaling_iters > 0 ? ruiz_scaling(kkt, g, lb, ub, s.scaling_iters) : Scaling::identity(n, m);
  ScaledKktSystem skkt(kkt, sc);
  const Vector gs = sc.c * sc.d.cwiseProduct(g);
  const Vector lbs = lb.cwiseQuotient(sc.d), ubs = ub.cwiseQuotient(sc.d), hs = sc.e.cwiseProduct(h);
  Iterate original;
  const ResidualFn residual_of = [&](const Iterate& it) {
    sc.unscale(it, original);
    return evaluate(kkt, g, lb, ub, h, original.x, original.y_box, original.y_rows).residual;
  };

  Vector box_scale(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lb[i] == -kInf && ub[i] == kInf) box_scale[i] = 0;
    else if (lb[i] == ub[i]) box_scale[i] = kEqualityScale * sc.box_weight[i];
    else box_scale[i] = sc.box_weight[i];
  }
  double rho = std::clamp(s.rho, kRhoMin, kRhoMax);
  Vector rho_box(n), rho_rows(m);
  const auto set_rho = [&] {
    for (Eigen::Index i = 0; i < n; ++i) {
      rho_box[i] = box_scale[i] == 0 ? kRhoMin : std::clamp(rho * box_scale[i], kRhoMin, kRhoMax * kEqualityScale);
    }
    rho_rows.setConstant(rho);
  };
  set_rho();

  Vector x = x0.cwiseQuotient(sc.d);
  Vector y_box = sc.c * sc.d.cwiseProduct(y_box0);
  Vector y_rows = sc.c * y_rows0.cwiseQuotient(sc.e);
  Vector w_box = x.cwiseMax(lbs).cwiseMin(ubs);
  Vector w_rows(m);
  if (m > 0) {
    skkt.multiply_G(x, w_rows);
    w_rows = w_rows.cwiseMin(hs);
  }

  Iterate best;
  best.residual = KktResidual{};
  double polish_level = 1e-2 * std::max(1.0, inf_norm(g));
  int last_polish = 0;
  int polish_gap = kPolishGap;
  int last_rho_update = 0;
  double log_ratio_sum = 0;
  int log_ratio_count = 0;

  skkt.factor(s.sigma, rho_box, rho_rows);
  ++sol.factorizations;

  Vector rhs(n), xt(n), Gxt(m), Gty(n), tmp, w_new, dy_box(n), dy_rows(m);
  int iter = 0;
  for (iter = 1; iter <= s.max_iters; ++iter) {
    rhs = s.sigma * x - gs + rho_box.cwiseProduct(w_box) - y_box;
    if (m > 0) {
      skkt.multiply_Gt(rho_rows.cwiseProduct(w_rows) - y_rows, Gty);
      rhs += Gty;
    }
    skkt.solve(rhs, xt);
    x = s.alpha * xt + (1 - s.alpha) * x;

    tmp = s.alpha * xt + (1 - s.alpha) * w_box;
    w_new = (tmp + y_box.cwiseQuotient(rho_box)).cwiseMax(lbs).cwiseMin(ubs);
    dy_box = rho_box.cwiseProduct(tmp - w_new);
    y_box += dy_box;
    w_box = w_new;
    if (m > 0) {
      skkt.multiply_G(xt, Gxt);
      tmp = s.alpha * Gxt + (1 - s.alpha) * w_rows;
      w_new = (tmp + y_rows.cwiseQuotient(rho_rows)).cwiseMin(hs);
      dy_rows = rho_rows.cwiseProduct(tmp - w_new);
      y_rows += dy_rows;
      w_rows = w_new;
    }

    if (iter % s.check_interval != 0 && iter != s.max_iters) continue;

    Iterate cur{x, y_box, y_rows, {}};
    sc.unscale(cur, original);
    const Evaluation e = evaluate(kkt, g, lb, ub, h, original.x, original.y_box, original.y_rows);
    cur.residual = e.residual;
    if (!std::isfinite(e.residual.max())) throw NumericalError("QP: iterates diverged");
    if (e.residual.max() < best.residual.max()) best = cur;
    if (e.residual.max() <= s.tol) {
      sol.status = QpStatus::Solved;
      break;
    }

    // Primal infeasibility certificate from the dual increment.
    const double dy_norm = std::max(inf_norm(dy_box), inf_norm(dy_rows));
    if (dy_norm > 1e-12) {
      const double eps = s.infeasibility_tol * dy_norm;
      Vector Atdy = dy_box;
      if (m > 0) {
        skkt.multiply_Gt(dy_rows, Gty);
        Atdy += Gty;
      }
      if (inf_norm(Atdy) <= eps) {
        double support = 0;
        bool unbounded = false;
        const auto add = [&](double dy, double lo, double hi) {
          if (dy > eps) {
            if (std::isinf(hi)) unbounded = true;
            else support += hi * dy;
          } else if (dy < -eps) {
            if (std::isinf(lo)) unbounded = true;
            else support += lo * dy;
          }
        };
        for (Eigen::Index i = 0; i < n; ++i) add(dy_box[i], lbs[i], ubs[i]);
        for (Eigen::Index r = 0; r < m; ++r) add(dy_rows[r], -kInf, hs[r]);
        if (!unbounded && support < -eps) {
          sol.status = QpStatus::PrimalInfeasible;
          break;
        }
      }
    }

    if (s.polish && (e.residual.max() <= polish_level || iter - last_polish >= polish_gap)) {
      ActiveSet guess = guess_active(lbs, ubs, hs, w_box, w_rows, y_box, y_rows);
      if (guess != last_guess) {
        Iterate p;
        if (polish(skkt, gs, lbs, ubs, hs, guess, s, residual_of, kPolishRepairs, p, sol.factorizations) &&
            p.residual.max() <= s.tol) {
          best = std::move(p);
          sol.status = QpStatus::Solved;
          sol.polished = true;
          break;
        }
        if (e.residual.max() <= polish_level) polish_level = e.residual.max() / 10;
        last_guess = std::move(guess);
        last_polish = iter;
        polish_gap *= 2;
        skkt.factor(s.sigma, rho_box, rho_rows);
        ++sol.factorizations;
      }
    }

    if (s.adaptive_rho) {
      // Balance the relative primal and dual residuals of the scaled problem, judged on their
      // log-ratio averaged since the last update: single samples swing with the transients a
      // change of rho itself causes.
      const Vector Hz = sc.c * sc.d.cwiseProduct(e.Hz), Aty = sc.c * sc.d.cwiseProduct(e.Aty);
      double prim_res = inf_norm(x - w_box), prim_scale = std::max(inf_norm(x), inf_norm(w_box));
      if (m > 0) {
        const Vector Gz = sc.e.cwiseProduct(e.Gz);
        prim_res = std::max(prim_res, inf_norm(Gz - w_rows));
        prim_scale = std::max({prim_scale, inf_norm(Gz), inf_norm(w_rows)});
      }
      const double dual_res = inf_norm(Hz + gs + Aty);
      const double dual_scale = std::max({inf_norm(Hz), inf_norm(Aty), inf_norm(gs)});
      const double num = prim_res / (prim_scale + 1e-10);
      const double den = dual_res / (dual_scale + 1e-10);
      if (num > 0 && den > 0) {
        log_ratio_sum += std::log(num / den);
        ++log_ratio_count;
      }
      if (iter - last_rho_update >= s.rho_update_interval && log_ratio_count > 0) {
        const double candidate = std::clamp(rho * std::exp(0.5 * log_ratio_sum / log_ratio_count), kRhoMin, kRhoMax);
        log_ratio_sum = 0;
        log_ratio_count = 0;
        last_rho_update = iter;
        if (candidate > 5 * rho || candidate < rho / 5) {
          rho = candidate;
          set_rho();
          skkt.factor(s.sigma, rho_box, rho_rows);
          ++sol.factorizations;
        }
      }
    }
  }
  sol.iterations = std::min(iter, s.max_iters);

  if (sol.status == QpStatus::PrimalInfeasible) {
    Iterate cur{x, y_box, y_rows, {}};
    sc.unscale(cur, original);
    original.residual = evaluate(kkt, g, lb, ub, h, original.x, original.y_box, original.y_rows).residual;
    return finish(std::move(original));
  }
  if (sol.status != QpStatus::Solved && s.polish && best.x.size() == n) {
    Iterate p;
    const Vector wb = best.x.cwiseMax(lbs).cwiseMin(ubs);
    Vector wr(m);
    if (m > 0) {
      skkt.multiply_G(best.x, wr);
      wr = wr.cwiseMin(hs);
    }
    if (polish(skkt, gs, lbs, ubs, hs, guess_active(lbs, ubs, hs, wb, wr, best.y_box, best.y_rows), s, residual_of,
               2 * kPolishRepairs, p, sol.factorizations) &&
        p.residual.max() < best.residual.max()) {
      best = std::move(p);
      sol.polished = true;
    }
    if (best.residual.max() <= s.tol) sol.status = QpStatus::Solved;
  }
  if (best.x.size() != n) best = Iterate{x, y_box, y_rows, residual_of(Iterate{x, y_box, y_rows, {}})};
  Iterate out;
  sc.unscale(best, out);
  out.residual = best.residual;
  return finish(std::move(out));
}

QpSolution solve_qp(const QpProblem& p, const QpSettings& settings, const QpWarmStart* warm) {
  p.validate();
  DenseKktSystem kkt(p);
  return solve_qp(kkt, p.g, p.lb, p.ub, p.h, settings, warm);
}

}  // namespace thermpc
