#pragma once

// Exhaustive active-set enumeration for small strictly convex QPs
//   minimize 0.5 z'Hz + g'z  subject to  lb <= z <= ub,  G z <= h.
// Every finitely bounded variable is tried free, at its lower and at its upper bound; every
// row subset is tried as an equality set. Each candidate is an equality-constrained QP; the
// optimum is the cheapest primal-feasible candidate. Row subsets are solved through the Schur
// complement of the reduced Hessian, so the cost is dominated by 3^b factorizations.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "thermpc/qp.hpp"

namespace oracle {

struct BruteQpResult {
  bool feasible = false;
  Eigen::VectorXd z;
  double objective = std::numeric_limits<double>::infinity();
  long candidates = 0;
};

inline BruteQpResult brute_force_qp(const thermpc::QpProblem& p, double feas_tol = 1e-9) {
  using Eigen::Index;
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const Index n = p.num_vars();
  const Index m = p.num_rows();
  if (m > 16) throw std::invalid_argument("brute_force_qp: too many rows");

  // 0 = free, 1 = lower, 2 = upper; fixed variables always sit at lb.
  std::vector<Index> choice_vars;
  std::vector<std::vector<int>> choices;
  for (Index i = 0; i < n; ++i) {
    if (p.lb(i) == p.ub(i)) continue;
    std::vector<int> c{0};
    if (std::isfinite(p.lb(i))) c.push_back(1);
    if (std::isfinite(p.ub(i))) c.push_back(2);
    if (c.size() > 1) {
      choice_vars.push_back(i);
      choices.push_back(c);
    }
  }

  BruteQpResult best;
  std::vector<std::size_t> digit(choice_vars.size(), 0);
  std::vector<int> state(static_cast<std::size_t>(n), 0);
  while (true) {
    for (Index i = 0; i < n; ++i) state[static_cast<std::size_t>(i)] = p.lb(i) == p.ub(i) ? 1 : 0;
    for (std::size_t c = 0; c < choice_vars.size(); ++c) {
      state[static_cast<std::size_t>(choice_vars[c])] = choices[c][digit[c]];
    }

    std::vector<Index> free_idx;
    VectorXd z_fixed = VectorXd::Zero(n);
    for (Index i = 0; i < n; ++i) {
      const int s = state[static_cast<std::size_t>(i)];
      if (s == 0) free_idx.push_back(i);
      if (s == 1) z_fixed(i) = p.lb(i);
      if (s == 2) z_fixed(i) = p.ub(i);
    }
    const auto nf = static_cast<Index>(free_idx.size());
    MatrixXd Hff(nf, nf), Gf(m, nf);
    VectorXd rhs(nf);
    const VectorXd Hz = p.H * z_fixed;
    for (Index a = 0; a < nf; ++a) {
      rhs(a) = -(p.g(free_idx[a]) + Hz(free_idx[a]));
      for (Index b = 0; b < nf; ++b) Hff(a, b) = p.H(free_idx[a], free_idx[b]);
      for (Index r = 0; r < m; ++r) Gf(r, a) = p.G(r, free_idx[a]);
    }
    const VectorXd h_red = m > 0 ? VectorXd(p.h - p.G * z_fixed) : VectorXd(0);

    Eigen::LLT<MatrixXd> llt(Hff);
    if (nf == 0 || llt.info() == Eigen::Success) {
      const VectorXd z0 = nf > 0 ? VectorXd(llt.solve(rhs)) : VectorXd(0);
      const MatrixXd HinvGt = nf > 0 ? MatrixXd(llt.solve(Gf.transpose())) : MatrixXd(0, m);
      const MatrixXd S = Gf * HinvGt;
      const VectorXd Gz0 = Gf * z0;

      for (unsigned mask = 0; mask < (1u << m); ++mask) {
        std::vector<Index> rows;
        for (Index r = 0; r < m; ++r) {
          if (mask & (1u << r)) rows.push_back(r);
        }
        const auto k = static_cast<Index>(rows.size());
        if (k > nf) continue;
        ++best.candidates;
        VectorXd zf = z0;
        if (k > 0) {
          MatrixXd Sw(k, k);
          VectorXd bw(k);
          for (Index a = 0; a < k; ++a) {
            bw(a) = Gz0(rows[a]) - h_red(rows[a]);
            for (Index b = 0; b < k; ++b) Sw(a, b) = S(rows[a], rows[b]);
          }
          Eigen::FullPivLU<MatrixXd> lu(Sw);
          lu.setThreshold(1e-10);
          if (lu.rank() < k) continue;
          const VectorXd lambda = lu.solve(bw);
          for (Index a = 0; a < k; ++a) zf.noalias() -= HinvGt.col(rows[a]) * lambda(a);
        }
        VectorXd z = z_fixed;
        for (Index a = 0; a < nf; ++a) z(free_idx[a]) = zf(a);

        bool ok = true;
        for (Index i = 0; i < n && ok; ++i) {
          const double tol = feas_tol * std::max(1.0, std::abs(z(i)));
          ok = z(i) >= p.lb(i) - tol && z(i) <= p.ub(i) + tol;
        }
        if (ok && m > 0) {
          const VectorXd Gz = p.G * z;
          for (Index r = 0; r < m && ok; ++r) ok = Gz(r) <= p.h(r) + feas_tol * std::max(1.0, std::abs(p.h(r)));
        }
        if (!ok) continue;
        const double f = p.objective(z);
        if (f < best.objective) {
          best.objective = f;
          best.z = z;
          best.feasible = true;
        }
      }
    }

    std::size_t c = 0;
    while (c < digit.size() && ++digit[c] == choices[c].size()) digit[c++] = 0;
    if (c == digit.size()) break;
  }
  return best;
}

}  // namespace oracle
