#pragma once

// Backward dynamic programming over a gridded scalar temperature for one-zone, one-input
// models. The value function is linearly interpolated between grid points and clamped at
// the grid ends. The returned cost is realized by running the greedy policy on the
// continuous state, so it is directly comparable with a closed-loop run.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "naive_step.hpp"
#include "thermpc/statespace.hpp"

namespace oracle {

struct DpInstance {
  const thermpc::DiscreteBilinearModel* model = nullptr;
  double x0 = 0;
  std::size_t steps = 0;
  std::vector<std::vector<double>> v;  // steps rows
  std::vector<double> price;           // per step, currency/kWh
  std::vector<double> t_min, t_max;    // band for the state reached after step k
  double rated_kw = 0;
  double slack_penalty = 0;            // currency/(K h)
  double hours = 1.0 / 6.0;
  double u_step = 0.1;
  double x_step = 0.1;
  double x_lo = 0, x_hi = 0;
};

struct DpResult {
  double value = 0;        // interpolated V_0(x0)
  double cost = 0;         // realized energy cost along the policy
  double discomfort_kh = 0;
  std::vector<double> u;
  std::vector<double> x;   // steps + 1 samples
};

inline DpResult solve_dp(const DpInstance& in) {
  const auto& m = *in.model;
  if (m.n() != 1 || m.n_u() != 1) throw std::invalid_argument("solve_dp: one state and one input expected");
  const auto nx = static_cast<std::size_t>(std::llround((in.x_hi - in.x_lo) / in.x_step)) + 1;
  const auto nu = static_cast<std::size_t>(std::llround(1.0 / in.u_step)) + 1;
  auto grid_x = [&](std::size_t i) { return in.x_lo + static_cast<double>(i) * in.x_step; };
  auto interp = [&](const std::vector<double>& V, double x) {
    const double s = std::clamp((x - in.x_lo) / in.x_step, 0.0, static_cast<double>(nx - 1));
    const auto i = std::min(static_cast<std::size_t>(s), nx - 2);
    const double w = s - static_cast<double>(i);
    return (1 - w) * V[i] + w * V[i + 1];
  };
  auto next = [&](double x, double u, std::size_t k) { return naive_step(m, {x}, {u}, in.v[k]).next[0]; };
  auto stage = [&](double u, double x1, std::size_t k) {
    const double viol = std::max({0.0, in.t_min[k] - x1, x1 - in.t_max[k]});
    return in.price[k] * in.hours * u * in.rated_kw + in.slack_penalty * in.hours * viol;
  };

  std::vector<std::vector<double>> V(in.steps + 1, std::vector<double>(nx, 0.0));
  for (std::size_t k = in.steps; k-- > 0;) {
    for (std::size_t i = 0; i < nx; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < nu; ++j) {
        const double u = static_cast<double>(j) * in.u_step;
        const double x1 = next(grid_x(i), u, k);
        best = std::min(best, stage(u, x1, k) + interp(V[k + 1], x1));
      }
      V[k][i] = best;
    }
  }

  DpResult r;
  r.value = interp(V[0], in.x0);
  double x = in.x0;
  r.x.push_back(x);
  for (std::size_t k = 0; k < in.steps; ++k) {
    double best = std::numeric_limits<double>::infinity(), best_u = 0;
    for (std::size_t j = 0; j < nu; ++j) {
      const double u = static_cast<double>(j) * in.u_step;
      const double x1 = next(x, u, k);
      const double q = stage(u, x1, k) + interp(V[k + 1], x1);
      if (q < best) {
        best = q;
        best_u = u;
      }
    }
    const double x1 = next(x, best_u, k);
    r.cost += in.price[k] * in.hours * best_u * in.rated_kw;
    r.discomfort_kh += std::max({0.0, in.t_min[k] - x1, x1 - in.t_max[k]}) * in.hours;
    r.u.push_back(best_u);
    r.x.push_back(x1);
    x = x1;
  }
  return r;
}

}  // namespace oracle
