#pragma once

#include <algorithm>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "thermpc/qp.hpp"
#include "thermpc/statespace.hpp"

namespace testing_support {

inline std::string data_path(const std::string& file) { return std::string(THERMPC_DATA_DIR) + "/" + file; }

/// One zone (C = 1e6 J/K) behind a single massless wall layer (10 m2 at R = 0.5, so g = 20 W/K)
/// with one 100 W/K heater on the hot-water channel.
inline nlohmann::json minimal_building() {
  return nlohmann::json::parse(R"({
    "name": "minimal",
    "zones": [{"id": "R1", "floor_area": 20.0, "volume": 60.0, "air_heat_capacity": 1000000.0,
               "orientation": "S", "comfort_schedule_id": "room"}],
    "elements": [{"id": "W1", "kind": "wall", "area": 10.0, "boundary": ["R1", "AMBIENT"],
                  "layers": [{"thermal_resistance": 0.5, "areal_heat_capacity": 0.0}]}],
    "actuators": [{"id": "H1", "kind": "fancoil_heat", "zone_id": "R1", "gain_coefficient": 100.0,
                   "reference_signal": "T_hw", "input_bounds": [0.0, 1.0], "electrical_conversion": 0.5}],
    "comfort_schedules": {"room": {"occupied": [21.0, 24.0], "unoccupied": [17.0, 26.0],
      "occupancy_windows": [{"days": ["mon", "tue", "wed", "thu", "fri"], "start": "08:00", "end": "18:00"}]}},
    "disturbances": [{"name": "T_amb", "kind": "ambient_temperature"},
                     {"name": "T_hw", "kind": "supply_temperature", "supply": "hot_water", "nominal": 70.0}]
  })");
}

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline thermpc::Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  thermpc::Matrix M(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) M(i, j) = uniform(rng, -scale, scale);
  }
  return M;
}

inline thermpc::Vector random_vector(Rng& rng, Eigen::Index n, double lo, double hi) {
  thermpc::Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(rng, lo, hi);
  return v;
}

/// Dense random bilinear model with labels filled in; no physical structure.
inline thermpc::DiscreteBilinearModel random_model(Rng& rng, int max_n, int max_nu, int max_nv) {
  const int n = uniform_int(rng, 1, max_n), nu = uniform_int(rng, 1, max_nu), nv = uniform_int(rng, 1, max_nv);
  thermpc::DiscreteBilinearModel m;
  m.A = random_matrix(rng, n, n);
  m.Bu = random_matrix(rng, n, nu);
  m.Bv = random_matrix(rng, n, nv);
  m.d = random_vector(rng, n, -1, 1);
  for (int i = 0; i < nu; ++i) {
    m.Bxu.push_back(random_matrix(rng, n, n, 0.1));
    m.Bvu.push_back(random_matrix(rng, n, nv, 0.1));
  }
  for (int i = 0; i < n; ++i) m.labels.states.push_back("x" + std::to_string(i));
  for (int i = 0; i < nu; ++i) m.labels.inputs.push_back("u" + std::to_string(i));
  for (int i = 0; i < nv; ++i) m.labels.disturbances.push_back("v" + std::to_string(i));
  return m;
}

/// Strictly convex QP with up to `max_bounded` finitely bounded variables (some fixed) and
/// rows built around a box-feasible point so the feasible set is never empty.
inline thermpc::QpProblem random_qp(Rng& rng, int max_n, int max_rows, int max_bounded) {
  const int n = uniform_int(rng, 1, max_n);
  const int m = uniform_int(rng, 0, max_rows);
  const int rank = uniform_int(rng, 1, n);
  const thermpc::Matrix F = random_matrix(rng, n, rank);
  thermpc::QpProblem p;
  p.H = F * F.transpose() + uniform(rng, 1e-2, 1.0) * thermpc::Matrix::Identity(n, n);
  p.H = 0.5 * (p.H + p.H.transpose()).eval();
  p.g = random_vector(rng, n, -5, 5);
  p.lb = thermpc::Vector::Constant(n, -thermpc::kInf);
  p.ub = thermpc::Vector::Constant(n, thermpc::kInf);
  thermpc::Vector feasible = random_vector(rng, n, -1, 1);
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::shuffle(order.begin(), order.end(), rng);
  const int bounded = std::min(n, uniform_int(rng, 0, max_bounded));
  for (int b = 0; b < bounded; ++b) {
    const int i = order[static_cast<std::size_t>(b)];
    const double lo = feasible(i) - uniform(rng, 0.0, 1.0), hi = feasible(i) + uniform(rng, 0.0, 1.0);
    switch (uniform_int(rng, 0, 5)) {
      case 0: p.lb(i) = lo; break;
      case 1: p.ub(i) = hi; break;
      case 2: p.lb(i) = p.ub(i) = feasible(i); break;
      default: p.lb(i) = lo; p.ub(i) = hi; break;
    }
  }
  p.G = random_matrix(rng, m, n);
  p.h = p.G * feasible + random_vector(rng, m, 0.0, 1.0);
  return p;
}

}  // namespace testing_support
