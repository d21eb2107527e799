#pragma once

// Element-by-element evaluation of the bilinear update law, written without any Eigen
// expressions so it shares no code path with thermpc::step.

#include <cmath>
#include <cstddef>
#include <vector>

#include "thermpc/statespace.hpp"

namespace oracle {

struct NaiveResult {
  std::vector<double> next;
  std::vector<double> scale;  // per row, sum of |terms|
};

inline NaiveResult naive_step(const thermpc::DiscreteBilinearModel& m, const std::vector<double>& x,
                              const std::vector<double>& u, const std::vector<double>& v) {
  const std::size_t n = m.n(), nu = m.n_u(), nv = m.n_v();
  NaiveResult r{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto I = static_cast<Eigen::Index>(i);
    long double acc = 0;
    long double mag = 0;
    auto add = [&](long double t) {
      acc += t;
      mag += t < 0 ? -t : t;
    };
    for (std::size_t j = 0; j < n; ++j) add(static_cast<long double>(m.A(I, static_cast<Eigen::Index>(j))) * x[j]);
    for (std::size_t a = 0; a < nu; ++a) add(static_cast<long double>(m.Bu(I, static_cast<Eigen::Index>(a))) * u[a]);
    for (std::size_t a = 0; a < nu; ++a) {
      for (std::size_t j = 0; j < n; ++j) {
        add(static_cast<long double>(m.Bxu[a](I, static_cast<Eigen::Index>(j))) * x[j] * u[a]);
      }
    }
    for (std::size_t c = 0; c < nv; ++c) add(static_cast<long double>(m.Bv(I, static_cast<Eigen::Index>(c))) * v[c]);
    for (std::size_t a = 0; a < nu; ++a) {
      for (std::size_t c = 0; c < nv; ++c) {
        add(static_cast<long double>(m.Bvu[a](I, static_cast<Eigen::Index>(c))) * v[c] * u[a]);
      }
    }
    add(m.d(I));
    r.next[i] = static_cast<double>(acc);
    r.scale[i] = static_cast<double>(mag);
  }
  return r;
}

}  // namespace oracle
