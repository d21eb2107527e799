#include <cmath>

#include "doctest.h"
#include "oracles/naive_step.hpp"
#include "support.hpp"
#include "thermpc/building.hpp"
#include "thermpc/errors.hpp"
#include "thermpc/rc_network.hpp"
#include "thermpc/statespace.hpp"

using namespace thermpc;
namespace ts = testing_support;

namespace {

DiscreteBilinearModel scalar_model() {
  DiscreteBilinearModel m;
  m.A = Matrix::Constant(1, 1, 0.9);
  m.Bu = Matrix::Constant(1, 1, 0.1);
  m.Bxu = {Matrix::Constant(1, 1, -0.05)};
  m.Bv = Matrix::Constant(1, 1, 0.05);
  m.Bvu = {Matrix::Constant(1, 1, 0.02)};
  m.d = Vector::Constant(1, 0.1);
  m.labels.states = {"x"};
  m.labels.inputs = {"u"};
  m.labels.disturbances = {"v"};
  return m;
}

ContinuousBilinearModel scalar_continuous(double ac) {
  ContinuousBilinearModel c;
  c.Ac = Matrix::Constant(1, 1, ac);
  c.Buc = Matrix::Zero(1, 0);
  c.Bvc = Matrix::Zero(1, 1);
  c.dc = Vector::Zero(1);
  c.labels.states = {"x"};
  c.labels.disturbances = {"v"};
  return c;
}

Vector vec1(double a) { return Vector::Constant(1, a); }

// Dominant eigenvalue magnitude by power iteration.
double power_iteration(const Matrix& A, int iters = 5000) {
  Vector x = Vector::Ones(A.rows()).normalized();
  double lambda = 0;
  for (int i = 0; i < iters; ++i) {
    Vector y = A * x;
    lambda = y.norm();
    x = y / lambda;
  }
  return lambda;
}

}  // namespace

TEST_CASE("scalar step matches hand arithmetic") {
  const auto m = scalar_model();
  const Vector x1 = step(m, vec1(20), vec1(0.5), vec1(10));
  CHECK(x1(0) == doctest::Approx(18.25).epsilon(1e-15));
}

TEST_CASE("identity dynamics leave the state unchanged") {
  ts::Rng rng(3);
  DiscreteBilinearModel m;
  m.A = Matrix::Identity(4, 4);
  m.Bu = Matrix::Zero(4, 2);
  m.Bv = Matrix::Zero(4, 3);
  m.Bxu.assign(2, Matrix::Zero(4, 4));
  m.Bvu.assign(2, Matrix::Zero(4, 3));
  m.d = Vector::Zero(4);
  m.labels.inputs = {"a", "b"};
  const Vector x = ts::random_vector(rng, 4, -5, 5);
  CHECK(step(m, x, ts::random_vector(rng, 2, 0, 1), ts::random_vector(rng, 3, -5, 5)) == x);
}

TEST_CASE("step agrees with the naive evaluator on random models") {
  ts::Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = ts::random_model(rng, 6, 3, 4);
    const Vector x = ts::random_vector(rng, static_cast<Eigen::Index>(m.n()), -10, 10);
    const Vector u = ts::random_vector(rng, static_cast<Eigen::Index>(m.n_u()), 0, 1);
    const Vector v = ts::random_vector(rng, static_cast<Eigen::Index>(m.n_v()), -10, 10);
    const auto ref = oracle::naive_step(m, {x.data(), x.data() + x.size()}, {u.data(), u.data() + u.size()},
                                        {v.data(), v.data() + v.size()});
    const Vector got = step(m, x, u, v);
    for (std::size_t i = 0; i < m.n(); ++i) {
      CHECK(std::abs(got(static_cast<Eigen::Index>(i)) - ref.next[i]) <= 1e-12 * ref.scale[i]);
    }
  }
}

TEST_CASE("step is linear in x and in v for fixed u") {
  ts::Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto m = ts::random_model(rng, 6, 3, 4);
    m.d.setZero();
    m.Bu.setZero();
    const auto n = static_cast<Eigen::Index>(m.n()), nv = static_cast<Eigen::Index>(m.n_v());
    const Vector u = ts::random_vector(rng, static_cast<Eigen::Index>(m.n_u()), 0, 1);
    const Vector x1 = ts::random_vector(rng, n, -5, 5), x2 = ts::random_vector(rng, n, -5, 5);
    const Vector v1 = ts::random_vector(rng, nv, -5, 5), v2 = ts::random_vector(rng, nv, -5, 5);
    const double a = ts::uniform(rng, -2, 2), b = ts::uniform(rng, -2, 2);
    const Vector lhs = step(m, a * x1 + b * x2, u, a * v1 + b * v2);
    const Vector rhs = a * step(m, x1, u, v1) + b * step(m, x2, u, v2);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("step validates its arguments") {
  const auto m = scalar_model();
  CHECK_THROWS_AS(step(m, Vector::Zero(2), vec1(0.5), vec1(1)), DimensionError);
  CHECK_THROWS_AS(step(m, vec1(NAN), vec1(0.5), vec1(1)), NumericalError);
  CHECK_THROWS_AS(step(m, vec1(20), vec1(1.1), vec1(1)), InputError);
  CHECK(step(m, vec1(20), vec1(1 + 1e-12), vec1(10))(0) == step(m, vec1(20), vec1(1), vec1(10))(0));
}

TEST_CASE("simulate composes steps") {
  const auto m = scalar_model();
  CHECK(simulate(m, vec1(20), Matrix(0, 1), Matrix(0, 1)).rows() == 1);
  const Matrix traj = simulate(m, vec1(20), Matrix::Constant(3, 1, 0.5), Matrix::Constant(3, 1, 10));
  REQUIRE(traj.rows() == 4);
  double x = 20;
  for (int k = 1; k <= 3; ++k) {
    x = 0.9 * x + 0.1 * 0.5 + (-0.05) * x * 0.5 + 0.05 * 10 + 0.02 * 10 * 0.5 + 0.1;
    CHECK(traj(k, 0) == doctest::Approx(x).epsilon(1e-14));
  }
  CHECK_THROWS_AS(simulate(m, vec1(20), Matrix::Zero(3, 1), Matrix::Zero(2, 1)), DimensionError);
}

TEST_CASE("single node closed forms") {
  const auto d = parse_building(ts::minimal_building().dump());
  const auto c = assemble(build_rc_network(d), d);
  const double C = 1e6, g = 20, gf = 100;
  REQUIRE(c.n() == 1);
  CHECK(c.Ac(0, 0) == doctest::Approx(-g / C));
  CHECK(c.Bvc(0, 0) == doctest::Approx(g / C));
  CHECK(c.Bvc(0, 1) == 0.0);
  CHECK(c.Bxuc[0](0, 0) == doctest::Approx(-gf / C));
  CHECK(c.Bvuc[0](0, 1) == doctest::Approx(gf / C));
  CHECK(c.Bvuc[0](0, 0) == 0.0);
  CHECK(c.dc.isZero());
  CHECK(c.conservation_defect() <= 1e-12);
  CHECK_NOTHROW(c.check_invariants());
}

TEST_CASE("floor model conserves heat row by row") {
  const auto d = load_building(ts::data_path("precis_floor.json"));
  const auto net = build_rc_network(d);
  const auto c = assemble(net, d);
  CHECK_NOTHROW(c.check_invariants());
  CHECK(c.conservation_defect() <= 1e-9);
  for (std::size_t i = 0; i < net.size(); ++i) {
    double g_sum = 0;
    for (const auto& k : net.conductances) {
      if (k.a == i || (k.b.is_node() && k.b.node == i)) g_sum += k.value;
    }
    const auto I = static_cast<Eigen::Index>(i);
    CHECK(-c.Ac(I, I) == doctest::Approx(g_sum / net.nodes[i].capacitance).epsilon(1e-12));
    for (Eigen::Index j = 0; j < c.Ac.cols(); ++j) {
      if (j != I) CHECK(c.Ac(I, j) >= 0.0);
    }
  }
}

TEST_CASE("Euler discretization of a scalar decay") {
  CHECK(discretize(scalar_continuous(-1e-4), 600, 1).A(0, 0) == doctest::Approx(0.94).epsilon(1e-14));
  CHECK(discretize(scalar_continuous(-1e-4), 600, 600).A(0, 0) == doctest::Approx(std::exp(-0.06)).epsilon(1e-5));
  CHECK_THROWS_AS(discretize(scalar_continuous(-1e-2), 600, 1), InstabilityError);
  CHECK_THROWS_AS(discretize(scalar_continuous(-1e-4), 0, 1), InputError);
  CHECK_THROWS_AS(discretize(scalar_continuous(-1e-4), 600, 0), InputError);
}

TEST_CASE("floor model is stable at the default sampling") {
  const auto m = build_model(load_building(ts::data_path("precis_floor.json")));
  CHECK(m.ts == 600);
  CHECK(m.substeps == 10);
  const double rho = power_iteration(m.A);
  CHECK(rho < 1.0);
  CHECK(m.spectral_radius() == doctest::Approx(rho).epsilon(1e-6));
  CHECK_FALSE(m.is_linear());
}

TEST_CASE("uniform temperature is a fixed point of the floor model") {
  const auto m = build_model(load_building(ts::data_path("precis_floor.json")));
  const double T = -3.0;
  Vector v = Vector::Zero(static_cast<Eigen::Index>(m.n_v()));
  for (auto c : m.labels.boundary_channels) v(static_cast<Eigen::Index>(c)) = T;
  const Vector x = Vector::Constant(static_cast<Eigen::Index>(m.n()), T);
  const Vector x1 = step(m, x, Vector::Zero(static_cast<Eigen::Index>(m.n_u())), v);
  CHECK((x1 - x).cwiseAbs().maxCoeff() <= 1e-9 * std::abs(T));
}

TEST_CASE("more heating never lowers any temperature") {
  const auto d = load_building(ts::data_path("precis_floor.json"));
  const auto m = build_model(d);
  const Eigen::Index T = 72, nu = static_cast<Eigen::Index>(m.n_u());
  Matrix v = Matrix::Zero(T, static_cast<Eigen::Index>(m.n_v()));
  for (std::size_t c = 0; c < d.disturbances.size(); ++c) {
    const auto& ch = d.disturbances[c];
    const auto col = static_cast<Eigen::Index>(c);
    if (ch.is_boundary_temperature()) v.col(col).setConstant(2.0);
    if (ch.kind == ChannelKind::SupplyTemperature) v.col(col).setConstant(*ch.effective_nominal());
  }
  Matrix low = Matrix::Zero(T, nu), high = Matrix::Zero(T, nu);
  for (std::size_t a = 0; a < d.actuators.size(); ++a) {
    if (d.actuators[a].kind != ActuatorKind::FancoilHeat) continue;
    low.col(static_cast<Eigen::Index>(a)).setConstant(0.2);
    high.col(static_cast<Eigen::Index>(a)).setConstant(0.8);
  }
  const Vector x0 = Vector::Constant(static_cast<Eigen::Index>(m.n()), 15.0);
  const Matrix a = simulate(m, x0, low, v), b = simulate(m, x0, high, v);
  CHECK(((b - a).array() >= -1e-12).all());
  for (auto z : m.labels.zone_states) CHECK(b(T, static_cast<Eigen::Index>(z)) > a(T, static_cast<Eigen::Index>(z)));
}

TEST_CASE("halving the substep halves the trajectory change") {
  const auto d = load_building(ts::data_path("precis_floor.json"));
  const Eigen::Index T = 144;
  ts::Rng rng(9);
  const auto m10 = build_model(d, 600, 10);
  Matrix u(T, static_cast<Eigen::Index>(m10.n_u()));
  for (Eigen::Index k = 0; k < T; ++k) u.row(k) = ts::random_vector(rng, u.cols(), 0, 1).transpose();
  Matrix v = Matrix::Zero(T, static_cast<Eigen::Index>(m10.n_v()));
  for (std::size_t c = 0; c < d.disturbances.size(); ++c) {
    const auto& ch = d.disturbances[c];
    if (ch.kind == ChannelKind::AmbientTemperature) v.col(static_cast<Eigen::Index>(c)).setConstant(-2.0);
    else if (auto nominal = ch.effective_nominal()) v.col(static_cast<Eigen::Index>(c)).setConstant(*nominal);
  }
  const Vector x0 = Vector::Constant(static_cast<Eigen::Index>(m10.n()), 20.0);
  const Matrix a = simulate(m10, x0, u, v);
  const Matrix b = simulate(build_model(d, 600, 20), x0, u, v);
  const Matrix c = simulate(build_model(d, 600, 40), x0, u, v);
  const double d1 = (b - a).cwiseAbs().maxCoeff(), d2 = (c - b).cwiseAbs().maxCoeff();
  CHECK(d2 < 0.5 * d1 * 1.2);
  CHECK(d1 / d2 == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("model JSON round trip") {
  const auto m = build_model(load_building(ts::data_path("single_zone.json")));
  const auto back = model_from_json(nlohmann::json::parse(to_json(m).dump()));
  CHECK(back.A == m.A);
  CHECK(back.Bu == m.Bu);
  CHECK(back.Bv == m.Bv);
  CHECK(back.d == m.d);
  CHECK(back.Bxu == m.Bxu);
  CHECK(back.Bvu == m.Bvu);
  CHECK(back.ts == m.ts);
  CHECK(back.labels == m.labels);
}
