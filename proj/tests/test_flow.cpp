#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "resflow/error.hpp"
#include "resflow/flow.hpp"

using namespace resflow;
using testing::point;

TEST_CASE("zero control gives the identity flow") {
  const auto e = make_enriched14();
  const ControlGrid u(16, 14);
  const Vector x = point(0.37, -1.21);
  CHECK(flow_map(e, u, x) == x);
  CHECK(variational_jacobian(e, u, x) == Matrix::Identity(2, 2));
}

TEST_CASE("constant fields translate exactly") {
  const auto a = make_affine8();
  ControlGrid u(8, 8);
  for (int k = 0; k < 8; ++k) {
    u(0, k) = 0.5;
    u(1, k) = -0.25;
  }
  const Vector y = flow_map(a, u, point(0.1, 0.2));
  CHECK(y(0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(y(1) == doctest::Approx(-0.05).epsilon(1e-15));
}

TEST_CASE("linear fields follow (I + hA)^N") {
  const auto a = make_affine8();
  SUBCASE("scalar closed form") {
    ControlGrid u(2, 8);
    u(4, 0) = u(4, 1) = 1.0;
    const Vector y = flow_map(a, u, point(1, 1));
    CHECK(y(0) == 2.25);
    CHECK(y(1) == 1.0);
  }
  SUBCASE("matrix closed form") {
    Matrix A(2, 2);
    A << 0.3, -1.1, 0.7, 0.2;
    const int n = 10;
    ControlGrid u(n, 8);
    for (int k = 0; k < n; ++k) {
      u(4, k) = A(0, 0);
      u(5, k) = A(0, 1);
      u(6, k) = A(1, 0);
      u(7, k) = A(1, 1);
    }
    Matrix step = Matrix::Identity(2, 2) + A / n;
    Matrix power = Matrix::Identity(2, 2);
    for (int k = 0; k < n; ++k) power = step * power;
    const Vector x = point(-0.4, 0.9);
    CHECK((flow_map(a, u, x) - power * x).norm() <= 1e-14 * (power * x).norm());
    CHECK((variational_jacobian(a, u, x) - power).norm() <= 1e-14 * power.norm());
  }
}

TEST_CASE("implicit covector closed form") {
  const auto a = make_affine8();
  ControlGrid u(2, 8);
  u(4, 0) = u(4, 1) = 1.0;
  const PointSet x0 = point(1, 1);
  const auto traj = forward_euler(a, u, x0);
  const auto cov = backward_covector(a, u, traj, point(1, 1));
  CHECK(cov.covectors[0].col(0)(0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(cov.covectors[0].col(0)(1) == 1.0);
  const auto expl = backward_covector(a, u, traj, point(1, 1), BackwardFactor::Explicit);
  CHECK(expl.covectors[0].col(0) == point(2.25, 1.0));
}

TEST_CASE("explicit covectors are dual to the variational equation") {
  const auto e = make_enriched14();
  const auto u = testing::random_control(14, 12, 21, 2.0);
  PointSet sources(2, 3);
  sources << 0.1, -0.6, 0.7, 0.4, 0.2, -0.5;
  PointSet terminal(2, 3);
  terminal << 1.0, -0.3, 0.25, 0.5, 2.0, -1.5;
  const auto traj = forward_euler(e, u, sources);
  const auto cov = backward_covector(e, u, traj, terminal, BackwardFactor::Explicit);
  for (int j = 0; j < 3; ++j) {
    const Matrix jac = variational_jacobian(e, u, sources.col(j));
    const Vector expect = jac.transpose() * terminal.col(j);
    CHECK((cov.covectors[j].col(0) - expect).norm() <= 1e-10 * expect.norm());
  }
}

TEST_CASE("forward pass is per-sample and matches propagate") {
  const auto e = make_enriched14();
  const auto u = testing::random_control(14, 6, 4);
  PointSet sources(2, 4);
  sources << 0.1, -0.6, 0.7, 0.0, 0.4, 0.2, -0.5, 0.0;
  const auto traj = forward_euler(e, u, sources);
  CHECK(traj.n_samples() == 4);
  CHECK(traj.n_layers() == 6);
  for (int j = 0; j < 4; ++j) {
    CHECK(traj.states[j] == propagate(e, u, sources.col(j), j));
    CHECK(traj.endpoints().col(j) == traj.states[j].col(6));
    CHECK(traj.node(0).col(j) == sources.col(j));
  }
}

TEST_CASE("overflow raises FlowError with its location") {
  const auto a = make_affine8();
  ControlGrid u(3, 8);
  u(4, 0) = u(4, 1) = u(4, 2) = 1e200;
  PointSet sources(2, 2);
  sources << 0.0, 1.0, 0.0, 0.0;
  try {
    forward_euler(a, u, sources);
    FAIL("no exception");
  } catch (const FlowError& err) {
    CHECK(err.sample() == 1);
    CHECK(err.layer() == 2);
  }
}

TEST_CASE("singular implicit step is refused") {
  const auto a = make_affine8();
  ControlGrid u(1, 8);
  u(4, 0) = 1.0;  // Id - h A = diag(0, 1)
  const PointSet x0 = point(1, 1);
  const auto traj = forward_euler(a, u, x0);
  CHECK_THROWS_AS(backward_covector(a, u, traj, point(1, 0)), FlowError);
}

TEST_CASE("control grid norms and validation") {
  Matrix v(2, 4);
  v << 1, 2, 3, 4, 0, 0, 0, 1;
  const ControlGrid u(v);
  CHECK(u.step() == 0.25);
  CHECK(u.squared_l2_norm() == doctest::Approx(0.25 * 31));
  CHECK(u.l2_norm() == doctest::Approx(std::sqrt(0.25 * 31)));
  v(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(ControlGrid{v}, InvalidArgument);
}

TEST_CASE("commutator defect decreases with the step") {
  const auto a = make_affine8();
  const Vector x = point(1, 1);
  const double r1 = commutator_order_check(a, 5, 6, x, 0.2);
  const double r2 = commutator_order_check(a, 5, 6, x, 0.1);
  const double r3 = commutator_order_check(a, 5, 6, x, 0.05);
  CHECK(r1 > r2);
  CHECK(r2 > r3);
  // Commuting constant fields have no defect at all.
  CHECK(commutator_order_check(a, 0, 1, x, 0.1) < 1e-12);
}
