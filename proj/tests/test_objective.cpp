#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "resflow/data.hpp"
#include "resflow/objective.hpp"

using namespace resflow;
using testing::point;

namespace {

Dataset small_dataset(std::size_t count, std::uint64_t seed) {
  return make_random_testset(TargetMap::builtin_psi(), 1.5, count, seed);
}

}  // namespace

TEST_CASE("loss and its gradient") {
  CHECK(loss(point(0, 0)) == 0.0);
  CHECK(loss(point(-3, 4)) == doctest::Approx(4.09901951359278).epsilon(1e-14));
  const Vector g = loss_grad(point(-3, 4));
  CHECK(g(0) == doctest::Approx(-0.588348405414552).epsilon(1e-14));
  CHECK(g(1) == doctest::Approx(4.0 / std::sqrt(26.0)).epsilon(1e-14));
  // Tiny arguments keep full relative accuracy.
  CHECK(loss(point(1e-9, 0)) == doctest::Approx(5e-19).epsilon(1e-12));
  // 1-Lipschitz.
  for (double t = -10; t <= 10; t += 0.37) CHECK(loss_grad(point(t, 2 * t)).norm() < kLossLipschitz);
}

TEST_CASE("cost at the zero control") {
  const auto data = make_grid_dataset(TargetMap::builtin_psi(), 1.5, 6);
  const auto a = make_affine8();
  const auto value = cost(a, ControlGrid(16, 8), data, 0.3);
  double expect = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) expect += loss(data.sources().col(j) - data.targets().col(j));
  expect /= static_cast<double>(data.size());
  CHECK(value.data_term == doctest::Approx(expect).epsilon(1e-14));
  CHECK(value.reg_term == 0.0);
  CHECK(value.total == value.data_term);
}

TEST_CASE("regularization term") {
  const auto data = small_dataset(3, 1);
  const auto u = testing::random_control(8, 4, 2);
  const auto value = cost(make_affine8(), u, data, 0.2);
  CHECK(value.reg_term == doctest::Approx(0.1 * u.squared_l2_norm()));
  CHECK(value.total == doctest::Approx(value.data_term + value.reg_term));
}

TEST_CASE("backprop gradient matches central differences") {
  for (const auto& family : {make_affine8(), make_enriched14()}) {
    for (int n : {2, 4, 8}) {
      for (double beta : {0.0, 0.1}) {
        const auto data = small_dataset(3, static_cast<std::uint64_t>(n));
        const auto u = testing::random_control(family.n_fields(), n, 11 + n, 0.8);
        const auto exact = adjoint_gradient(family, u, data, beta, GradientScheme::Backprop);
        const auto fd = fd_gradient_oracle(family, u, data, beta);
        CHECK(compare_gradients(exact, fd).relative_error <= 1e-7);
      }
    }
  }
}

TEST_CASE("trapezoidal gradient converges to the discrete gradient at first order") {
  const auto family = make_enriched14();
  const auto data = small_dataset(4, 8);
  const auto base = testing::random_control(14, 1, 31, 0.7);
  std::vector<double> gaps;
  for (int n : {8, 16, 32, 64}) {
    ControlGrid u(n, 14);
    for (int k = 0; k < n; ++k) u.values().col(k) = base.values().col(0);
    const auto trap = adjoint_gradient(family, u, data, 1e-3, GradientScheme::Trapezoidal);
    const auto exact = adjoint_gradient(family, u, data, 1e-3, GradientScheme::Backprop);
    gaps.push_back(compare_gradients(trap, exact).relative_error);
  }
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    const double ratio = gaps[i - 1] / gaps[i];
    CHECK(ratio > 1.7);
    CHECK(ratio < 2.3);
  }
}

TEST_CASE("both schemes give descent directions") {
  const auto family = make_affine8();
  const auto data = make_grid_dataset(TargetMap::builtin_psi(), 1.5, 5);
  const auto u = testing::random_control(8, 16, 3, 0.5);
  const auto fd = fd_gradient_oracle(family, u, data, 1e-4);
  for (auto scheme : {GradientScheme::Trapezoidal, GradientScheme::Backprop}) {
    const auto g = adjoint_gradient(family, u, data, 1e-4, scheme);
    CHECK((g.values().array() * fd.values().array()).sum() > 0.0);
  }
}

TEST_CASE("gradient is invariant under sample permutation") {
  const auto family = make_enriched14();
  const auto data = small_dataset(7, 13);
  const auto permuted = data.subset({6, 2, 0, 5, 3, 1, 4});
  const auto u = testing::random_control(14, 8, 17);
  for (auto scheme : {GradientScheme::Trapezoidal, GradientScheme::Backprop}) {
    const auto g1 = adjoint_gradient(family, u, data, 0.01, scheme);
    const auto g2 = adjoint_gradient(family, u, permuted, 0.01, scheme);
    CHECK(compare_gradients(g2, g1).relative_error < 1e-13);
  }
  CHECK(cost(family, u, data, 0.01).total == doctest::Approx(cost(family, u, permuted, 0.01).total).epsilon(1e-14));
}

TEST_CASE("identity target at the zero control has a zero gradient") {
  const auto data = make_grid_dataset(TargetMap::identity(), 1.5, 3);
  const auto g = adjoint_gradient(make_affine8(), ControlGrid(4, 8), data, 0.0);
  CHECK(g.values().isZero(0.0));
  const auto fd = fd_gradient_oracle(make_affine8(), ControlGrid(4, 8), data, 0.0);
  CHECK(compare_gradients(g, fd).relative_error == 0.0);
}

TEST_CASE("compare_gradients edge cases") {
  ControlGrid zero(2, 2);
  ControlGrid one(2, 2);
  one(1, 1) = 1.0;
  CHECK(compare_gradients(zero, zero).relative_error == 0.0);
  CHECK(std::isinf(compare_gradients(one, zero).relative_error));
  ControlGrid other = one;
  other(0, 1) = 0.5;
  const auto cmp = compare_gradients(other, one);
  CHECK(cmp.relative_error == 0.5);
  CHECK(cmp.worst_field == 0);
  CHECK(cmp.worst_layer == 1);
}
