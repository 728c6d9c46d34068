#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "resflow/error.hpp"
#include "resflow/fields.hpp"

using namespace resflow;
using testing::point;

TEST_CASE("built-in families have the documented sizes and names") {
  const auto a = make_affine8();
  const auto e = make_enriched14();
  CHECK(a.dim() == 2);
  CHECK(a.n_fields() == 8);
  CHECK(e.n_fields() == 14);
  CHECK(a.nu() == 20.0);
  CHECK(a.name() == "affine8");
  CHECK(make_family("enriched14").kind() == FamilyKind::Enriched14);
  CHECK_THROWS_AS(make_family("cubic"), InvalidArgument);
  CHECK_THROWS_AS(make_affine8(0.0), InvalidArgument);
  CHECK_THROWS_AS(a.eval_field(8, point(0, 0)), InvalidArgument);
}

TEST_CASE("field values at reference points") {
  const auto e = make_enriched14();
  const Vector g12 = e.eval_field(9, point(1, 1));
  CHECK(g12(0) == doctest::Approx(0.951229424500714).epsilon(1e-14));
  CHECK(g12(1) == 0.0);
  const Vector f2p = e.eval_field(3, point(2, 0));
  CHECK(f2p(0) == 0.0);
  CHECK(f2p(1) == doctest::Approx(0.904837418035960).epsilon(1e-14));
  const Matrix d = e.eval_jacobian(2, point(1, 0));
  CHECK(d(0, 0) == doctest::Approx(-0.0487654956014166).epsilon(1e-13));
  // Constant and linear fields.
  CHECK(e.eval_field(0, point(3, -2)) == point(1, 0));
  CHECK(e.eval_field(1, point(3, -2)) == point(0, 1));
  CHECK(e.eval_field(5, point(3, -2)) == point(-2, 0));
  CHECK(e.eval_field(6, point(3, -2)) == point(0, 3));
}

TEST_CASE("analytic Jacobians agree with central differences") {
  const auto e = make_enriched14(7.0);
  const double step = 1e-6;
  for (int i = 0; i < e.n_fields(); ++i) {
    for (const Vector& x : {point(0.3, -0.7), point(-1.2, 0.5), point(0.9, 1.4)}) {
      const Matrix jac = e.eval_jacobian(i, x);
      for (int c = 0; c < 2; ++c) {
        Vector xp = x, xm = x;
        xp(c) += step;
        xm(c) -= step;
        const Vector col = (e.eval_field(i, xp) - e.eval_field(i, xm)) / (2 * step);
        CHECK((jac.col(c) - col).norm() < 1e-8);
      }
    }
  }
}

TEST_CASE("apply and jacobian_combination are linear in the control") {
  const auto e = make_enriched14();
  const Vector x = point(0.4, -1.1);
  const auto u = testing::random_control(14, 1, 5);
  Vector out(2);
  Matrix jac(2, 2);
  e.apply(x, u.layer(0), out);
  e.jacobian_combination(x, u.layer(0), jac);
  Vector expect = Vector::Zero(2);
  Matrix expect_jac = Matrix::Zero(2, 2);
  Matrix all(2, 14);
  e.eval_all(x, all);
  for (int i = 0; i < 14; ++i) {
    expect += u(i, 0) * e.eval_field(i, x);
    expect_jac += u(i, 0) * e.eval_jacobian(i, x);
    CHECK(all.col(i) == e.eval_field(i, x));
  }
  CHECK((out - expect).norm() < 1e-14);
  CHECK((jac - expect_jac).norm() < 1e-14);
}

TEST_CASE("field bounds hold on the box") {
  const auto e = make_enriched14();
  const double half = 0.75;
  for (int i = 0; i < e.n_fields(); ++i) {
    const double bound = *e.field_bound(i, half);
    for (double a = -half; a <= half; a += 0.05)
      for (double b = -half; b <= half; b += 0.05) CHECK(e.eval_field(i, point(a, b)).norm() <= bound + 1e-15);
  }
}

TEST_CASE("select_fields keeps the chosen fields in order") {
  const auto e = make_enriched14();
  const auto sub = select_fields(e, {6, 0});
  CHECK(sub.n_fields() == 2);
  CHECK(sub.kind() == FamilyKind::Custom);
  const Vector x = point(0.2, 0.8);
  CHECK(sub.eval_field(0, x) == e.eval_field(6, x));
  CHECK(sub.eval_jacobian(1, x) == e.eval_jacobian(0, x));
  CHECK_FALSE(sub.field_bound(0, 1.0).has_value());
  CHECK_THROWS_AS(select_fields(e, {14}), InvalidArgument);
}

TEST_CASE("custom families validate their callables") {
  FieldDescriptor rot{"rot", [](const Vector& x) { return point(-x(1), x(0)); },
                      [](const Vector&) {
                        Matrix m(2, 2);
                        m << 0, -1, 1, 0;
                        return m;
                      }};
  const auto fam = VectorFieldFamily::custom(2, {rot});
  CHECK(fam.eval_field(0, point(1, 0)) == point(0, 1));
  CHECK_THROWS(VectorFieldFamily::custom(2, {}));
}
