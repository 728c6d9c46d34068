#include "resflow/fields.hpp"

#include <array>
#include <cmath>

#include "resflow/error.hpp"

namespace resflow {

namespace {

constexpr std::array<const char*, 14> kBuiltinNames = {
    "F1",      "F2",      "F1'",     "F2'",     "G1^1",    "G1^2",    "G2^1",
    "G2^2",    "G1^{11}", "G1^{12}", "G1^{22}", "G2^{11}", "G2^{12}", "G2^{22}"};

// Every built-in field has the form s(x) e_c: a scalar profile pushing along
// one coordinate axis. The Jacobian is then zero except for row c = grad s.
constexpr std::array<int, 14> kAxis = {0, 1, 0, 1, 0, 0, 1, 1, 0, 0, 0, 1, 1, 1};

struct Profile {
  double s;
  double ds0;
  double ds1;
};

inline Profile profile(int i, double x0, double x1, double g, double inv_nu) {
  // grad g = -g x / nu
  const double dg0 = -g * x0 * inv_nu;
  const double dg1 = -g * x1 * inv_nu;
  switch (i) {
    case 0:
    case 1:
      return {1.0, 0.0, 0.0};
    case 2:
    case 3:
      return {g, dg0, dg1};
    case 4:
    case 6:
      return {x0, 1.0, 0.0};
    case 5:
    case 7:
      return {x1, 0.0, 1.0};
    case 8:
    case 11:  // x0^2 g
      return {x0 * x0 * g, 2.0 * x0 * g + x0 * x0 * dg0, x0 * x0 * dg1};
    case 9:
    case 12:  // x0 x1 g
      return {x0 * x1 * g, x1 * g + x0 * x1 * dg0, x0 * g + x0 * x1 * dg1};
    default:  // x1^2 g
      return {x1 * x1 * g, x1 * x1 * dg0, 2.0 * x1 * g + x1 * x1 * dg1};
  }
}

inline double gaussian(double x0, double x1, double nu) {
  return std::exp(-(x0 * x0 + x1 * x1) / (2.0 * nu));
}

}  // namespace

VectorFieldFamily::VectorFieldFamily(FamilyKind kind, int dim, int n_fields, double nu)
    : kind_(kind), dim_(dim), n_fields_(n_fields), nu_(nu) {}

VectorFieldFamily make_affine8(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw InvalidArgument("nu must be positive and finite");
  return VectorFieldFamily(FamilyKind::Affine8, 2, 8, nu);
}

VectorFieldFamily make_enriched14(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw InvalidArgument("nu must be positive and finite");
  return VectorFieldFamily(FamilyKind::Enriched14, 2, 14, nu);
}

VectorFieldFamily make_family(std::string_view name, double nu) {
  if (name == "affine8") return make_affine8(nu);
  if (name == "enriched14") return make_enriched14(nu);
  throw InvalidArgument("unknown field family '" + std::string(name) + "'");
}

VectorFieldFamily VectorFieldFamily::custom(int dim, std::vector<FieldDescriptor> fields) {
  if (dim < 1) throw InvalidArgument("custom family: dim must be positive");
  if (fields.empty()) throw InvalidArgument("custom family: at least one field required");
  for (const auto& f : fields) {
    if (!f.value || !f.jacobian) throw InvalidArgument("custom field '" + f.name + "' lacks a callable");
  }
  VectorFieldFamily family(FamilyKind::Custom, dim, static_cast<int>(fields.size()), 0.0);
  family.custom_ = std::make_shared<const std::vector<FieldDescriptor>>(std::move(fields));
  return family;
}

std::string VectorFieldFamily::name() const {
  switch (kind_) {
    case FamilyKind::Affine8:
      return "affine8";
    case FamilyKind::Enriched14:
      return "enriched14";
    default:
      return "custom";
  }
}

std::string VectorFieldFamily::field_name(int i) const {
  check_index(i);
  if (kind_ == FamilyKind::Custom) return (*custom_)[i].name;
  return kBuiltinNames[i];
}

void VectorFieldFamily::check_index(int i) const {
  if (i < 0 || i >= n_fields_) {
    throw InvalidArgument("field index " + std::to_string(i) + " out of range [0, " +
                          std::to_string(n_fields_) + ")");
  }
}

Vector VectorFieldFamily::eval_field(int i, const Vector& x) const {
  check_index(i);
  if (x.size() != dim_) throw InvalidArgument("point has wrong dimension");
  if (kind_ == FamilyKind::Custom) {
    Vector v = (*custom_)[i].value(x);
    if (v.size() != dim_) throw InvalidArgument("custom field returned wrong dimension");
    return v;
  }
  const Profile p = profile(i, x[0], x[1], gaussian(x[0], x[1], nu_), 1.0 / nu_);
  Vector v = Vector::Zero(2);
  v[kAxis[i]] = p.s;
  return v;
}

Matrix VectorFieldFamily::eval_jacobian(int i, const Vector& x) const {
  check_index(i);
  if (x.size() != dim_) throw InvalidArgument("point has wrong dimension");
  if (kind_ == FamilyKind::Custom) {
    Matrix m = (*custom_)[i].jacobian(x);
    if (m.rows() != dim_ || m.cols() != dim_) throw InvalidArgument("custom jacobian has wrong shape");
    return m;
  }
  const Profile p = profile(i, x[0], x[1], gaussian(x[0], x[1], nu_), 1.0 / nu_);
  Matrix m = Matrix::Zero(2, 2);
  m(kAxis[i], 0) = p.ds0;
  m(kAxis[i], 1) = p.ds1;
  return m;
}

void VectorFieldFamily::eval_all(const Eigen::Ref<const Vector>& x, Eigen::Ref<Matrix> out) const {
  if (kind_ == FamilyKind::Custom) {
    const Vector xv = x;
    for (int i = 0; i < n_fields_; ++i) out.col(i) = (*custom_)[i].value(xv);
    return;
  }
  const double g = gaussian(x[0], x[1], nu_);
  const double inv_nu = 1.0 / nu_;
  out.setZero();
  for (int i = 0; i < n_fields_; ++i) out(kAxis[i], i) = profile(i, x[0], x[1], g, inv_nu).s;
}

void VectorFieldFamily::apply(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& u,
                              Eigen::Ref<Vector> out) const {
  out.setZero();
  if (kind_ == FamilyKind::Custom) {
    const Vector xv = x;
    for (int i = 0; i < n_fields_; ++i) {
      if (u[i] != 0.0) out += u[i] * (*custom_)[i].value(xv);
    }
    return;
  }
  const double g = gaussian(x[0], x[1], nu_);
  const double inv_nu = 1.0 / nu_;
  for (int i = 0; i < n_fields_; ++i) out[kAxis[i]] += u[i] * profile(i, x[0], x[1], g, inv_nu).s;
}

void VectorFieldFamily::jacobian_combination(const Eigen::Ref<const Vector>& x,
                                             const Eigen::Ref<const Vector>& u,
                                             Eigen::Ref<Matrix> out) const {
  out.setZero();
  if (kind_ == FamilyKind::Custom) {
    const Vector xv = x;
    for (int i = 0; i < n_fields_; ++i) {
      if (u[i] != 0.0) out += u[i] * (*custom_)[i].jacobian(xv);
    }
    return;
  }
  const double g = gaussian(x[0], x[1], nu_);
  const double inv_nu = 1.0 / nu_;
  for (int i = 0; i < n_fields_; ++i) {
    const Profile p = profile(i, x[0], x[1], g, inv_nu);
    out(kAxis[i], 0) += u[i] * p.ds0;
    out(kAxis[i], 1) += u[i] * p.ds1;
  }
}

std::optional<double> VectorFieldFamily::field_bound(int i, double half_side) const {
  check_index(i);
  if (kind_ == FamilyKind::Custom) return std::nullopt;
  if (i < 4) return 1.0;
  if (i < 8) return half_side;
  // |x_a x_b| g <= half_side^2 since g <= 1
  return half_side * half_side;
}

VectorFieldFamily select_fields(const VectorFieldFamily& family, const std::vector<int>& indices) {
  std::vector<FieldDescriptor> fields;
  fields.reserve(indices.size());
  for (int i : indices) {
    fields.push_back({family.field_name(i),
                      [family, i](const Vector& x) { return family.eval_field(i, x); },
                      [family, i](const Vector& x) { return family.eval_jacobian(i, x); }});
  }
  return VectorFieldFamily::custom(family.dim(), std::move(fields));
}

}  // namespace resflow
