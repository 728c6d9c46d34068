#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "resflow/types.hpp"

namespace resflow {

enum class FamilyKind { Affine8, Enriched14, Custom };

/// One user-supplied controlled field. Both callables must be pure.
struct FieldDescriptor {
  std::string name;
  std::function<Vector(const Vector&)> value;
  std::function<Matrix(const Vector&)> jacobian;
};

/// An ordered family of controlled vector fields F_0..F_{l-1} on R^n.
///
/// Field indices are 0-based. The order of the built-in families is part of
/// the file format of saved controls:
///
///   affine8:    F1, F2, F1', F2', G1^1, G1^2, G2^1, G2^2
///   enriched14: affine8 followed by G1^{11}, G1^{12}, G1^{22},
///               G2^{11}, G2^{12}, G2^{22}
///
/// with F' and G^{ab} carrying the Gaussian factor exp(-|x|^2 / (2 nu)).
class VectorFieldFamily {
 public:
  static VectorFieldFamily custom(int dim, std::vector<FieldDescriptor> fields);

  int dim() const noexcept { return dim_; }
  int n_fields() const noexcept { return n_fields_; }
  double nu() const noexcept { return nu_; }
  FamilyKind kind() const noexcept { return kind_; }
  std::string name() const;
  std::string field_name(int i) const;

  Vector eval_field(int i, const Vector& x) const;
  Matrix eval_jacobian(int i, const Vector& x) const;

  /// out (dim x l): column i holds F_i(x).
  void eval_all(const Eigen::Ref<const Vector>& x, Eigen::Ref<Matrix> out) const;

  /// out = sum_i u_i F_i(x).
  void apply(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& u,
             Eigen::Ref<Vector> out) const;

  /// out = sum_i u_i D_x F_i(x).
  void jacobian_combination(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& u,
                            Eigen::Ref<Matrix> out) const;

  /// Upper bound of |F_i| on the box [-half_side, half_side]^n. Empty for
  /// custom fields.
  std::optional<double> field_bound(int i, double half_side) const;

 private:
  VectorFieldFamily(FamilyKind kind, int dim, int n_fields, double nu);

  void check_index(int i) const;

  FamilyKind kind_;
  int dim_;
  int n_fields_;
  double nu_;
  std::shared_ptr<const std::vector<FieldDescriptor>> custom_;

  friend VectorFieldFamily make_affine8(double nu);
  friend VectorFieldFamily make_enriched14(double nu);
};

VectorFieldFamily make_affine8(double nu = 20.0);
VectorFieldFamily make_enriched14(double nu = 20.0);

/// Looks up a built-in family by name ("affine8", "enriched14").
VectorFieldFamily make_family(std::string_view name, double nu = 20.0);

/// Custom family made of the selected fields of `family`, in the given order.
VectorFieldFamily select_fields(const VectorFieldFamily& family, const std::vector<int>& indices);

}  // namespace resflow
