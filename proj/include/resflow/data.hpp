#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

#include "resflow/dataset.hpp"
#include "resflow/types.hpp"

namespace resflow {

enum class TargetKind { BuiltinPsi, Identity, Custom };

/// The diffeomorphism to be learned, with value and Jacobian.
///
/// BuiltinPsi is x -> Psi~(R x + T) with R the rotation by pi/3, T the shift
/// (0.3, 0.2) and Psi~(y) = y + (2 y1 exp(y1^2 - 1), 2 y2^3) + (-4, -4.5).
class TargetMap {
 public:
  using ValueFn = std::function<Vector(const Vector&)>;
  using JacobianFn = std::function<Matrix(const Vector&)>;

  static TargetMap builtin_psi();
  static TargetMap identity(int dim = 2);
  static TargetMap custom(int dim, ValueFn value, JacobianFn jacobian, std::string name = "custom");
  static TargetMap rotation(double angle);
  static TargetMap translation(Vector shift);

  TargetKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  const std::string& name() const noexcept { return name_; }

  Vector eval(const Vector& x) const;
  Matrix jacobian(const Vector& x) const;

 private:
  TargetMap(TargetKind kind, int dim, std::string name) : kind_(kind), dim_(dim), name_(std::move(name)) {}

  TargetKind kind_;
  int dim_;
  std::string name_;
  ValueFn value_;
  JacobianFn jacobian_;
};

/// "psi" or "identity".
TargetMap make_target(std::string_view name);

Vector eval_target(const TargetMap& target, const Vector& x);
PointSet eval_target(const TargetMap& target, const PointSet& points);

/// per_axis x per_axis tensor grid on [-side/2, side/2]^2, endpoints included.
/// Sample a * per_axis + b sits at (g_a, g_b).
Dataset make_grid_dataset(const TargetMap& target, double side, int per_axis);

/// count i.i.d. uniform points on [-side/2, side/2]^2 drawn from
/// CounterRng(seed); point j uses outputs 2j and 2j+1.
Dataset make_random_testset(const TargetMap& target, double side, std::size_t count, std::uint64_t seed);

/// CSV with header x1,..,xn,y1,..,yn and 17 significant digits.
void write_dataset_csv(const Dataset& data, std::ostream& out);
Dataset read_dataset_csv(std::istream& in);
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace resflow
