#pragma once

#include <cstddef>
#include <vector>

#include "resflow/fields.hpp"
#include "resflow/types.hpp"

namespace resflow {

/// Piecewise-constant control u in U_N: value u(i, k) drives field i on the
/// time slab [k/N, (k+1)/N). Indices are 0-based; layer k maps node k to k+1.
class ControlGrid {
 public:
  ControlGrid() = default;
  ControlGrid(int n_layers, int n_fields);
  /// values is n_fields x n_layers.
  explicit ControlGrid(Matrix values);

  int n_layers() const noexcept { return static_cast<int>(values_.cols()); }
  int n_fields() const noexcept { return static_cast<int>(values_.rows()); }
  double step() const noexcept { return 1.0 / n_layers(); }

  double operator()(int i, int k) const { return values_(i, k); }
  double& operator()(int i, int k) { return values_(i, k); }

  const Matrix& values() const noexcept { return values_; }
  Matrix& values() noexcept { return values_; }
  auto layer(int k) const { return values_.col(k); }

  /// h * sum of squared entries: the exact L2 norm of the step function.
  double squared_l2_norm() const;
  double l2_norm() const;

  bool all_finite() const { return values_.allFinite(); }

 private:
  Matrix values_;
};

/// States x_k^j at every node; states[j] is n x (N+1), column k = x_k^j.
struct TrajectoryBundle {
  std::vector<Matrix> states;

  std::size_t n_samples() const noexcept { return states.size(); }
  int n_layers() const { return states.empty() ? 0 : static_cast<int>(states.front().cols()) - 1; }
  PointSet endpoints() const;
  /// All samples at node k, as n x M.
  PointSet node(int k) const;
};

/// Row covectors lambda_k^j stored transposed; covectors[j] is n x (N+1).
struct CovectorBundle {
  std::vector<Matrix> covectors;

  std::size_t n_samples() const noexcept { return covectors.size(); }
  PointSet node(int k) const;
};

/// How the backward sweep transports covectors across one layer.
///  Implicit: lambda_{k-1} = lambda_k (Id - h A_k)^{-1}  (the training default)
///  Explicit: lambda_{k-1} = lambda_k (Id + h A_k)       (exact backpropagation)
/// where A_k = sum_i u_{i,k} D_x F_i(x_{k-1}).
enum class BackwardFactor { Implicit, Explicit };

/// Reciprocal condition number below which the implicit solve is refused.
inline constexpr double kMinReciprocalCondition = 1e-12;

/// Explicit Euler states of a single sample, n x (N+1).
Matrix propagate(const VectorFieldFamily& family, const ControlGrid& u, const Vector& x0,
                 std::size_t sample_index = 0);

/// Endpoint of the discrete flow map.
Vector flow_map(const VectorFieldFamily& family, const ControlGrid& u, const Vector& x0);

/// ResNet forward pass for all sources (n x M).
TrajectoryBundle forward_euler(const VectorFieldFamily& family, const ControlGrid& u,
                               const PointSet& sources);

CovectorBundle backward_covector(const VectorFieldFamily& family, const ControlGrid& u,
                                 const TrajectoryBundle& traj, const PointSet& terminal,
                                 BackwardFactor factor = BackwardFactor::Implicit);

/// Jacobian of the discrete flow map at x0, propagated with (Id + h A_k).
Matrix variational_jacobian(const VectorFieldFamily& family, const ControlGrid& u, const Vector& x0);

/// Normalized defect |commutator loop(x) - exp(h^2 [F_a, F_b])(x)| / h^2.
/// Each exponential uses classical RK4 with `substeps` steps.
double commutator_order_check(const VectorFieldFamily& family, int field_a, int field_b,
                              const Vector& x, double h, int substeps = 64);

}  // namespace resflow
