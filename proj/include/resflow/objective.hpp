#pragma once

#include "resflow/dataset.hpp"
#include "resflow/fields.hpp"
#include "resflow/flow.hpp"

namespace resflow {

/// a(z) = sqrt(1 + |z|^2) - 1. Smooth and 1-Lipschitz.
double loss(const Eigen::Ref<const Vector>& z);
Vector loss_grad(const Eigen::Ref<const Vector>& z);

inline constexpr double kLossLipschitz = 1.0;

struct ObjectiveValue {
  double total = 0.0;
  double data_term = 0.0;  // mean loss over the samples ("training error")
  double reg_term = 0.0;   // (beta/2) ||u||^2
};

/// Mean loss of `predicted` against `targets` (both n x M).
double mean_loss(const PointSet& predicted, const PointSet& targets);

ObjectiveValue cost(const VectorFieldFamily& family, const ControlGrid& u, const Dataset& data,
                    double beta);

/// Cost from an already computed forward pass.
ObjectiveValue cost_from_trajectory(const TrajectoryBundle& traj, const ControlGrid& u,
                                    const Dataset& data, double beta);

/// Terminal covectors sign * (1/M) grad a(x_N^j - target^j), n x M.
PointSet terminal_covectors(const TrajectoryBundle& traj, const Dataset& data, double sign = 1.0);

/// How the projected gradient is assembled from states and covectors.
enum class GradientScheme {
  /// Implicit-Euler covectors and a trapezoidal rule on each slab; this is
  /// the scheme used by the gradient-flow trainer. It approximates the
  /// continuous-time gradient, so it differs from the derivative of the
  /// discrete cost by O(h).
  Trapezoidal,
  /// Explicit backpropagation covectors paired with F_i(x_{k-1}); the exact
  /// derivative of the discrete cost divided by h.
  Backprop,
};

/// Gradient of the cost in U_N coordinates: the entrywise partial derivative
/// of the discrete cost equals h * result(i, k) for the Backprop scheme.
ControlGrid adjoint_gradient(const VectorFieldFamily& family, const ControlGrid& u, const Dataset& data,
                             double beta, GradientScheme scheme = GradientScheme::Trapezoidal);

/// Same, reusing a forward pass computed for `u` on `data`.
ControlGrid adjoint_gradient(const VectorFieldFamily& family, const ControlGrid& u, const Dataset& data,
                             const TrajectoryBundle& traj, double beta, GradientScheme scheme);

/// Central differences of `cost` in every u(i, k), divided by h.
ControlGrid fd_gradient_oracle(const VectorFieldFamily& family, const ControlGrid& u, const Dataset& data,
                               double beta, double step = 1e-5);

struct GradientComparison {
  double relative_error = 0.0;  // max |a - b| / max |b|
  int worst_field = 0;
  int worst_layer = 0;
};

/// Normwise relative error of `candidate` against `reference`. Both zero
/// gives 0; a zero reference with a nonzero candidate gives +inf.
GradientComparison compare_gradients(const ControlGrid& candidate, const ControlGrid& reference);

}  // namespace resflow
