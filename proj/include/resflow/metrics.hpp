#pragma once

#include <cstddef>
#include <optional>

#include "resflow/data.hpp"
#include "resflow/fields.hpp"
#include "resflow/flow.hpp"

namespace resflow {

struct MetricsBlock {
  double lipschitz_flow = 0.0;
  double lipschitz_target = 0.0;
  double l2_norm_u = 0.0;
  double w1_bound = 0.0;
  double training_error = 0.0;
  /// training_error + L_a (L_target + L_flow) w1_bound
  double gen_bound = 0.0;
  /// exp(C ||u||), only when C is supplied.
  std::optional<double> exp_bound;
};

/// Largest singular value; closed form for 2x2.
double spectral_norm(const Matrix& a);

/// max over probe points (columns) of the spectral norm of the flow Jacobian.
double lipschitz_estimate(const VectorFieldFamily& family, const ControlGrid& u, const PointSet& probe_points);

double target_lipschitz_estimate(const TargetMap& target, const PointSet& probe_points);

/// W1 bound between the uniform measure on a square of side `side` and the
/// empirical measure of an M-point grid on it.
double w1_grid_bound(std::size_t m, double side);

double generalization_bound(double training_error, double lipschitz_target, double lipschitz_flow, double w1);

MetricsBlock compute_metrics(const VectorFieldFamily& family, const ControlGrid& u, const TargetMap& target,
                             const PointSet& probe_points, double training_error, double w1,
                             std::optional<double> growth_constant = std::nullopt);

}  // namespace resflow
