#include "resflow/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "resflow/error.hpp"
#include "resflow/objective.hpp"
#include "resflow/parallel.hpp"

namespace resflow {

double spectral_norm(const Matrix& a) {
  if (a.rows() == 2 && a.cols() == 2) {
    const double e = 0.5 * (a(0, 0) + a(1, 1));
    const double f = 0.5 * (a(0, 0) - a(1, 1));
    const double g = 0.5 * (a(1, 0) + a(0, 1));
    const double h = 0.5 * (a(1, 0) - a(0, 1));
    return std::hypot(e, h) + std::hypot(f, g);
  }
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

namespace {

template <class JacobianAt>
double max_spectral_norm(const PointSet& probe_points, JacobianAt&& jacobian_at) {
  if (probe_points.cols() == 0) throw InvalidArgument("no probe points");
  std::vector<double> norms(static_cast<std::size_t>(probe_points.cols()));
  detail::for_each_index(norms.size(), [&](std::size_t j) {
    norms[j] = spectral_norm(jacobian_at(Vector(probe_points.col(static_cast<Eigen::Index>(j)))));
  });
  return *std::max_element(norms.begin(), norms.end());
}

}  // namespace

double lipschitz_estimate(const VectorFieldFamily& family, const ControlGrid& u, const PointSet& probe_points) {
  return max_spectral_norm(probe_points, [&](const Vector& x) { return variational_jacobian(family, u, x); });
}

double target_lipschitz_estimate(const TargetMap& target, const PointSet& probe_points) {
  return max_spectral_norm(probe_points, [&](const Vector& x) { return target.jacobian(x); });
}

double w1_grid_bound(std::size_t m, double side) {
  if (m < 1) throw InvalidArgument("w1_grid_bound: need at least one sample");
  if (!(side > 0.0)) throw InvalidArgument("w1_grid_bound: side must be positive");
  return std::sqrt(2.0) * side / (2.0 * std::sqrt(static_cast<double>(m)));
}

double generalization_bound(double training_error, double lipschitz_target, double lipschitz_flow, double w1) {
  if (training_error < 0.0 || lipschitz_target < 0.0 || lipschitz_flow < 0.0 || w1 < 0.0) {
    throw InvalidArgument("generalization_bound: inputs must be nonnegative");
  }
  return training_error + kLossLipschitz * (lipschitz_target + lipschitz_flow) * w1;
}

MetricsBlock compute_metrics(const VectorFieldFamily& family, const ControlGrid& u, const TargetMap& target,
                             const PointSet& probe_points, double training_error, double w1,
                             std::optional<double> growth_constant) {
  MetricsBlock m;
  m.lipschitz_flow = lipschitz_estimate(family, u, probe_points);
  m.lipschitz_target = target_lipschitz_estimate(target, probe_points);
  m.l2_norm_u = u.l2_norm();
  m.w1_bound = w1;
  m.training_error = training_error;
  m.gen_bound = generalization_bound(training_error, m.lipschitz_target, m.lipschitz_flow, w1);
  if (growth_constant) m.exp_bound = std::exp(*growth_constant * m.l2_norm_u);
  return m;
}

}  // namespace resflow
