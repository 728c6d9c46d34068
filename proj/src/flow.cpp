#include "resflow/flow.hpp"

#include <cmath>
#include <functional>

#include "resflow/error.hpp"
#include "resflow/parallel.hpp"

namespace resflow {

ControlGrid::ControlGrid(int n_layers, int n_fields) {
  if (n_layers < 1) throw InvalidArgument("n_layers must be >= 1");
  if (n_fields < 1) throw InvalidArgument("n_fields must be >= 1");
  values_ = Matrix::Zero(n_fields, n_layers);
}

ControlGrid::ControlGrid(Matrix values) : values_(std::move(values)) {
  if (values_.cols() < 1 || values_.rows() < 1) throw InvalidArgument("control grid must be non-empty");
  if (!values_.allFinite()) throw InvalidArgument("control grid has non-finite entries");
}

double ControlGrid::squared_l2_norm() const { return step() * values_.squaredNorm(); }

double ControlGrid::l2_norm() const { return std::sqrt(squared_l2_norm()); }

PointSet TrajectoryBundle::endpoints() const { return node(n_layers()); }

PointSet TrajectoryBundle::node(int k) const {
  if (states.empty()) return {};
  PointSet out(states.front().rows(), static_cast<Eigen::Index>(states.size()));
  for (std::size_t j = 0; j < states.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = states[j].col(k);
  return out;
}

PointSet CovectorBundle::node(int k) const {
  if (covectors.empty()) return {};
  PointSet out(covectors.front().rows(), static_cast<Eigen::Index>(covectors.size()));
  for (std::size_t j = 0; j < covectors.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = covectors[j].col(k);
  }
  return out;
}

namespace {

void check_shapes(const VectorFieldFamily& family, const ControlGrid& u) {
  if (u.n_fields() != family.n_fields()) {
    throw InvalidArgument("control has " + std::to_string(u.n_fields()) + " channels, family has " +
                          std::to_string(family.n_fields()));
  }
}

}  // namespace

Matrix propagate(const VectorFieldFamily& family, const ControlGrid& u, const Vector& x0,
                 std::size_t sample_index) {
  check_shapes(family, u);
  if (x0.size() != family.dim()) throw InvalidArgument("source point has wrong dimension");
  const int n_layers = u.n_layers();
  const double h = u.step();
  Matrix states(family.dim(), n_layers + 1);
  states.col(0) = x0;
  Vector velocity(family.dim());
  for (int k = 0; k < n_layers; ++k) {
    family.apply(states.col(k), u.layer(k), velocity);
    states.col(k + 1) = states.col(k) + h * velocity;
    if (!states.col(k + 1).allFinite()) {
      throw FlowError("non-finite state in forward pass", sample_index, static_cast<std::size_t>(k + 1));
    }
  }
  return states;
}

Vector flow_map(const VectorFieldFamily& family, const ControlGrid& u, const Vector& x0) {
  return propagate(family, u, x0).col(u.n_layers());
}

TrajectoryBundle forward_euler(const VectorFieldFamily& family, const ControlGrid& u,
                               const PointSet& sources) {
  check_shapes(family, u);
  if (sources.cols() == 0) throw InvalidArgument("forward_euler: no source points");
  if (sources.rows() != family.dim()) throw InvalidArgument("forward_euler: sources have wrong dimension");
  if (!sources.allFinite()) throw InvalidArgument("forward_euler: non-finite source point");
  TrajectoryBundle traj;
  traj.states.resize(static_cast<std::size_t>(sources.cols()));
  detail::for_each_index(traj.states.size(), [&](std::size_t j) {
    traj.states[j] = propagate(family, u, sources.col(static_cast<Eigen::Index>(j)), j);
  });
  return traj;
}

CovectorBundle backward_covector(const VectorFieldFamily& family, const ControlGrid& u,
                                 const TrajectoryBundle& traj, const PointSet& terminal,
                                 BackwardFactor factor) {
  check_shapes(family, u);
  const int n = family.dim();
  const int n_layers = u.n_layers();
  if (traj.n_layers() != n_layers) throw InvalidArgument("trajectory depth does not match control");
  if (terminal.cols() != static_cast<Eigen::Index>(traj.n_samples()) || terminal.rows() != n) {
    throw InvalidArgument("terminal covectors have wrong shape");
  }
  const double h = u.step();
  CovectorBundle cov;
  cov.covectors.resize(traj.n_samples());
  detail::for_each_index(traj.n_samples(), [&](std::size_t j) {
    Matrix& lambda = cov.covectors[j];
    lambda.resize(n, n_layers + 1);
    lambda.col(n_layers) = terminal.col(static_cast<Eigen::Index>(j));
    Matrix jac(n, n);
    Matrix step(n, n);
    Eigen::PartialPivLU<Matrix> lu(n);
    for (int k = n_layers; k >= 1; --k) {
      family.jacobian_combination(traj.states[j].col(k - 1), u.layer(k - 1), jac);
      if (factor == BackwardFactor::Explicit) {
        step = Matrix::Identity(n, n) + h * jac;
        lambda.col(k - 1).noalias() = step.transpose() * lambda.col(k);
      } else {
        step = Matrix::Identity(n, n) - h * jac;
        lu.compute(step);
        const double rcond = lu.rcond();
        if (!(rcond >= kMinReciprocalCondition)) {
          throw FlowError("ill-conditioned backward solve (step too large for the field Jacobians)", j,
                          static_cast<std::size_t>(k));
        }
        lambda.col(k - 1) = lu.transpose().solve(lambda.col(k));
      }
      if (!lambda.col(k - 1).allFinite()) {
        throw FlowError("non-finite covector in backward pass", j, static_cast<std::size_t>(k));
      }
    }
  });
  return cov;
}

Matrix variational_jacobian(const VectorFieldFamily& family, const ControlGrid& u, const Vector& x0) {
  check_shapes(family, u);
  const int n = family.dim();
  const double h = u.step();
  const Matrix states = propagate(family, u, x0);
  Matrix v = Matrix::Identity(n, n);
  Matrix jac(n, n);
  for (int k = 0; k < u.n_layers(); ++k) {
    family.jacobian_combination(states.col(k), u.layer(k), jac);
    v = (Matrix::Identity(n, n) + h * jac) * v;
  }
  return v;
}

namespace {

using Field = std::function<Vector(const Vector&)>;

Vector rk4_flow(const Field& f, Vector x, double t, int substeps) {
  const double dt = t / substeps;
  for (int s = 0; s < substeps; ++s) {
    const Vector k1 = f(x);
    const Vector k2 = f(x + 0.5 * dt * k1);
    const Vector k3 = f(x + 0.5 * dt * k2);
    const Vector k4 = f(x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

}  // namespace

double commutator_order_check(const VectorFieldFamily& family, int field_a, int field_b,
                              const Vector& x, double h, int substeps) {
  if (!(h > 0.0)) throw InvalidArgument("commutator_order_check: h must be positive");
  const Field fa = [&](const Vector& y) { return family.eval_field(field_a, y); };
  const Field fb = [&](const Vector& y) { return family.eval_field(field_b, y); };
  // [F_a, F_b] = DF_b F_a - DF_a F_b
  const Field bracket = [&](const Vector& y) {
    return Vector(family.eval_jacobian(field_b, y) * family.eval_field(field_a, y) -
                  family.eval_jacobian(field_a, y) * family.eval_field(field_b, y));
  };
  Vector loop = rk4_flow(fa, x, h, substeps);
  loop = rk4_flow(fb, loop, h, substeps);
  loop = rk4_flow(fa, loop, -h, substeps);
  loop = rk4_flow(fb, loop, -h, substeps);
  const Vector target = rk4_flow(bracket, x, h * h, substeps);
  return (loop - target).norm() / (h * h);
}

}  // namespace resflow
