#include "resflow/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "resflow/error.hpp"
#include "resflow/parallel.hpp"

namespace resflow {

Dataset::Dataset(PointSet sources, PointSet targets) : sources_(std::move(sources)), targets_(std::move(targets)) {
  if (sources_.cols() == 0) throw InvalidArgument("dataset is empty");
  if (sources_.rows() != targets_.rows() || sources_.cols() != targets_.cols()) {
    throw InvalidArgument("dataset sources and targets differ in shape");
  }
  if (!sources_.allFinite() || !targets_.allFinite()) throw InvalidArgument("dataset has non-finite entries");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(sources_.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto less = [this](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index r = 0; r < sources_.rows(); ++r) {
      if (sources_(r, a) != sources_(r, b)) return sources_(r, a) < sources_(r, b);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), less);
  for (std::size_t p = 1; p < order.size(); ++p) {
    if (sources_.col(order[p - 1]) == sources_.col(order[p])) {
      throw InvalidArgument("dataset sources must be pairwise distinct (samples " +
                            std::to_string(order[p - 1]) + " and " + std::to_string(order[p]) + ")");
    }
  }
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  PointSet s(sources_.rows(), static_cast<Eigen::Index>(indices.size()));
  PointSet t(targets_.rows(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t p = 0; p < indices.size(); ++p) {
    if (indices[p] >= size()) throw InvalidArgument("dataset subset index out of range");
    s.col(static_cast<Eigen::Index>(p)) = sources_.col(static_cast<Eigen::Index>(indices[p]));
    t.col(static_cast<Eigen::Index>(p)) = targets_.col(static_cast<Eigen::Index>(indices[p]));
  }
  return Dataset(std::move(s), std::move(t));
}

double loss(const Eigen::Ref<const Vector>& z) {
  // sqrt(1+s) - 1 written as s / (sqrt(1+s) + 1) to keep precision near 0
  const double s = z.squaredNorm();
  return s / (std::sqrt(1.0 + s) + 1.0);
}

Vector loss_grad(const Eigen::Ref<const Vector>& z) { return z / std::sqrt(1.0 + z.squaredNorm()); }

double mean_loss(const PointSet& predicted, const PointSet& targets) {
  if (predicted.cols() != targets.cols() || predicted.rows() != targets.rows()) {
    throw InvalidArgument("mean_loss: shape mismatch");
  }
  double sum = 0.0;
  for (Eigen::Index j = 0; j < predicted.cols(); ++j) sum += loss(predicted.col(j) - targets.col(j));
  return sum / static_cast<double>(predicted.cols());
}

ObjectiveValue cost_from_trajectory(const TrajectoryBundle& traj, const ControlGrid& u, const Dataset& data,
                                    double beta) {
  ObjectiveValue v;
  v.data_term = mean_loss(traj.endpoints(), data.targets());
  v.reg_term = 0.5 * beta * u.squared_l2_norm();
  v.total = v.data_term + v.reg_term;
  return v;
}

ObjectiveValue cost(const VectorFieldFamily& family, const ControlGrid& u, const Dataset& data, double beta) {
  return cost_from_trajectory(forward_euler(family, u, data.sources()), u, data, beta);
}

PointSet terminal_covectors(const TrajectoryBundle& traj, const Dataset& data, double sign) {
  const PointSet end = traj.endpoints();
  PointSet out(end.rows(), end.cols());
  const double scale = sign / static_cast<double>(end.cols());
  for (Eigen::Index j = 0; j < end.cols(); ++j) out.col(j) = scale * loss_grad(end.col(j) - data.targets().col(j));
  return out;
}

ControlGrid adjoint_gradient(const VectorFieldFamily& family, const ControlGrid& u, const Dataset& data,
                             double beta, GradientScheme scheme) {
  return adjoint_gradient(family, u, data, forward_euler(family, u, data.sources()), beta, scheme);
}

ControlGrid adjoint_gradient(const VectorFieldFamily& family, const ControlGrid& u, const Dataset& data,
                             const TrajectoryBundle& traj, double beta, GradientScheme scheme) {
  const int n_layers = u.n_layers();
  const int n_fields = u.n_fields();
  const int n = family.dim();
  const std::size_t m = traj.n_samples();
  if (m != data.size()) throw InvalidArgument("trajectory and dataset sizes differ");

  const BackwardFactor factor =
      scheme == GradientScheme::Trapezoidal ? BackwardFactor::Implicit : BackwardFactor::Explicit;
  const CovectorBundle cov = backward_covector(family, u, traj, terminal_covectors(traj, data), factor);

  // pairing[j](i, k) = <lambda_k^j, F_i(x_k^j)> (trapezoid), or
  // <lambda_{k+1}^j, F_i(x_k^j)> (backprop, k < N).
  std::vector<Matrix> pairing(m);
  detail::for_each_index(m, [&](std::size_t j) {
    Matrix& p = pairing[j];
    p.resize(n_fields, n_layers + 1);
    Matrix values(n, n_fields);
    const int last = scheme == GradientScheme::Trapezoidal ? n_layers : n_layers - 1;
    for (int k = 0; k <= last; ++k) {
      family.eval_all(traj.states[j].col(k), values);
      const int lambda_node = scheme == GradientScheme::Trapezoidal ? k : k + 1;
      p.col(k).noalias() = values.transpose() * cov.covectors[j].col(lambda_node);
    }
  });

  ControlGrid grad(n_layers, n_fields);
  Matrix& g = grad.values();
  // fixed summation order over samples
  for (std::size_t j = 0; j < m; ++j) {
    if (scheme == GradientScheme::Trapezoidal) {
      g += 0.5 * (pairing[j].leftCols(n_layers) + pairing[j].rightCols(n_layers));
    } else {
      g += pairing[j].leftCols(n_layers);
    }
  }
  g += beta * u.values();
  return grad;
}

ControlGrid fd_gradient_oracle(const VectorFieldFamily& family, const ControlGrid& u, const Dataset& data,
                               double beta, double step) {
  if (!(step > 0.0)) throw InvalidArgument("fd_gradient_oracle: step must be positive");
  ControlGrid grad(u.n_layers(), u.n_fields());
  const double h = u.step();
  for (int k = 0; k < u.n_layers(); ++k) {
    for (int i = 0; i < u.n_fields(); ++i) {
      ControlGrid plus = u;
      ControlGrid minus = u;
      plus(i, k) += step;
      minus(i, k) -= step;
      const double d = (cost(family, plus, data, beta).total - cost(family, minus, data, beta).total) / (2.0 * step);
      grad(i, k) = d / h;
    }
  }
  return grad;
}

GradientComparison compare_gradients(const ControlGrid& candidate, const ControlGrid& reference) {
  if (candidate.n_layers() != reference.n_layers() || candidate.n_fields() != reference.n_fields()) {
    throw InvalidArgument("compare_gradients: shape mismatch");
  }
  GradientComparison out;
  const Matrix diff = (candidate.values() - reference.values()).cwiseAbs();
  Eigen::Index row = 0;
  Eigen::Index col = 0;
  const double worst = diff.maxCoeff(&row, &col);
  out.worst_field = static_cast<int>(row);
  out.worst_layer = static_cast<int>(col);
  const double scale = reference.values().cwiseAbs().maxCoeff();
  if (worst == 0.0) {
    out.relative_error = 0.0;
  } else if (scale == 0.0) {
    out.relative_error = std::numeric_limits<double>::infinity();
  } else {
    out.relative_error = worst / scale;
  }
  return out;
}

}  // namespace resflow
