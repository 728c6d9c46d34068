#pragma once

#include <Eigen/Dense>

namespace resflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// A set of M points in R^n stored column-wise (n x M).
using PointSet = Eigen::MatrixXd;

}  // namespace resflow
