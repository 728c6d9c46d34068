#pragma once

#include <optional>

#include "resflow/train.hpp"

namespace resflow {

/// H(x, lambda, v) = sum_j <lambda^j, F(x^j) v> - (beta/2) |v|^2 for one
/// time node; states and covectors are n x M.
double eval_hamiltonian(const VectorFieldFamily& family, const PointSet& states, const PointSet& covectors,
                        const Vector& v, double beta);

/// argmax_v H(x, lambda, v) - |v - u_old|^2 / (2 gamma), which is
/// (u_old + gamma * sum_j F(x^j)^T lambda^j) / (1 + gamma * beta).
Vector pmp_control_update(const VectorFieldFamily& family, const PointSet& states, const PointSet& covectors,
                          const Vector& u_old, double gamma, double beta);

/// Iterative maximum-principle training (successive approximations with a
/// proximal term). Covectors use lambda_N = -(1/M) grad a; each sweep
/// corrects lambda_{k-1}, maximizes the proximal Hamiltonian at node k-1 and
/// advances the states. A sweep is kept only if it strictly lowers the
/// cost; otherwise everything is restored and gamma shrinks by tau.
/// Mini-batches are not supported.
TrainReport train_pmp(const VectorFieldFamily& family, const Dataset& data, int n_layers, const TrainConfig& cfg,
                      std::optional<ControlGrid> init = std::nullopt, const TrainHooks& hooks = {});

}  // namespace resflow
