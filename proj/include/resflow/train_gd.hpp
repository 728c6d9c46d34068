#pragma once

#include <optional>

#include "resflow/train.hpp"

namespace resflow {

/// Projected gradient flow with Armijo backtracking.
///
/// Each loop pass proposes u - gamma * du and accepts when
///   cost(u) >= cost(u_new) + c * gamma * ||du||^2.
/// On rejection gamma shrinks by tau and the same du is reused; gamma is
/// never increased again. Rejected passes count against max_iter.
///
/// With cfg.batch_size in (0, M) every pass draws a fresh batch without
/// replacement and both costs of the acceptance test are batch costs.
TrainReport train_gradient_flow(const VectorFieldFamily& family, const Dataset& data, int n_layers,
                                const TrainConfig& cfg, std::optional<ControlGrid> init = std::nullopt,
                                const TrainHooks& hooks = {});

}  // namespace resflow
