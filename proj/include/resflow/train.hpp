#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "resflow/error.hpp"
#include "resflow/flow.hpp"
#include "resflow/metrics.hpp"
#include "resflow/objective.hpp"

namespace resflow {

struct TrainConfig {
  double beta = 1e-4;
  double gamma0 = 1.0;
  double tau = 0.5;
  double c = 0.1;
  int max_iter = 500;
  /// 0 means full batch.
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;
  GradientScheme scheme = GradientScheme::Trapezoidal;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double cost = 0.0;        // cost of the current control after this iteration
  double data_term = 0.0;   // its mean training loss
  double trial_cost = 0.0;  // cost of the proposed control
  double gamma = 0.0;       // step used for the proposal
  bool accepted = true;
};

struct TrainReport {
  /// Row 0 describes the initial control; rows 1.. one per loop pass.
  std::vector<IterationRecord> records;
  ControlGrid control;
  ObjectiveValue objective;
  double final_gamma = 0.0;
  std::optional<MetricsBlock> metrics;

  std::size_t accepted_count() const;
};

struct TrainHooks {
  /// Called after every record is appended, with the current control.
  std::function<void(const IterationRecord&, const ControlGrid&)> on_iteration;
};

/// Thrown when a sweep fails at an accepted state. Carries everything
/// computed before the failure.
class TrainingAborted : public Error {
 public:
  TrainingAborted(const std::string& what, TrainReport partial)
      : Error(what), partial_(std::move(partial)) {}
  const TrainReport& partial() const noexcept { return partial_; }

 private:
  TrainReport partial_;
};

/// init, or the zero control when absent; checks the shape.
ControlGrid resolve_initial_control(const VectorFieldFamily& family, int n_layers, std::optional<ControlGrid> init);

}  // namespace resflow
