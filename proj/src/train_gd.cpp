#include "resflow/train_gd.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "resflow/rng.hpp"

namespace resflow {

namespace {

std::vector<std::size_t> draw_batch(CounterRng& rng, std::size_t population, std::size_t batch) {
  std::vector<std::size_t> idx(population);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t p = 0; p < batch; ++p) {
    const std::size_t q = p + static_cast<std::size_t>(rng.below(population - p));
    std::swap(idx[p], idx[q]);
  }
  idx.resize(batch);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

TrainReport train_gradient_flow(const VectorFieldFamily& family, const Dataset& data, int n_layers,
                                const TrainConfig& cfg, std::optional<ControlGrid> init, const TrainHooks& hooks) {
  cfg.validate();
  if (cfg.batch_size > data.size()) throw ConfigError("batch_size", "exceeds the dataset size");
  const bool mini_batch = cfg.batch_size > 0 && cfg.batch_size < data.size();

  TrainReport report;
  ControlGrid u = resolve_initial_control(family, n_layers, std::move(init));
  double gamma = cfg.gamma0;

  const auto finish = [&](const ObjectiveValue& objective) {
    report.control = u;
    report.objective = objective;
    report.final_gamma = gamma;
  };
  const auto emit = [&](const IterationRecord& rec) {
    report.records.push_back(rec);
    if (hooks.on_iteration) hooks.on_iteration(rec, u);
  };

  TrajectoryBundle traj;
  ObjectiveValue current;
  try {
    traj = forward_euler(family, u, data.sources());
    current = cost_from_trajectory(traj, u, data, cfg.beta);
  } catch (const FlowError& e) {
    throw TrainingAborted(std::string("initial forward pass failed: ") + e.what(), report);
  }
  emit({0, current.total, current.data_term, current.total, gamma, true});

  CounterRng rng(cfg.seed, 1);
  Dataset batch_data;
  const Dataset* active = &data;
  bool need_gradient = true;
  ControlGrid direction;

  for (int r = 1; r <= cfg.max_iter; ++r) {
    try {
      if (mini_batch) {
        batch_data = data.subset(draw_batch(rng, data.size(), cfg.batch_size));
        active = &batch_data;
        traj = forward_euler(family, u, active->sources());
        current = cost_from_trajectory(traj, u, *active, cfg.beta);
        need_gradient = true;
      }
      if (need_gradient) direction = adjoint_gradient(family, u, *active, traj, cfg.beta, cfg.scheme);
    } catch (const FlowError& e) {
      finish(current);
      throw TrainingAborted(std::string("gradient computation failed: ") + e.what(), report);
    }

    ControlGrid proposal = u;
    proposal.values() -= gamma * direction.values();
    TrajectoryBundle trial_traj;
    ObjectiveValue trial;
    bool trial_ok = true;
    try {
      trial_traj = forward_euler(family, proposal, active->sources());
      trial = cost_from_trajectory(trial_traj, proposal, *active, cfg.beta);
    } catch (const FlowError&) {
      // an overflowing proposal is a failed line-search step
      trial_ok = false;
      trial.total = std::numeric_limits<double>::infinity();
    }

    const double decrease = cfg.c * gamma * direction.squared_l2_norm();
    const bool accept = trial_ok && current.total >= trial.total + decrease;
    const double used_gamma = gamma;
    if (accept) {
      u = std::move(proposal);
      traj = std::move(trial_traj);
      current = trial;
      need_gradient = true;
    } else {
      gamma *= cfg.tau;
      need_gradient = false;
    }
    emit({r, current.total, current.data_term, trial.total, used_gamma, accept});
  }

  if (mini_batch) {
    try {
      current = cost(family, u, data, cfg.beta);
    } catch (const FlowError& e) {
      finish(current);
      throw TrainingAborted(std::string("final evaluation failed: ") + e.what(), report);
    }
  }
  finish(current);
  return report;
}

}  // namespace resflow
