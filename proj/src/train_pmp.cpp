#include "resflow/train_pmp.hpp"

#include <cmath>
#include <limits>

#include "resflow/parallel.hpp"

namespace resflow {

double eval_hamiltonian(const VectorFieldFamily& family, const PointSet& states, const PointSet& covectors,
                        const Vector& v, double beta) {
  double h = 0.0;
  Vector velocity(family.dim());
  for (Eigen::Index j = 0; j < states.cols(); ++j) {
    family.apply(states.col(j), v, velocity);
    h += covectors.col(j).dot(velocity);
  }
  return h - 0.5 * beta * v.squaredNorm();
}

Vector pmp_control_update(const VectorFieldFamily& family, const PointSet& states, const PointSet& covectors,
                          const Vector& u_old, double gamma, double beta) {
  if (states.cols() != covectors.cols() || states.rows() != family.dim() || covectors.rows() != family.dim()) {
    throw InvalidArgument("pmp_control_update: states and covectors must both be n x M");
  }
  if (u_old.size() != family.n_fields()) throw InvalidArgument("pmp_control_update: control has wrong size");
  Vector g = Vector::Zero(family.n_fields());
  Matrix values(family.dim(), family.n_fields());
  for (Eigen::Index j = 0; j < states.cols(); ++j) {
    family.eval_all(states.col(j), values);
    g.noalias() += values.transpose() * covectors.col(j);
  }
  return (u_old + gamma * g) / (1.0 + gamma * beta);
}

TrainReport train_pmp(const VectorFieldFamily& family, const Dataset& data, int n_layers, const TrainConfig& cfg,
                      std::optional<ControlGrid> init, const TrainHooks& hooks) {
  cfg.validate();
  if (cfg.batch_size > 0 && cfg.batch_size < data.size()) {
    throw ConfigError("batch_size", "mini-batches are only supported by the gradient-flow trainer");
  }

  TrainReport report;
  ControlGrid u = resolve_initial_control(family, n_layers, std::move(init));
  double gamma = cfg.gamma0;
  const std::size_t m = data.size();
  const int n = family.dim();
  const double h = u.step();
  const double inv_m = 1.0 / static_cast<double>(m);

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

  CovectorBundle cov;
  bool need_covectors = true;
  PointSet node_states(n, static_cast<Eigen::Index>(m));
  PointSet node_covectors(n, static_cast<Eigen::Index>(m));

  for (int r = 1; r <= cfg.max_iter; ++r) {
    if (need_covectors) {
      try {
        cov = backward_covector(family, u, traj, terminal_covectors(traj, data, -1.0), BackwardFactor::Implicit);
      } catch (const FlowError& e) {
        finish(current);
        throw TrainingAborted(std::string("covector solve failed: ") + e.what(), report);
      }
    }

    // The recovery point is (u, traj, cov) itself: the sweep writes into
    // fresh copies and the covector correction is applied on the fly.
    ControlGrid proposal = u;
    TrajectoryBundle trial_traj = traj;
    bool trial_ok = true;
    try {
      for (int k = 0; k < n_layers; ++k) {
        detail::for_each_index(m, [&](std::size_t j) {
          const auto col = static_cast<Eigen::Index>(j);
          const auto y = data.targets().col(col);
          const auto x_new = trial_traj.states[j].col(k);
          node_states.col(col) = x_new;
          node_covectors.col(col) = cov.covectors[j].col(k) + inv_m * loss_grad(traj.states[j].col(k) - y) -
                                    inv_m * loss_grad(x_new - y);
        });
        proposal.values().col(k) =
            pmp_control_update(family, node_states, node_covectors, u.values().col(k), gamma, cfg.beta);
        detail::for_each_index(m, [&](std::size_t j) {
          Matrix& states = trial_traj.states[j];
          Vector velocity(n);
          family.apply(states.col(k), proposal.layer(k), velocity);
          states.col(k + 1) = states.col(k) + h * velocity;
          if (!states.col(k + 1).allFinite()) {
            throw FlowError("non-finite state in maximum-principle sweep", j, static_cast<std::size_t>(k + 1));
          }
        });
      }
    } catch (const FlowError&) {
      trial_ok = false;
    }

    ObjectiveValue trial;
    trial.total = std::numeric_limits<double>::infinity();
    if (trial_ok) trial = cost_from_trajectory(trial_traj, proposal, data, cfg.beta);

    const bool accept = trial_ok && current.total > trial.total;
    const double used_gamma = gamma;
    if (accept) {
      u = std::move(proposal);
      traj = std::move(trial_traj);
      current = trial;
      need_covectors = true;
    } else {
      gamma *= cfg.tau;
      need_covectors = false;
    }
    emit({r, current.total, current.data_term, trial.total, used_gamma, accept});
  }

  finish(current);
  return report;
}

}  // namespace resflow
