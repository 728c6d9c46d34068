#include "resflow/train.hpp"

#include <algorithm>
#include <cmath>

namespace resflow {

void TrainConfig::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta", "must be finite and >= 0");
  if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) throw ConfigError("gamma0", "must be finite and > 0");
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau", "must lie in (0, 1)");
  if (!(c > 0.0 && c < 1.0)) throw ConfigError("c", "must lie in (0, 1)");
  if (max_iter < 0) throw ConfigError("max_iter", "must be >= 0");
}

std::size_t TrainReport::accepted_count() const {
  if (records.empty()) return 0;
  return static_cast<std::size_t>(
      std::count_if(records.begin() + 1, records.end(), [](const IterationRecord& r) { return r.accepted; }));
}

ControlGrid resolve_initial_control(const VectorFieldFamily& family, int n_layers, std::optional<ControlGrid> init) {
  if (!init) return ControlGrid(n_layers, family.n_fields());
  if (init->n_layers() != n_layers || init->n_fields() != family.n_fields()) {
    throw InvalidArgument("initial control has the wrong shape");
  }
  return std::move(*init);
}

}  // namespace resflow
