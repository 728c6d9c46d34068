#pragma once

#include <cstddef>
#include <vector>

#include "resflow/types.hpp"

namespace resflow {

/// Source points and their images under the map being learned, both n x M.
class Dataset {
 public:
  Dataset() = default;
  /// Rejects mismatched shapes, non-finite entries and repeated sources.
  Dataset(PointSet sources, PointSet targets);

  const PointSet& sources() const noexcept { return sources_; }
  const PointSet& targets() const noexcept { return targets_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(sources_.cols()); }
  int dim() const noexcept { return static_cast<int>(sources_.rows()); }

  Dataset subset(const std::vector<std::size_t>& indices) const;

 private:
  PointSet sources_;
  PointSet targets_;
};

}  // namespace resflow
