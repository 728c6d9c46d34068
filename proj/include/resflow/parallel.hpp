#pragma once

#include <cstddef>
#include <exception>
#include <limits>

namespace resflow::detail {

/// Runs fn(j) for j in [0, count), possibly in parallel. Each j must write
/// only to its own slot. If several calls throw, the exception of the lowest
/// j is rethrown so failures are reported deterministically.
template <class Fn>
void for_each_index(std::size_t count, Fn&& fn) {
  std::exception_ptr first;
  std::ptrdiff_t first_index = std::numeric_limits<std::ptrdiff_t>::max();
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    try {
      fn(static_cast<std::size_t>(j));
    } catch (...) {
#pragma omp critical(resflow_for_each_index)
      {
        if (j < first_index) {
          first_index = j;
          first = std::current_exception();
        }
      }
    }
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace resflow::detail
