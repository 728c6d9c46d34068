#pragma once

#include <filesystem>
#include <string>

#include "resflow/data.hpp"
#include "resflow/flow.hpp"
#include "resflow/rng.hpp"

namespace testing {

inline resflow::ControlGrid random_control(int n_fields, int n_layers, std::uint64_t seed, double scale = 1.0) {
  resflow::CounterRng rng(seed, 99);
  resflow::ControlGrid u(n_layers, n_fields);
  for (int k = 0; k < n_layers; ++k)
    for (int i = 0; i < n_fields; ++i) u(i, k) = rng.uniform(-scale, scale);
  return u;
}

inline resflow::Vector point(double a, double b) {
  resflow::Vector x(2);
  x << a, b;
  return x;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("resflow_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
