#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "resflow/data.hpp"
#include "resflow/fields.hpp"
#include "resflow/metrics.hpp"
#include "resflow/train.hpp"

namespace resflow {

/// Everything needed for one training run, read from a flat JSON object.
/// Unknown keys are rejected.
struct RunConfig {
  std::string family = "affine8";
  double nu = 20.0;
  int n_layers = 16;
  std::string algorithm = "gd";  // gd | pmp
  TrainConfig train;

  std::string target = "psi";  // psi | identity
  int grid_per_axis = 30;
  double side = 1.5;
  std::optional<std::string> dataset_file;
  /// Required with dataset_file: the grid bound only holds for the grid.
  std::optional<double> w1_bound;

  std::size_t test_count = 300;
  std::optional<std::uint64_t> test_seed;  // defaults to train.seed
  std::optional<std::string> test_file;

  std::string init = "zero";  // zero | random | path to a control csv
  std::optional<double> growth_constant;
  std::string output_dir = "run";

  /// Test hook: scales every field Jacobian by 1.5.
  bool corrupt_jacobian = false;

  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;

  std::uint64_t effective_test_seed() const { return test_seed.value_or(train.seed); }
};

RunConfig load_run_config(const std::filesystem::path& path);

VectorFieldFamily build_family(const RunConfig& cfg);
Dataset build_training_set(const RunConfig& cfg);
Dataset build_test_set(const RunConfig& cfg);
ControlGrid build_initial_control(const RunConfig& cfg, const VectorFieldFamily& family);

struct RunResult {
  TrainReport report;
  /// Held-out error after each record (same length as report.records).
  std::vector<double> testing_error;
  MetricsBlock metrics;
  double initial_cost = 0.0;
  double wall_seconds = 0.0;
};

RunResult execute_run(const RunConfig& cfg);

/// trace.csv, summary.json and control.csv under `dir`.
void write_run_outputs(const RunConfig& cfg, const RunResult& result, const std::filesystem::path& dir);

nlohmann::json summary_json(const RunConfig& cfg, const RunResult& result);

}  // namespace resflow
