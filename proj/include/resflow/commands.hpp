#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "resflow/run.hpp"

namespace resflow {

/// Command-line overrides shared by the subcommands.
struct CommandOptions {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iter;
};

struct PaperRow {
  double beta;
  double lipschitz;
  double training_error;
  double testing_error;
};

struct TableSetup {
  int id;
  std::string family;
  int n_layers;
  std::string algorithm;
  std::array<PaperRow, 5> reference;
};

/// The six published experiment settings and their reported values.
const TableSetup& table_setup(int id);

int cmd_train(const std::filesystem::path& config, const CommandOptions& opts, std::ostream& out, std::ostream& err);

/// Runs the five regularization strengths of one table. `base_config`, when
/// given, supplies everything except family, n_layers, algorithm and beta.
int cmd_reproduce_tables(int table, const std::optional<std::filesystem::path>& base_config,
                         const CommandOptions& opts, std::ostream& out, std::ostream& err);

/// Compares the exact adjoint gradient against central differences at the
/// config's initial control. Exit 0 iff the relative error is <= 1e-5.
int cmd_gradcheck(const std::filesystem::path& config, const CommandOptions& opts, std::ostream& out,
                  std::ostream& err);

/// Applies a saved control to a dataset csv; prints the mean loss and,
/// with opts.out_dir, writes predictions.csv there.
int cmd_eval(const std::filesystem::path& config, const std::filesystem::path& control,
             const std::filesystem::path& dataset, const CommandOptions& opts, std::ostream& out, std::ostream& err);

inline constexpr double kGradcheckTolerance = 1e-5;
inline constexpr int kGradcheckMaxLayers = 8;
inline constexpr std::size_t kGradcheckMaxSamples = 10;

}  // namespace resflow
