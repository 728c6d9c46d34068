#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <omp.h>

#include "resflow/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Train linear-control ResNets that approximate planar diffeomorphisms"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  int threads = 0;
  std::uint64_t seed = 0;
  int max_iter = -1;

  std::vector<CLI::Option*> seed_options;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    sub->add_option("--threads", threads, "Worker thread cap")->check(CLI::PositiveNumber);
    seed_options.push_back(sub->add_option("--seed", seed, "Overrides the config seed"));
  };

  auto* train = app.add_subcommand("train", "Train one network from a JSON config");
  train->add_option("--config", config, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  add_common(train);

  int table = 0;
  auto* tables = app.add_subcommand("reproduce-tables", "Re-run the five beta values of a published table");
  tables->add_option("table", table, "Table id (1-6)")->required()->check(CLI::Range(1, 6));
  tables->add_option("--config", config, "Base config for shared settings")->check(CLI::ExistingFile);
  tables->add_option("--max-iter", max_iter, "Override the iteration budget")->check(CLI::NonNegativeNumber);
  add_common(tables);

  auto* gradcheck = app.add_subcommand("gradcheck", "Check the adjoint gradient against finite differences");
  gradcheck->add_option("--config", config, "Small run config (N <= 8, M <= 10)")->required()->check(CLI::ExistingFile);
  add_common(gradcheck);

  std::string control;
  std::string data;
  auto* eval = app.add_subcommand("eval", "Apply a saved control to a dataset");
  eval->add_option("--config", config, "Config naming the field family")->required()->check(CLI::ExistingFile);
  eval->add_option("--control", control, "control.csv from a training run")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", data, "Dataset csv (x1,x2,y1,y2)")->required()->check(CLI::ExistingFile);
  add_common(eval);

  CLI11_PARSE(app, argc, argv);

  if (threads > 0) omp_set_num_threads(threads);
  resflow::CommandOptions opts;
  if (!out_dir.empty()) opts.out_dir = out_dir;
  for (const CLI::Option* opt : seed_options) {
    if (opt->count() > 0) opts.seed = seed;
  }
  if (max_iter >= 0) opts.max_iter = max_iter;

  if (train->parsed()) return resflow::cmd_train(config, opts, std::cout, std::cerr);
  if (tables->parsed()) {
    std::optional<std::filesystem::path> base;
    if (!config.empty()) base = config;
    return resflow::cmd_reproduce_tables(table, base, opts, std::cout, std::cerr);
  }
  if (gradcheck->parsed()) return resflow::cmd_gradcheck(config, opts, std::cout, std::cerr);
  return resflow::cmd_eval(config, control, data, opts, std::cout, std::cerr);
}
