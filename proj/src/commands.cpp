#include "resflow/commands.hpp"

#include <fstream>
#include <ostream>

#include "resflow/io.hpp"

namespace resflow {

namespace {

RunConfig apply_overrides(RunConfig cfg, const CommandOptions& opts) {
  if (opts.out_dir) cfg.output_dir = opts.out_dir->string();
  if (opts.seed) cfg.train.seed = *opts.seed;
  if (opts.max_iter) cfg.train.max_iter = *opts.max_iter;
  cfg.validate();
  return cfg;
}

const std::array<TableSetup, 6> kTables = {{
    {1, "affine8", 16, "gd",
     {{{1e0, 1.19, 3.8785, 3.8173},
       {1e-1, 8.40, 1.3143, 1.2476},
       {1e-2, 9.32, 1.1991, 1.1451},
       {1e-3, 9.37, 1.1852, 1.1330},
       {1e-4, 9.37, 1.1839, 1.1318}}}},
    {2, "affine8", 16, "pmp",
     {{{1e0, 1.19, 3.8749, 3.8157},
       {1e-1, 8.40, 1.3084, 1.2455},
       {1e-2, 9.32, 1.2014, 1.1486},
       {1e-3, 9.33, 1.1898, 1.1387},
       {1e-4, 9.33, 1.1898, 1.1379}}}},
    {3, "affine8", 32, "gd",
     {{{1e0, 1.19, 3.8779, 3.8168},
       {1e-1, 8.40, 1.3074, 1.2425},
       {1e-2, 9.26, 1.2015, 1.1477},
       {1e-3, 9.34, 1.1860, 1.1352},
       {1e-4, 9.34, 1.1842, 1.1332}}}},
    {4, "affine8", 32, "pmp",
     {{{1e0, 1.19, 3.8739, 3.8148},
       {1e-1, 8.35, 1.3085, 1.2449},
       {1e-2, 9.23, 1.2075, 1.1538},
       {1e-3, 9.26, 1.1931, 1.1416},
       {1e-4, 9.26, 1.1918, 1.1404}}}},
    {5, "enriched14", 16, "gd",
     {{{1e0, 10.14, 2.3791, 2.3036},
       {1e-1, 13.84, 0.1809, 0.2314},
       {1e-2, 15.64, 0.1290, 0.1784},
       {1e-3, 15.83, 0.1254, 0.1747},
       {1e-4, 15.86, 0.1257, 0.1751}}}},
    {6, "enriched14", 16, "pmp",
     {{{1e0, 10.78, 2.3638, 2.3910},
       {1e-1, 14.32, 0.1921, 0.2422},
       {1e-2, 15.43, 0.1887, 0.2347},
       {1e-3, 15.56, 0.2260, 0.2719},
       {1e-4, 15.59, 0.2127, 0.2564}}}},
}};

}  // namespace

const TableSetup& table_setup(int id) {
  if (id < 1 || id > static_cast<int>(kTables.size())) {
    throw InvalidArgument("table id must be in 1..6, got " + std::to_string(id));
  }
  return kTables[static_cast<std::size_t>(id - 1)];
}

int cmd_train(const std::filesystem::path& config, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = apply_overrides(load_run_config(config), opts);
    const RunResult result = execute_run(cfg);
    write_run_outputs(cfg, result, cfg.output_dir);
    out << "training_error " << format_number(result.report.objective.data_term) << "\n"
        << "testing_error " << format_number(result.testing_error.back()) << "\n"
        << "lipschitz_flow " << format_number(result.metrics.lipschitz_flow) << "\n"
        << "gen_bound " << format_number(result.metrics.gen_bound) << "\n"
        << "outputs written to " << cfg.output_dir << "\n";
    return 0;
  } catch (const TrainingAborted& e) {
    err << "error: training aborted after " << e.partial().records.size() << " records: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_reproduce_tables(int table, const std::optional<std::filesystem::path>& base_config,
                         const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const TableSetup& setup = table_setup(table);
    RunConfig base = base_config ? load_run_config(*base_config) : RunConfig{};
    base.family = setup.family;
    base.n_layers = setup.n_layers;
    base.algorithm = setup.algorithm;
    if (!opts.out_dir && !base_config) base.output_dir = "table" + std::to_string(table);
    base = apply_overrides(base, opts);

    const std::filesystem::path dir = base.output_dir;
    std::filesystem::create_directories(dir);
    std::ofstream csv(dir / ("table" + std::to_string(table) + ".csv"));
    std::ofstream md(dir / ("table" + std::to_string(table) + ".md"));
    if (!csv || !md) throw Error("cannot write table files under " + dir.string());
    csv << "beta,lipschitz_flow,training_error,testing_error,paper_lipschitz,paper_training_error,"
           "paper_testing_error\n";
    md << "Table " << table << ": " << setup.family << ", " << setup.n_layers << " layers, algorithm "
       << setup.algorithm << "\n\n"
       << "| beta | L_flow | training error | testing error | paper L_flow | paper training | paper testing |\n"
       << "|---|---|---|---|---|---|---|\n";
    for (const PaperRow& row : setup.reference) {
      RunConfig cfg = base;
      cfg.train.beta = row.beta;
      cfg.output_dir = (dir / ("beta_" + format_number(row.beta))).string();
      const RunResult result = execute_run(cfg);
      write_run_outputs(cfg, result, cfg.output_dir);
      const double train_err = result.report.objective.data_term;
      const double test_err = result.testing_error.back();
      csv << format_number(row.beta) << ',' << format_number(result.metrics.lipschitz_flow) << ','
          << format_number(train_err) << ',' << format_number(test_err) << ',' << format_number(row.lipschitz) << ','
          << format_number(row.training_error) << ',' << format_number(row.testing_error) << '\n';
      md << "| " << format_number(row.beta) << " | " << format_number(result.metrics.lipschitz_flow) << " | "
         << format_number(train_err) << " | " << format_number(test_err) << " | " << format_number(row.lipschitz)
         << " | " << format_number(row.training_error) << " | " << format_number(row.testing_error) << " |\n";
      out << "beta " << format_number(row.beta) << ": L_flow " << format_number(result.metrics.lipschitz_flow)
          << ", training " << format_number(train_err) << ", testing " << format_number(test_err) << "\n";
    }
    out << "table written to " << (dir / ("table" + std::to_string(table) + ".md")).string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_gradcheck(const std::filesystem::path& config, const CommandOptions& opts, std::ostream& out,
                  std::ostream& err) {
  try {
    const RunConfig cfg = apply_overrides(load_run_config(config), opts);
    if (cfg.n_layers > kGradcheckMaxLayers) {
      throw ConfigError("n_layers", "gradcheck needs n_layers <= " + std::to_string(kGradcheckMaxLayers));
    }
    const VectorFieldFamily family = build_family(cfg);
    const Dataset data = build_training_set(cfg);
    if (data.size() > kGradcheckMaxSamples) {
      throw ConfigError(cfg.dataset_file ? "dataset_file" : "grid_per_axis",
                        "gradcheck needs at most " + std::to_string(kGradcheckMaxSamples) + " samples");
    }
    const ControlGrid u = build_initial_control(cfg, family);
    const ControlGrid fd = fd_gradient_oracle(family, u, data, cfg.train.beta);
    const ControlGrid exact = adjoint_gradient(family, u, data, cfg.train.beta, GradientScheme::Backprop);
    const ControlGrid trapezoid = adjoint_gradient(family, u, data, cfg.train.beta, GradientScheme::Trapezoidal);
    const GradientComparison cmp = compare_gradients(exact, fd);
    out << "max_relative_error " << format_number(cmp.relative_error) << "\n"
        << "trapezoidal_scheme_discrepancy " << format_number(compare_gradients(trapezoid, fd).relative_error)
        << "\n";
    if (cmp.relative_error <= kGradcheckTolerance) {
      out << "gradcheck passed\n";
      return 0;
    }
    err << "gradcheck failed: worst component (0-based) field " << cmp.worst_field << ", layer " << cmp.worst_layer
        << " (adjoint " << format_number(exact(cmp.worst_field, cmp.worst_layer)) << ", finite differences "
        << format_number(fd(cmp.worst_field, cmp.worst_layer)) << ")\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_eval(const std::filesystem::path& config, const std::filesystem::path& control,
             const std::filesystem::path& dataset, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = apply_overrides(load_run_config(config), opts);
    const VectorFieldFamily family = build_family(cfg);
    const ControlGrid u = read_control_csv(control);
    const Dataset data = read_dataset_csv(dataset);
    const PointSet predicted = forward_euler(family, u, data.sources()).endpoints();
    out << "error " << format_number(mean_loss(predicted, data.targets())) << "\n";
    if (opts.out_dir) {
      std::filesystem::create_directories(*opts.out_dir);
      std::ofstream csv(*opts.out_dir / "predictions.csv");
      if (!csv) throw Error("cannot write predictions.csv");
      const int n = data.dim();
      for (int r = 0; r < n; ++r) csv << (r ? ",x" : "x") << (r + 1);
      for (int r = 0; r < n; ++r) csv << ",p" << (r + 1);
      for (int r = 0; r < n; ++r) csv << ",y" << (r + 1);
      csv << '\n';
      for (Eigen::Index j = 0; j < predicted.cols(); ++j) {
        for (int r = 0; r < n; ++r) csv << (r ? "," : "") << format_number17(data.sources()(r, j));
        for (int r = 0; r < n; ++r) csv << ',' << format_number17(predicted(r, j));
        for (int r = 0; r < n; ++r) csv << ',' << format_number17(data.targets()(r, j));
        csv << '\n';
      }
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace resflow
