#include "resflow/run.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

#include "resflow/io.hpp"
#include "resflow/rng.hpp"
#include "resflow/train_gd.hpp"
#include "resflow/train_pmp.hpp"

namespace resflow {

namespace {

using nlohmann::json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "family",     "nu",          "n_layers",      "algorithm",       "beta",      "gamma0",
      "tau",        "c",           "max_iter",      "batch_size",      "seed",      "gradient_scheme",
      "target",     "grid_per_axis", "side",        "dataset_file",    "w1_bound",  "test_count",
      "test_seed",  "test_file",   "init",          "growth_constant", "output_dir", "corrupt_jacobian"};
  return keys;
}

template <class T>
T get_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(key, "has the wrong type");
  }
}

double get_number(const json& j, const char* key) {
  if (!j.at(key).is_number()) throw ConfigError(key, "must be a number");
  return j.at(key).get<double>();
}

long long get_integer(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d) return static_cast<long long>(d);
  }
  throw ConfigError(key, "must be an integer");
}

std::string scheme_name(GradientScheme s) { return s == GradientScheme::Trapezoidal ? "trapezoidal" : "backprop"; }

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  for (const auto& item : j.items()) {
    if (!known_keys().count(item.key())) throw ConfigError(item.key(), "unknown key");
  }
  RunConfig c;
  if (j.contains("family")) c.family = get_field<std::string>(j, "family");
  if (j.contains("nu")) c.nu = get_number(j, "nu");
  if (j.contains("n_layers")) c.n_layers = static_cast<int>(get_integer(j, "n_layers"));
  if (j.contains("algorithm")) c.algorithm = get_field<std::string>(j, "algorithm");
  if (j.contains("beta")) c.train.beta = get_number(j, "beta");
  if (j.contains("gamma0")) c.train.gamma0 = get_number(j, "gamma0");
  if (j.contains("tau")) c.train.tau = get_number(j, "tau");
  if (j.contains("c")) c.train.c = get_number(j, "c");
  if (j.contains("max_iter")) c.train.max_iter = static_cast<int>(get_integer(j, "max_iter"));
  if (j.contains("batch_size")) {
    const long long b = get_integer(j, "batch_size");
    if (b < 0) throw ConfigError("batch_size", "must be >= 0");
    c.train.batch_size = static_cast<std::size_t>(b);
  }
  if (j.contains("seed")) {
    const long long s = get_integer(j, "seed");
    if (s < 0) throw ConfigError("seed", "must be >= 0");
    c.train.seed = static_cast<std::uint64_t>(s);
  }
  if (j.contains("gradient_scheme")) {
    const auto s = get_field<std::string>(j, "gradient_scheme");
    if (s == "trapezoidal") {
      c.train.scheme = GradientScheme::Trapezoidal;
    } else if (s == "backprop") {
      c.train.scheme = GradientScheme::Backprop;
    } else {
      throw ConfigError("gradient_scheme", "must be 'trapezoidal' or 'backprop'");
    }
  }
  if (j.contains("target")) c.target = get_field<std::string>(j, "target");
  if (j.contains("grid_per_axis")) c.grid_per_axis = static_cast<int>(get_integer(j, "grid_per_axis"));
  if (j.contains("side")) c.side = get_number(j, "side");
  if (j.contains("dataset_file")) c.dataset_file = get_field<std::string>(j, "dataset_file");
  if (j.contains("w1_bound")) c.w1_bound = get_number(j, "w1_bound");
  if (j.contains("test_count")) {
    const long long n = get_integer(j, "test_count");
    if (n < 1) throw ConfigError("test_count", "must be >= 1");
    c.test_count = static_cast<std::size_t>(n);
  }
  if (j.contains("test_seed")) {
    const long long s = get_integer(j, "test_seed");
    if (s < 0) throw ConfigError("test_seed", "must be >= 0");
    c.test_seed = static_cast<std::uint64_t>(s);
  }
  if (j.contains("test_file")) c.test_file = get_field<std::string>(j, "test_file");
  if (j.contains("init")) c.init = get_field<std::string>(j, "init");
  if (j.contains("growth_constant")) c.growth_constant = get_number(j, "growth_constant");
  if (j.contains("output_dir")) c.output_dir = get_field<std::string>(j, "output_dir");
  if (j.contains("corrupt_jacobian")) c.corrupt_jacobian = get_field<bool>(j, "corrupt_jacobian");
  c.validate();
  return c;
}

void RunConfig::validate() const {
  if (family != "affine8" && family != "enriched14") throw ConfigError("family", "must be 'affine8' or 'enriched14'");
  if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("nu", "must be finite and > 0");
  if (n_layers < 1) throw ConfigError("n_layers", "must be >= 1");
  if (algorithm != "gd" && algorithm != "pmp") throw ConfigError("algorithm", "must be 'gd' or 'pmp'");
  train.validate();
  if (algorithm == "pmp" && train.batch_size > 0) {
    throw ConfigError("batch_size", "mini-batches are only supported with algorithm 'gd'");
  }
  if (target != "psi" && target != "identity") throw ConfigError("target", "must be 'psi' or 'identity'");
  if (grid_per_axis < 2) throw ConfigError("grid_per_axis", "must be >= 2");
  if (!(side > 0.0) || !std::isfinite(side)) throw ConfigError("side", "must be finite and > 0");
  if (dataset_file && !w1_bound) throw ConfigError("w1_bound", "required when dataset_file is given");
  if (w1_bound && !(*w1_bound >= 0.0)) throw ConfigError("w1_bound", "must be >= 0");
  if (growth_constant && !(*growth_constant >= 0.0)) throw ConfigError("growth_constant", "must be >= 0");
  if (init.empty()) throw ConfigError("init", "must be 'zero', 'random' or a control csv path");
  if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
}

json RunConfig::to_json() const {
  json j = {{"family", family},
            {"nu", nu},
            {"n_layers", n_layers},
            {"algorithm", algorithm},
            {"beta", train.beta},
            {"gamma0", train.gamma0},
            {"tau", train.tau},
            {"c", train.c},
            {"max_iter", train.max_iter},
            {"batch_size", train.batch_size},
            {"seed", train.seed},
            {"gradient_scheme", scheme_name(train.scheme)},
            {"target", target},
            {"grid_per_axis", grid_per_axis},
            {"side", side},
            {"test_count", test_count},
            {"test_seed", effective_test_seed()},
            {"init", init},
            {"output_dir", output_dir},
            {"corrupt_jacobian", corrupt_jacobian}};
  if (dataset_file) j["dataset_file"] = *dataset_file;
  if (w1_bound) j["w1_bound"] = *w1_bound;
  if (test_file) j["test_file"] = *test_file;
  if (growth_constant) j["growth_constant"] = *growth_constant;
  return j;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  return RunConfig::from_json(j);
}

VectorFieldFamily build_family(const RunConfig& cfg) {
  VectorFieldFamily family = make_family(cfg.family, cfg.nu);
  if (!cfg.corrupt_jacobian) return family;
  std::vector<FieldDescriptor> fields;
  for (int i = 0; i < family.n_fields(); ++i) {
    fields.push_back({family.field_name(i), [family, i](const Vector& x) { return family.eval_field(i, x); },
                      [family, i](const Vector& x) { return Matrix(1.5 * family.eval_jacobian(i, x)); }});
  }
  return VectorFieldFamily::custom(family.dim(), std::move(fields));
}

Dataset build_training_set(const RunConfig& cfg) {
  if (cfg.dataset_file) return read_dataset_csv(std::filesystem::path(*cfg.dataset_file));
  return make_grid_dataset(make_target(cfg.target), cfg.side, cfg.grid_per_axis);
}

Dataset build_test_set(const RunConfig& cfg) {
  if (cfg.test_file) return read_dataset_csv(std::filesystem::path(*cfg.test_file));
  return make_random_testset(make_target(cfg.target), cfg.side, cfg.test_count, cfg.effective_test_seed());
}

ControlGrid build_initial_control(const RunConfig& cfg, const VectorFieldFamily& family) {
  if (cfg.init == "zero") return ControlGrid(cfg.n_layers, family.n_fields());
  if (cfg.init == "random") {
    CounterRng rng(cfg.train.seed, 2);
    ControlGrid u(cfg.n_layers, family.n_fields());
    for (int k = 0; k < u.n_layers(); ++k) {
      for (int i = 0; i < u.n_fields(); ++i) u(i, k) = rng.uniform(-1.0, 1.0);
    }
    return u;
  }
  ControlGrid u = read_control_csv(std::filesystem::path(cfg.init));
  if (u.n_layers() != cfg.n_layers || u.n_fields() != family.n_fields()) {
    throw ConfigError("init", "control file shape does not match n_layers and the family");
  }
  return u;
}

RunResult execute_run(const RunConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const VectorFieldFamily family = build_family(cfg);
  const Dataset train_set = build_training_set(cfg);
  const Dataset test_set = build_test_set(cfg);
  const TargetMap target = make_target(cfg.target);

  RunResult result;
  double last_test_error = 0.0;
  TrainHooks hooks;
  hooks.on_iteration = [&](const IterationRecord& rec, const ControlGrid& u) {
    if (rec.iteration == 0 || rec.accepted) {
      last_test_error = mean_loss(forward_euler(family, u, test_set.sources()).endpoints(), test_set.targets());
    }
    result.testing_error.push_back(last_test_error);
  };

  ControlGrid init = build_initial_control(cfg, family);
  result.report = cfg.algorithm == "gd" ? train_gradient_flow(family, train_set, cfg.n_layers, cfg.train, init, hooks)
                                        : train_pmp(family, train_set, cfg.n_layers, cfg.train, init, hooks);
  result.initial_cost = result.report.records.front().cost;

  const double w1 = cfg.w1_bound ? *cfg.w1_bound : w1_grid_bound(train_set.size(), cfg.side);
  result.metrics = compute_metrics(family, result.report.control, target, train_set.sources(),
                                   result.report.objective.data_term, w1, cfg.growth_constant);
  result.report.metrics = result.metrics;
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

json summary_json(const RunConfig& cfg, const RunResult& result) {
  const MetricsBlock& m = result.metrics;
  json metrics = {{"lipschitz_flow", m.lipschitz_flow},   {"lipschitz_target", m.lipschitz_target},
                  {"l2_norm_u", m.l2_norm_u},             {"w1_bound", m.w1_bound},
                  {"training_error", m.training_error},   {"gen_bound", m.gen_bound}};
  if (m.exp_bound) metrics["exp_bound"] = *m.exp_bound;
  const TrainReport& r = result.report;
  return json{{"config", cfg.to_json()},
              {"metrics", metrics},
              {"training_error", r.objective.data_term},
              {"testing_error", result.testing_error.empty() ? 0.0 : result.testing_error.back()},
              {"cost", r.objective.total},
              {"reg_term", r.objective.reg_term},
              {"initial_cost", result.initial_cost},
              {"iterations", static_cast<int>(r.records.size()) - 1},
              {"accepted", r.accepted_count()},
              {"final_gamma", r.final_gamma},
              {"test_seed", cfg.effective_test_seed()},
              {"wall_clock_seconds", result.wall_seconds}};
}

void write_run_outputs(const RunConfig& cfg, const RunResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "trace.csv");
    if (!out) throw Error("cannot write " + (dir / "trace.csv").string());
    out << "iteration,cost,training_error,testing_error,gamma,accepted\n";
    const auto& recs = result.report.records;
    for (std::size_t p = 0; p < recs.size(); ++p) {
      const auto& rec = recs[p];
      out << rec.iteration << ',' << format_number(rec.cost) << ',' << format_number(rec.data_term) << ','
          << format_number(result.testing_error.at(p)) << ',' << format_number(rec.gamma) << ','
          << (rec.accepted ? 1 : 0) << '\n';
    }
  }
  write_control_csv(result.report.control, dir / "control.csv");
  std::ofstream out(dir / "summary.json");
  if (!out) throw Error("cannot write " + (dir / "summary.json").string());
  out << summary_json(cfg, result).dump(2) << '\n';
}

}  // namespace resflow
