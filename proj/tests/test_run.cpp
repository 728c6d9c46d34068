#include <doctest.h>

#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "resflow/commands.hpp"
#include "resflow/error.hpp"
#include "resflow/io.hpp"

using namespace resflow;

namespace {

std::filesystem::path write_config(const std::filesystem::path& dir, const std::string& name,
                                   const nlohmann::json& j) {
  const auto path = dir / name;
  std::ofstream(path) << j.dump(2);
  return path;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("number formatting is locale free and round trips") {
  for (double v : {0.1, -3.458485465579818, 1e-300, 6.02214076e23, 0.0}) {
    CHECK(parse_number(format_number(v)) == v);
    CHECK(parse_number(format_number17(v)) == v);
  }
  CHECK(format_number(0.5) == "0.5");
  CHECK_THROWS(parse_number("1,5"));
  CHECK_THROWS(parse_number(""));
  CHECK(split_csv_line("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});
}

TEST_CASE("control csv round trip") {
  const auto u = testing::random_control(14, 5, 6);
  std::stringstream buf;
  write_control_csv(u, buf);
  CHECK(buf.str().rfind("layer,u1,u2,", 0) == 0);
  CHECK(read_control_csv(buf).values() == u.values());
}

TEST_CASE("run config parsing and validation") {
  const auto cfg = RunConfig::from_json(nlohmann::json::object());
  CHECK(cfg.family == "affine8");
  CHECK(cfg.nu == 20.0);
  CHECK(cfg.train.gamma0 == 1.0);
  CHECK(cfg.train.tau == 0.5);
  CHECK(cfg.train.c == 0.1);
  CHECK(cfg.train.max_iter == 500);
  CHECK(cfg.grid_per_axis == 30);
  CHECK(cfg.side == 1.5);
  CHECK(cfg.test_count == 300);
  CHECK(cfg.init == "zero");

  const auto expect_field = [](const nlohmann::json& j, const std::string& field) {
    try {
      RunConfig::from_json(j).validate();
      FAIL("accepted invalid config ", j.dump());
    } catch (const ConfigError& e) {
      CHECK(e.field() == field);
    }
  };
  expect_field({{"famly", "affine8"}}, "famly");
  expect_field({{"family", "cubic"}}, "family");
  expect_field({{"algorithm", "adam"}}, "algorithm");
  expect_field({{"tau", 2}}, "tau");
  expect_field({{"n_layers", 1.5}}, "n_layers");
  expect_field({{"n_layers", 0}}, "n_layers");
  expect_field({{"beta", "small"}}, "beta");
  expect_field({{"algorithm", "pmp"}, {"batch_size", 10}}, "batch_size");
  expect_field({{"dataset_file", "points.csv"}}, "w1_bound");
  expect_field({{"target", "swirl"}}, "target");

  const auto round = RunConfig::from_json(RunConfig::from_json({{"beta", 0.25}, {"seed", 9}}).to_json());
  CHECK(round.train.beta == 0.25);
  CHECK(round.train.seed == 9);
  CHECK(round.effective_test_seed() == 9);
}

TEST_CASE("train command writes trace, summary and control") {
  const auto dir = testing::scratch_dir("train");
  const auto config = write_config(dir, "cfg.json",
                                   {{"n_layers", 4}, {"grid_per_axis", 5}, {"test_count", 20}, {"max_iter", 15},
                                    {"output_dir", (dir / "out").string()}});
  std::ostringstream out, err;
  REQUIRE(cmd_train(config, {}, out, err) == 0);
  const auto trace = read_lines(dir / "out" / "trace.csv");
  CHECK(trace.front() == "iteration,cost,training_error,testing_error,gamma,accepted");
  CHECK(trace.size() == 17);
  const auto control = read_control_csv(dir / "out" / "control.csv");
  CHECK(control.n_layers() == 4);
  CHECK(control.n_fields() == 8);
  const auto summary = nlohmann::json::parse(std::ifstream(dir / "out" / "summary.json"));
  CHECK(summary.contains("testing_error"));
  for (const char* key : {"training_error", "gen_bound", "lipschitz_flow", "lipschitz_target",
                          "w1_bound", "l2_norm_u"}) {
    CHECK(summary["metrics"].contains(key));
  }
  CHECK(summary.contains("wall_clock_seconds"));
  CHECK(summary["config"]["n_layers"] == 4);
  CHECK(summary["test_seed"] == 0);

  // Identical config, identical files.
  std::ostringstream out2, err2;
  CommandOptions opts;
  opts.out_dir = dir / "again";
  REQUIRE(cmd_train(config, opts, out2, err2) == 0);
  CHECK(read_lines(dir / "out" / "trace.csv") == read_lines(dir / "again" / "trace.csv"));
  CHECK(read_lines(dir / "out" / "control.csv") == read_lines(dir / "again" / "control.csv"));
}

TEST_CASE("max_iter 0 leaves one trace row") {
  const auto dir = testing::scratch_dir("zero_iter");
  const auto config = write_config(dir, "cfg.json",
                                   {{"max_iter", 0}, {"grid_per_axis", 4}, {"output_dir", (dir / "out").string()}});
  std::ostringstream out, err;
  REQUIRE(cmd_train(config, {}, out, err) == 0);
  const auto trace = read_lines(dir / "out" / "trace.csv");
  REQUIRE(trace.size() == 2);
  CHECK(trace[1].rfind("0,", 0) == 0);
}

TEST_CASE("train command reports bad configs") {
  const auto dir = testing::scratch_dir("bad");
  const auto config = write_config(dir, "cfg.json", {{"tau", 3}});
  std::ostringstream out, err;
  CHECK(cmd_train(config, {}, out, err) != 0);
  CHECK(err.str().find("tau") != std::string::npos);
  CHECK(cmd_train(dir / "missing.json", {}, out, err) != 0);
}

TEST_CASE("gradcheck command") {
  const auto dir = testing::scratch_dir("gradcheck");
  std::ostringstream out, err;
  SUBCASE("zero control on the identity target") {
    const auto config = write_config(dir, "id.json", {{"target", "identity"}, {"n_layers", 8}, {"grid_per_axis", 3}});
    CHECK(cmd_gradcheck(config, {}, out, err) == 0);
    CHECK(out.str().find("max_relative_error 0\n") != std::string::npos);
  }
  SUBCASE("random control") {
    const auto config = write_config(
        dir, "rand.json",
        {{"family", "enriched14"}, {"n_layers", 6}, {"grid_per_axis", 3}, {"init", "random"}, {"beta", 0.1}});
    CHECK(cmd_gradcheck(config, {}, out, err) == 0);
  }
  SUBCASE("corrupted Jacobian fails") {
    const auto config = write_config(
        dir, "bad.json", {{"n_layers", 4}, {"grid_per_axis", 3}, {"init", "random"}, {"corrupt_jacobian", true}});
    CHECK(cmd_gradcheck(config, {}, out, err) == 1);
    CHECK(err.str().find("worst component") != std::string::npos);
  }
  SUBCASE("size limits are enforced") {
    const auto deep = write_config(dir, "deep.json", {{"n_layers", 9}, {"grid_per_axis", 3}});
    CHECK(cmd_gradcheck(deep, {}, out, err) == 1);
    const auto wide = write_config(dir, "wide.json", {{"n_layers", 4}, {"grid_per_axis", 4}});
    CHECK(cmd_gradcheck(wide, {}, out, err) == 1);
  }
}

TEST_CASE("eval command reproduces the training error") {
  const auto dir = testing::scratch_dir("eval");
  const auto config = write_config(dir, "cfg.json",
                                   {{"n_layers", 4}, {"grid_per_axis", 5}, {"max_iter", 10},
                                    {"output_dir", (dir / "out").string()}});
  std::ostringstream out, err;
  REQUIRE(cmd_train(config, {}, out, err) == 0);
  const auto summary = nlohmann::json::parse(std::ifstream(dir / "out" / "summary.json"));
  const auto data = make_grid_dataset(TargetMap::builtin_psi(), 1.5, 5);
  write_dataset_csv(data, dir / "grid.csv");
  std::ostringstream eout, eerr;
  CommandOptions opts;
  opts.out_dir = dir / "pred";
  REQUIRE(cmd_eval(config, dir / "out" / "control.csv", dir / "grid.csv", opts, eout, eerr) == 0);
  const double err_value = parse_number(eout.str().substr(6, eout.str().size() - 7));
  CHECK(err_value == doctest::Approx(summary["training_error"].get<double>()).epsilon(1e-14));
  CHECK(read_lines(dir / "pred" / "predictions.csv").size() == 26);
}

TEST_CASE("table setups") {
  CHECK(table_setup(1).family == "affine8");
  CHECK(table_setup(1).n_layers == 16);
  CHECK(table_setup(1).algorithm == "gd");
  CHECK(table_setup(4).n_layers == 32);
  CHECK(table_setup(4).algorithm == "pmp");
  CHECK(table_setup(6).family == "enriched14");
  CHECK(table_setup(6).algorithm == "pmp");
  CHECK(table_setup(1).reference[4].training_error == 1.1839);
  CHECK_THROWS_AS(table_setup(7), InvalidArgument);
}

TEST_CASE("reproduce-tables writes five rows") {
  const auto dir = testing::scratch_dir("tables");
  CommandOptions opts;
  opts.out_dir = dir;
  opts.max_iter = 2;
  std::ostringstream out, err;
  REQUIRE(cmd_reproduce_tables(1, std::nullopt, opts, out, err) == 0);
  const auto csv = read_lines(dir / "table1.csv");
  CHECK(csv.size() == 6);
  CHECK(csv[5].rfind("1e-04,", 0) == 0);
  CHECK(std::filesystem::exists(dir / "table1.md"));
}
