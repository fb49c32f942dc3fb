#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nlsgibbs/harness.hpp"

using namespace nlsgibbs;

namespace {
std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(p);
  return p;
}
}  // namespace

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("ini configuration and overrides") {
  RunConfig cfg = RunConfig::from_ini_string(
      "[run]\nseed = 42\nexperiment = partition-ratio\n[grid]\nK = 2\nkappa = 0.5\n[schedule]\ntau = 1, 2, 4\n");
  CHECK(cfg.seed() == 42);
  CHECK(cfg.experiment() == "partition-ratio");
  CHECK(cfg.get_int("grid.K", 0) == 2);
  CHECK(cfg.get_double("grid.kappa", 1.0) == 0.5);
  CHECK(cfg.get_doubles("schedule.tau", {}) == std::vector<double>{1, 2, 4});
  CHECK(cfg.get_double("missing.key", 3.5) == 3.5);
  cfg.apply_override("grid.K = 3");
  CHECK(cfg.get_int("grid.K", 0) == 3);
  CHECK_THROWS_AS(cfg.apply_override("nonsense"), ConfigError);
  cfg.set("grid.K", "2.5");
  CHECK_THROWS_AS(cfg.get_int("grid.K", 0), ConfigError);
  cfg.set("grid.kappa", "abc");
  CHECK_THROWS_AS(cfg.get_double("grid.kappa", 1.0), ConfigError);
  CHECK_THROWS_AS(cfg.require_string("nothing.here"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_ini_string("[run\nseed = 1\n"), ConfigError);
}

TEST_CASE("seed is mandatory") {
  RunConfig cfg;
  CHECK_THROWS_AS(cfg.seed(), ConfigError);
  cfg.set("run.seed", "-4");
  CHECK_THROWS_AS(cfg.seed(), ConfigError);
  cfg.set("run.seed", "7");
  CHECK(cfg.seed() == 7);
}

TEST_CASE("config hash") {
  RunConfig a, b;
  a.set("x.a", "1");
  a.set("y.b", "2");
  b.set("y.b", "2");
  b.set("x.a", "1");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  CHECK(a.canonical() == "x.a = 1\ny.b = 2\n");
  b.set("x.a", "2");
  CHECK(a.hash() != b.hash());
  const RunConfig c = RunConfig::from_json(a.to_json());
  CHECK(c.hash() == a.hash());
}

TEST_CASE("observables from names") {
  const std::vector<int> modes{0, 1};
  CHECK(parse_observable("number", modes).kernel().isIdentity());
  const Observable m = parse_observable("mode:1", modes);
  CHECK(m.kernel()(1, 1) == cplx(1.0));
  CHECK(m.kernel()(0, 0) == cplx(0.0));
  const Observable s = parse_observable("superposition:0:1", modes);
  CHECK(std::abs(s.kernel()(0, 1) - 0.5) < 1e-15);
  const Observable p = parse_observable("pair:0:1", modes);
  CHECK(p.particles() == 2);
  CHECK(std::abs(p.kernel().trace() - 1.0) < 1e-14);
  CHECK_THROWS_AS(parse_observable("mode:5", modes), ConfigError);
  CHECK_THROWS_AS(parse_observable("banana", modes), ConfigError);
}

TEST_CASE("model construction from config") {
  RunConfig cfg;
  cfg.set("grid.K", "2");
  cfg.set("grid.modes", "0,1,-2");
  const Grid g = grid_from_config(cfg);
  CHECK(g.P() == 10);
  CHECK(g.M() == 3);
  cfg.set("grid.P", "7");
  CHECK_THROWS_AS(grid_from_config(cfg), ConfigError);
  cfg.set("grid.P", "10");
  cfg.set("potential.kind", "nonlocal");
  cfg.set("potential.fourier", "1,0.5");
  CHECK(potential_from_config(cfg, g).fourier().size() == 2);
  cfg.set("potential.fourier", "0.1,1");
  CHECK_THROWS_AS(potential_from_config(cfg, g), ConfigError);
  cfg.set("potential.kind", "gravity");
  CHECK_THROWS_AS(potential_from_config(cfg, g), ConfigError);

  cfg.set("correlation.observables", "number,mode:0");
  cfg.set("correlation.times", "0,0.5");
  const CorrelationSpec spec = correlation_from_config(cfg, g);
  CHECK(spec.terms.size() == 2);
  CHECK(spec.terms[1].t == 0.5);
  cfg.set("correlation.times", "0");
  CHECK_THROWS_AS(correlation_from_config(cfg, g), ConfigError);
  cfg.set("flow.dt", "-1");
  CHECK_THROWS_AS(flow_from_config(cfg), ConfigError);
}

TEST_CASE("presets name known experiments") {
  const auto& names = experiment_names();
  CHECK(presets().size() >= 8);
  for (const auto& p : presets()) {
    CHECK(std::find(names.begin(), names.end(), p.experiment) != names.end());
    const RunConfig cfg = preset_config(p.name);
    CHECK(cfg.experiment() == p.experiment);
    CHECK_NOTHROW(cfg.seed());
  }
  CHECK_THROWS_AS(preset_config("no-such-preset"), ConfigError);
  RunConfig cfg;
  cfg.set("run.seed", "1");
  CHECK_THROWS_AS(run_experiment("no-such-experiment", cfg), ConfigError);
}

TEST_CASE("tables keep full precision") {
  const auto dir = scratch_dir("nlsgibbs_table_test");
  std::filesystem::create_directories(dir);
  Table t{{"a", "b"}, {{1.0 / 3.0, 2.0}}};
  t.write_csv((dir / "t.csv").string());
  std::ifstream in(dir / "t.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "a,b");
  CHECK(std::stod(row.substr(0, row.find(','))) == 1.0 / 3.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("run and write produces a manifest") {
  const auto dir = scratch_dir("nlsgibbs_run_test");
  RunConfig cfg = preset_config("partition-ratio");
  cfg.set("schedule.tau", "1,2,4");
  cfg.set("run.output", dir.string());
  std::ostringstream log;
  CHECK(run_and_write(cfg, log) == 0);
  CHECK(log.str().find("PASS trace_vs_product") != std::string::npos);
  std::ifstream in(dir / "manifest.json");
  const nlohmann::json m = nlohmann::json::parse(in);
  CHECK(m["experiment"] == "partition-ratio");
  CHECK(m["seed"] == 20240607);
  CHECK(m["config_hash"] == cfg.hash());
  CHECK(m["passed"] == true);
  CHECK(std::filesystem::exists(dir / "partition_ratio.csv"));
  // the stored config reproduces the hash
  CHECK(RunConfig::from_json(m["config"]).hash() == cfg.hash());
  std::filesystem::remove_all(dir);
}
