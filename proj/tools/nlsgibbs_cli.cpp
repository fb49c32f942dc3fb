#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlsgibbs/harness.hpp"
#include "nlsgibbs/parallel.hpp"

namespace {

struct Common {
  std::string config;
  std::string preset;
  std::string manifest;
  std::vector<std::string> overrides;
  std::string seed;
  std::string out;
  int threads = 0;
};

void add_common(CLI::App* app, Common& c, bool with_manifest) {
  app->add_option("--config", c.config, "INI configuration file");
  app->add_option("--preset", c.preset, "start from a named preset");
  if (with_manifest) app->add_option("--manifest", c.manifest, "re-run the configuration stored in a manifest");
  app->add_option("--set", c.overrides, "override, section.key=value (repeatable)");
  app->add_option("--seed", c.seed, "random seed (mandatory unless given by the config)");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--threads", c.threads, "thread budget (default: NLSGIBBS_THREADS or all cores)");
}

nlsgibbs::RunConfig build_config(const Common& c, const std::string& experiment) {
  nlsgibbs::RunConfig cfg;
  if (!c.manifest.empty()) {
    std::ifstream in(c.manifest);
    if (!in) throw nlsgibbs::ConfigError("config error: cannot read manifest " + c.manifest);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw nlsgibbs::ConfigError(std::string("config error: manifest: ") + e.what());
    }
    if (!j.contains("config")) throw nlsgibbs::ConfigError("config error: manifest has no config");
    cfg = nlsgibbs::RunConfig::from_json(j["config"]);
  }
  if (!c.preset.empty()) {
    const nlsgibbs::RunConfig preset = nlsgibbs::preset_config(c.preset);
    for (const auto& [k, v] : preset.values()) cfg.set(k, v);
  }
  if (!c.config.empty()) {
    const nlsgibbs::RunConfig file = nlsgibbs::RunConfig::from_ini_file(c.config);
    for (const auto& [k, v] : file.values()) cfg.set(k, v);
  }
  for (const auto& o : c.overrides) cfg.apply_override(o);
  if (!c.seed.empty()) cfg.set("run.seed", c.seed);
  if (!c.out.empty()) cfg.set("run.output", c.out);
  if (!experiment.empty()) cfg.set("run.experiment", experiment);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gibbs-state correlations of the nonlinear Schrodinger equation: quantum and classical engines"};
  app.require_subcommand(1);

  std::vector<std::pair<CLI::App*, Common>> subs;
  subs.reserve(nlsgibbs::experiment_names().size() + 1);
  for (const auto& name : nlsgibbs::experiment_names()) {
    subs.emplace_back(app.add_subcommand(name, "run the " + name + " experiment"), Common{});
  }
  subs.emplace_back(app.add_subcommand("run", "run the experiment named by the configuration"), Common{});
  for (auto& [sub, common] : subs) add_common(sub, common, sub->get_name() == "run");
  auto* list = app.add_subcommand("list-presets", "print preset names and descriptions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (list->parsed()) {
    for (const auto& p : nlsgibbs::presets()) std::cout << p.name << "\t" << p.description << "\n";
    return 0;
  }
  for (auto& [sub, common] : subs) {
    if (!sub->parsed()) continue;
    try {
      if (common.threads < 0) throw nlsgibbs::ConfigError("config error: --threads must be >= 0");
      nlsgibbs::set_thread_budget(common.threads);
      const std::string experiment = sub->get_name() == "run" ? "" : sub->get_name();
      const nlsgibbs::RunConfig cfg = build_config(common, experiment);
      return nlsgibbs::run_and_write(cfg, std::cout);
    } catch (const nlsgibbs::ConfigError& e) {
      std::cerr << e.what() << "\n";
      return 2;
    } catch (const nlsgibbs::ParameterError& e) {
      std::cerr << "parameter error: " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  return 2;
}
