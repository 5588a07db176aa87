// Command-line front end for the branching random walk experiments.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>

#include <CLI11.hpp>
#include <json.hpp>

#include "brwre/errors.hpp"
#include "brwre/experiment.hpp"

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

unsigned default_threads() {
  if (const char* env = std::getenv("BRWRE_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

int report_error(std::string_view kind, const std::string& message, int code) {
  nlohmann::json record{{"error", std::string(kind)}, {"message", message}};
  std::cerr << record.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Branching random walks in random environment: simulation and limit laws"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<std::size_t> reps;
  unsigned threads = default_threads();

  app.add_option("--config", config_path, "Experiment config (JSON)");
  app.add_option("--seed", seed, "Master seed, overrides the config");
  app.add_option("--out", out_dir, "Output directory, overrides the config");
  app.add_option("--reps", reps, "Replications, overrides the config");
  app.add_option("--threads", threads, "Worker threads (default: BRWRE_THREADS or 1)")->check(CLI::PositiveNumber);

  const char* names[] = {"check", "simulate", "limit", "compare", "diagnostics"};
  for (const char* name : names) app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  brwre::ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = brwre::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (reps) cfg.simulation.replications = *reps;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    cfg.validate();
  } catch (const brwre::Error& e) {
    return report_error(e.kind_name(), e.what(), kExitConfig);
  }

  brwre::RunContext ctx{.out_dir = cfg.output_dir, .threads = threads, .log = &std::cout};
  try {
    int code = kExitFail;
    if (cmd == "check") code = brwre::cmd_check(cfg, ctx);
    else if (cmd == "simulate") code = brwre::cmd_simulate(cfg, ctx);
    else if (cmd == "limit") code = brwre::cmd_limit(cfg, ctx);
    else if (cmd == "compare") code = brwre::cmd_compare(cfg, ctx);
    else code = brwre::cmd_diagnostics(cfg, ctx);
    return code;
  } catch (const brwre::Error& e) {
    return report_error(e.kind_name(), e.what(),
                        e.kind() == brwre::ErrorKind::ConfigError ? kExitConfig : kExitRuntime);
  } catch (const std::exception& e) {
    return report_error("RuntimeError", e.what(), kExitRuntime);
  }
}
