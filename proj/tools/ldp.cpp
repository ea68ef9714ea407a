#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ldp/errors.hpp"
#include "ldp/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ldp: rare-event toolkit for scaled jump-diffusions"};
  app.require_subcommand(1);

  std::string config_file;
  std::string outdir = "out";
  std::uint64_t seed = 0;
  int threads = 0;

  const struct {
    const char* name;
    const char* what;
  } commands[] = {
      {"rate", "action integral of a target path"},
      {"fluid", "deterministic scaling-limit trajectory"},
      {"simulate", "sample paths of the scaled dynamics"},
      {"estimate", "tube probability, crude or tilted"},
      {"diagnose", "degeneracy, tightness and saturation diagnostics"},
      {"ldp-check", "decay-rate sweep against the predicted exponent"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.what);
    sub->add_option("--config", config_file, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", outdir, "output directory (default: out)");
    sub->add_option("--seed", seed, "override the config's master seed");
    sub->add_option("--threads", threads, "worker threads (0 = default)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    ldp::ExperimentConfig cfg = ldp::load_experiment_config(config_file);
    if (cfg.command != sub->get_name())
      throw ldp::ValidationError("config declares command '" + cfg.command +
                                 "' but subcommand is '" + sub->get_name() +
                                 "'");
    if (sub->count("--seed") > 0) cfg.seed = seed;
    if (sub->count("--threads") > 0) cfg.threads = threads;
    ldp::run_experiment(cfg, outdir);
    std::cout << outdir << "/results.json\n";
    return 0;
  } catch (const ldp::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ldp::NotPoissonType& e) {
    // Model/target incompatibility is caught before any sampling starts.
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
