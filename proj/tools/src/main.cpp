#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "solatools/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"sola — switched online learning simulator"};
  app.name("sola");

  std::string config_path;
  solatools::RunOptions opts;
  std::uint64_t seed = 0;
  bool naive = false;

  app.add_option("--config", config_path, "experiment config file (TOML or JSON)")->required();
  app.add_option("--out-dir", opts.out_dir, "output directory (default ./out)");
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
  app.add_flag("--naive", naive, "force naive switching (fusing variable 1)");
  app.add_flag("--quiet", opts.quiet, "suppress the summary on stdout");

  if (argc <= 1) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    solatools::ExperimentConfig cfg = solatools::parse_config(config_path);
    if (*seed_opt) cfg.seed = seed;
    if (naive) cfg.naive = true;
    return solatools::run_experiment(cfg, opts);
  } catch (const solatools::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
