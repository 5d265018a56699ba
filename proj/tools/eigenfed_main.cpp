// eigenfed: runs one synthetic experiment preset and writes its CSV.
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "eigenfed/errors.hpp"
#include "eigenfed/experiment.hpp"

namespace ex = eigenfed::experiment;

int main(int argc, char **argv) {
  CLI::App app{"Distributed eigenspace estimation experiments"};
  app.set_version_flag("--version", "eigenfed 0.1.0");

  std::string experiment;
  std::string config_path;
  app.add_option("experiment", experiment,
                 "synth-pca | vary-m | intdim-sweep | fixed-rank-sweep | nongauss | "
                 "bound-check | quadsense")
      ->required();
  app.add_option("--config", config_path, "key = value file with [experiment], [model], "
                                          "[output] sections");

  // Flag name -> config key. Values stay strings; parse_config validates them.
  const std::pair<const char *, const char *> flags[] = {
      {"--d", "d"},
      {"--r", "r"},
      {"--m", "m"},
      {"--n", "n"},
      {"--i", "i"},
      {"--total-samples", "total_samples"},
      {"--model", "model"},
      {"--estimators", "estimators"},
      {"--n-iter", "n_iter"},
      {"--reps", "repetitions"},
      {"--seed", "seed"},
      {"--tau-mult", "tau_mult"},
      {"--noise-sd", "noise_sd"},
      {"--out", "path"},
      {"--timeout-s", "timeout_s"},
  };
  std::map<std::string, std::string> values;
  for (const auto &[flag, key] : flags)
    app.add_option(flag, values[key], std::string("overrides ") + key);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  std::map<std::string, std::string> overrides;
  for (const auto &[flag, key] : flags)
    if (app.count(flag) > 0)
      overrides[key] = values[key];

  try {
    std::optional<std::filesystem::path> file;
    if (!config_path.empty())
      file = config_path;
    const ex::ExperimentConfig config = ex::parse_config(file, experiment, overrides);
    const ex::ResultTable table = ex::run_experiment(config);
    if (config.out_path.empty())
      std::cout << ex::format_csv(table);
    return 0;
  } catch (const eigenfed::ConfigError &e) {
    std::cerr << "eigenfed: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "eigenfed: " << e.what() << '\n';
    return 3;
  }
}
