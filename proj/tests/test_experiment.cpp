#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "eigenfed/errors.hpp"
#include "eigenfed/experiment.hpp"

using namespace eigenfed;
using namespace eigenfed::experiment;

namespace {

const char *kSmall = R"(
[experiment]
d = 12
r = 2
m = 4
n = 40, 80
estimators = erm, fix, itr, nve
repetitions = 3
seed = 11

[model]
kind = m1
)";

std::string config_key_of(std::string_view text, std::string_view exp,
                          const std::map<std::string, std::string> &ov = {}) {
  try {
    parse_config_text(text, exp, ov);
  } catch (const ConfigError &e) {
    return e.key();
  }
  return "<ok>";
}

std::filesystem::path temp_path(const std::string &name) {
  return std::filesystem::temp_directory_path() / ("eigenfed_test_" + name);
}

int run_cli(const std::string &args) {
  const std::string cmd = std::string(EIGENFED_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Config, DefaultsApplied) {
  const ExperimentConfig c = parse_config_text("[experiment]\nd = 10\nr = 2\nm = 3\nn = 50\n",
                                               "synth-pca");
  EXPECT_EQ(c.n_iter, 2u);
  EXPECT_EQ(c.repetitions, 5u);
  EXPECT_EQ(c.model.family, ModelFamily::M1);
  EXPECT_FALSE(c.estimators.empty());
  EXPECT_DOUBLE_EQ(c.tau_mult, 9.0);
}

TEST(Config, MissingRequiredKeyNamesIt) {
  EXPECT_EQ(config_key_of("[experiment]\nr = 2\nm = 3\nn = 50\n", "synth-pca"), "d");
  EXPECT_EQ(config_key_of("[experiment]\nd = 10\nr = 2\nm = 3\n", "synth-pca"), "n");
  EXPECT_EQ(config_key_of("", ""), "experiment");
}

TEST(Config, OverridesBeatFile) {
  const ExperimentConfig c = parse_config_text(kSmall, "synth-pca", {{"repetitions", "7"},
                                                                      {"d", "15"}});
  EXPECT_EQ(c.repetitions, 7u);
  EXPECT_EQ(c.d, 15);
  EXPECT_EQ(c.n, (std::vector<long>{40, 80}));
}

TEST(Config, UnknownKeysAndSectionsRejected) {
  EXPECT_EQ(config_key_of("[experiment]\nbogus = 1\n", "synth-pca"), "bogus");
  EXPECT_NE(config_key_of("[nope]\nd = 1\n", "synth-pca"), "<ok>");
  EXPECT_EQ(config_key_of(kSmall, "synth-pca", {{"nonsense", "1"}}), "nonsense");
  EXPECT_EQ(config_key_of("[model]\nkind = m3\n", "synth-pca"), "kind");
  EXPECT_EQ(config_key_of(kSmall, "synth-pca", {{"estimators", "fix, mean"}}), "estimators");
}

TEST(Config, ExperimentMustAgree) {
  const std::string text = std::string("[experiment]\nexperiment = vary-m\n") + "d = 10\n";
  EXPECT_EQ(config_key_of(text, "synth-pca"), "experiment");
}

TEST(Config, ModelShorthand) {
  const ExperimentConfig c =
      parse_config_text(kSmall, "synth-pca", {{"model", "m1(0.4, 1, 0.1)"}});
  EXPECT_DOUBLE_EQ(c.model.lambda_lo, 0.4);
  EXPECT_DOUBLE_EQ(c.model.delta, 0.1);
  EXPECT_EQ(config_key_of(kSmall, "synth-pca", {{"model", "m2(0.1)"}}), "model");
}

TEST(Config, FileRoundTrip) {
  const auto path = temp_path("cfg.ini");
  std::ofstream(path) << kSmall;
  const ExperimentConfig c = parse_config(path, "synth-pca");
  EXPECT_EQ(c.d, 12);
  EXPECT_EQ(c.master_seed, 11u);
  std::filesystem::remove(path);
  EXPECT_THROW(parse_config(temp_path("missing.ini"), "synth-pca"), Error);
}

TEST(Median, OddEvenAndNan) {
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 3, 2}), 2.5);
  const double nan = std::nan("");
  EXPECT_DOUBLE_EQ(median({1, nan, 2}), 2.0);
  EXPECT_TRUE(std::isnan(median({1, nan, nan})));
}

TEST(Csv, HeaderOnlyWhenNoRows) {
  ResultTable t;
  t.comment = "experiment=synth-pca";
  t.sweep_column = "n";
  t.value_columns = {"erm", "fix"};
  EXPECT_EQ(format_csv(t), "# experiment=synth-pca\nn,erm,fix\n");
}

TEST(Csv, FloatsRoundTripExactly) {
  ResultTable t;
  t.comment = "x";
  t.sweep_column = "n";
  t.value_columns = {"fix"};
  t.has_theo = true;
  t.rows.push_back({100, std::nullopt, {0.1 + 0.2}, 1.0 / 3.0});
  t.rows.push_back({200, std::nullopt, {std::nan("")}, 5e-324});
  std::istringstream in(format_csv(t));
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  EXPECT_EQ(line, "n,fix,theo");
  std::getline(in, line);
  const auto c1 = line.find(','), c2 = line.rfind(',');
  EXPECT_EQ(std::strtod(line.substr(c1 + 1, c2 - c1 - 1).c_str(), nullptr), 0.1 + 0.2);
  EXPECT_EQ(std::strtod(line.substr(c2 + 1).c_str(), nullptr), 1.0 / 3.0);
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 8), "200,nan,");
}

TEST(Run, SameSeedGivesIdenticalCsv) {
  const ExperimentConfig c = parse_config_text(kSmall, "synth-pca");
  const ResultTable a = run_experiment(c);
  const ResultTable b = run_experiment(c);
  EXPECT_EQ(format_csv(a), format_csv(b));
  ASSERT_EQ(a.rows.size(), 2u);
  EXPECT_EQ(a.value_columns, (std::vector<std::string>{"erm", "fix", "itr", "nve"}));
  for (const auto &row : a.rows)
    for (double v : row.values)
      if (!std::isnan(v))
        EXPECT_TRUE(v >= 0.0 && v <= 1.0);
  const ExperimentConfig other =
      parse_config_text(kSmall, "synth-pca", {{"seed", "12"}});
  EXPECT_NE(format_csv(run_experiment(other)), format_csv(a));
}

TEST(Run, WritesOutputFile) {
  const auto path = temp_path("out.csv");
  ExperimentConfig c = parse_config_text(kSmall, "synth-pca");
  c.out_path = path.string();
  const ResultTable t = run_experiment(c);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), format_csv(t));
  std::filesystem::remove(path);
  EXPECT_THROW(emit_csv(t, "/nonexistent-dir/x.csv"), IoError);
}

TEST(Run, EveryPresetRunsSmall) {
  const std::map<std::string, std::map<std::string, std::string>> presets = {
      {"synth-pca", {{"n", "30"}}},
      {"vary-m", {{"m", "2,4"}, {"total-samples", ""}, {"total_samples", "120"}}},
      {"intdim-sweep", {{"n", "40"}, {"model", "m2(0.2, 3, 4)"}}},
      {"fixed-rank-sweep", {{"r", "1,2"}, {"n", "40"}, {"model", "m2(0.2, 4)"}}},
      {"nongauss", {{"n", "40"}, {"model", "uniform(4)"}}},
      {"bound-check", {{"n", "40"}, {"repetitions", "2"}}},
      {"quadsense", {{"i", "1,2"}}},
  };
  for (const auto &[name, ov] : presets) {
    std::map<std::string, std::string> o = {{"d", "10"}, {"r", "2"},  {"m", "3"},
                                            {"repetitions", "2"},     {"seed", "1"},
                                            {"estimators", "erm,fix,itr"}};
    for (const auto &[k, v] : ov)
      if (!v.empty())
        o[k] = v;
    if (name == "vary-m")
      o.erase("n");
    SCOPED_TRACE(name);
    const ExperimentConfig c = parse_config_text("", name, o);
    const ResultTable t = run_experiment(c);
    EXPECT_FALSE(t.rows.empty());
    for (const auto &row : t.rows)
      EXPECT_EQ(row.values.size(), 3u);
  }
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("synth-pca --d 10 --r 2 --m 3 --n 30 --reps 1"), 0);
  EXPECT_EQ(run_cli("synth-pca --r 2 --m 3 --n 30"), 2);
  EXPECT_EQ(run_cli("no-such-experiment --d 10"), 2);
  EXPECT_EQ(run_cli("synth-pca --d 10 --r 2 --m 3 --n 30 --reps 1 --out /nonexistent-dir/x.csv"),
            3);
}
