#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eigenfed/random.hpp"

namespace eigenfed::experiment {

enum class ExperimentKind {
  SynthPca,       // sweep n, model M1, fixed m
  VaryM,          // sweep m with m·n held fixed
  IntdimSweep,    // sweep r★ under model M2
  FixedRankSweep, // sweep r under model M2 with fixed r★
  NonGauss,       // sweep n, discrete-uniform atoms
  BoundCheck,     // sweep n, M1, compare against the simplified rate
  QuadSense,      // sweep i, i·r·d measurements per node
};

/// Estimator tags as they appear in CSV headers.
///   erm  central PCA on the pooled matrix
///   one  Procrustes fixing (one-shot)
///   fix  Procrustes fixing (one-shot)
///   itr  Procrustes fixing with iterative refinement
///   rot  spectral projector averaging
///   nve  naive averaging
enum class Estimator { Erm, One, Fix, Itr, Rot, Nve };

enum class ModelFamily { M1, M2, Uniform };

struct ModelSpec {
  ModelFamily family = ModelFamily::M1;
  double lambda_lo = 0.5;
  double lambda_hi = 1.0;
  double delta = 0.2;
  std::vector<double> r_star;
  std::size_t k = 0;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::SynthPca;
  long d = 0;
  std::vector<long> r;
  std::vector<long> m;
  std::vector<long> n;
  std::vector<long> i_list;
  long total_samples = 0;
  ModelSpec model;
  std::vector<Estimator> estimators;
  std::size_t n_iter = 2;
  std::size_t repetitions = 5;
  Seed master_seed = 0;
  double tau_mult = 9.0;
  double noise_sd = 0.0;
  double timeout_s = 30.0;
  std::string out_path;
};

std::string_view experiment_name(ExperimentKind k) noexcept;
ExperimentKind parse_experiment(std::string_view name);
std::string_view estimator_tag(Estimator e) noexcept;
Estimator parse_estimator(std::string_view tag);

/// Reads a `key = value` file with sections [experiment], [model], [output],
/// then applies `overrides` (keyed by the same names, without section) on top.
/// Unknown keys or sections, and missing required keys, raise ConfigError.
///
/// `experiment` selects the preset when the file does not name one; a file
/// value that disagrees with a non-empty `experiment` is an error.
ExperimentConfig parse_config(const std::optional<std::filesystem::path> &file,
                              std::string_view experiment,
                              const std::map<std::string, std::string> &overrides = {});

/// Same as parse_config but reading the text directly.
ExperimentConfig parse_config_text(std::string_view text, std::string_view experiment,
                                   const std::map<std::string, std::string> &overrides = {});

struct ResultRow {
  double sweep = 0.0;
  /// Realized intrinsic dimension of the ground truth, when meaningful.
  std::optional<double> intdim;
  /// One median per configured estimator, in configuration order.
  std::vector<double> values;
  std::optional<double> theo;
};

struct ResultTable {
  std::string comment;
  std::string sweep_column;
  bool has_intdim = false;
  std::vector<std::string> value_columns;
  bool has_theo = false;
  std::vector<ResultRow> rows;

  std::vector<std::string> header() const;
};

/// Runs every grid point and repetition, aggregating by median. Writes the
/// CSV when config.out_path is set.
ResultTable run_experiment(const ExperimentConfig &config);

/// RFC 4180 CSV, LF endings, 17 significant digits, comment line then header.
void emit_csv(const ResultTable &table, const std::filesystem::path &path);
std::string format_csv(const ResultTable &table);

/// Median with NaNs ordered above every number (a NaN middle yields NaN).
double median(std::vector<double> values);

} // namespace eigenfed::experiment
