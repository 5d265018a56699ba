#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "eigenfed/errors.hpp"
#include "eigenfed/experiment.hpp"

namespace eigenfed::experiment {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    auto item = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!item.empty())
      out.push_back(std::move(item));
    if (comma == std::string_view::npos)
      break;
    start = comma + 1;
  }
  return out;
}

long to_long(const std::string &key, std::string_view s) {
  long v = 0;
  const auto *end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end)
    throw ConfigError(key, "expected an integer, got '" + std::string(s) + "'");
  return v;
}

double to_double(const std::string &key, std::string_view s) {
  double v = 0;
  const auto *end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v))
    throw ConfigError(key, "expected a number, got '" + std::string(s) + "'");
  return v;
}

std::vector<long> to_long_list(const std::string &key, std::string_view s) {
  std::vector<long> out;
  for (const auto &item : split_list(s))
    out.push_back(to_long(key, item));
  if (out.empty())
    throw ConfigError(key, "list must not be empty");
  return out;
}

std::vector<double> to_double_list(const std::string &key, std::string_view s) {
  std::vector<double> out;
  for (const auto &item : split_list(s))
    out.push_back(to_double(key, item));
  if (out.empty())
    throw ConfigError(key, "list must not be empty");
  return out;
}

const std::map<std::string, std::set<std::string>> &known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"experiment",
       {"experiment", "d", "r", "m", "n", "i", "total_samples", "estimators", "n_iter",
        "repetitions", "seed", "tau_mult", "noise_sd", "timeout_s"}},
      {"model", {"kind", "lambda_lo", "lambda_hi", "delta", "r_star", "k"}},
      {"output", {"path"}},
  };
  return keys;
}

std::string section_of(const std::string &key) {
  for (const auto &[section, keys] : known_keys())
    if (keys.count(key))
      return section;
  return {};
}

ModelFamily parse_family(const std::string &key, std::string_view s) {
  if (s == "m1") return ModelFamily::M1;
  if (s == "m2") return ModelFamily::M2;
  if (s == "uniform") return ModelFamily::Uniform;
  throw ConfigError(key, "unknown model '" + std::string(s) + "' (m1, m2, uniform)");
}

class Builder {
public:
  void set(const std::string &key, const std::string &value) {
    if (key == "model") {
      set_model_shorthand(value);
      return;
    }
    if (section_of(key).empty())
      throw ConfigError(key, "unknown key");
    seen_.insert(key);
    auto &c = cfg_;
    if (key == "experiment") {
      try {
        experiment_from_file_ = parse_experiment(value);
      } catch (const ConfigError &) {
        throw ConfigError(key, "unknown experiment '" + value + "'");
      }
    } else if (key == "d") c.d = to_long(key, value);
    else if (key == "r") c.r = to_long_list(key, value);
    else if (key == "m") c.m = to_long_list(key, value);
    else if (key == "n") c.n = to_long_list(key, value);
    else if (key == "i") c.i_list = to_long_list(key, value);
    else if (key == "total_samples") c.total_samples = to_long(key, value);
    else if (key == "estimators") {
      c.estimators.clear();
      for (const auto &tag : split_list(value)) {
        try {
          c.estimators.push_back(parse_estimator(tag));
        } catch (const ConfigError &) {
          throw ConfigError(key, "unknown estimator '" + tag + "'");
        }
      }
      if (c.estimators.empty())
        throw ConfigError(key, "list must not be empty");
    } else if (key == "n_iter") c.n_iter = static_cast<std::size_t>(positive(key, to_long(key, value)));
    else if (key == "repetitions")
      c.repetitions = static_cast<std::size_t>(positive(key, to_long(key, value)));
    else if (key == "seed") {
      const long s = to_long(key, value);
      if (s < 0)
        throw ConfigError(key, "must be non-negative");
      c.master_seed = static_cast<Seed>(s);
    } else if (key == "tau_mult") c.tau_mult = to_double(key, value);
    else if (key == "noise_sd") c.noise_sd = to_double(key, value);
    else if (key == "timeout_s") c.timeout_s = to_double(key, value);
    else if (key == "kind") c.model.family = parse_family(key, value);
    else if (key == "lambda_lo") c.model.lambda_lo = to_double(key, value);
    else if (key == "lambda_hi") c.model.lambda_hi = to_double(key, value);
    else if (key == "delta") c.model.delta = to_double(key, value);
    else if (key == "r_star") c.model.r_star = to_double_list(key, value);
    else if (key == "k") c.model.k = static_cast<std::size_t>(positive(key, to_long(key, value)));
    else if (key == "path") c.out_path = value;
  }

  void parse_text(std::string_view text) {
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
      if (body.empty())
        continue;
      if (body.front() == '[') {
        if (body.back() != ']')
          throw ConfigError("line " + std::to_string(line_no), "malformed section header");
        section = trim(std::string_view(body).substr(1, body.size() - 2));
        if (!known_keys().count(section))
          throw ConfigError("line " + std::to_string(line_no),
                            "unknown section [" + section + "]");
        continue;
      }
      const auto eq = body.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(line_no), "expected key = value");
      const std::string key = trim(std::string_view(body).substr(0, eq));
      const std::string value = trim(std::string_view(body).substr(eq + 1));
      if (section.empty())
        throw ConfigError(key, "key outside of a section (line " +
                                   std::to_string(line_no) + ")");
      if (!known_keys().at(section).count(key))
        throw ConfigError(key, "unknown key in [" + section + "] (line " +
                                   std::to_string(line_no) + ")");
      set(key, value);
    }
  }

  ExperimentConfig finish(std::string_view experiment) {
    auto c = cfg_;
    if (!experiment.empty()) {
      c.experiment = parse_experiment(experiment);
      if (experiment_from_file_ && *experiment_from_file_ != c.experiment)
        throw ConfigError("experiment", "config names '" +
                                            std::string(experiment_name(*experiment_from_file_)) +
                                            "' but '" + std::string(experiment) +
                                            "' was requested");
    } else if (experiment_from_file_) {
      c.experiment = *experiment_from_file_;
    } else {
      throw ConfigError("experiment", "required");
    }
    apply_defaults(c);
    validate(c);
    return c;
  }

private:
  static long positive(const std::string &key, long v) {
    if (v < 1)
      throw ConfigError(key, "must be >= 1");
    return v;
  }

  // m1 | m1(lo,hi,delta) | m2(delta,r_star[,r_star...]) | uniform(k)
  void set_model_shorthand(const std::string &value) {
    const auto open = value.find('(');
    const std::string name = trim(value.substr(0, open));
    cfg_.model.family = parse_family("model", name);
    seen_.insert("kind");
    if (open == std::string::npos)
      return;
    if (value.back() != ')')
      throw ConfigError("model", "unbalanced parentheses in '" + value + "'");
    const auto args = to_double_list("model", value.substr(open + 1, value.size() - open - 2));
    switch (cfg_.model.family) {
    case ModelFamily::M1:
      if (args.size() != 3)
        throw ConfigError("model", "m1 takes (lambda_lo, lambda_hi, delta)");
      cfg_.model.lambda_lo = args[0];
      cfg_.model.lambda_hi = args[1];
      cfg_.model.delta = args[2];
      break;
    case ModelFamily::M2:
      if (args.size() < 2)
        throw ConfigError("model", "m2 takes (delta, r_star, ...)");
      cfg_.model.delta = args[0];
      cfg_.model.r_star.assign(args.begin() + 1, args.end());
      break;
    case ModelFamily::Uniform:
      if (args.size() != 1 || args[0] < 1 || args[0] != std::floor(args[0]))
        throw ConfigError("model", "uniform takes (k)");
      cfg_.model.k = static_cast<std::size_t>(args[0]);
      break;
    }
  }

  void apply_defaults(ExperimentConfig &c) const {
    if (!seen_.count("repetitions") && c.experiment == ExperimentKind::BoundCheck)
      c.repetitions = 10;
    if (!seen_.count("kind")) {
      switch (c.experiment) {
      case ExperimentKind::IntdimSweep:
      case ExperimentKind::FixedRankSweep: c.model.family = ModelFamily::M2; break;
      case ExperimentKind::NonGauss: c.model.family = ModelFamily::Uniform; break;
      default: c.model.family = ModelFamily::M1; break;
      }
    }
    if (c.estimators.empty()) {
      using E = Estimator;
      switch (c.experiment) {
      case ExperimentKind::SynthPca: c.estimators = {E::Erm, E::Fix}; break;
      case ExperimentKind::VaryM: c.estimators = {E::Erm, E::Fix, E::Itr}; break;
      case ExperimentKind::IntdimSweep:
      case ExperimentKind::FixedRankSweep: c.estimators = {E::Erm, E::Fix, E::Itr, E::Rot}; break;
      case ExperimentKind::NonGauss: c.estimators = {E::Erm, E::One, E::Rot}; break;
      case ExperimentKind::BoundCheck: c.estimators = {E::Fix}; break;
      case ExperimentKind::QuadSense: c.estimators = {E::Erm, E::Itr, E::Nve}; break;
      }
    }
    if (c.experiment == ExperimentKind::QuadSense && c.i_list.empty())
      c.i_list = {1, 2, 3, 4, 5, 6, 7, 8};
    if (c.experiment == ExperimentKind::IntdimSweep && c.model.r_star.empty() &&
        c.r.size() == 1)
      for (int k = 2; k <= 6; ++k)
        c.model.r_star.push_back(static_cast<double>(c.r.front() + (1L << k)));
  }

  void require_key(const char *key) const {
    if (!seen_.count(key))
      throw ConfigError(key, "required");
  }

  static void require_single(const char *key, std::size_t size) {
    if (size != 1)
      throw ConfigError(key, "this experiment takes a single value");
  }

  void validate(const ExperimentConfig &c) const {
    require_key("d");
    require_key("r");
    require_key("m");
    if (c.d < 2)
      throw ConfigError("d", "must be >= 2");
    for (long r : c.r)
      if (r < 1 || r >= c.d)
        throw ConfigError("r", "each r must satisfy 1 <= r < d");
    for (long m : c.m)
      if (m < 1)
        throw ConfigError("m", "each m must be >= 1");
    for (long n : c.n)
      if (n < 1)
        throw ConfigError("n", "each n must be >= 1");
    if (!(c.timeout_s > 0.0))
      throw ConfigError("timeout_s", "must be positive");

    const auto kind = c.experiment;
    const bool sweeps_r = kind == ExperimentKind::FixedRankSweep;
    const bool sweeps_m = kind == ExperimentKind::VaryM;
    if (!sweeps_r)
      require_single("r", c.r.size());
    if (!sweeps_m)
      require_single("m", c.m.size());

    if (kind == ExperimentKind::VaryM) {
      require_key("total_samples");
      for (long m : c.m)
        if (c.total_samples / m < 1)
          throw ConfigError("total_samples", "must be at least the largest m");
    } else if (kind != ExperimentKind::QuadSense) {
      require_key("n");
    }
    if (kind == ExperimentKind::IntdimSweep || kind == ExperimentKind::FixedRankSweep)
      require_single("n", c.n.size());

    const auto family = c.model.family;
    switch (kind) {
    case ExperimentKind::SynthPca:
    case ExperimentKind::VaryM:
      if (family == ModelFamily::Uniform)
        throw ConfigError("kind", "this experiment needs model m1 or m2");
      break;
    case ExperimentKind::BoundCheck:
      if (family != ModelFamily::M1)
        throw ConfigError("kind", "bound-check needs model m1");
      break;
    case ExperimentKind::IntdimSweep:
    case ExperimentKind::FixedRankSweep:
      if (family != ModelFamily::M2)
        throw ConfigError("kind", "this experiment needs model m2");
      break;
    case ExperimentKind::NonGauss:
      if (family != ModelFamily::Uniform)
        throw ConfigError("kind", "nongauss needs model uniform");
      if (c.model.k < 2)
        throw ConfigError("k", "nongauss needs k >= 2");
      if (static_cast<std::size_t>(c.r.front()) >= c.model.k)
        throw ConfigError("r", "nongauss needs r < k");
      break;
    case ExperimentKind::QuadSense:
      if (!(c.tau_mult > 0.0))
        throw ConfigError("tau_mult", "must be positive");
      if (!(c.noise_sd >= 0.0))
        throw ConfigError("noise_sd", "must be non-negative");
      for (long i : c.i_list)
        if (i < 1)
          throw ConfigError("i", "each i must be >= 1");
      break;
    }
    if (family == ModelFamily::M2) {
      if (c.model.r_star.empty())
        throw ConfigError("r_star", "required for model m2");
      if (kind == ExperimentKind::FixedRankSweep)
        require_single("r_star", c.model.r_star.size());
      else if (kind != ExperimentKind::IntdimSweep)
        require_single("r_star", c.model.r_star.size());
    }
  }

  ExperimentConfig cfg_;
  std::set<std::string> seen_;
  std::optional<ExperimentKind> experiment_from_file_;
};

} // namespace

std::string_view experiment_name(ExperimentKind k) noexcept {
  switch (k) {
  case ExperimentKind::SynthPca: return "synth-pca";
  case ExperimentKind::VaryM: return "vary-m";
  case ExperimentKind::IntdimSweep: return "intdim-sweep";
  case ExperimentKind::FixedRankSweep: return "fixed-rank-sweep";
  case ExperimentKind::NonGauss: return "nongauss";
  case ExperimentKind::BoundCheck: return "bound-check";
  case ExperimentKind::QuadSense: return "quadsense";
  }
  return "unknown";
}

ExperimentKind parse_experiment(std::string_view name) {
  for (auto k : {ExperimentKind::SynthPca, ExperimentKind::VaryM, ExperimentKind::IntdimSweep,
                 ExperimentKind::FixedRankSweep, ExperimentKind::NonGauss,
                 ExperimentKind::BoundCheck, ExperimentKind::QuadSense})
    if (experiment_name(k) == name)
      return k;
  throw ConfigError("experiment", "unknown experiment '" + std::string(name) + "'");
}

std::string_view estimator_tag(Estimator e) noexcept {
  switch (e) {
  case Estimator::Erm: return "erm";
  case Estimator::One: return "one";
  case Estimator::Fix: return "fix";
  case Estimator::Itr: return "itr";
  case Estimator::Rot: return "rot";
  case Estimator::Nve: return "nve";
  }
  return "unknown";
}

Estimator parse_estimator(std::string_view tag) {
  for (auto e : {Estimator::Erm, Estimator::One, Estimator::Fix, Estimator::Itr,
                 Estimator::Rot, Estimator::Nve})
    if (estimator_tag(e) == tag)
      return e;
  throw ConfigError("estimators", "unknown estimator '" + std::string(tag) + "'");
}

ExperimentConfig parse_config_text(std::string_view text, std::string_view experiment,
                                   const std::map<std::string, std::string> &overrides) {
  Builder b;
  b.parse_text(text);
  for (const auto &[key, value] : overrides)
    b.set(key, value);
  return b.finish(experiment);
}

ExperimentConfig parse_config(const std::optional<std::filesystem::path> &file,
                              std::string_view experiment,
                              const std::map<std::string, std::string> &overrides) {
  std::string text;
  if (file) {
    std::ifstream in(*file);
    if (!in)
      throw ConfigError("config", "cannot read '" + file->string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return parse_config_text(text, experiment, overrides);
}

} // namespace eigenfed::experiment
