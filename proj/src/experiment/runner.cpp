#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "eigenfed/errors.hpp"
#include "eigenfed/estimators.hpp"
#include "eigenfed/experiment.hpp"
#include "eigenfed/federation/coordinator.hpp"
#include "eigenfed/metrics.hpp"
#include "eigenfed/models.hpp"

namespace eigenfed::experiment {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// One grid point after the sweep variable has been substituted.
struct GridPoint {
  double sweep = 0.0;
  Eigen::Index r = 0;
  std::uint32_t m = 0;
  std::size_t n = 0;  // samples (or measurements) per node
  double r_star = 0.0;
};

// Everything the estimators need for one repetition.
struct Instance {
  SubspaceEstimate truth;
  std::vector<NodeDataset> nodes;
  std::optional<double> intdim;
  double delta = 0.0;
};

bool squared_distance(ExperimentKind k) {
  switch (k) {
  case ExperimentKind::BoundCheck:
  case ExperimentKind::QuadSense: return false;
  default: return true;
  }
}

const char *sweep_column(ExperimentKind k) {
  switch (k) {
  case ExperimentKind::VaryM: return "m";
  case ExperimentKind::IntdimSweep: return "r_star";
  case ExperimentKind::FixedRankSweep: return "r";
  case ExperimentKind::QuadSense: return "i";
  default: return "n";
  }
}

bool reports_intdim(ExperimentKind k) {
  return k == ExperimentKind::IntdimSweep || k == ExperimentKind::FixedRankSweep ||
         k == ExperimentKind::BoundCheck;
}

std::vector<GridPoint> grid(const ExperimentConfig &c) {
  std::vector<GridPoint> out;
  const auto r0 = static_cast<Eigen::Index>(c.r.front());
  const auto m0 = static_cast<std::uint32_t>(c.m.front());
  const double rs0 = c.model.r_star.empty() ? 0.0 : c.model.r_star.front();
  switch (c.experiment) {
  case ExperimentKind::SynthPca:
  case ExperimentKind::NonGauss:
  case ExperimentKind::BoundCheck:
    for (long n : c.n)
      out.push_back({static_cast<double>(n), r0, m0, static_cast<std::size_t>(n), rs0});
    break;
  case ExperimentKind::VaryM:
    for (long m : c.m)
      out.push_back({static_cast<double>(m), r0, static_cast<std::uint32_t>(m),
                     static_cast<std::size_t>(c.total_samples / m), rs0});
    break;
  case ExperimentKind::IntdimSweep:
    for (double rs : c.model.r_star)
      out.push_back({rs, r0, m0, static_cast<std::size_t>(c.n.front()), rs});
    break;
  case ExperimentKind::FixedRankSweep:
    for (long r : c.r)
      out.push_back({static_cast<double>(r), static_cast<Eigen::Index>(r), m0,
                     static_cast<std::size_t>(c.n.front()), rs0});
    break;
  case ExperimentKind::QuadSense:
    for (long i : c.i_list)
      out.push_back({static_cast<double>(i), r0, m0,
                     static_cast<std::size_t>(i * r0 * c.d), rs0});
    break;
  }
  return out;
}

Instance gaussian_instance(const SpectralModel &model, const GridPoint &g, Seed seed) {
  const RealizedModel real = realize_matrix(model);
  Instance inst{real.v1, {}, std::nullopt, model.delta};
  inst.intdim = model.realized_intdim();
  inst.nodes.reserve(g.m);
  for (std::uint32_t i = 0; i < g.m; ++i) {
    Matrix samples = sample_gaussian(real.x, g.n, derive_seed(seed, {1, i}));
    Matrix cov = local_covariance(samples);
    inst.nodes.push_back({i, std::nullopt, std::move(cov), g.n});
  }
  return inst;
}

Instance build_instance(const ExperimentConfig &c, const GridPoint &g, Seed seed) {
  const Seed basis_seed = derive_seed(seed, {0});
  const auto d = static_cast<Eigen::Index>(c.d);
  switch (c.model.family) {
  case ModelFamily::M1:
    return gaussian_instance(
        model_m1(d, g.r, c.model.lambda_lo, c.model.lambda_hi, c.model.delta, basis_seed), g,
        seed);
  case ModelFamily::M2:
    return gaussian_instance(model_m2(d, g.r, c.model.delta, g.r_star, basis_seed), g, seed);
  case ModelFamily::Uniform: {
    const DiscreteUniformModel atoms = discrete_uniform_atoms(c.model.k, d, basis_seed);
    const EigenspaceResult top = top_eigenspace(atoms.second_moment, g.r);
    const auto lambda = symmetric_eigen(atoms.second_moment).first;
    Instance inst{top.vectors, {}, intdim(atoms.second_moment),
                  lambda(g.r - 1) - lambda(g.r)};
    for (std::uint32_t i = 0; i < g.m; ++i) {
      Matrix cov = local_covariance(sample_atoms(atoms, g.n, derive_seed(seed, {1, i})));
      inst.nodes.push_back({i, std::nullopt, std::move(cov), g.n});
    }
    return inst;
  }
  }
  throw InvalidModelParams("unknown model family");
}

Instance build_sensing_instance(const ExperimentConfig &c, const GridPoint &g, Seed seed) {
  const auto d = static_cast<Eigen::Index>(c.d);
  const SensingInstance s = sensing_instance(d, g.r, g.n * g.m, c.tau_mult, c.noise_sd,
                                             derive_seed(seed, {0}));
  Instance inst{s.x_sharp, {}, std::nullopt, 0.0};
  for (std::uint32_t i = 0; i < g.m; ++i) {
    Matrix surrogate = sensing_surrogate(s, {i * g.n, (i + 1) * g.n});
    inst.nodes.push_back({i, std::nullopt, std::move(surrogate), g.n});
  }
  return inst;
}

double distance(const AggregateSolution &sol, const SubspaceEstimate &truth, bool squared) {
  if (sol.degenerate())
    return kNaN;
  const double d2 = subspace_dist2(*sol.estimate, truth);
  return squared ? d2 * d2 : d2;
}

std::vector<double> run_estimators(const ExperimentConfig &c, const GridPoint &g,
                                   const Instance &inst) {
  std::vector<LocalSolution> locals;
  locals.reserve(inst.nodes.size());
  for (const auto &node : inst.nodes)
    locals.push_back(solve_local(node.local_matrix, g.r, node.node_id));

  federation::Topology topo;
  topo.m = g.m;
  topo.timeout_s = c.timeout_s;
  const federation::NodeWork work = [&](std::uint32_t id) { return locals.at(id); };

  const bool sq = squared_distance(c.experiment);
  std::vector<double> out;
  for (Estimator e : c.estimators) {
    AggregateSolution sol;
    switch (e) {
    case Estimator::Erm: sol = central_estimator(inst.nodes, g.r); break;
    case Estimator::One:
    case Estimator::Fix:
      sol = federation::run_one_shot(topo, work, federation::Aggregator::Procrustes).solution;
      break;
    case Estimator::Itr:
      sol = federation::run_parallel_align(topo, work, c.n_iter).solution;
      break;
    case Estimator::Rot:
      sol = federation::run_one_shot(topo, work, federation::Aggregator::ProjectorAverage)
                .solution;
      break;
    case Estimator::Nve:
      sol = federation::run_one_shot(topo, work, federation::Aggregator::Naive).solution;
      break;
    }
    out.push_back(distance(sol, inst.truth, sq));
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

std::vector<std::string> ResultTable::header() const {
  std::vector<std::string> h{sweep_column};
  if (has_intdim)
    h.emplace_back("intdim");
  h.insert(h.end(), value_columns.begin(), value_columns.end());
  if (has_theo)
    h.emplace_back("theo");
  return h;
}

double median(std::vector<double> values) {
  if (values.empty())
    return kNaN;
  const auto less = [](double a, double b) {
    if (std::isnan(a))
      return false;
    return std::isnan(b) || a < b;
  };
  std::sort(values.begin(), values.end(), less);
  const std::size_t n = values.size();
  if (n % 2 == 1)
    return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

ResultTable run_experiment(const ExperimentConfig &c) {
  ResultTable table;
  const bool sq = squared_distance(c.experiment);
  table.comment = "experiment=" + std::string(experiment_name(c.experiment)) +
                  " distance=" + (sq ? "dist2_squared" : "dist2") + " aggregate=median" +
                  " repetitions=" + std::to_string(c.repetitions) +
                  " seed=" + std::to_string(c.master_seed);
  table.sweep_column = sweep_column(c.experiment);
  table.has_intdim = reports_intdim(c.experiment);
  table.has_theo = c.experiment == ExperimentKind::BoundCheck;
  for (Estimator e : c.estimators)
    table.value_columns.emplace_back(estimator_tag(e));

  const auto points = grid(c);
  for (std::size_t gi = 0; gi < points.size(); ++gi) {
    const GridPoint &g = points[gi];
    std::vector<std::vector<double>> per_estimator(c.estimators.size());
    std::vector<double> intdims, deltas;
    for (std::size_t rep = 0; rep < c.repetitions; ++rep) {
      const Seed seed = derive_seed(c.master_seed, {gi, rep});
      const Instance inst = c.experiment == ExperimentKind::QuadSense
                                ? build_sensing_instance(c, g, seed)
                                : build_instance(c, g, seed);
      const auto values = run_estimators(c, g, inst);
      for (std::size_t k = 0; k < values.size(); ++k)
        per_estimator[k].push_back(values[k]);
      if (inst.intdim)
        intdims.push_back(*inst.intdim);
      deltas.push_back(inst.delta);
    }
    ResultRow row;
    row.sweep = g.sweep;
    if (table.has_intdim)
      row.intdim = median(intdims);
    for (auto &v : per_estimator)
      row.values.push_back(median(std::move(v)));
    if (table.has_theo)
      row.theo = bound_simplified(*row.intdim, static_cast<double>(g.n),
                                  static_cast<double>(g.m), median(deltas));
    table.rows.push_back(std::move(row));
  }
  if (!c.out_path.empty())
    emit_csv(table, c.out_path);
  return table;
}

std::string format_csv(const ResultTable &table) {
  std::ostringstream out;
  if (!table.comment.empty())
    out << "# " << table.comment << '\n';
  const auto header = table.header();
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto &row : table.rows) {
    out << format_double(row.sweep);
    if (table.has_intdim)
      out << ',' << format_double(row.intdim.value_or(kNaN));
    for (double v : row.values)
      out << ',' << format_double(v);
    if (table.has_theo)
      out << ',' << format_double(row.theo.value_or(kNaN));
    out << '\n';
  }
  return out.str();
}

void emit_csv(const ResultTable &table, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot open '" + path.string() + "' for writing");
  out << format_csv(table);
  if (!out)
    throw IoError("write to '" + path.string() + "' failed");
}

} // namespace eigenfed::experiment
