#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "eigenfed/errors.hpp"
#include "eigenfed/estimators.hpp"
#include "eigenfed/experiment.hpp"
#include "eigenfed/metrics.hpp"
#include "eigenfed/models.hpp"

namespace py = pybind11;
using namespace eigenfed;

namespace {

std::vector<LocalSolution> as_solutions(const std::vector<Matrix> &bases) {
  std::vector<LocalSolution> out;
  out.reserve(bases.size());
  for (std::size_t i = 0; i < bases.size(); ++i)
    out.push_back({static_cast<std::uint32_t>(i), SubspaceEstimate(bases[i]), {}});
  return out;
}

std::optional<Matrix> basis_or_none(const AggregateSolution &s) {
  if (s.degenerate())
    return std::nullopt;
  return s.subspace().basis();
}

py::tuple realized(const SpectralModel &m) {
  const RealizedModel real = realize_matrix(m);
  return py::make_tuple(real.x, real.v1.basis(), m.delta);
}

} // namespace

PYBIND11_MODULE(_eigenfed, mod) {
  mod.doc() = "Distributed eigenspace estimation with Procrustes fixing";

  auto base = py::register_exception<Error>(mod, "EigenfedError", PyExc_ValueError);
  py::register_exception<ConfigError>(mod, "ConfigError", base.ptr());

  mod.def("procrustes_rotation",
          [](const Matrix &a, const Matrix &b) { return procrustes_rotation(a, b).matrix(); },
          py::arg("a"), py::arg("b"));
  mod.def(
      "top_eigenspace",
      [](const Matrix &s, Eigen::Index r) {
        const EigenspaceResult res = top_eigenspace(s, r);
        return py::make_tuple(res.vectors.basis(), res.eigenvalues);
      },
      py::arg("s"), py::arg("r"));
  mod.def(
      "solve_local",
      [](const Matrix &x_hat, Eigen::Index r) { return solve_local(x_hat, r).estimate.basis(); },
      py::arg("x_hat"), py::arg("r"));

  mod.def(
      "aggregate",
      [](const std::vector<Matrix> &bases, const std::string &method, std::size_t n_iter) {
        const auto sols = as_solutions(bases);
        if (method == "fix" || method == "one")
          return basis_or_none(procrustes_fix_average(sols));
        if (method == "itr")
          return basis_or_none(iterative_refinement(sols, n_iter));
        if (method == "rot")
          return basis_or_none(projector_average(sols));
        if (method == "nve")
          return basis_or_none(naive_average(sols));
        if (method == "sign")
          return basis_or_none(sign_fix_average(sols));
        throw py::value_error("unknown method '" + method + "' (fix, one, itr, rot, nve, sign)");
      },
      py::arg("bases"), py::arg("method") = "fix", py::arg("n_iter") = 2,
      "Combine local bases; returns None when the average is rank deficient.");

  mod.def(
      "dist2",
      [](const Matrix &u, const Matrix &v) {
        return subspace_dist2(SubspaceEstimate(u), SubspaceEstimate(v));
      },
      py::arg("u"), py::arg("v"));
  mod.def(
      "distF",
      [](const Matrix &u, const Matrix &v) {
        return subspace_distF(SubspaceEstimate(u), SubspaceEstimate(v));
      },
      py::arg("u"), py::arg("v"));
  mod.def("intdim", &intdim, py::arg("a"));
  mod.def("bound_simplified", &bound_simplified, py::arg("r_star"), py::arg("n"), py::arg("m"),
          py::arg("delta"));

  mod.def(
      "model_m1",
      [](Eigen::Index d, Eigen::Index r, double lo, double hi, double delta, Seed seed) {
        return realized(model_m1(d, r, lo, hi, delta, seed));
      },
      py::arg("d"), py::arg("r"), py::arg("lambda_lo") = 0.5, py::arg("lambda_hi") = 1.0,
      py::arg("delta") = 0.2, py::arg("seed") = 0, "Returns (X, V1, realized gap).");
  mod.def(
      "model_m2",
      [](Eigen::Index d, Eigen::Index r, double delta, double r_star, Seed seed) {
        return realized(model_m2(d, r, delta, r_star, seed));
      },
      py::arg("d"), py::arg("r"), py::arg("delta"), py::arg("r_star"), py::arg("seed") = 0,
      "Returns (X, V1, realized gap).");
  mod.def("sample_gaussian", &sample_gaussian, py::arg("x"), py::arg("n"), py::arg("seed"));
  mod.def("local_covariance", &local_covariance, py::arg("samples"));

  mod.def(
      "run_experiment",
      [](const std::string &experiment, const std::map<std::string, std::string> &overrides,
         std::optional<std::string> config) {
        std::optional<std::filesystem::path> file;
        if (config)
          file = *config;
        const auto cfg = experiment::parse_config(file, experiment, overrides);
        py::gil_scoped_release release;
        return experiment::format_csv(experiment::run_experiment(cfg));
      },
      py::arg("experiment"), py::arg("overrides") = std::map<std::string, std::string>{},
      py::arg("config") = std::nullopt, "Runs a preset and returns its CSV text.");
}
