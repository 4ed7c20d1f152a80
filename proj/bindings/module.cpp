#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sevolab/experiments.hpp"

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace py = pybind11;

namespace {

py::dict holder_report_dict(const sevolab::WeightedHolderReport& rep) {
    py::dict out;
    out["norm"] = rep.norm;
    out["sup_term"] = rep.sup_term;
    out["seminorm"] = rep.seminorm;
    out["modulus_times"] = rep.modulus_times;
    out["modulus_values"] = rep.modulus_values;
    out["membership_evaluated"] = rep.membership_evaluated;
    out["limit_exists"] = rep.limit_exists;
    out["seminorm_finite"] = rep.seminorm_finite;
    out["modulus_vanishes"] = rep.modulus_vanishes;
    out["member"] = rep.member;
    return out;
}

sevolab::SampledPath path_from_rows(const std::vector<double>& times,
                                    const sevolab::Matrix& rows) {
    sevolab::require(static_cast<std::size_t>(rows.rows()) == times.size(),
                     "values must have one row per time");
    sevolab::SampledPath path;
    path.times = times;
    for (Eigen::Index i = 0; i < rows.rows(); ++i)
        path.values.push_back(rows.row(i).transpose());
    return path;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    using namespace sevolab;
    m.doc() = "numerical laboratory for strict solutions of stochastic linear "
              "parabolic equations";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<IoError>(m, "IoError", PyExc_IOError);

    m.def("uniform_grid", &uniform_grid, py::arg("horizon"), py::arg("steps"),
          "Uniform time grid 0 = t_0 < ... < t_steps = horizon.");

    m.def("philox_normal", &philox_normal, py::arg("seed"), py::arg("stream"),
          py::arg("index"),
          "Standard normal as a pure function of (seed, stream, index).");

    m.def(
        "sample_brownian",
        [](int d, const std::vector<double>& times, std::uint64_t seed,
           std::uint64_t stream) {
            const auto path = sample_brownian(d, times, seed, stream);
            return path.increments;
        },
        py::arg("d"), py::arg("times"), py::arg("seed"), py::arg("stream") = 0,
        "Brownian increments, one row per step and one column per component.");

    m.def("matrix_exponential", &matrix_exponential, py::arg("a"),
          "Matrix exponential (spectral for symmetric input, Pade otherwise).");

    m.def(
        "weighted_holder_norm",
        [](const std::vector<double>& times, const Matrix& values, double beta,
           double sigma) {
            const auto path = path_from_rows(times, values);
            return holder_report_dict(
                weighted_holder_norm(path, WeightedHolderParams{beta, sigma}));
        },
        py::arg("times"), py::arg("values"), py::arg("beta"), py::arg("sigma"),
        "Weighted Holder norm of samples (one row per positive time); membership "
        "flags are filled for >= 8 samples.");

    m.def(
        "solve_preset",
        [](const std::string& preset, int steps, std::uint64_t seed, int n,
           const std::string& scheme) {
            RunConfig cfg;
            apply_preset(cfg, preset);
            cfg.steps = steps;
            cfg.seed = seed;
            if (n > 0) cfg.n = n;
            cfg.scheme = scheme;
            const auto problem = cfg.build_problem();
            const auto grid = uniform_grid(cfg.horizon, cfg.steps);
            const auto path = sample_brownian(cfg.d, grid, cfg.seed, 0);
            const auto sol = strict_solve(problem, path, cfg.scheme_kind(),
                                          cfg.effective_substeps(), grid);
            py::dict out;
            out["times"] = sol.x.times;
            out["x"] = sol.x.states;
            out["w0"] = sol.w0.states;
            out["w1"] = sol.w1.states;
            out["residual"] = strict_residual(problem, sol);
            out["fubini_defect"] = fubini_defect(problem, sol);
            out["problem_hash"] = sol.problem_hash;
            out["scheme"] = sol.scheme_tag;
            return out;
        },
        py::arg("preset"), py::arg("steps") = 256, py::arg("seed") = 1,
        py::arg("n") = 0, py::arg("scheme") = "frozen-exponential",
        "One strict solve of a named preset; returns trajectories and the "
        "structural defects.");

    m.def(
        "run_experiment",
        [](const std::string& config_text, const std::string& out_dir) {
            RunConfig cfg = RunConfig::from_text(config_text, "<python>");
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            const auto artifacts = run_experiment(cfg);
            if (!out_dir.empty()) emit_outputs(artifacts, cfg.out_dir);
            py::dict files;
            for (const auto& [rel, bytes] : artifacts.files)
                files[py::str(rel)] = py::bytes(bytes);
            py::dict out;
            out["summary"] = artifacts.summary;
            out["report"] = artifacts.report.dump();
            out["files"] = files;
            out["acceptance_failures"] = artifacts.acceptance_failures;
            return out;
        },
        py::arg("config_text"), py::arg("out_dir") = std::string(),
        "Parse a config, run the experiment, optionally emit artifacts; returns "
        "summary, report JSON, and the exact artifact bytes.");

#ifdef VERSION_INFO
    m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
    m.attr("__version__") = "dev";
#endif
}
