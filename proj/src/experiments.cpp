#include "sevolab/experiments.hpp"

#include <algorithm>
#include <array>

#include "sevolab/acceptance.hpp"

namespace sevolab {

namespace {

json fit_json(const FitReport& fit) {
    return json{{"slope", fit.slope},
                {"slope_ci", fit.slope_ci},
                {"holder_hat", fit.holder_hat},
                {"kol1_hat", fit.kol1_hat},
                {"log_intercept", fit.log_intercept},
                {"window_lo", fit.window_lo},
                {"window_hi", fit.window_hi},
                {"degenerate", fit.degenerate}};
}

std::vector<double> dyadic_lags(const RunConfig& cfg) {
    const double dt = cfg.horizon / cfg.steps;
    std::vector<double> lags;
    for (double lag = cfg.lag_min_steps * dt; lag <= cfg.horizon / 8.0 + 1e-12; lag *= 2.0)
        lags.push_back(lag);
    require(lags.size() >= 2,
            "regularity: fewer than two admissible lags; raise steps or lower lag_min_steps");
    return lags;
}

RunArtifacts run_solve(const RunConfig& cfg) {
    RunArtifacts out;
    const ProblemSpec problem = cfg.build_problem();
    const auto grid = uniform_grid(cfg.horizon, cfg.steps);
    const auto path = sample_brownian(cfg.d, grid, cfg.seed, 0);
    const auto sol = strict_solve(problem, path, cfg.scheme_kind(),
                                  cfg.effective_substeps(), grid);
    const double residual = strict_residual(problem, sol);
    const double fubini = fubini_defect(problem, sol);
    const double final_norm = dual_norm(*problem.family, sol.x.state(grid.size() - 1));

    out.files["solution.csv"] = solution_csv(sol);
    out.files["brownian.csv"] = brownian_csv(path);
    out.report = json{{"kind", "solve"},
                      {"config", cfg.echo()},
                      {"problem_hash", sol.problem_hash},
                      {"scheme", sol.scheme_tag},
                      {"strict_residual", residual},
                      {"fubini_defect", fubini},
                      {"final_norm", final_norm}};
    out.summary = "solve: " + sol.scheme_tag + " on " + std::to_string(cfg.steps) +
                  " steps\n  strict residual " + format_double(residual) +
                  "\n  fubini defect   " + format_double(fubini) +
                  "\n  ||X(T)||_E      " + format_double(final_norm) + "\n";
    return out;
}

RunArtifacts run_ensemble(const RunConfig& cfg) {
    RunArtifacts out;
    const ProblemSpec problem = cfg.build_problem();
    const auto grid = uniform_grid(cfg.horizon, cfg.steps);
    const auto ensemble =
        solution_ensemble(problem, cfg.scheme_kind(), cfg.effective_substeps(), grid,
                          cfg.paths, cfg.seed, cfg.threads, cfg.quantity);
    std::vector<double> thetas = {0.0};
    if (cfg.beta > 0.0 && cfg.beta != 0.0) thetas.push_back(cfg.beta);
    const auto summary = summarize_ensemble(ensemble, problem, thetas);

    std::vector<std::string> header = {"t"};
    std::vector<std::vector<double>> columns = {summary.times};
    for (std::size_t j = 0; j < summary.thetas.size(); ++j) {
        header.push_back("msq_theta=" + format_double(summary.thetas[j]));
        header.push_back("ci_theta=" + format_double(summary.thetas[j]));
        columns.push_back(summary.mean_sq[j]);
        columns.push_back(summary.ci[j]);
    }
    out.files["curves.csv"] = table_csv(header, columns);
    if (cfg.svg) {
        std::vector<SvgSeries> series;
        const std::array<const char*, 3> palette = {"#1f6feb", "#d1242f", "#1a7f37"};
        for (std::size_t j = 0; j < summary.thetas.size(); ++j)
            series.push_back(SvgSeries{summary.times, summary.mean_sq[j],
                                       "theta=" + format_double(summary.thetas[j]),
                                       palette[j % palette.size()], false});
        out.files["curves.svg"] = line_chart_svg(
            "mean squared " + cfg.quantity + " (" + std::to_string(cfg.paths) + " paths)",
            "t", "E ||A(t)^theta Z||_E^2", series, false, false);
    }
    const auto& last_msq = summary.mean_sq[0];
    out.report = json{{"kind", "ensemble"},
                      {"config", cfg.echo()},
                      {"problem_hash", ensemble.problem_hash},
                      {"quantity", cfg.quantity},
                      {"paths", cfg.paths},
                      {"thetas", summary.thetas},
                      {"final_mean_sq", last_msq.back()},
                      {"final_ci", summary.ci[0].back()}};
    out.summary = "ensemble: " + std::to_string(cfg.paths) + " paths of " + cfg.quantity +
                  "\n  E||Z(T)||_E^2 = " + format_double(last_msq.back()) + " +- " +
                  format_double(summary.ci[0].back()) + "\n";
    return out;
}

RunArtifacts run_constants_scan(const RunConfig& cfg) {
    RunArtifacts out;
    const ProblemSpec problem = cfg.build_problem();
    const auto family = problem.family;
    const double T = cfg.horizon;

    // Sectorial scan at three slices along the ray arg(lambda) = 3*pi/4.
    json sectorial = json::array();
    std::vector<double> res_t, res_r, res_prod;
    for (double t : {0.0, T / 2.0, T}) {
        const auto rep = resolvent_scan(*family, t, 3.0 * M_PI / 4.0, 24);
        sectorial.push_back(json{{"t", t}, {"varpi", rep.varpi}, {"m_hat", rep.m_hat}});
        for (const auto& [r, prod] : rep.samples) {
            res_t.push_back(t);
            res_r.push_back(r);
            res_prod.push_back(prod);
        }
    }
    out.files["resolvent.csv"] = table_csv({"t", "r", "product"}, {res_t, res_r, res_prod});

    const auto times = log_spaced(T / 128.0, T, 16);
    const auto temporal = temporal_holder_scan(*family, family->nu(), times);
    out.files["temporal.csv"] = table_csv({"gap", "defect"}, {temporal.gaps, temporal.defects});

    EvolutionScheme scheme{cfg.scheme_kind(), cfg.effective_substeps(), family};
    std::vector<std::pair<double, double>> pairs;
    for (double s : {0.0, T / 4.0, T / 2.0})
        for (double gap : log_spaced(T / 256.0, T / 2.0, 8))
            if (s + gap <= T) pairs.emplace_back(s, s + gap);
    const std::vector<double> thetas = {0.25, 0.5, 0.75, 1.0};
    const auto constants = evolution_constants_scan(scheme, thetas, pairs);

    std::vector<double> noise_times;
    for (int i = 0; i <= 16; ++i) noise_times.push_back(T * i / 16.0);
    const auto noise = noise_condition_check(problem.noise, *family, problem.delta,
                                             problem.delta1, problem.f_params.sigma,
                                             noise_times);

    json kappa = json::array();
    for (const auto& [t1, t2, k] : constants.kappa)
        kappa.push_back(json{{"theta1", t1}, {"theta2", t2}, {"kappa_hat", k}});
    out.report =
        json{{"kind", "constants-scan"},
             {"config", cfg.echo()},
             {"problem_hash", problem.hash()},
             {"sectorial", sectorial},
             {"temporal",
              json{{"mu_hat", temporal.mu_hat},
                   {"n_fit", temporal.n_fit},
                   {"n_sup", temporal.n_sup},
                   {"autonomous", temporal.autonomous}}},
             {"evolution",
              json{{"thetas", constants.thetas},
                   {"iota", constants.iota},
                   {"kappa", kappa},
                   {"c_mu_nu", constants.c_mu_nu},
                   {"pair_count", constants.pair_count}}},
             {"noise",
              json{{"delta", noise.delta},
                   {"sigma", noise.sigma},
                   {"delta1", noise.delta1},
                   {"zeta_hat", noise.zeta_hat},
                   {"zeta_bar_hat", noise.zeta_bar_hat},
                   {"sup_frozen", noise.sup_frozen},
                   {"g0_level", noise.g0_level},
                   {"derived_g1_constant", noise.derived_g1_constant},
                   {"g1_holds", noise.g1_holds},
                   {"g2_holds", noise.g2_holds}}}};
    out.summary = "constants-scan:\n  m_hat (sectorial)  " +
                  format_double(sectorial[0]["m_hat"].get<double>()) +
                  "\n  mu_hat (temporal)  " + format_double(temporal.mu_hat) +
                  "\n  c_mu_nu            " + format_double(constants.c_mu_nu) +
                  "\n  derived G1 const   " + format_double(noise.derived_g1_constant) +
                  "\n";
    return out;
}

RunArtifacts run_regularity(const RunConfig& cfg) {
    RunArtifacts out;
    const ProblemSpec problem = cfg.build_problem();
    const auto grid = uniform_grid(cfg.horizon, cfg.steps);
    const auto ensemble =
        solution_ensemble(problem, cfg.scheme_kind(), cfg.effective_substeps(), grid,
                          cfg.paths, cfg.seed, cfg.threads, cfg.quantity);
    const auto lags = dyadic_lags(cfg);
    const auto table =
        structure_function(ensemble, cfg.p, lags, l2_norm(), cfg.window_lo, cfg.horizon);
    const auto fit = estimate_holder_exponent(table);

    out.files["structure.csv"] = structure_csv(table);
    out.files["fit.json"] = fit_json(fit).dump(2) + "\n";
    if (cfg.svg) {
        std::vector<double> line_y;
        for (double lag : table.lags)
            line_y.push_back(std::exp(fit.log_intercept + fit.slope * std::log(lag)));
        out.files["structure.svg"] = line_chart_svg(
            "structure function, p=" + format_double(cfg.p) + ", " + cfg.quantity,
            "lag", "S_p(lag)",
            {SvgSeries{table.lags, table.moments, "measured", "#1f6feb", false},
             SvgSeries{table.lags, line_y,
                       "slope " + format_double(fit.slope) + " fit", "#d1242f", true}},
            true, true);
    }

    json report{{"kind", "regularity"},
                {"config", cfg.echo()},
                {"problem_hash", ensemble.problem_hash},
                {"quantity", cfg.quantity},
                {"paths", cfg.paths},
                {"fit", fit_json(fit)}};

    std::string moment_line;
    if (cfg.quantity == "X") {
        const auto moment = moment_bound_check(ensemble, problem);
        out.files["moment.csv"] = table_csv({"t", "curve", "envelope"},
                                            {moment.times, moment.curve, moment.envelope});
        report["moment"] = json{{"c_hat", moment.c_hat},
                                {"binding_time", moment.binding_time},
                                {"regime", moment.regime},
                                {"xi_term", moment.xi_term},
                                {"f_term", moment.f_term},
                                {"g_term", moment.g_term}};
        out.files["moment.json"] = report["moment"].dump(2) + "\n";
        if (cfg.svg)
            out.files["moment.svg"] = line_chart_svg(
                "moment bound: measured against envelope", "t", "E ||A^beta X||_E^2",
                {SvgSeries{moment.times, moment.curve, "measured", "#1f6feb", false},
                 SvgSeries{moment.times, moment.envelope, "envelope", "#d1242f", true}},
                false, false);
        moment_line = "  moment ratio C_hat = " + format_double(moment.c_hat) +
                      " binding at t = " + format_double(moment.binding_time) + "\n";
    }
    out.report = std::move(report);
    out.summary = "regularity: " + cfg.quantity + ", p = " + format_double(cfg.p) +
                  ", " + std::to_string(cfg.paths) + " paths\n  slope " +
                  format_double(fit.slope) + " +- " + format_double(fit.slope_ci) +
                  "  (holder_hat " + format_double(fit.holder_hat) + ", kol1_hat " +
                  format_double(fit.kol1_hat) + ")\n" + moment_line;
    return out;
}

RunArtifacts run_acceptance_kind(const RunConfig& cfg) {
    RunArtifacts out;
    AcceptanceOptions opts;
    opts.seed = cfg.seed;
    opts.threads = cfg.threads;
    opts.scratch = std::filesystem::path(cfg.out_dir) / "scratch";
    const auto results = run_acceptance(opts);
    out.report = acceptance_json(results);
    out.files["acceptance.json"] = out.report.dump(2) + "\n";
    for (const auto& r : results) {
        if (!r.passed) ++out.acceptance_failures;
        out.summary += (r.passed ? "pass " : "FAIL ") +
                       std::string(r.id < 10 ? " " : "") + std::to_string(r.id) + "  " +
                       r.name + "  " + r.detail + "\n";
    }
    return out;
}

}  // namespace

RunArtifacts run_experiment(const RunConfig& cfg) {
    RunArtifacts out;
    if (cfg.kind == "solve") out = run_solve(cfg);
    else if (cfg.kind == "ensemble") out = run_ensemble(cfg);
    else if (cfg.kind == "constants-scan") out = run_constants_scan(cfg);
    else if (cfg.kind == "regularity") out = run_regularity(cfg);
    else if (cfg.kind == "acceptance") out = run_acceptance_kind(cfg);
    else throw ValidationError("run_experiment: unknown kind '" + cfg.kind + "'");
    if (!out.report.is_null()) out.files["report.json"] = out.report.dump(2) + "\n";
    return out;
}

void emit_outputs(const RunArtifacts& artifacts, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto manifest_path = out_dir / "manifest.json";
    if (std::filesystem::exists(manifest_path)) {
        int k = 1;
        while (std::filesystem::exists(out_dir / ("manifest." + std::to_string(k) + ".json")))
            ++k;
        std::filesystem::rename(manifest_path,
                                out_dir / ("manifest." + std::to_string(k) + ".json"));
    }
    json manifest;
    manifest["files"] = json::object();
    for (const auto& [rel, bytes] : artifacts.files) {
        write_file_atomic(out_dir / rel, bytes);
        manifest["files"][rel] = sha256_hex(bytes);
    }
    manifest["count"] = artifacts.files.size();
    write_file_atomic(manifest_path, manifest.dump(2) + "\n");
}

}  // namespace sevolab
