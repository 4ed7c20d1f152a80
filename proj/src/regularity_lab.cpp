#include "sevolab/regularity_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sevolab {

void Ensemble::validate() const {
    require(!members.empty(), "Ensemble: no members");
    require(members.size() == streams.size(), "Ensemble: stream list mismatch");
    const auto& t0 = members.front().times;
    for (const auto& m : members) {
        m.validate();
        require(m.times == t0, "Ensemble: members must share one time grid");
        require(m.dim() == members.front().dim(), "Ensemble: ragged member dimension");
    }
}

const std::vector<double>& Ensemble::times() const {
    require(!members.empty(), "Ensemble: no members");
    return members.front().times;
}

namespace {

std::vector<std::size_t> kept_indices(std::size_t count, int stride) {
    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < count; ++k)
        if (stride <= 1 || k % static_cast<std::size_t>(stride) == 0 || k + 1 == count)
            kept.push_back(k);
    return kept;
}

}  // namespace

Ensemble solution_ensemble(const ProblemSpec& problem, SchemeKind kind,
                           int substeps_per_unit, const std::vector<double>& grid,
                           int paths, std::uint64_t seed, int threads,
                           const std::string& quantity, int output_stride) {
    problem.validate();
    require(paths >= 1, "solution_ensemble: need at least one path");
    require(quantity == "X" || quantity == "AX" || quantity == "W0" || quantity == "W1",
            "solution_ensemble: quantity must be X, AX, W0 or W1");
    EvolutionScheme scheme{kind, substeps_per_unit, problem.family};
    scheme.validate();

    const std::size_t steps = grid.size() - 1;
    const int n = problem.family->dim();
    const int d = problem.noise.trivial() ? 1 : problem.noise.cols;

    // Shared per-step data: propagators, forcing, noise, operator samples.
    PropagatorTable table(scheme, grid);
    std::vector<Vector> f(steps);
    for (std::size_t k = 0; k < steps; ++k) f[k] = problem.forcing_sample(grid, k);
    std::vector<Matrix> g;
    if (!problem.noise.trivial()) {
        g.reserve(steps);
        for (std::size_t k = 0; k < steps; ++k) g.push_back(problem.noise.at(grid[k]));
    }
    const bool needs_operator = quantity == "AX" || quantity == "W1";
    std::vector<Matrix> a;
    const auto kept = kept_indices(grid.size(), output_stride);
    if (needs_operator) {
        a.reserve(kept.size());
        for (std::size_t m : kept) a.push_back(problem.family->matrix(grid[m]));
    }

    std::vector<double> kept_times;
    kept_times.reserve(kept.size());
    for (std::size_t m : kept) kept_times.push_back(grid[m]);

    Ensemble ens;
    ens.quantity = quantity;
    ens.problem_hash = problem.hash();
    ens.members.resize(paths);
    ens.streams.resize(paths);
    const std::string tag = scheme.tag();

    parallel_for(paths, threads, [&](std::size_t i) {
        const BrownianPath path =
            problem.noise.trivial()
                ? BrownianPath{1, grid, Matrix::Zero(steps, 1), seed, i}
                : sample_brownian(d, grid, seed, i);
        Trajectory traj;
        traj.times = kept_times;
        traj.scheme_tag = tag;
        traj.quantity = quantity;
        traj.states.resize(kept.size(), n);

        Vector x = problem.xi, w0 = Vector::Zero(n);
        const bool track_x = quantity == "X" || quantity == "AX";
        std::size_t out = 0;
        for (std::size_t k = 0; k <= steps; ++k) {
            if (out < kept.size() && kept[out] == k) {
                const Vector& z = track_x ? x : w0;
                if (needs_operator)
                    traj.states.row(out) = (a[out] * z).transpose();
                else
                    traj.states.row(out) = z.transpose();
                ++out;
            }
            if (k == steps) break;
            const double dt = grid[k + 1] - grid[k];
            Vector gdw = Vector::Zero(n);
            if (!problem.noise.trivial())
                gdw = g[k] * path.increments.row(k).transpose();
            const Matrix& p = table.step(k);
            if (track_x) x = p * (x + dt * f[k] + gdw);
            if (!track_x) w0 = p * (w0 + gdw);
        }
        traj.validate();
        ens.members[i] = std::move(traj);
        ens.streams[i] = i;
    });
    ens.validate();
    return ens;
}

Ensemble brownian_ensemble(const std::vector<double>& grid, int paths,
                           std::uint64_t seed, int threads) {
    require(paths >= 1, "brownian_ensemble: need at least one path");
    Ensemble ens;
    ens.quantity = "brownian";
    ens.problem_hash = "brownian";
    ens.members.resize(paths);
    ens.streams.resize(paths);
    parallel_for(paths, threads, [&](std::size_t i) {
        const BrownianPath path = sample_brownian(1, grid, seed, i);
        Trajectory traj;
        traj.times = grid;
        traj.scheme_tag = "brownian";
        traj.quantity = "brownian";
        traj.states.resize(grid.size(), 1);
        double w = 0.0;
        traj.states(0, 0) = 0.0;
        for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
            w += path.increments(k, 0);
            traj.states(k + 1, 0) = w;
        }
        ens.members[i] = std::move(traj);
        ens.streams[i] = i;
    });
    ens.validate();
    return ens;
}

StructureTable structure_function(const Ensemble& ensemble, double p,
                                  const std::vector<double>& lags, const NormFn& norm,
                                  double window_lo, double window_hi) {
    ensemble.validate();
    require(p >= 1.0, "structure_function: p must be >= 1");
    require(!lags.empty(), "structure_function: no lags");
    require(static_cast<bool>(norm), "structure_function: empty norm");
    const auto& times = ensemble.times();
    require(times.size() >= 3, "structure_function: grid too short");
    const double dt = times[1] - times[0];
    for (std::size_t i = 1; i + 1 < times.size(); ++i)
        require(std::abs(times[i + 1] - times[i] - dt) <= 1e-9 * times.back(),
                "structure_function: requires a uniform time grid");
    if (window_hi < 0) window_hi = times.back();
    require(window_lo >= 0 && window_hi > window_lo, "structure_function: bad window");

    StructureTable table;
    table.p = p;
    table.quantity = ensemble.quantity;
    const std::size_t paths = ensemble.members.size();
    for (double lag : lags) {
        const double ratio = lag / dt;
        const auto lag_steps = static_cast<std::size_t>(std::llround(ratio));
        require(lag_steps >= 1 && std::abs(ratio - static_cast<double>(lag_steps)) <= 1e-6,
                "structure_function: lag must be a whole number of grid steps");
        require(lag_steps < times.size(), "structure_function: lag exceeds the window");

        std::vector<double> member_mean(paths, 0.0);
        std::size_t admissible = 0;
        for (std::size_t m = 0; m + lag_steps < times.size(); ++m) {
            if (times[m] < window_lo - 1e-12) continue;
            if (times[m + lag_steps] > window_hi + 1e-12) continue;
            ++admissible;
        }
        require(admissible >= 1, "structure_function: no admissible base times for lag");
        for (std::size_t i = 0; i < paths; ++i) {
            const auto& states = ensemble.members[i].states;
            double acc = 0.0;
            for (std::size_t m = 0; m + lag_steps < times.size(); ++m) {
                if (times[m] < window_lo - 1e-12) continue;
                if (times[m + lag_steps] > window_hi + 1e-12) continue;
                const Vector diff =
                    (states.row(m + lag_steps) - states.row(m)).transpose();
                acc += std::pow(norm(diff), p);
            }
            member_mean[i] = acc / static_cast<double>(admissible);
        }
        double mean = 0.0;
        for (double v : member_mean) mean += v;
        mean /= static_cast<double>(paths);
        double se = std::numeric_limits<double>::quiet_NaN();
        if (paths >= 2) {
            double var = 0.0;
            for (double v : member_mean) var += (v - mean) * (v - mean);
            var /= static_cast<double>(paths - 1);
            se = std::sqrt(var / static_cast<double>(paths));
        }
        table.lags.push_back(lag);
        table.moments.push_back(mean);
        table.ses.push_back(se);
    }
    return table;
}

FitReport estimate_holder_exponent(const StructureTable& table) {
    require(table.lags.size() >= 2, "estimate_holder_exponent: need at least two lags");
    FitReport rep;
    rep.window_lo = table.lags.front();
    rep.window_hi = table.lags.back();

    std::vector<double> x, y, w;
    for (std::size_t i = 0; i < table.lags.size(); ++i) {
        if (table.moments[i] <= 0.0) continue;
        x.push_back(std::log(table.lags[i]));
        y.push_back(std::log(table.moments[i]));
        // Weight by the inverse variance of log S: se(log S) = se / S.
        const double se = table.ses[i];
        if (std::isfinite(se) && se > 0.0)
            w.push_back((table.moments[i] / se) * (table.moments[i] / se));
        else
            w.push_back(1.0);
    }
    if (x.size() < 2) {
        rep.degenerate = true;
        return rep;
    }
    const LineFit fit = fit_line(x, y, w);
    rep.slope = fit.slope;
    rep.slope_ci = 1.96 * fit.slope_se;
    rep.log_intercept = fit.intercept;
    rep.holder_hat = fit.slope / table.p;
    rep.kol1_hat = (fit.slope - 1.0) / table.p;
    return rep;
}

MomentBoundReport moment_bound_check(const Ensemble& ensemble,
                                     const ProblemSpec& problem) {
    ensemble.validate();
    problem.validate();
    require(ensemble.quantity == "X", "moment_bound_check: ensemble must carry X");
    require(ensemble.problem_hash == problem.hash(),
            "moment_bound_check: ensemble was generated from a different problem");

    const auto& times = ensemble.times();
    const double beta = problem.f_params.beta, sigma = problem.f_params.sigma;
    const double delta = problem.delta;
    const auto& family = *problem.family;

    MomentBoundReport rep;
    rep.times = times;
    rep.regime = beta >= delta ? "beta>=delta" : "beta<delta";

    // Envelope ingredients, measured in the ambient norm.
    rep.xi_term = [&] {
        const Vector v = family.reference().apply_power(beta, problem.xi);
        const double nv = dual_norm(family, v);
        return nv * nv;
    }();
    {
        SampledPath fpath;
        for (std::size_t m = 0; m < times.size(); ++m) {
            if (times[m] <= 0.0) continue;
            fpath.times.push_back(times[m]);
            fpath.values.push_back(problem.forcing(times[m]));
        }
        require(fpath.times.size() >= 2, "moment_bound_check: too few positive times");
        const NormFn ambient = [&](const Vector& v) { return dual_norm(family, v); };
        const auto frep = weighted_holder_norm(fpath, problem.f_params, ambient);
        rep.f_term = frep.norm * frep.norm;
    }
    rep.g_term = 0.0;
    if (!problem.noise.trivial()) {
        const double g0 =
            ambient_map_norm(family, family.reference().power(delta) * problem.noise.at(0.0));
        rep.g_term = g0 * g0;
    }

    rep.curve.assign(times.size(), 0.0);
    rep.envelope.assign(times.size(), 0.0);
    const std::size_t paths = ensemble.members.size();
    for (std::size_t m = 0; m < times.size(); ++m) {
        const auto dec = family.decomposition(times[m]);
        double acc = 0.0;
        for (const auto& member : ensemble.members) {
            const Vector v = dec.apply_power(beta, member.states.row(m).transpose());
            const double nv = dual_norm(family, v);
            acc += nv * nv;
        }
        rep.curve[m] = acc / static_cast<double>(paths);

        const double t = times[m];
        double r1, r2;
        if (beta >= delta) {
            r1 = std::pow(t, 1.0 - 2.0 * (beta - delta));
            r2 = std::pow(t, 1.0 - 2.0 * (beta - delta) + 2.0 * sigma);
        } else {
            r1 = t;
            r2 = std::pow(t, 1.0 + 2.0 * sigma);
        }
        rep.envelope[m] = rep.xi_term + rep.f_term + rep.g_term * r1 + r2;
    }

    rep.c_hat = 0.0;
    for (std::size_t m = 0; m < times.size(); ++m) {
        if (rep.envelope[m] <= 0.0) {
            if (rep.curve[m] > 1e-20)
                throw NumericError("moment_bound_check: zero envelope under nonzero curve");
            continue;
        }
        const double ratio = rep.curve[m] / rep.envelope[m];
        if (ratio > rep.c_hat) {
            rep.c_hat = ratio;
            rep.binding_time = times[m];
        }
    }
    require_finite(rep.c_hat, "moment bound constant");
    return rep;
}

EnsembleSummary summarize_ensemble(const Ensemble& ensemble, const ProblemSpec& problem,
                                   const std::vector<double>& thetas) {
    ensemble.validate();
    require(ensemble.members.front().dim() == problem.family->dim(),
            "summarize_ensemble: ensemble dimension vs family");
    EnsembleSummary summary;
    summary.thetas = thetas;
    summary.times = ensemble.times();
    summary.paths = static_cast<int>(ensemble.members.size());
    const auto& family = *problem.family;
    const std::size_t paths = ensemble.members.size();

    summary.mean_sq.assign(thetas.size(), std::vector<double>(summary.times.size(), 0.0));
    summary.ci = summary.mean_sq;
    std::vector<double> samples(paths);
    for (std::size_t m = 0; m < summary.times.size(); ++m) {
        const auto dec = family.decomposition(summary.times[m]);
        for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
            for (std::size_t i = 0; i < paths; ++i) {
                const Vector v = dec.apply_power(
                    thetas[ti], ensemble.members[i].states.row(m).transpose());
                const double nv = dual_norm(family, v);
                samples[i] = nv * nv;
            }
            double mean = 0.0;
            for (double s : samples) mean += s;
            mean /= static_cast<double>(paths);
            double var = 0.0;
            for (double s : samples) var += (s - mean) * (s - mean);
            var = paths >= 2 ? var / static_cast<double>(paths - 1) : 0.0;
            summary.mean_sq[ti][m] = mean;
            summary.ci[ti][m] = 1.96 * std::sqrt(var / static_cast<double>(paths));
        }
    }
    return summary;
}

}  // namespace sevolab
