#include <doctest.h>

#include <cmath>
#include <memory>

#include "sevolab/regularity_lab.hpp"

using namespace sevolab;

namespace {

std::shared_ptr<OperatorFamily> scalar_family(double a, double horizon = 1.0) {
    return std::make_shared<OperatorFamily>(
        [a](double) { return Matrix::Constant(1, 1, a); }, 1, horizon, 1.0, 1.0,
        "scalar-test");
}

ProblemSpec ou_problem() {
    ProblemSpec p;
    p.family = scalar_family(1.0);
    p.forcing = [](double) { return Vector::Zero(1); };
    p.f_params = {1.0, 0.3};
    p.noise.map = [](double) { return Matrix::Constant(1, 1, 1.0); };
    p.noise.rows = 1;
    p.noise.cols = 1;
    p.noise.tag = "unit";
    p.delta = 0.7;
    p.delta1 = 0.9;
    p.xi = Vector::Zero(1);
    p.horizon = 1.0;
    p.tag = "ou";
    return p;
}

// Members Z_i(t) = c_i * t on a shared uniform grid.
Ensemble linear_ensemble(const std::vector<double>& grid,
                         const std::vector<double>& slopes) {
    Ensemble ens;
    ens.quantity = "X";
    ens.problem_hash = "manual";
    for (std::size_t i = 0; i < slopes.size(); ++i) {
        Trajectory traj;
        traj.times = grid;
        traj.quantity = "X";
        traj.states.resize(grid.size(), 1);
        for (std::size_t m = 0; m < grid.size(); ++m)
            traj.states(m, 0) = slopes[i] * grid[m];
        ens.members.push_back(std::move(traj));
        ens.streams.push_back(i);
    }
    return ens;
}

}  // namespace

TEST_CASE("ensemble validation") {
    const auto grid = uniform_grid(1.0, 8);
    Ensemble ens = linear_ensemble(grid, {1.0, 2.0});
    CHECK_NOTHROW(ens.validate());
    CHECK(ens.times() == grid);
    ens.streams.pop_back();
    CHECK_THROWS_AS(ens.validate(), ValidationError);
    ens.streams.push_back(1);
    ens.members[1].times[3] += 1e-3;
    CHECK_THROWS_AS(ens.validate(), ValidationError);
    CHECK_THROWS_AS((Ensemble{}).validate(), ValidationError);
}

TEST_CASE("solution ensembles are deterministic across thread counts") {
    ProblemSpec p = ou_problem();
    const auto grid = uniform_grid(1.0, 32);
    const Ensemble a =
        solution_ensemble(p, SchemeKind::FrozenExponential, 32, grid, 6, 99, 1);
    const Ensemble b =
        solution_ensemble(p, SchemeKind::FrozenExponential, 32, grid, 6, 99, 2);
    REQUIRE(a.members.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(a.streams[i] == i);
        CHECK((a.members[i].states - b.members[i].states).cwiseAbs().maxCoeff() == 0.0);
    }
    // Stream i of the ensemble is the stream-i strict solve.
    const BrownianPath path = sample_brownian(1, grid, 99, 3);
    const SolutionPath sol =
        strict_solve(p, path, SchemeKind::FrozenExponential, 32, grid);
    CHECK((a.members[3].states - sol.x.states).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("AX members are the operator image of the X members") {
    ProblemSpec p = ou_problem();
    p.family = std::make_shared<OperatorFamily>(
        [](double t) { return Matrix::Constant(1, 1, 1.0 + 0.5 * t); }, 1, 1.0, 1.0, 1.0,
        "scalar-drift");
    const auto grid = uniform_grid(1.0, 16);
    const Ensemble x =
        solution_ensemble(p, SchemeKind::FrozenExponential, 16, grid, 4, 5, 1, "X");
    const Ensemble ax =
        solution_ensemble(p, SchemeKind::FrozenExponential, 16, grid, 4, 5, 1, "AX");
    double scale = 0.0;
    for (const auto& m : x.members) scale = std::max(scale, m.states.cwiseAbs().maxCoeff());
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t m = 0; m < grid.size(); ++m) {
            const double recomputed = (1.0 + 0.5 * grid[m]) * x.members[i].states(m, 0);
            CHECK(std::abs(ax.members[i].states(m, 0) - recomputed) <=
                  1e-12 * std::max(1.0, scale));
        }
    CHECK_THROWS_AS(solution_ensemble(p, SchemeKind::FrozenExponential, 16, grid, 4, 5,
                                      1, "Y"),
                    ValidationError);
}

TEST_CASE("output stride keeps endpoints and thins the interior") {
    ProblemSpec p = ou_problem();
    const auto grid = uniform_grid(1.0, 16);
    const Ensemble full =
        solution_ensemble(p, SchemeKind::FrozenExponential, 16, grid, 2, 42, 1);
    const Ensemble thin =
        solution_ensemble(p, SchemeKind::FrozenExponential, 16, grid, 2, 42, 1, "X", 4);
    REQUIRE(thin.members[0].times.size() == 5);  // rows 0, 4, 8, 12, 16
    CHECK(thin.members[0].times.front() == 0.0);
    CHECK(thin.members[0].times.back() == 1.0);
    for (int j : {0, 1, 2, 3, 4})
        CHECK(thin.members[0].states(j, 0) == full.members[0].states(4 * j, 0));
}

TEST_CASE("brownian ensemble accumulates its own increments") {
    const auto grid = uniform_grid(1.0, 32);
    const Ensemble ens = brownian_ensemble(grid, 3, 7, 2);
    REQUIRE(ens.members.size() == 3);
    CHECK(ens.quantity == "brownian");
    for (std::size_t i = 0; i < 3; ++i) {
        const BrownianPath path = sample_brownian(1, grid, 7, i);
        double w = 0.0;
        CHECK(ens.members[i].states(0, 0) == 0.0);
        for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
            w += path.increments(k, 0);
            CHECK(ens.members[i].states(k + 1, 0) == doctest::Approx(w).epsilon(1e-15));
        }
    }
}

TEST_CASE("structure function of linear paths is exact") {
    const auto grid = uniform_grid(1.0, 16);
    const double dt = 1.0 / 16.0;
    const Ensemble ens = linear_ensemble(grid, {1.0, 2.0, 3.0});
    const std::vector<double> lags{dt, 2 * dt, 4 * dt};
    const auto table = structure_function(ens, 2.0, lags, l2_norm());
    REQUIRE(table.lags.size() == 3);
    const double msq = (1.0 + 4.0 + 9.0) / 3.0;  // mean c^2
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(table.moments[i] == doctest::Approx(msq * lags[i] * lags[i]));
    // Exact power law: slope 2, so the Holder estimate is 1.
    const auto fit = estimate_holder_exponent(table);
    CHECK_FALSE(fit.degenerate);
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(fit.holder_hat == doctest::Approx(1.0));
    CHECK(fit.kol1_hat == doctest::Approx(0.5));
    CHECK(fit.slope_ci < 1e-6);
}

TEST_CASE("structure function input gates") {
    const auto grid = uniform_grid(1.0, 16);
    const double dt = 1.0 / 16.0;
    const Ensemble ens = linear_ensemble(grid, {1.0, 2.0});
    CHECK_THROWS_WITH_AS(structure_function(ens, 2.0, {1.5 * dt}, l2_norm()),
                         doctest::Contains("whole number"), ValidationError);
    CHECK_THROWS_AS(structure_function(ens, 2.0, {2.5}, l2_norm()), ValidationError);
    CHECK_THROWS_AS(structure_function(ens, 0.5, {dt}, l2_norm()), ValidationError);
    CHECK_THROWS_AS(structure_function(ens, 2.0, {dt}, l2_norm(), 0.9, 0.1),
                    ValidationError);
    const Ensemble skewed = linear_ensemble(log_spaced(0.01, 1.0, 16), {1.0, 2.0});
    CHECK_THROWS_WITH_AS(structure_function(skewed, 2.0, {dt}, l2_norm()),
                         doctest::Contains("uniform"), ValidationError);
    // Window restriction: only base times inside [lo, hi - lag] count.
    const auto windowed = structure_function(ens, 2.0, {dt}, l2_norm(), 0.5, 1.0);
    CHECK(windowed.moments[0] == doctest::Approx((1.0 + 4.0) / 2.0 * dt * dt));
}

TEST_CASE("constant ensembles give a degenerate fit") {
    const auto grid = uniform_grid(1.0, 16);
    Ensemble ens = linear_ensemble(grid, {0.0, 0.0});
    const auto table = structure_function(ens, 2.0, {1.0 / 16.0, 2.0 / 16.0}, l2_norm());
    const auto fit = estimate_holder_exponent(table);
    CHECK(fit.degenerate);
    StructureTable tiny;
    tiny.lags = {0.1};
    tiny.moments = {1.0};
    tiny.ses = {0.01};
    CHECK_THROWS_AS(estimate_holder_exponent(tiny), ValidationError);
}

TEST_CASE("Brownian ensembles recover the 1/2 exponent") {
    const auto grid = uniform_grid(1.0, 256);
    const Ensemble ens = brownian_ensemble(grid, 64, 2026, 2);
    std::vector<double> lags;
    for (int m = 4; m <= 32; m *= 2) lags.push_back(m / 256.0);
    const auto table = structure_function(ens, 2.0, lags, l2_norm());
    const auto fit = estimate_holder_exponent(table);
    CHECK_FALSE(fit.degenerate);
    CHECK(fit.holder_hat > 0.40);
    CHECK(fit.holder_hat < 0.60);
}

TEST_CASE("moment bound check") {
    ProblemSpec p = ou_problem();
    const auto grid = uniform_grid(1.0, 64);
    const Ensemble ens =
        solution_ensemble(p, SchemeKind::FrozenExponential, 64, grid, 32, 11, 2);

    SUBCASE("quantity and hash must match") {
        const Ensemble w0 = solution_ensemble(p, SchemeKind::FrozenExponential, 64, grid,
                                              4, 11, 1, "W0");
        CHECK_THROWS_WITH_AS(moment_bound_check(w0, p), doctest::Contains("carry X"),
                             ValidationError);
        ProblemSpec q = ou_problem();
        q.f_params.beta = 0.9;
        CHECK_THROWS_WITH_AS(moment_bound_check(ens, q),
                             doctest::Contains("different problem"), ValidationError);
    }
    SUBCASE("regimes pick the right envelope rates") {
        const auto rep = moment_bound_check(ens, p);
        CHECK(rep.regime == "beta>=delta");  // beta = 1.0, delta = 0.7
        CHECK(rep.c_hat > 0.0);
        CHECK(std::isfinite(rep.c_hat));
        CHECK(rep.binding_time > 0.0);
        CHECK(rep.g_term == doctest::Approx(1.0));  // ||A^0.7 G(0)|| = 1 for A = G = 1
        CHECK(rep.xi_term == 0.0);
        CHECK(rep.curve.size() == grid.size());

        ProblemSpec rough = ou_problem();
        rough.f_params = {0.6, 0.25};
        const Ensemble rens =
            solution_ensemble(rough, SchemeKind::FrozenExponential, 64, grid, 8, 11, 1);
        const auto rrep = moment_bound_check(rens, rough);
        CHECK(rrep.regime == "beta<delta");
    }
    SUBCASE("zero problem stays exactly zero") {
        ProblemSpec zero = ou_problem();
        zero.noise = NoiseMap{};  // trivial
        const Ensemble zens =
            solution_ensemble(zero, SchemeKind::FrozenExponential, 64, grid, 2, 1, 1);
        const auto rep = moment_bound_check(zens, zero);
        CHECK(rep.c_hat == 0.0);
        CHECK(rep.xi_term == 0.0);
        CHECK(rep.f_term == 0.0);
        CHECK(rep.g_term == 0.0);
    }
}

TEST_CASE("ensemble summary of a deterministic problem has zero spread") {
    ProblemSpec p = ou_problem();
    p.noise = NoiseMap{};  // trivial: every member solves the same ODE
    p.forcing = [](double) { return Vector::Constant(1, 1.0); };
    p.xi = Vector::Constant(1, 0.5);
    const auto grid = uniform_grid(1.0, 32);
    const Ensemble ens =
        solution_ensemble(p, SchemeKind::FrozenExponential, 32, grid, 3, 0, 1);
    const auto summary = summarize_ensemble(ens, p, {0.0, 0.5});
    REQUIRE(summary.thetas.size() == 2);
    REQUIRE(summary.mean_sq.size() == 2);
    CHECK(summary.paths == 3);

    SampledPath forcing = SampledPath::scalar(grid, std::vector<double>(grid.size(), 1.0));
    EvolutionScheme scheme{SchemeKind::FrozenExponential, 32, p.family};
    const Trajectory ode = deterministic_solve(scheme, p.xi, forcing, grid);
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const double v = ode.states(m, 0);
        // A = 1: the ambient norm is the absolute value, theta powers are 1.
        CHECK(summary.mean_sq[0][m] == doctest::Approx(v * v).epsilon(1e-10));
        CHECK(summary.mean_sq[1][m] == doctest::Approx(v * v).epsilon(1e-10));
        // Identical members: only mean-rounding residue (~1 ulp) may survive.
        CHECK(summary.ci[0][m] <= 1e-14);
    }
}
