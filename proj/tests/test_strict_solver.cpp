#include <doctest.h>

#include <cmath>
#include <memory>

#include "sevolab/strict_solver.hpp"

using namespace sevolab;

namespace {

std::shared_ptr<OperatorFamily> scalar_family(double a, double horizon = 1.0) {
    return std::make_shared<OperatorFamily>(
        [a](double) { return Matrix::Constant(1, 1, a); }, 1, horizon, 1.0, 1.0,
        "scalar-test");
}

// dX + X dt = dw, X(0) = 0.
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

ProblemSpec forced_problem() {
    ProblemSpec p;
    p.family = scalar_family(2.0);
    p.forcing = [](double t) { return Vector::Constant(1, std::pow(t, -0.4)); };
    p.f_params = {0.6, 0.15};
    p.xi = Vector::Constant(1, 1.0);
    p.horizon = 1.0;
    p.tag = "forced";
    return p;  // noise left trivial
}

}  // namespace

TEST_CASE("problem validation names the violated hypothesis") {
    ProblemSpec p = ou_problem();
    CHECK_NOTHROW(p.validate());

    SUBCASE("(F1) window") {
        p.f_params = {0.5, 0.6};
        CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("(F1)"), ValidationError);
    }
    SUBCASE("(G1) lower bound") {
        p.delta = 0.4;
        CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("(G1)"), ValidationError);
    }
    SUBCASE("(G2) ordering") {
        p.delta1 = 0.6;
        CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("(G2)"), ValidationError);
    }
    SUBCASE("shape gates") {
        p.xi = Vector::Zero(3);
        CHECK_THROWS_AS(p.validate(), ValidationError);
    }
    SUBCASE("horizon gate") {
        p.horizon = 2.0;
        CHECK_THROWS_AS(p.validate(), ValidationError);
    }
    SUBCASE("noise-free problems skip the noise gates") {
        ProblemSpec q = forced_problem();
        q.delta = 0.1;  // out of range, but the noise is trivial
        CHECK_NOTHROW(q.validate());
    }
}

TEST_CASE("forcing samples keep a singular start integrable") {
    ProblemSpec p = forced_problem();
    const auto grid = uniform_grid(1.0, 16);
    // First cell is sampled at t_1, not at the singular t_0 = 0.
    const Vector f0 = p.forcing_sample(grid, 0);
    CHECK(f0(0) == doctest::Approx(std::pow(grid[1], -0.4)));
    const Vector f3 = p.forcing_sample(grid, 3);
    CHECK(f3(0) == doctest::Approx(std::pow(grid[3], -0.4)));
    CHECK_THROWS_AS(p.forcing_sample(grid, 99), ValidationError);
}

TEST_CASE("problem hash is stable and parameter sensitive") {
    ProblemSpec p = ou_problem();
    const std::string h1 = p.hash();
    CHECK(h1.size() == 64);
    CHECK(h1.find_first_not_of("0123456789abcdef") == std::string::npos);
    CHECK(p.hash() == h1);
    ProblemSpec q = ou_problem();
    q.f_params.beta = 0.9;
    CHECK(q.hash() != h1);
    ProblemSpec r = ou_problem();
    r.delta = 0.75;
    CHECK(r.hash() != h1);
}

TEST_CASE("solution decomposes into deterministic and stochastic parts") {
    ProblemSpec p = ou_problem();
    p.forcing = [](double) { return Vector::Constant(1, 0.8); };
    const auto grid = uniform_grid(1.0, 128);
    const BrownianPath path = sample_brownian(1, grid, 31);
    const SolutionPath sol =
        strict_solve(p, path, SchemeKind::FrozenExponential, 128, grid);

    CHECK(sol.problem_hash == p.hash());
    CHECK(sol.x.quantity == "X");
    CHECK(sol.i1.quantity == "I1");
    double scale = 0.0;
    for (std::size_t m = 0; m < grid.size(); ++m)
        scale = std::max(scale, sol.x.state(m).norm());
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const double gap =
            (sol.x.state(m) - sol.i1.state(m) - sol.w0.state(m)).norm();
        CHECK(gap <= 1e-12 * std::max(1.0, scale));
    }
    // W1 rows are exactly A(t_m) W0(t_m).
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const Vector recomputed = p.family->matrix(grid[m]) * sol.w0.state(m);
        CHECK((sol.w1.state(m) - recomputed).norm() <= 1e-14);
    }
}

TEST_CASE("noise-free solve collapses onto the deterministic part") {
    ProblemSpec p = forced_problem();
    const auto grid = uniform_grid(1.0, 64);
    const BrownianPath path = sample_brownian(1, grid, 17);
    const SolutionPath sol =
        strict_solve(p, path, SchemeKind::FrozenExponential, 64, grid);
    CHECK(sol.w0.states.cwiseAbs().maxCoeff() == 0.0);
    CHECK(sol.w1.states.cwiseAbs().maxCoeff() == 0.0);
    CHECK((sol.x.states - sol.i1.states).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("strict residual vanishes at first order in the step") {
    ProblemSpec p = ou_problem();
    auto residual_at = [&](int steps) {
        const auto grid = uniform_grid(1.0, steps);
        const BrownianPath fine = sample_brownian(1, uniform_grid(1.0, 2048), 7);
        const SolutionPath sol =
            strict_solve(p, fine, SchemeKind::FrozenExponential, steps, grid);
        return strict_residual(p, sol);
    };
    const double r512 = residual_at(512);
    CHECK(r512 < 0.05);
    CHECK(r512 > 0.0);
    const double r1024 = residual_at(1024);
    CHECK(r512 / r1024 > 1.4);  // same driving path, halved step
}

TEST_CASE("Fubini defect of the convolution pair shrinks with the step") {
    ProblemSpec p = ou_problem();
    const BrownianPath fine = sample_brownian(1, uniform_grid(1.0, 2048), 9);
    auto defect_at = [&](int steps) {
        const auto grid = uniform_grid(1.0, steps);
        const SolutionPath sol =
            strict_solve(p, fine, SchemeKind::FrozenExponential, steps, grid);
        return fubini_defect(p, sol);
    };
    const double d256 = defect_at(256);
    const double d512 = defect_at(512);
    CHECK(d256 > 0.0);
    CHECK(d256 / d512 > 1.4);
    CHECK(d256 / d512 < 2.8);
}

TEST_CASE("scheme distance decays for the noise-free problem") {
    ProblemSpec p = forced_problem();
    const BrownianPath path = sample_brownian(1, uniform_grid(1.0, 512), 3);
    const double c128 = cross_scheme_distance(p, path, 128, 128);
    const double c256 = cross_scheme_distance(p, path, 256, 256);
    CHECK(c128 > 0.0);
    CHECK(c128 / c256 == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("pre-restricted driving paths give identical solutions") {
    ProblemSpec p = ou_problem();
    const auto grid = uniform_grid(1.0, 64);
    const BrownianPath fine = sample_brownian(1, uniform_grid(1.0, 1024), 23);
    const SolutionPath a =
        strict_solve(p, fine, SchemeKind::FrozenExponential, 64, grid);
    const SolutionPath b = strict_solve(p, fine.restrict_to(grid),
                                        SchemeKind::FrozenExponential, 64, grid);
    CHECK((a.x.states - b.x.states).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.w0.states - b.w0.states).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("solves are bitwise deterministic") {
    ProblemSpec p = ou_problem();
    const auto grid = uniform_grid(1.0, 64);
    const BrownianPath path = sample_brownian(1, grid, 77);
    const SolutionPath a = strict_solve(p, path, SchemeKind::ImplicitEuler, 64, grid);
    const SolutionPath b = strict_solve(p, path, SchemeKind::ImplicitEuler, 64, grid);
    CHECK((a.x.states - b.x.states).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.w1.states - b.w1.states).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.problem_hash == b.problem_hash);
}

TEST_CASE("grid gates") {
    ProblemSpec p = ou_problem();
    const BrownianPath path = sample_brownian(1, uniform_grid(1.0, 32), 1);
    CHECK_THROWS_AS(strict_solve(p, path, SchemeKind::FrozenExponential, 32,
                                 uniform_grid(0.5, 16)),
                    ValidationError);  // grid must end at the horizon
    const BrownianPath short_path = sample_brownian(1, uniform_grid(0.5, 16), 1);
    CHECK_THROWS_AS(strict_solve(p, short_path, SchemeKind::FrozenExponential, 32,
                                 uniform_grid(1.0, 32)),
                    ValidationError);  // driving path does not span the grid
}
