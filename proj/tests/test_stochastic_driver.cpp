#include <doctest.h>

#include <cmath>
#include <memory>

#include "sevolab/stochastic_driver.hpp"

using namespace sevolab;

namespace {

std::shared_ptr<OperatorFamily> scalar_family(double a, double horizon = 1.0,
                                              double mu = 1.0, double nu = 1.0) {
    return std::make_shared<OperatorFamily>(
        [a](double) { return Matrix::Constant(1, 1, a); }, 1, horizon, mu, nu,
        "scalar-test");
}

EvolutionScheme frozen_scheme(std::shared_ptr<OperatorFamily> fam, int spu = 256) {
    EvolutionScheme scheme;
    scheme.kind = SchemeKind::FrozenExponential;
    scheme.substeps_per_unit = spu;
    scheme.family = std::move(fam);
    return scheme;
}

NoiseMap scalar_noise(std::function<double(double)> g) {
    NoiseMap noise;
    noise.map = [g](double t) { return Matrix::Constant(1, 1, g(t)); };
    noise.rows = 1;
    noise.cols = 1;
    noise.tag = "scalar";
    return noise;
}

}  // namespace

TEST_CASE("philox block is a pure deterministic function") {
    const std::array<std::uint32_t, 4> ctr{1u, 2u, 3u, 4u};
    const std::array<std::uint32_t, 2> key{5u, 6u};
    const auto a = philox4x32(ctr, key);
    const auto b = philox4x32(ctr, key);
    CHECK(a == b);
    // Single-bit counter flips change every output word (avalanche).
    auto flipped = ctr;
    flipped[0] ^= 1u;
    const auto c = philox4x32(flipped, key);
    for (int i = 0; i < 4; ++i) CHECK(a[i] != c[i]);
    const auto d = philox4x32(ctr, {5u, 7u});
    for (int i = 0; i < 4; ++i) CHECK(a[i] != d[i]);
}

TEST_CASE("philox normals are pure and well distributed") {
    CHECK(philox_normal(42, 0, 17) == philox_normal(42, 0, 17));
    CHECK(philox_normal(42, 0, 17) != philox_normal(42, 0, 18));
    CHECK(philox_normal(42, 0, 17) != philox_normal(42, 1, 17));
    CHECK(philox_normal(42, 0, 17) != philox_normal(43, 0, 17));

    const int n = 20000;
    double sum = 0.0, sum_sq = 0.0;
    int tail = 0;
    for (int i = 0; i < n; ++i) {
        const double z = philox_normal(2026, 5, static_cast<std::uint64_t>(i));
        REQUIRE(std::isfinite(z));
        sum += z;
        sum_sq += z * z;
        if (std::abs(z) > 1.959964) ++tail;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.025);           // ~3.5 sigma at n = 20000
    CHECK(std::abs(var - 1.0) < 0.04);
    CHECK(std::abs(tail / static_cast<double>(n) - 0.05) < 0.01);
}

TEST_CASE("brownian sampling and validation") {
    const auto grid = uniform_grid(1.0, 64);
    const BrownianPath p = sample_brownian(2, grid, 7, 3);
    CHECK(p.step_count() == 64);
    CHECK(p.increments.rows() == 64);
    CHECK(p.increments.cols() == 2);
    // Increment (k, j) is sqrt(dt) * N(seed, stream, k*d + j), reproducible.
    const double dt = 1.0 / 64.0;
    CHECK(p.increments(5, 1) ==
          doctest::Approx(std::sqrt(dt) * philox_normal(7, 3, 5 * 2 + 1)).epsilon(1e-15));
    // value_at accumulates increments.
    CHECK(p.value_at(0).norm() == 0.0);
    CHECK(p.value_at(3)(0) ==
          doctest::Approx(p.increments(0, 0) + p.increments(1, 0) + p.increments(2, 0)));

    BrownianPath bad = p;
    bad.increments.resize(10, 2);
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    CHECK_THROWS_AS(sample_brownian(0, grid, 7), ValidationError);
    CHECK_THROWS_AS(sample_brownian(1, {0.0, 0.5, 0.4}, 7), ValidationError);
}

TEST_CASE("restriction aggregates increments exactly") {
    const BrownianPath fine = sample_brownian(1, uniform_grid(1.0, 32), 11);
    const BrownianPath coarse = fine.restrict_to(uniform_grid(1.0, 8));
    REQUIRE(coarse.step_count() == 8);
    for (int c = 0; c < 8; ++c) {
        double acc = 0.0;
        for (int k = 4 * c; k < 4 * (c + 1); ++k) acc += fine.increments(k, 0);
        CHECK(coarse.increments(c, 0) == doctest::Approx(acc).epsilon(1e-15));
    }
    // Full-grid restriction is the identity.
    const BrownianPath same = fine.restrict_to(fine.times);
    CHECK((same.increments - fine.increments).norm() == 0.0);
    // Times not in the fine grid are rejected.
    CHECK_THROWS_WITH_AS(fine.restrict_to({0.0, 0.3, 1.0}), doctest::Contains("absent"),
                         ValidationError);
}

TEST_CASE("Ito integral of a deterministic step integrand") {
    const auto grid = uniform_grid(1.0, 16);
    const BrownianPath p = sample_brownian(1, grid, 5);
    std::vector<Matrix> phi(16, Matrix::Constant(1, 1, 1.0));
    const Vector m = ito_integral(phi, p);
    CHECK(m(0) == doctest::Approx(p.increments.col(0).sum()).epsilon(1e-14));

    std::vector<Matrix> weighted(16);
    for (int k = 0; k < 16; ++k) weighted[k] = Matrix::Constant(1, 1, grid[k]);
    double oracle = 0.0;
    for (int k = 0; k < 16; ++k) oracle += grid[k] * p.increments(k, 0);
    CHECK(ito_integral(weighted, p)(0) == doctest::Approx(oracle).epsilon(1e-14));

    phi.pop_back();
    CHECK_THROWS_AS(ito_integral(phi, p), ValidationError);
}

TEST_CASE("stochastic convolution matches the direct discrete sum") {
    const double a = 2.0;
    auto scheme = frozen_scheme(scalar_family(a), 64);
    const auto grid = uniform_grid(1.0, 64);
    const BrownianPath path = sample_brownian(1, grid, 13);
    const auto noise = scalar_noise([](double t) { return 1.0 + 0.5 * t; });
    const Trajectory w0 = stochastic_convolution(scheme, noise, path, 0.0, grid);
    CHECK(w0.quantity == "W0");
    REQUIRE(w0.times.size() == grid.size());
    CHECK(w0.states(0, 0) == 0.0);

    // Left-endpoint weights exp(-a (t_m - t_k)) G(t_k) dw_k.
    for (std::size_t m : {std::size_t(5), std::size_t(32), std::size_t(64)}) {
        double direct = 0.0;
        for (std::size_t k = 0; k < m; ++k)
            direct += std::exp(-a * (grid[m] - grid[k])) * (1.0 + 0.5 * grid[k]) *
                      path.increments(k, 0);
        CHECK(w0.states(m, 0) == doctest::Approx(direct).epsilon(1e-12));
    }

    // The theta-weighted output is the exact spectral power of W0.
    const Trajectory wt = stochastic_convolution(scheme, noise, path, 0.7, grid);
    CHECK(wt.quantity == "W_theta");
    for (std::size_t m = 0; m < grid.size(); ++m)
        CHECK(wt.states(m, 0) ==
              doctest::Approx(std::pow(a, 0.7) * w0.states(m, 0)).epsilon(1e-12));
}

TEST_CASE("diagonal system decouples into scalar convolutions") {
    Matrix diag = Matrix::Zero(2, 2);
    diag(0, 0) = 1.0;
    diag(1, 1) = 3.0;
    auto fam = std::make_shared<OperatorFamily>(
        [diag](double) { return diag; }, 2, 1.0, 1.0, 1.0, "diag-test");
    auto scheme = frozen_scheme(fam, 32);
    const auto grid = uniform_grid(1.0, 32);
    const BrownianPath path = sample_brownian(2, grid, 21);
    NoiseMap noise;
    noise.map = [](double) { return Matrix::Identity(2, 2); };
    noise.rows = 2;
    noise.cols = 2;
    noise.tag = "identity";
    const Trajectory w0 = stochastic_convolution(scheme, noise, path, 0.0, grid);
    for (int j = 0; j < 2; ++j) {
        const double aj = diag(j, j);
        double direct = 0.0;
        for (int k = 0; k < 32; ++k)
            direct += std::exp(-aj * (1.0 - grid[k])) * path.increments(k, j);
        CHECK(w0.states(32, j) == doctest::Approx(direct).epsilon(1e-11));
    }
    // Driver dimension must match the noise columns.
    const BrownianPath wrong = sample_brownian(1, grid, 21);
    CHECK_THROWS_AS(stochastic_convolution(scheme, noise, wrong, 0.0, grid),
                    ValidationError);
}

TEST_CASE("noise regularity constants for an explicit Holder map") {
    auto fam = scalar_family(1.0);
    const double sigma = 0.3;
    const auto noise = scalar_noise([](double t) { return 1.0 + std::pow(t, 0.3); });
    std::vector<double> times;
    for (int i = 0; i <= 16; ++i) times.push_back(i / 16.0);
    const auto rep = noise_condition_check(noise, *fam, 0.7, 0.9, sigma, times);

    // A = 1 makes every weighted norm the plain absolute difference, and the
    // pair (0, t) attains |t^0.3 - 0| / t^0.3 = 1 exactly.
    CHECK(rep.zeta_hat == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.zeta_bar_hat == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.sup_frozen == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rep.g0_level == doctest::Approx(1.0).epsilon(1e-12));
    // Autonomous family: the fractional-difference scans vanish and the
    // transported constant collapses to ||A^{delta-delta1}|| zeta_bar = 1.
    CHECK(rep.alpha_d_d1 == 0.0);
    CHECK(rep.derived_g1_constant == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.derived_g1_constant >= rep.zeta_hat - 1e-12);
    CHECK(rep.g1_holds);
    CHECK(rep.g2_holds);

    CHECK_THROWS_WITH_AS(noise_condition_check(noise, *fam, 0.4, 0.9, sigma, times),
                         doctest::Contains("delta > 1/2"), ValidationError);
    CHECK_THROWS_WITH_AS(noise_condition_check(noise, *fam, 0.7, 0.6, sigma, times),
                         doctest::Contains("(G2)"), ValidationError);
    auto rough = scalar_family(1.0, 1.0, /*mu=*/0.2, /*nu=*/1.0);
    CHECK_THROWS_WITH_AS(noise_condition_check(noise, *rough, 0.7, 0.9, sigma, times),
                         doctest::Contains("sigma <= mu"), ValidationError);
}

TEST_CASE("martingale moment diagnostics near the isometry") {
    IntegrandFamily family;
    family.d = 1;
    family.value_dim = 1;
    family.grid = uniform_grid(1.0, 128);
    family.adapted = false;
    family.make = [](const BrownianPath& p) {
        return std::vector<Matrix>(p.step_count(), Matrix::Constant(1, 1, 1.0));
    };
    family.tag = "unit";
    const auto diag = moment_diagnostics(family, 2000, 2.0, 2026, 2);
    CHECK(diag.paths == 2000);
    // phi = 1: quadratic variation is exactly T, E M_T^2 = T.
    CHECK(std::abs(diag.isometry_ratio - 1.0) < 0.15);
    CHECK(diag.isometry_se > 0.0);
    CHECK(diag.isometry_se < 0.1);
    // Doob at p = 2 gives reference 4; the empirical constant sits well below.
    CHECK(diag.c_p_reference == doctest::Approx(4.0));
    CHECK(diag.c_p_hat > 0.0);
    CHECK(diag.c_p_hat < 1.1);
    CHECK(diag.martingale_max_z < 4.5);

    CHECK_THROWS_AS(moment_diagnostics(family, 10, 2.0, 1), ValidationError);
    CHECK_THROWS_AS(moment_diagnostics(family, 100, 1.0, 1), ValidationError);
}
