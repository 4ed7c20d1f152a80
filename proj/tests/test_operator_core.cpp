#include <doctest.h>

#include <cmath>

#include "sevolab/operator_core.hpp"

using namespace sevolab;

namespace {

// Discrete Dirichlet Laplacian eigenvalue for unit diffusion:
// lambda_k = (2 - 2 cos(k pi h)) / h^2.
double laplace_eig(int k, double h) { return (2.0 - 2.0 * std::cos(k * M_PI * h)) / (h * h); }

CoefficientField unit_coeffs() {
    return {[](double, double) { return 1.0; }, [](double, double) { return 0.0; }, "a=1;b=0"};
}

OperatorFamily scalar_family(std::function<double(double)> a, double horizon = 1.0,
                             double mu = 1.0, double nu = 1.0) {
    return OperatorFamily(
        [a](double t) { return Matrix::Constant(1, 1, a(t)); }, 1, horizon, mu, nu,
        "scalar-test");
}

}  // namespace

TEST_CASE("grid geometry") {
    const Grid g = Grid::interior(3);
    CHECK(g.h == doctest::Approx(0.25));
    CHECK(g.point(0) == doctest::Approx(0.25));
    CHECK(g.point(2) == doctest::Approx(0.75));
    CHECK(g.midpoint(0) == doctest::Approx(0.125));
    CHECK(g.midpoint(3) == doctest::Approx(0.875));
    CHECK_THROWS_AS(Grid::interior(1), ValidationError);
}

TEST_CASE("stencil matches the constant-coefficient oracle") {
    const Grid g = Grid::interior(3);
    const Matrix m = assemble_operator(unit_coeffs(), 0.0, g);
    // a = 1, h = 1/4: diagonal 2/h^2 = 32, off-diagonal -1/h^2 = -16.
    for (int i = 0; i < 3; ++i) CHECK(m(i, i) == doctest::Approx(32.0));
    CHECK(m(0, 1) == doctest::Approx(-16.0));
    CHECK(m(1, 0) == doctest::Approx(-16.0));
    CHECK(m(0, 2) == doctest::Approx(0.0));

    // Adding b shifts the diagonal only.
    CoefficientField with_b = unit_coeffs();
    with_b.b = [](double, double) { return 2.5; };
    const Matrix mb = assemble_operator(with_b, 0.0, g);
    CHECK((mb - m - 2.5 * Matrix::Identity(3, 3)).norm() == doctest::Approx(0.0));
}

TEST_CASE("coefficient hypotheses are gated") {
    const Grid g = Grid::interior(4);
    CoefficientField bad_a = unit_coeffs();
    bad_a.a = [](double, double) { return 0.0; };
    CHECK_THROWS_WITH_AS(assemble_operator(bad_a, 0.0, g),
                         doctest::Contains("ellipticity"), ValidationError);
    CoefficientField bad_b = unit_coeffs();
    bad_b.b = [](double, double) { return -0.1; };
    CHECK_THROWS_WITH_AS(assemble_operator(bad_b, 0.0, g),
                         doctest::Contains("positivity"), ValidationError);
}

TEST_CASE("spectral decomposition reproduces Dirichlet eigenvalues") {
    const Grid g = Grid::interior(15);
    const OperatorFamily family(g, unit_coeffs(), 1.0);
    const auto dec = family.reference();
    CHECK(dec.reconstruction_error < tol_spec);
    for (int k = 1; k <= 15; ++k)
        CHECK(dec.eigenvalues(k - 1) == doctest::Approx(laplace_eig(k, g.h)).epsilon(1e-10));

    // Eigenvector for the lowest mode is the sampled sine, up to sign.
    Vector sine(15);
    for (int i = 0; i < 15; ++i) sine(i) = std::sin(M_PI * g.point(i));
    sine.normalize();
    Vector v0 = dec.eigenvectors.col(0);
    if (v0(0) < 0) v0 = -v0;
    CHECK((v0 - sine).norm() < 1e-10);
}

TEST_CASE("fractional powers obey the exponent laws") {
    const Grid g = Grid::interior(8);
    const OperatorFamily family(g, unit_coeffs(), 1.0);
    const Matrix a = family.matrix(0.0);
    const Matrix half = fractional_power(a, 0.5);
    CHECK((half * half - a).norm() < 1e-8 * a.norm());
    CHECK((fractional_power(a, 1.0) - a).norm() < 1e-10 * a.norm());
    CHECK((fractional_power(a, 0.0) - Matrix::Identity(8, 8)).norm() < 1e-12);
    const Matrix inv = fractional_power(a, -1.0);
    CHECK((inv * a - Matrix::Identity(8, 8)).norm() < 1e-10);

    const auto dec = family.reference();
    const Vector v = Vector::Ones(8);
    CHECK((dec.apply_power(0.3, v) - dec.power(0.3) * v).norm() < 1e-10);
}

TEST_CASE("family constructors gate the structural parameters") {
    const Grid g = Grid::interior(4);
    CHECK_THROWS_WITH_AS(OperatorFamily(g, unit_coeffs(), 1.0, 0.0, 1.0),
                         doctest::Contains("(A3)"), ValidationError);
    CHECK_THROWS_WITH_AS(OperatorFamily(g, unit_coeffs(), 1.0, 1.0, 1.5),
                         doctest::Contains("(A2)"), ValidationError);
    CHECK_THROWS_AS(OperatorFamily(g, unit_coeffs(), -1.0), ValidationError);

    // Matrix families must be symmetric positive definite at every sample.
    CHECK_THROWS_AS(OperatorFamily([](double) { return Matrix::Constant(1, 1, -1.0); }, 1,
                                   1.0, 1.0, 1.0, "bad"),
                    ValidationError);
    Matrix asym(2, 2);
    asym << 1.0, 0.5, 0.0, 1.0;
    CHECK_THROWS_AS(OperatorFamily([asym](double) { return asym; }, 2, 1.0, 1.0, 1.0, "bad"),
                    ValidationError);
}

TEST_CASE("samples outside the time window are rejected") {
    auto family = scalar_family([](double t) { return 1.0 + t; });
    CHECK(family.matrix(1.0)(0, 0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(family.matrix(1.5), ValidationError);
    CHECK_THROWS_AS(family.matrix(-0.5), ValidationError);
}

TEST_CASE("ambient norm against the exact eigenvector value") {
    const Grid g = Grid::interior(31);
    const OperatorFamily family(g, unit_coeffs(), 1.0);
    Vector u(31);
    for (int i = 0; i < 31; ++i) u(i) = std::sin(M_PI * g.point(i));
    // u is an exact discrete eigenvector and sum_i h u_i^2 = 1/2, so
    // ||u||_E^2 = h u' A^{-1} u = 1 / (2 lambda_1).
    const double lam1 = laplace_eig(1, g.h);
    CHECK(dual_norm(family, u) == doctest::Approx(std::sqrt(0.5 / lam1)).epsilon(1e-12));

    // Operator norm of a spectral power is the max eigenvalue power.
    const Matrix a03 = family.reference().power(0.3);
    CHECK(ambient_operator_norm(family, a03) ==
          doctest::Approx(std::pow(family.reference().max_eigenvalue(), 0.3)).epsilon(1e-10));

    // A single-column map has norm equal to the ambient norm of the column.
    Matrix col(31, 1);
    col.col(0) = u;
    CHECK(ambient_map_norm(family, col) == doctest::Approx(dual_norm(family, u)).epsilon(1e-12));
}

TEST_CASE("resolvent scan stays under the sector bound") {
    const Grid g = Grid::interior(12);
    const OperatorFamily family(g, unit_coeffs(), 1.0);
    SUBCASE("ray at 3 pi / 4") {
        const auto rep = resolvent_scan(family, 0.0, 3.0 * M_PI / 4.0, 30);
        CHECK(rep.varpi == doctest::Approx(M_PI / 4.0));
        CHECK(rep.m_hat <= std::sqrt(2.0) + 1e-9);
        CHECK(rep.m_hat > 0.5);
        CHECK(rep.samples.size() == 30);
    }
    SUBCASE("negative real axis") {
        const auto rep = resolvent_scan(family, 0.0, M_PI, 30);
        CHECK(rep.m_hat <= 1.0 + 1e-12);
    }
    SUBCASE("rays inside the spectral sector are rejected") {
        CHECK_THROWS_AS(resolvent_scan(family, 0.0, M_PI / 8.0, 10), ValidationError);
    }
}

TEST_CASE("temporal regularity scan recovers the Lipschitz rate") {
    auto family = scalar_family([](double t) { return 1.0 + t; });
    const auto times = log_spaced(0.01, 1.0, 12);
    const auto rep = temporal_holder_scan(family, 1.0, times);
    // D(s, t) = (t - s) / (1 + s): slope 1 in the gap, sup constant 1/(1 + s_min).
    CHECK_FALSE(rep.autonomous);
    CHECK(rep.mu_hat == doctest::Approx(1.0).epsilon(0.05));
    CHECK(rep.n_sup == doctest::Approx(1.0 / (1.0 + times.front())).epsilon(1e-6));
    CHECK(rep.gaps.size() == rep.defects.size());

    auto frozen = scalar_family([](double) { return 2.0; });
    const auto frozen_rep = temporal_holder_scan(frozen, 1.0, times);
    CHECK(frozen_rep.autonomous);
    CHECK(std::isnan(frozen_rep.mu_hat));
}

TEST_CASE("fractional difference constant matches the scalar closed form") {
    auto family = scalar_family([](double t) { return 1.0 + t; });
    const auto times = log_spaced(0.05, 1.0, 10);
    const double th1 = 0.3, th2 = 0.6;
    const double measured = fractional_difference_constant(family, th1, th2, times);
    double oracle = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
        for (std::size_t j = i + 1; j < times.size(); ++j) {
            const double s = times[i], t = times[j];
            const double v = std::abs(std::pow(1.0 + t, th1) - std::pow(1.0 + s, th1)) *
                             std::pow(1.0 + s, -th2) / (t - s);
            oracle = std::max(oracle, v);
        }
    CHECK(measured == doctest::Approx(oracle).epsilon(1e-10));

    CHECK_THROWS_AS(fractional_difference_constant(family, 0.6, 0.3, times), ValidationError);
    CHECK_THROWS_AS(fractional_difference_constant(family, 0.3, 1.0, times), ValidationError);
    CHECK(detail::fractional_difference_scan(family, 0.3, 1.0, times) > 0.0);
}
