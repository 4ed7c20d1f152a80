#include "sevolab/operator_core.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <limits>
#include <sstream>

namespace sevolab {

Grid Grid::interior(int n) {
    require(n >= 2, "Grid: need at least 2 interior points");
    return Grid{n, 1.0 / (n + 1)};
}

Matrix assemble_operator(const CoefficientField& coeffs, double t, const Grid& grid) {
    require(t >= 0.0, "assemble_operator: t must be nonnegative");
    require(static_cast<bool>(coeffs.a) && static_cast<bool>(coeffs.b),
            "assemble_operator: coefficient field has empty samplers");
    const int n = grid.n;
    const double h2 = grid.h * grid.h;

    std::vector<double> am(n + 1);
    for (int j = 0; j <= n; ++j) {
        const double v = coeffs.a(grid.midpoint(j), t);
        require_finite(v, "diffusion sample a(x,t)");
        if (v <= 0.0) {
            std::ostringstream msg;
            msg << "coefficient violation: a(" << grid.midpoint(j) << ", " << t
                << ") = " << v << " violates the ellipticity hypothesis (a > 0)";
            throw ValidationError(msg.str());
        }
        am[j] = v;
    }

    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double bi = coeffs.b(grid.point(i), t);
        require_finite(bi, "absorption sample b(x,t)");
        if (bi < 0.0) {
            std::ostringstream msg;
            msg << "coefficient violation: b(" << grid.point(i) << ", " << t
                << ") = " << bi << " violates the positivity hypothesis (b >= 0)";
            throw ValidationError(msg.str());
        }
        a(i, i) = (am[i] + am[i + 1]) / h2 + bi;
        if (i + 1 < n) {
            a(i, i + 1) = -am[i + 1] / h2;
            a(i + 1, i) = -am[i + 1] / h2;
        }
    }
    return a;
}

namespace {

void check_symmetric(const Matrix& m, const char* what) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw ValidationError(std::string(what) + ": matrix is not symmetric");
}

SpectralDecomposition decompose_spd(const Matrix& m, const char* what) {
    require(m.rows() == m.cols() && m.rows() >= 1,
            std::string(what) + ": matrix must be square");
    check_symmetric(m, what);
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    if (es.info() != Eigen::Success)
        throw NumericError(std::string(what) + ": eigensolver failed");
    SpectralDecomposition dec;
    dec.eigenvalues = es.eigenvalues();
    dec.eigenvectors = es.eigenvectors();
    if (dec.eigenvalues(0) <= 0.0)
        throw ValidationError(std::string(what) +
                              ": operator sample is not positive definite (min eigenvalue " +
                              std::to_string(dec.eigenvalues(0)) + ")");
    const Matrix rebuilt = dec.eigenvectors *
                           dec.eigenvalues.asDiagonal() *
                           dec.eigenvectors.transpose();
    const double scale = std::max(m.norm(), 1e-300);
    dec.reconstruction_error = (rebuilt - m).norm() / scale;
    if (dec.reconstruction_error > tol_spec)
        throw NumericError(std::string(what) + ": spectral reconstruction defect " +
                           std::to_string(dec.reconstruction_error) + " exceeds tolerance");
    return dec;
}

}  // namespace

Matrix SpectralDecomposition::power(double theta) const {
    if (theta == 0.0)
        return Matrix::Identity(eigenvectors.rows(), eigenvectors.rows());
    Vector powered = eigenvalues.array().pow(theta);
    return eigenvectors * powered.asDiagonal() * eigenvectors.transpose();
}

Vector SpectralDecomposition::apply_power(double theta, const Vector& v) const {
    require(v.size() == eigenvectors.rows(), "apply_power: dimension mismatch");
    if (theta == 0.0) return v;
    Vector coeffs = eigenvectors.transpose() * v;
    coeffs.array() *= eigenvalues.array().pow(theta);
    return eigenvectors * coeffs;
}

OperatorFamily::OperatorFamily(Grid grid, CoefficientField coeffs, double horizon,
                               double mu, double nu)
    : grid_(grid),
      coeffs_(std::move(coeffs)),
      dim_(grid.n),
      horizon_(horizon),
      mu_(mu),
      nu_(nu),
      tag_(coeffs_->tag) {
    require(horizon_ > 0.0, "OperatorFamily: horizon must be positive");
    require(mu_ > 0.0 && mu_ <= 1.0, "(A3) requires 0 < mu <= 1");
    require(nu_ > 0.0 && nu_ <= 1.0, "(A2) requires 0 < nu <= 1");
    require(mu_ + nu_ > 1.0, "(A3) requires mu + nu > 1");
    ref_ = decompose_spd(matrix(0.0), "OperatorFamily reference");
}

OperatorFamily::OperatorFamily(std::function<Matrix(double)> samples, int dim,
                               double horizon, double mu, double nu, std::string tag)
    : samples_(std::move(samples)),
      dim_(dim),
      horizon_(horizon),
      mu_(mu),
      nu_(nu),
      tag_(std::move(tag)) {
    require(dim_ >= 1, "OperatorFamily: dimension must be >= 1");
    require(horizon_ > 0.0, "OperatorFamily: horizon must be positive");
    require(mu_ > 0.0 && mu_ <= 1.0, "(A3) requires 0 < mu <= 1");
    require(nu_ > 0.0 && nu_ <= 1.0, "(A2) requires 0 < nu <= 1");
    require(mu_ + nu_ > 1.0, "(A3) requires mu + nu > 1");
    ref_ = decompose_spd(matrix(0.0), "OperatorFamily reference");
}

Matrix OperatorFamily::matrix(double t) const {
    require(t >= -1e-12 && t <= horizon_ * (1.0 + 1e-12),
            "OperatorFamily: t outside [0, horizon]");
    t = std::clamp(t, 0.0, horizon_);
    Matrix m;
    if (grid_) {
        m = assemble_operator(*coeffs_, t, *grid_);
    } else {
        m = samples_(t);
        require(m.rows() == dim_ && m.cols() == dim_,
                "OperatorFamily: sample has wrong dimensions");
        check_symmetric(m, "OperatorFamily sample");
    }
    if (!m.allFinite()) throw NumericError("OperatorFamily: sample is not finite");
    return m;
}

SpectralDecomposition OperatorFamily::decomposition(double t) const {
    return decompose_spd(matrix(t), "OperatorFamily");
}

double OperatorFamily::mass_weight() const { return grid_ ? grid_->h : 1.0; }

Matrix fractional_power(const Matrix& spd, double theta) {
    require(std::isfinite(theta), "fractional_power: theta must be finite");
    return decompose_spd(spd, "fractional_power").power(theta);
}

SectorialReport resolvent_scan(const OperatorFamily& family, double t,
                               double ray_angle, int points) {
    constexpr double varpi = 3.14159265358979323846 / 4.0;
    require(ray_angle > varpi && ray_angle <= 3.14159265358979323846 + 1e-12,
            "resolvent_scan: ray angle must lie in (pi/4, pi]");
    require(points >= 2, "resolvent_scan: need at least two samples");
    const auto dec = family.decomposition(t);
    const double lo = dec.min_eigenvalue() * 1e-3;
    const double hi = dec.max_eigenvalue() * 1e3;
    SectorialReport report;
    report.varpi = varpi;
    report.m_hat = 0.0;
    const double c = std::cos(ray_angle), s = std::sin(ray_angle);
    for (double r : log_spaced(lo, hi, points)) {
        // Symmetric sample: resolvent norm = 1 / dist(lambda, spectrum).
        double dist2 = std::numeric_limits<double>::infinity();
        for (int i = 0; i < dec.eigenvalues.size(); ++i) {
            const double re = r * c - dec.eigenvalues(i), im = r * s;
            dist2 = std::min(dist2, re * re + im * im);
        }
        const double product = r / std::sqrt(dist2);
        require_finite(product, "resolvent scan sample");
        report.samples.emplace_back(r, product);
        report.m_hat = std::max(report.m_hat, product);
    }
    return report;
}

TemporalHolderReport temporal_holder_scan(const OperatorFamily& family, double nu,
                                          const std::vector<double>& times) {
    require(nu > 0.0 && nu <= 1.0, "(A2) requires 0 < nu <= 1");
    require(times.size() >= 2, "temporal_holder_scan: need at least two times");
    std::vector<SpectralDecomposition> decs;
    decs.reserve(times.size());
    for (double t : times) decs.push_back(family.decomposition(t));

    TemporalHolderReport report;
    std::vector<double> log_gap, log_defect;
    for (std::size_t j = 1; j < times.size(); ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            const double gap = times[j] - times[i];
            require(gap > 0.0, "temporal_holder_scan: times must be strictly increasing");
            const Matrix diff = decs[j].power(nu) *
                                (decs[j].power(-1.0) - decs[i].power(-1.0));
            const double defect = ambient_operator_norm(family, diff);
            report.gaps.push_back(gap);
            report.defects.push_back(defect);
            report.n_sup = std::max(report.n_sup, defect / std::pow(gap, family.mu()));
            if (defect > 1e-13) {
                log_gap.push_back(std::log(gap));
                log_defect.push_back(std::log(defect));
            }
        }
    }
    if (log_gap.size() < 2) {
        report.autonomous = true;
        report.mu_hat = std::numeric_limits<double>::quiet_NaN();
        report.n_fit = 0.0;
        report.n_sup = 0.0;
        return report;
    }
    const LineFit fit = fit_line(log_gap, log_defect);
    report.mu_hat = fit.slope;
    report.n_fit = std::exp(fit.intercept);
    return report;
}

double dual_norm(const OperatorFamily& family, const Vector& u) {
    require(u.size() == family.dim(), "dual_norm: dimension mismatch");
    const auto& ref = family.reference();
    Vector coeffs = ref.eigenvectors.transpose() * u;
    coeffs.array() *= ref.eigenvalues.array().rsqrt();
    return coeffs.norm() * std::sqrt(family.mass_weight());
}

double ambient_operator_norm(const OperatorFamily& family, const Matrix& op) {
    require(op.rows() == family.dim() && op.cols() == family.dim(),
            "ambient_operator_norm: dimension mismatch");
    const auto& ref = family.reference();
    const Vector isqrt = ref.eigenvalues.array().rsqrt();
    const Vector fsqrt = ref.eigenvalues.array().sqrt();
    const Matrix weighted = isqrt.asDiagonal() * (ref.eigenvectors.transpose() * op *
                                                  ref.eigenvectors) * fsqrt.asDiagonal();
    return spectral_norm(weighted);
}

double ambient_map_norm(const OperatorFamily& family, const Matrix& map) {
    require(map.rows() == family.dim(), "ambient_map_norm: row mismatch");
    const auto& ref = family.reference();
    const Vector isqrt = ref.eigenvalues.array().rsqrt();
    const Matrix weighted = isqrt.asDiagonal() * (ref.eigenvectors.transpose() * map);
    return spectral_norm(weighted) * std::sqrt(family.mass_weight());
}

namespace detail {

double fractional_difference_scan(const OperatorFamily& family, double th1,
                                  double th2, const std::vector<double>& times) {
    require(times.size() >= 2, "fractional difference scan: need at least two times");
    std::vector<SpectralDecomposition> decs;
    decs.reserve(times.size());
    for (double t : times) decs.push_back(family.decomposition(t));
    double alpha = 0.0;
    for (std::size_t j = 1; j < times.size(); ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            const double gap = times[j] - times[i];
            require(gap > 0.0, "fractional difference scan: times must increase");
            const Matrix diff = (decs[j].power(th1) - decs[i].power(th1)) *
                                decs[i].power(-th2);
            alpha = std::max(alpha, ambient_operator_norm(family, diff) /
                                        std::pow(gap, family.mu()));
        }
    }
    require_finite(alpha, "fractional difference constant");
    return alpha;
}

}  // namespace detail

double fractional_difference_constant(const OperatorFamily& family, double th1,
                                      double th2, const std::vector<double>& times) {
    require(th1 > 0.0 && th1 < th2 && th2 < 1.0,
            "fractional_difference_constant requires 0 < theta1 < theta2 < 1");
    return detail::fractional_difference_scan(family, th1, th2, times);
}

}  // namespace sevolab
