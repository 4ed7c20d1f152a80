#pragma once

#include <memory>
#include <optional>
#include <utility>

#include "sevolab/common.hpp"

namespace sevolab {

// Interior grid for the interval (0, 1) with homogeneous Dirichlet ends.
struct Grid {
    int n;     // interior points, >= 2
    double h;  // spacing 1 / (n + 1)

    static Grid interior(int n);
    double point(int i) const { return (i + 1) * h; }       // x_i, i in [0, n)
    double midpoint(int j) const { return (j + 0.5) * h; }  // cell midpoints, j in [0, n]
};

// Scalar coefficient sampled at (x, t).
using SpaceTimeFn = std::function<double(double, double)>;

struct CoefficientField {
    SpaceTimeFn a;    // diffusion, samples must be positive
    SpaceTimeFn b;    // absorption, samples must be nonnegative
    std::string tag;  // canonical description used in problem hashes
};

// Eigen-decomposition of a symmetric positive definite operator sample.
struct SpectralDecomposition {
    Vector eigenvalues;   // ascending, all positive
    Matrix eigenvectors;  // orthonormal columns
    double reconstruction_error = 0.0;  // relative Frobenius defect

    Matrix power(double theta) const;
    Vector apply_power(double theta, const Vector& v) const;
    double min_eigenvalue() const { return eigenvalues(0); }
    double max_eigenvalue() const { return eigenvalues(eigenvalues.size() - 1); }
};

// Time-indexed family t -> A(t) on [0, horizon], either assembled from grid
// coefficients or supplied as an explicit symmetric-definite matrix family.
// The decomposition of A(0) is precomputed; it induces the ambient norm
// ||u||_E = sqrt(h) * ||A(0)^{-1/2} u||_2 used for every reported norm.
class OperatorFamily {
  public:
    OperatorFamily(Grid grid, CoefficientField coeffs, double horizon,
                   double mu = 1.0, double nu = 1.0);
    OperatorFamily(std::function<Matrix(double)> samples, int dim, double horizon,
                   double mu, double nu, std::string tag);

    Matrix matrix(double t) const;
    SpectralDecomposition decomposition(double t) const;
    const SpectralDecomposition& reference() const { return ref_; }

    int dim() const { return dim_; }
    double horizon() const { return horizon_; }
    double mu() const { return mu_; }
    double nu() const { return nu_; }
    double mass_weight() const;  // sqrt factor of the ambient norm: grid h or 1
    const std::optional<Grid>& grid() const { return grid_; }
    const std::string& tag() const { return tag_; }

  private:
    std::optional<Grid> grid_;
    std::optional<CoefficientField> coeffs_;
    std::function<Matrix(double)> samples_;
    int dim_;
    double horizon_, mu_, nu_;
    std::string tag_;
    SpectralDecomposition ref_;
};

// Conservative-flux stencil with midpoint-sampled diffusion. Throws
// ValidationError on a <= 0 or b < 0 samples, NumericError on non-finite.
Matrix assemble_operator(const CoefficientField& coeffs, double t, const Grid& grid);

// V lambda^theta V^T for symmetric positive definite input.
Matrix fractional_power(const Matrix& spd, double theta);

struct SectorialReport {
    double varpi;   // reported half-angle of the spectral sector
    double m_hat;   // max over samples of |lambda| * ||(lambda - A(t))^{-1}||
    std::vector<std::pair<double, double>> samples;  // (|lambda|, product)
};

// Samples the resolvent along the ray arg(lambda) = ray_angle. The family is
// symmetric definite, so the resolvent norm is the exact reciprocal distance
// to the spectrum. ray_angle must lie in (pi/4, pi].
SectorialReport resolvent_scan(const OperatorFamily& family, double t,
                               double ray_angle, int points);

struct TemporalHolderReport {
    double mu_hat = 0.0;   // log-log slope of the defect against t - s
    double n_fit = 0.0;    // exp(intercept) of that fit
    double n_sup = 0.0;    // sup defect / (t - s)^mu at the family's mu
    bool autonomous = false;  // all defects at rounding level
    std::vector<double> gaps, defects;
};

// Defect D(s, t) = ||A(t)^nu (A(t)^{-1} - A(s)^{-1})|| over all sampled pairs.
TemporalHolderReport temporal_holder_scan(const OperatorFamily& family, double nu,
                                          const std::vector<double>& times);

// Ambient (A(0)-weighted) norms. dual_norm is the vector norm; the operator
// variants measure maps E -> E and R^d -> E respectively.
double dual_norm(const OperatorFamily& family, const Vector& u);
double ambient_operator_norm(const OperatorFamily& family, const Matrix& op);
double ambient_map_norm(const OperatorFamily& family, const Matrix& map);

// alpha_hat = sup ||[A(t)^th1 - A(s)^th1] A(s)^{-th2}|| / (t-s)^mu over pairs.
// Public range 0 < th1 < th2 < 1.
double fractional_difference_constant(const OperatorFamily& family, double th1,
                                      double th2, const std::vector<double>& times);

namespace detail {
// Same scan without the th2 < 1 gate (noise-condition internals need th2 = 1).
double fractional_difference_scan(const OperatorFamily& family, double th1,
                                  double th2, const std::vector<double>& times);
}  // namespace detail

}  // namespace sevolab
