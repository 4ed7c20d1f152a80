#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sevolab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Shared tolerance for exact structural identities (spectral reconstruction,
// semigroup factorizations, serialization round trips).
inline constexpr double tol_spec = 1e-10;

// Parameter, shape, or hypothesis violations. Mapped to exit code 1 by the CLI.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Numerical failures (non-finite values, spectral breakdown). Exit code 2.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ValidationError(msg);
}

inline void require_finite(double x, const std::string& what) {
    if (!std::isfinite(x)) throw NumericError(what + " is not finite");
}

// Largest singular value. Matrices in the constant scans are small (n <= 64),
// so the accurate two-sided Jacobi SVD is affordable.
double spectral_norm(const Matrix& m);

// Weighted least squares line y ~ intercept + slope * x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;   // standard error from residual variance
    double r2 = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> w = {});

// Runs fn(i) for i in [0, count) on `threads` workers. Results must be written
// to disjoint preallocated slots; the partition is static so output never
// depends on scheduling.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& fn);

// Uniformly log-spaced values in [lo, hi].
std::vector<double> log_spaced(double lo, double hi, int count);

// Strictly increasing time grid 0 = t_0 < ... < t_m = horizon, uniform.
std::vector<double> uniform_grid(double horizon, int steps);

}  // namespace sevolab
