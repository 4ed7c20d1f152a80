#pragma once

#include <array>
#include <cstdint>

#include "sevolab/evolution_core.hpp"

namespace sevolab {

// Philox4x32-10 block; exposed for determinism tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Standard normal as a pure function of (seed, stream, index): identical bits
// for identical inputs on any platform, any call order, any thread count.
double philox_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

struct BrownianPath {
    int d = 1;
    std::vector<double> times;  // t_0 = 0 < ... < t_m
    Matrix increments;          // m x d, row k = w(t_{k+1}) - w(t_k)
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    std::size_t step_count() const { return times.size() - 1; }
    Vector value_at(std::size_t k) const;  // w(t_k)
    // Same randomness on a coarser grid: increments aggregated between the
    // coarse times, which must all appear in this path's grid.
    BrownianPath restrict_to(const std::vector<double>& coarse) const;
    void validate() const;
};

// Increment (k, j) is sqrt(dt_k) * N(seed, stream, k * d + j).
BrownianPath sample_brownian(int d, const std::vector<double>& times,
                             std::uint64_t seed, std::uint64_t stream = 0);

// t -> G(t) in L(R^d; E), E = R^rows.
struct NoiseMap {
    std::function<Matrix(double)> map;
    int rows = 0;
    int cols = 0;
    std::string tag;

    Matrix at(double t) const;  // shape/finiteness checked
    bool trivial() const { return rows == 0; }
};

// Left-endpoint Ito sum over the path grid; phi[k] maps R^d at step k.
Vector ito_integral(const std::vector<Matrix>& phi, const BrownianPath& path);

// W_theta(t) = A(t)^theta int_0^t U(t,s) G(s) dw_s by one-step recursion
// W_0(t_{k+1}) = P_k (W_0(t_k) + G(t_k) dw_k), then the spectral power at each
// output time. Noise increments are aggregated from path to grid.
Trajectory stochastic_convolution(const EvolutionScheme& scheme, const NoiseMap& noise,
                                  const BrownianPath& path, double theta,
                                  const std::vector<double>& grid);

struct NoiseConditionReport {
    double delta = 0, sigma = 0, delta1 = 0;
    double zeta_hat = 0;      // sup ||A(t)^d G(t) - A(s)^d G(s)|| / (t-s)^sigma
    double zeta_bar_hat = 0;  // sup ||A(0)^{d1} (G(t) - G(s))|| / (t-s)^sigma
    double sup_frozen = 0;    // sup_t ||A(0)^{d1} G(t)||
    double g0_level = 0;      // ||A(0)^{delta} G(0)||
    double alpha_d_d1 = 0, alpha_d_dp = 0, alpha_dp_d1 = 0;
    double derived_g1_constant = 0;
    bool g1_holds = false, g2_holds = false;
};

// Measures the noise regularity constants on `times` (must contain 0) and the
// constant transported from the frozen-operator condition through the
// fractional-difference scan with intermediate exponent (delta + delta1)/2.
// Requires 1/2 < delta <= delta1 <= 1 and 0 < sigma < 1.
NoiseConditionReport noise_condition_check(const NoiseMap& noise,
                                           const OperatorFamily& family,
                                           double delta, double delta1, double sigma,
                                           const std::vector<double>& times);

// Adapted step integrands phi_k = make(path)[k] (value_dim x d), sampled at
// left endpoints of the path grid.
struct IntegrandFamily {
    int d = 1;
    int value_dim = 1;
    std::vector<double> grid;
    std::function<std::vector<Matrix>(const BrownianPath&)> make;
    bool adapted = true;  // false: deterministic integrand, built once
    std::string tag;
};

struct MomentDiagnostics {
    double isometry_ratio = 0, isometry_se = 0;  // E||M_T||^2 / int E||phi||_F^2
    double bdg_ratio = 0, bdg_se = 0;  // E sup||M||^p / E (int ||phi||_F^2)^{p/2}
    double c_p_reference = 0;          // (p/(p-1))^p
    double c_p_hat = 0;                // bdg_ratio / reference
    double martingale_max_z = 0;  // max_t |mean M_t| / SE over 8 dyadic checkpoints
    int paths = 0;
    double p = 2;
};

MomentDiagnostics moment_diagnostics(const IntegrandFamily& family, int paths,
                                     double p, std::uint64_t seed, int threads = 1);

}  // namespace sevolab
