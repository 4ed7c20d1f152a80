#pragma once

#include "sevolab/stochastic_driver.hpp"

namespace sevolab {

// dX + A(t) X dt = F(t) dt + G(t) dw_t, X(0) = xi.
struct ProblemSpec {
    std::shared_ptr<const OperatorFamily> family;
    std::function<Vector(double)> forcing;  // F(t); may be singular at t = 0
    WeightedHolderParams f_params{1.0, 0.3};
    NoiseMap noise;
    double delta = 0.7, delta1 = 0.9;
    Vector xi;
    double horizon = 1.0;
    std::string tag;

    // Hypothesis gates: parameter ranges named after the conditions they
    // implement. Throws ValidationError.
    void validate() const;
    std::string hash() const;  // sha256 of the canonical description
    // Left-endpoint forcing samples; the first cell is sampled at t_1 so a
    // t^{beta-1} singularity stays integrable under the rectangle rule.
    Vector forcing_sample(const std::vector<double>& grid, std::size_t k) const;
};

struct SolutionPath {
    Trajectory x;    // strict solution samples
    Trajectory i1;   // deterministic part U(t,0)xi + int U F
    Trajectory w0;   // stochastic convolution
    Trajectory w1;   // A(t) W_0(t)
    BrownianPath driving;
    std::string scheme_tag;
    std::string problem_hash;
};

// One-step recursion X_{k+1} = P_k (X_k + dt F_k + G_k dw_k) with the same
// propagator table shared by all pieces; path must contain the grid times.
SolutionPath strict_solve(const ProblemSpec& problem, const BrownianPath& path,
                          SchemeKind kind, int substeps_per_unit,
                          const std::vector<double>& grid);

// Max over grid times of the ambient-norm defect in the integrated identity
// X(t) - xi + int A X ds - int F ds - int G dw.
double strict_residual(const ProblemSpec& problem, const SolutionPath& sol);

// Max ambient defect of W_0(t) + int_0^t W_1 ds - int_0^t G dw.
double fubini_defect(const ProblemSpec& problem, const SolutionPath& sol);

// Max ambient distance between frozen-exponential and implicit-Euler strict
// solutions driven by the same increments on a uniform grid with `steps`.
double cross_scheme_distance(const ProblemSpec& problem, const BrownianPath& path,
                             int steps, int substeps_per_unit);

}  // namespace sevolab
