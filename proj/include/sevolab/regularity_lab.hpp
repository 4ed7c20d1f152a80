#pragma once

#include "sevolab/strict_solver.hpp"

namespace sevolab {

// Trajectories of one quantity over independent driving paths, all on the
// same time grid.
struct Ensemble {
    std::vector<Trajectory> members;
    std::vector<std::uint64_t> streams;
    std::string problem_hash;
    std::string quantity;  // "X", "AX", "W0", "W1", "brownian"

    void validate() const;
    const std::vector<double>& times() const;
};

// Solves `paths` copies of the problem with streams 0..paths-1 and keeps the
// requested quantity. AX is A(t_k) X_k sampled on the grid. output_stride > 1
// thins the stored states (the final time is always kept); the solve itself
// still walks the full grid.
Ensemble solution_ensemble(const ProblemSpec& problem, SchemeKind kind,
                           int substeps_per_unit, const std::vector<double>& grid,
                           int paths, std::uint64_t seed, int threads,
                           const std::string& quantity = "X", int output_stride = 1);

// Scalar Brownian value paths (for the exponent-recovery baseline).
Ensemble brownian_ensemble(const std::vector<double>& grid, int paths,
                           std::uint64_t seed, int threads);

struct StructureTable {
    std::vector<double> lags;
    std::vector<double> moments;  // mean over paths and admissible t
    std::vector<double> ses;      // batch standard error across paths
    double p = 2;
    std::string quantity;
};

// S_p(lag) = mean ||Z(t + lag) - Z(t)||^p with t restricted to
// [window_lo, window_hi - lag]. Lags must align with the grid spacing.
StructureTable structure_function(const Ensemble& ensemble, double p,
                                  const std::vector<double>& lags, const NormFn& norm,
                                  double window_lo = 0.0, double window_hi = -1.0);

struct FitReport {
    double slope = 0, slope_ci = 0;  // log-log slope, 1.96-sigma half width
    double holder_hat = 0;           // slope / p   (Gaussian convention)
    double kol1_hat = 0;             // (slope - 1) / p
    double log_intercept = 0;
    double window_lo = 0, window_hi = 0;
    bool degenerate = false;
};

FitReport estimate_holder_exponent(const StructureTable& table);

struct MomentBoundReport {
    double c_hat = 0;         // max over t of curve / envelope
    double binding_time = 0;  // argmax
    std::vector<double> times, curve, envelope;
    std::string regime;  // "beta>=delta" or "beta<delta"
    double xi_term = 0, f_term = 0, g_term = 0;  // measured envelope ingredients
};

// curve(t) = mean ||A(t)^beta X(t)||_E^2 against the structural envelope
//   xi_term + f_term + g_term * r1(t) + r2(t),
// r1, r2 = t^{1-2(beta-delta)}, t^{1-2(beta-delta)+2sigma} when beta >= delta
// and t, t^{1+2sigma} otherwise. Ensemble quantity must be "X" and match the
// problem hash.
MomentBoundReport moment_bound_check(const Ensemble& ensemble,
                                     const ProblemSpec& problem);

struct EnsembleSummary {
    std::vector<double> thetas;
    std::vector<double> times;
    std::vector<std::vector<double>> mean_sq;  // per theta: E||A(t)^th Z(t)||_E^2
    std::vector<std::vector<double>> ci;       // 1.96 * SE half widths
    int paths = 0;
};

EnsembleSummary summarize_ensemble(const Ensemble& ensemble, const ProblemSpec& problem,
                                   const std::vector<double>& thetas);

}  // namespace sevolab
