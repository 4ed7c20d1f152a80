#include "sevolab/strict_solver.hpp"

#include <sstream>

#include "sevolab/sha256.hpp"

namespace sevolab {

void ProblemSpec::validate() const {
    require(static_cast<bool>(family), "ProblemSpec: missing operator family");
    f_params.validate();
    const double mu = family->mu(), nu = family->nu();
    require(f_params.sigma < std::min(f_params.beta, mu + nu - 1.0),
            "(F1) requires 0 < sigma < min{beta, mu + nu - 1}");
    require(static_cast<bool>(forcing), "ProblemSpec: missing forcing sampler");
    require(xi.size() == family->dim(), "ProblemSpec: xi dimension mismatch");
    require(horizon > 0.0 && horizon <= family->horizon() * (1.0 + 1e-12),
            "ProblemSpec: horizon outside the family's interval");
    if (!noise.trivial()) {
        require(noise.rows == family->dim(), "ProblemSpec: noise rows mismatch");
        require(noise.cols >= 1, "ProblemSpec: noise columns");
        require(delta > 0.5, "(G1) requires delta > 1/2");
        require(delta1 >= delta && delta1 <= 1.0, "(G2) requires delta <= delta1 <= 1");
    }
}

std::string ProblemSpec::hash() const {
    std::ostringstream ss;
    ss.precision(17);
    ss << "family=" << family->tag() << ";dim=" << family->dim()
       << ";mu=" << family->mu() << ";nu=" << family->nu()
       << ";beta=" << f_params.beta << ";sigma=" << f_params.sigma
       << ";delta=" << delta << ";delta1=" << delta1 << ";T=" << horizon
       << ";noise=" << noise.tag << ";tag=" << tag << ";xi=";
    for (int i = 0; i < xi.size(); ++i) ss << xi(i) << ",";
    return sha256_hex(ss.str());
}

Vector ProblemSpec::forcing_sample(const std::vector<double>& grid, std::size_t k) const {
    require(k < grid.size(), "forcing_sample: index out of range");
    // First cell sampled at t_1: keeps a t^{beta-1} start integrable under the
    // left-endpoint rectangle rule.
    const double t = (k == 0 && grid.size() > 1) ? grid[1] : grid[k];
    Vector f = forcing(t);
    require(f.size() == family->dim(), "forcing sample dimension mismatch");
    if (!f.allFinite()) throw NumericError("forcing sample is not finite");
    return f;
}

namespace {

struct NoiseSamples {
    std::vector<Matrix> g;  // per step, empty when the noise is trivial
    bool active = false;
};

NoiseSamples sample_noise(const ProblemSpec& problem, const std::vector<double>& grid) {
    NoiseSamples out;
    if (problem.noise.trivial()) return out;
    out.active = true;
    out.g.reserve(grid.size() - 1);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k)
        out.g.push_back(problem.noise.at(grid[k]));
    return out;
}

}  // namespace

SolutionPath strict_solve(const ProblemSpec& problem, const BrownianPath& path,
                          SchemeKind kind, int substeps_per_unit,
                          const std::vector<double>& grid) {
    problem.validate();
    require(grid.size() >= 2, "strict_solve: need at least two grid times");
    require(std::abs(grid.back() - problem.horizon) <= 1e-12,
            "strict_solve: grid must end at the problem horizon");
    EvolutionScheme scheme{kind, substeps_per_unit, problem.family};
    scheme.validate();

    const BrownianPath coarse = path.restrict_to(grid);
    if (!problem.noise.trivial())
        require(problem.noise.cols == path.d, "strict_solve: noise columns vs driver");

    const std::size_t steps = grid.size() - 1;
    PropagatorTable table(scheme, grid);
    const NoiseSamples noise = sample_noise(problem, grid);

    const int n = problem.family->dim();
    SolutionPath sol;
    sol.driving = coarse;
    sol.scheme_tag = scheme.tag();
    sol.problem_hash = problem.hash();
    for (Trajectory* traj : {&sol.x, &sol.i1, &sol.w0, &sol.w1}) {
        traj->times = grid;
        traj->scheme_tag = scheme.tag();
        traj->states.resize(grid.size(), n);
    }
    sol.x.quantity = "X";
    sol.i1.quantity = "I1";
    sol.w0.quantity = "W0";
    sol.w1.quantity = "W1";

    Vector x = problem.xi, i1 = problem.xi, w0 = Vector::Zero(n);
    sol.x.states.row(0) = x.transpose();
    sol.i1.states.row(0) = i1.transpose();
    sol.w0.states.row(0) = w0.transpose();
    sol.w1.states.row(0) = (problem.family->matrix(grid[0]) * w0).transpose();

    for (std::size_t k = 0; k < steps; ++k) {
        const double dt = grid[k + 1] - grid[k];
        const Vector f = problem.forcing_sample(grid, k);
        Vector gdw = Vector::Zero(n);
        if (noise.active) gdw = noise.g[k] * coarse.increments.row(k).transpose();
        const Matrix& p = table.step(k);
        x = p * (x + dt * f + gdw);
        i1 = p * (i1 + dt * f);
        w0 = p * (w0 + gdw);
        sol.x.states.row(k + 1) = x.transpose();
        sol.i1.states.row(k + 1) = i1.transpose();
        sol.w0.states.row(k + 1) = w0.transpose();
        sol.w1.states.row(k + 1) = (problem.family->matrix(grid[k + 1]) * w0).transpose();
    }
    sol.x.validate();
    sol.i1.validate();
    sol.w0.validate();
    sol.w1.validate();
    return sol;
}

double strict_residual(const ProblemSpec& problem, const SolutionPath& sol) {
    problem.validate();
    const auto& grid = sol.x.times;
    require(grid.size() >= 2, "strict_residual: trajectory too short");
    const NoiseSamples noise = sample_noise(problem, grid);

    double worst = 0.0;
    Vector acc = Vector::Zero(problem.family->dim());  // int (A X - F) ds - int G dw
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const Vector defect = sol.x.state(m) - problem.xi + acc;
        worst = std::max(worst, dual_norm(*problem.family, defect));
        if (m + 1 < grid.size()) {
            const double dt = grid[m + 1] - grid[m];
            acc += dt * (problem.family->matrix(grid[m]) * sol.x.state(m) -
                         problem.forcing_sample(grid, m));
            if (noise.active)
                acc -= noise.g[m] * sol.driving.increments.row(m).transpose();
        }
    }
    return worst;
}

double fubini_defect(const ProblemSpec& problem, const SolutionPath& sol) {
    problem.validate();
    const auto& grid = sol.w0.times;
    const NoiseSamples noise = sample_noise(problem, grid);

    double worst = 0.0;
    Vector acc = Vector::Zero(problem.family->dim());  // int W1 ds - int G dw
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const Vector defect = sol.w0.state(m) + acc;
        worst = std::max(worst, dual_norm(*problem.family, defect));
        if (m + 1 < grid.size()) {
            const double dt = grid[m + 1] - grid[m];
            acc += dt * sol.w1.state(m);
            if (noise.active)
                acc -= noise.g[m] * sol.driving.increments.row(m).transpose();
        }
    }
    return worst;
}

double cross_scheme_distance(const ProblemSpec& problem, const BrownianPath& path,
                             int steps, int substeps_per_unit) {
    const auto grid = uniform_grid(problem.horizon, steps);
    const SolutionPath frozen =
        strict_solve(problem, path, SchemeKind::FrozenExponential, substeps_per_unit, grid);
    const SolutionPath euler =
        strict_solve(problem, path, SchemeKind::ImplicitEuler, substeps_per_unit, grid);
    double worst = 0.0;
    for (std::size_t m = 0; m < grid.size(); ++m)
        worst = std::max(worst, dual_norm(*problem.family,
                                          frozen.x.state(m) - euler.x.state(m)));
    return worst;
}

}  // namespace sevolab
