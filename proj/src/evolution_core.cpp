#include "sevolab/evolution_core.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cstring>
#include <map>

namespace sevolab {

namespace {

bool bitwise_equal(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(),
                       sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

Matrix symmetric_exponential(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success)
        throw NumericError("matrix_exponential: symmetric eigensolver failed");
    const Vector e = es.eigenvalues().array().exp();
    return es.eigenvectors() * e.asDiagonal() * es.eigenvectors().transpose();
}

Matrix pade13_exponential(Matrix a) {
    // Scaling and squaring with the degree-13 Pade approximant.
    static const double b[14] = {64764752532480000.0, 32382376266240000.0,
                                 7771770303897600.0,  1187353796428800.0,
                                 129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,
                                 1323241920.0,        40840800.0,
                                 960960.0,            16380.0,
                                 182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;
    const int n = static_cast<int>(a.rows());
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
        a /= std::pow(2.0, squarings);
    }
    const Matrix id = Matrix::Identity(n, n);
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a2 * a4;
    const Matrix u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) +
                          b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
    const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) +
                     b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
    Matrix r = (v - u).partialPivLu().solve(v + u);
    for (int i = 0; i < squarings; ++i) r = r * r;
    return r;
}

bool is_symmetric(const Matrix& m) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

int substep_count(double s, double t, int spu) {
    const double raw = (t - s) * spu;
    return std::max(1, static_cast<int>(std::ceil(raw - 1e-9)));
}

// Substep operator samples with frozen-kind runs of bitwise-identical samples
// merged into a single exponential of the summed length.
struct SubstepGroup {
    Matrix sample;
    double tau = 0.0;   // total length (frozen) or single substep length (euler)
    int repeats = 1;    // euler: number of identical substeps
};

std::vector<SubstepGroup> plan_substeps(const EvolutionScheme& scheme, double s,
                                        double t) {
    const int k = substep_count(s, t, scheme.substeps_per_unit);
    const double dt = (t - s) / k;
    std::vector<SubstepGroup> groups;
    for (int j = 0; j < k; ++j) {
        // Frozen exponential samples the left endpoint, backward Euler the right.
        const double tau_j = scheme.kind == SchemeKind::FrozenExponential
                                 ? s + j * dt
                                 : s + (j + 1) * dt;
        Matrix a = scheme.family->matrix(tau_j);
        if (!groups.empty() && bitwise_equal(groups.back().sample, a)) {
            if (scheme.kind == SchemeKind::FrozenExponential)
                groups.back().tau += dt;
            else
                groups.back().repeats += 1;
        } else {
            groups.push_back({std::move(a), dt, 1});
        }
    }
    return groups;
}

void apply_group(const EvolutionScheme& scheme, const SubstepGroup& g, Vector& v) {
    if (scheme.kind == SchemeKind::FrozenExponential) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(g.sample);
        if (es.info() != Eigen::Success)
            throw NumericError("propagate: eigensolver failed");
        Vector c = es.eigenvectors().transpose() * v;
        c.array() *= (-g.tau * es.eigenvalues().array()).exp();
        v = es.eigenvectors() * c;
    } else {
        const Matrix step = Matrix::Identity(g.sample.rows(), g.sample.cols()) +
                            g.tau * g.sample;
        const auto solver = step.ldlt();
        if (solver.info() != Eigen::Success)
            throw NumericError("propagate: implicit step factorization failed");
        for (int r = 0; r < g.repeats; ++r) v = solver.solve(v);
    }
}

void apply_group_matrix(const EvolutionScheme& scheme, const SubstepGroup& g, Matrix& m) {
    if (scheme.kind == SchemeKind::FrozenExponential) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(g.sample);
        if (es.info() != Eigen::Success)
            throw NumericError("propagator_matrix: eigensolver failed");
        const Vector e = (-g.tau * es.eigenvalues().array()).exp();
        m = es.eigenvectors() * (e.asDiagonal() * (es.eigenvectors().transpose() * m));
    } else {
        const Matrix step = Matrix::Identity(g.sample.rows(), g.sample.cols()) +
                            g.tau * g.sample;
        const auto solver = step.ldlt();
        if (solver.info() != Eigen::Success)
            throw NumericError("propagator_matrix: implicit step factorization failed");
        for (int r = 0; r < g.repeats; ++r) m = solver.solve(m);
    }
}

}  // namespace

Matrix matrix_exponential(const Matrix& a) {
    require(a.rows() == a.cols() && a.rows() >= 1,
            "matrix_exponential: matrix must be square");
    if (!a.allFinite()) throw NumericError("matrix_exponential: non-finite input");
    if (is_symmetric(a)) return symmetric_exponential(a);
    return pade13_exponential(a);
}

namespace detail {

Matrix pade_exponential(const Matrix& a) {
    require(a.rows() == a.cols() && a.rows() >= 1,
            "pade_exponential: matrix must be square");
    if (!a.allFinite()) throw NumericError("pade_exponential: non-finite input");
    return pade13_exponential(a);
}

}  // namespace detail

std::string scheme_name(SchemeKind kind) {
    return kind == SchemeKind::FrozenExponential ? "frozen-exponential" : "implicit-euler";
}

SchemeKind parse_scheme(const std::string& name) {
    if (name == "frozen-exponential") return SchemeKind::FrozenExponential;
    if (name == "implicit-euler") return SchemeKind::ImplicitEuler;
    throw ValidationError("unknown scheme '" + name +
                          "', expected frozen-exponential or implicit-euler");
}

std::string EvolutionScheme::tag() const {
    return scheme_name(kind) + "/spu" + std::to_string(substeps_per_unit);
}

void EvolutionScheme::validate() const {
    require(static_cast<bool>(family), "EvolutionScheme: missing operator family");
    require(substeps_per_unit >= 1, "EvolutionScheme: substeps_per_unit must be >= 1");
}

Vector propagate(const EvolutionScheme& scheme, double s, double t, const Vector& v) {
    scheme.validate();
    require(v.size() == scheme.family->dim(), "propagate: dimension mismatch");
    require(s >= 0.0 && t <= scheme.family->horizon() * (1.0 + 1e-12) && t >= s,
            "propagate: need 0 <= s <= t <= horizon");
    if (t == s) return v;
    Vector out = v;
    for (const auto& g : plan_substeps(scheme, s, t)) apply_group(scheme, g, out);
    return out;
}

Matrix propagator_matrix(const EvolutionScheme& scheme, double s, double t) {
    scheme.validate();
    require(s >= 0.0 && t <= scheme.family->horizon() * (1.0 + 1e-12) && t >= s,
            "propagator_matrix: need 0 <= s <= t <= horizon");
    Matrix u = Matrix::Identity(scheme.family->dim(), scheme.family->dim());
    if (t == s) return u;
    for (const auto& g : plan_substeps(scheme, s, t)) apply_group_matrix(scheme, g, u);
    return u;
}

void Trajectory::validate() const {
    require(static_cast<std::size_t>(states.rows()) == times.size() && !times.empty(),
            "Trajectory: time/state count mismatch");
    require(states.cols() >= 1, "Trajectory: empty states");
    for (std::size_t i = 1; i < times.size(); ++i)
        require(times[i] > times[i - 1], "Trajectory: times must increase");
    if (!states.allFinite()) throw NumericError("Trajectory: non-finite state");
}

PropagatorTable::PropagatorTable(const EvolutionScheme& scheme, std::vector<double> grid)
    : grid_(std::move(grid)) {
    scheme.validate();
    require(grid_.size() >= 2, "PropagatorTable: need at least two grid times");
    require(grid_.front() >= 0.0 &&
                grid_.back() <= scheme.family->horizon() * (1.0 + 1e-12),
            "PropagatorTable: grid outside [0, horizon]");
    steps_.reserve(grid_.size() - 1);
    std::vector<SubstepGroup> prev_plan;
    for (std::size_t k = 0; k + 1 < grid_.size(); ++k) {
        require(grid_[k + 1] > grid_[k], "PropagatorTable: grid times must increase");
        auto plan = plan_substeps(scheme, grid_[k], grid_[k + 1]);
        bool reuse = k > 0 && plan.size() == prev_plan.size();
        if (reuse) {
            for (std::size_t g = 0; g < plan.size(); ++g) {
                if (plan[g].tau != prev_plan[g].tau ||
                    plan[g].repeats != prev_plan[g].repeats ||
                    !bitwise_equal(plan[g].sample, prev_plan[g].sample)) {
                    reuse = false;
                    break;
                }
            }
        }
        if (reuse) {
            steps_.push_back(steps_.back());
        } else {
            Matrix u = Matrix::Identity(scheme.family->dim(), scheme.family->dim());
            for (const auto& g : plan) apply_group_matrix(scheme, g, u);
            steps_.push_back(std::make_shared<const Matrix>(std::move(u)));
        }
        prev_plan = std::move(plan);
    }
}

Trajectory deterministic_solve(const EvolutionScheme& scheme, const Vector& xi,
                               const SampledPath& forcing,
                               const std::vector<double>& grid) {
    scheme.validate();
    require(xi.size() == scheme.family->dim(), "deterministic_solve: xi dimension");
    require(forcing.times.size() == grid.size(),
            "deterministic_solve: forcing must be sampled on the solve grid");
    for (std::size_t i = 0; i < grid.size(); ++i)
        require(std::abs(forcing.times[i] - grid[i]) <= 1e-12,
                "deterministic_solve: forcing grid mismatch");
    require(forcing.dim() == scheme.family->dim(), "deterministic_solve: forcing dim");

    PropagatorTable table(scheme, grid);
    Trajectory traj;
    traj.times = grid;
    traj.scheme_tag = scheme.tag();
    traj.quantity = "X";
    traj.states.resize(grid.size(), xi.size());
    Vector x = xi;
    traj.states.row(0) = x.transpose();
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double dt = grid[k + 1] - grid[k];
        x = table.step(k) * (x + dt * forcing.values[k]);
        traj.states.row(k + 1) = x.transpose();
    }
    traj.validate();
    return traj;
}

EvolutionConstants evolution_constants_scan(
    const EvolutionScheme& scheme, const std::vector<double>& thetas,
    const std::vector<std::pair<double, double>>& pairs) {
    scheme.validate();
    const auto& family = *scheme.family;
    const double reach = family.mu() + family.nu();
    for (double th : thetas)
        require(th >= 0.0 && th < reach,
                "(E4) exponent out of range: theta must lie in [0, mu + nu)");
    require(!pairs.empty(), "evolution_constants_scan: no pairs");

    std::map<double, SpectralDecomposition> decs;
    const auto dec_at = [&](double t) -> const SpectralDecomposition& {
        auto it = decs.find(t);
        if (it == decs.end()) it = decs.emplace(t, family.decomposition(t)).first;
        return it->second;
    };

    EvolutionConstants out;
    out.thetas = thetas;
    out.iota.assign(thetas.size(), 0.0);
    for (std::size_t i = 0; i < thetas.size(); ++i)
        for (std::size_t j = 0; j < thetas.size(); ++j)
            if (thetas[i] <= thetas[j] && thetas[i] <= 1.0 + 1e-12)
                out.kappa.emplace_back(thetas[i], thetas[j], 0.0);
    out.pair_count = pairs.size();

    for (const auto& [s, t] : pairs) {
        require(s >= 0.0 && t > s && t <= family.horizon() * (1.0 + 1e-12),
                "evolution_constants_scan: need 0 <= s < t <= horizon");
        const double gap = t - s;
        const Matrix u = propagator_matrix(scheme, s, t);
        const auto& dt_dec = dec_at(t);
        const auto& ds_dec = dec_at(s);

        for (std::size_t i = 0; i < thetas.size(); ++i) {
            const double cand = std::pow(gap, thetas[i]) *
                                ambient_operator_norm(family, dt_dec.power(thetas[i]) * u);
            out.iota[i] = std::max(out.iota[i], cand);
        }
        for (auto& [th1, th2, value] : out.kappa) {
            const double cand =
                std::pow(gap, th1) *
                ambient_operator_norm(family,
                                      dt_dec.power(th2) * u * ds_dec.power(th1 - th2));
            value = std::max(value, cand);
        }
        // Commutation defect against the frozen semigroup at s.
        const Matrix a_t = family.matrix(t);
        const Matrix a_s = family.matrix(s);
        const Vector e = (-gap * ds_dec.eigenvalues.array()).exp();
        const Matrix frozen = ds_dec.eigenvectors * e.asDiagonal() *
                              ds_dec.eigenvectors.transpose();
        const Matrix defect = (a_t * u * ds_dec.power(-1.0) - frozen) * a_s;
        out.c_mu_nu = std::max(out.c_mu_nu,
                               ambient_operator_norm(family, defect) /
                                   std::pow(gap, family.mu() + family.nu() - 1.0));
    }
    return out;
}

}  // namespace sevolab
