#pragma once

#include <memory>
#include <tuple>

#include "sevolab/holder_spaces.hpp"
#include "sevolab/operator_core.hpp"

namespace sevolab {

// Scaling-and-squaring Pade(13) exponential; symmetric input takes the exact
// spectral path.
Matrix matrix_exponential(const Matrix& a);

namespace detail {
// Pade path regardless of symmetry, for cross-validation against the
// spectral path by an independent algorithm.
Matrix pade_exponential(const Matrix& a);
}  // namespace detail

enum class SchemeKind { FrozenExponential, ImplicitEuler };

std::string scheme_name(SchemeKind kind);
SchemeKind parse_scheme(const std::string& name);

// Two-parameter propagator approximation U(t, s). Frozen exponential freezes
// the operator at the left endpoint of each substep; implicit Euler solves
// (I + dt A(right endpoint)) backward steps. Consecutive substeps whose
// operator samples are bitwise identical are folded into one exponential,
// so autonomous products collapse to a single exact factor.
struct EvolutionScheme {
    SchemeKind kind = SchemeKind::FrozenExponential;
    int substeps_per_unit = 256;
    std::shared_ptr<const OperatorFamily> family;

    std::string tag() const;
    void validate() const;
};

Vector propagate(const EvolutionScheme& scheme, double s, double t, const Vector& v);
Matrix propagator_matrix(const EvolutionScheme& scheme, double s, double t);

struct Trajectory {
    std::vector<double> times;
    Matrix states;  // times.size() rows, one state per row
    std::string scheme_tag;
    std::string quantity;  // "X", "I1", "W0", "W1", ...

    Vector state(std::size_t i) const { return states.row(i).transpose(); }
    void validate() const;
    int dim() const { return static_cast<int>(states.cols()); }
};

// Per-step propagators on a solve grid, substepped per the scheme. Steps whose
// substep samples repeat the previous step reuse the same matrix.
class PropagatorTable {
  public:
    PropagatorTable(const EvolutionScheme& scheme, std::vector<double> grid);
    const Matrix& step(std::size_t k) const { return *steps_[k]; }
    const std::vector<double>& grid() const { return grid_; }
    std::size_t step_count() const { return steps_.size(); }

  private:
    std::vector<double> grid_;
    std::vector<std::shared_ptr<const Matrix>> steps_;
};

// X_{k+1} = P_k (X_k + dt * F(t_k)); forcing sampled on the same grid.
Trajectory deterministic_solve(const EvolutionScheme& scheme, const Vector& xi,
                               const SampledPath& forcing,
                               const std::vector<double>& grid);

struct EvolutionConstants {
    std::vector<double> thetas;
    std::vector<double> iota;  // iota_hat per theta
    std::vector<std::tuple<double, double, double>> kappa;  // (th1, th2, kappa_hat)
    double c_mu_nu = 0.0;  // commutation defect constant
    std::size_t pair_count = 0;
};

// Scans (t-s)^theta ||A(t)^theta U(t,s)||, the two-exponent variant with
// A(s)^{th1-th2} on the right, and the frozen-commutator defect
// ||[A(t) U(t,s) A(s)^{-1} - exp(-(t-s)A(s))] A(s)|| / (t-s)^{mu+nu-1}.
// Requires 0 <= theta < mu+nu; pairs need 0 <= s < t <= horizon.
EvolutionConstants evolution_constants_scan(
    const EvolutionScheme& scheme, const std::vector<double>& thetas,
    const std::vector<std::pair<double, double>>& pairs);

}  // namespace sevolab
