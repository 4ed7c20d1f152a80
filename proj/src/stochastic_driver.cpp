#include "sevolab/stochastic_driver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace sevolab {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * counter[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * counter[2];
        counter = {static_cast<std::uint32_t>(p1 >> 32) ^ counter[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ counter[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
        key[0] += w0;
        key[1] += w1;
    }
    return counter;
}

namespace {

inline double to_unit(std::uint64_t bits) {
    // 53-bit mantissa, strictly inside (0, 1) so both Box-Muller logs are safe.
    return static_cast<double>(bits >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

}  // namespace

double philox_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const auto block = philox4x32(
        {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
         static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)},
        {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
    const std::uint64_t hi = (static_cast<std::uint64_t>(block[0]) << 32) | block[1];
    const std::uint64_t lo = (static_cast<std::uint64_t>(block[2]) << 32) | block[3];
    const double u1 = to_unit(hi);
    const double u2 = to_unit(lo);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void BrownianPath::validate() const {
    require(d >= 1, "BrownianPath: d must be >= 1");
    require(times.size() >= 2, "BrownianPath: need at least two times");
    require(times.front() == 0.0, "BrownianPath: paths start at t = 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        require(times[i] > times[i - 1], "BrownianPath: times must increase");
    require(increments.rows() == static_cast<Eigen::Index>(times.size() - 1) &&
                increments.cols() == d,
            "BrownianPath: increment shape mismatch");
    if (!increments.allFinite()) throw NumericError("BrownianPath: non-finite increment");
}

Vector BrownianPath::value_at(std::size_t k) const {
    require(k < times.size(), "BrownianPath: index out of range");
    Vector v = Vector::Zero(d);
    for (std::size_t j = 0; j < k; ++j) v += increments.row(j).transpose();
    return v;
}

BrownianPath BrownianPath::restrict_to(const std::vector<double>& coarse) const {
    require(coarse.size() >= 2 && coarse.front() == 0.0,
            "restrict_to: coarse grid must start at 0");
    BrownianPath out;
    out.d = d;
    out.times = coarse;
    out.seed = seed;
    out.stream = stream;
    out.increments = Matrix::Zero(coarse.size() - 1, d);
    std::size_t fine = 0;
    for (std::size_t c = 0; c + 1 < coarse.size(); ++c) {
        require(coarse[c + 1] > coarse[c], "restrict_to: coarse times must increase");
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(d);
        while (fine + 1 < times.size() && times[fine + 1] <= coarse[c + 1] + 1e-12) {
            acc += increments.row(fine);
            ++fine;
        }
        require(std::abs(times[fine] - coarse[c + 1]) <= 1e-12,
                "restrict_to: coarse time absent from the fine grid");
        out.increments.row(c) = acc;
    }
    out.validate();
    return out;
}

BrownianPath sample_brownian(int d, const std::vector<double>& times,
                             std::uint64_t seed, std::uint64_t stream) {
    BrownianPath path;
    path.d = d;
    path.times = times;
    path.seed = seed;
    path.stream = stream;
    require(d >= 1, "sample_brownian: d must be >= 1");
    require(times.size() >= 2, "sample_brownian: need at least two times");
    path.increments.resize(times.size() - 1, d);
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const double dt = times[k + 1] - times[k];
        require(dt > 0.0, "sample_brownian: times must increase");
        const double scale = std::sqrt(dt);
        for (int j = 0; j < d; ++j)
            path.increments(k, j) =
                scale * philox_normal(seed, stream,
                                      static_cast<std::uint64_t>(k) * d + j);
    }
    path.validate();
    return path;
}

Matrix NoiseMap::at(double t) const {
    require(static_cast<bool>(map), "NoiseMap: empty map");
    Matrix g = map(t);
    require(g.rows() == rows && g.cols() == cols, "NoiseMap: sample shape mismatch");
    if (!g.allFinite()) throw NumericError("NoiseMap: non-finite sample");
    return g;
}

Vector ito_integral(const std::vector<Matrix>& phi, const BrownianPath& path) {
    path.validate();
    require(phi.size() == path.step_count(),
            "ito_integral: need one integrand sample per step");
    require(!phi.empty(), "ito_integral: empty integrand");
    const Eigen::Index vd = phi.front().rows();
    Vector acc = Vector::Zero(vd);
    for (std::size_t k = 0; k < phi.size(); ++k) {
        require(phi[k].rows() == vd && phi[k].cols() == path.d,
                "ito_integral: integrand shape mismatch");
        acc += phi[k] * path.increments.row(k).transpose();
    }
    return acc;
}

Trajectory stochastic_convolution(const EvolutionScheme& scheme, const NoiseMap& noise,
                                  const BrownianPath& path, double theta,
                                  const std::vector<double>& grid) {
    scheme.validate();
    require(noise.rows == scheme.family->dim(), "stochastic_convolution: noise rows");
    require(noise.cols == path.d, "stochastic_convolution: noise columns vs driver");
    require(theta >= 0.0 && theta < scheme.family->mu() + scheme.family->nu(),
            "(E4) exponent out of range: theta must lie in [0, mu + nu)");
    const BrownianPath coarse = path.restrict_to(grid);
    PropagatorTable table(scheme, grid);

    Trajectory traj;
    traj.times = grid;
    traj.scheme_tag = scheme.tag();
    traj.quantity = theta == 0.0 ? "W0" : "W_theta";
    traj.states.resize(grid.size(), scheme.family->dim());
    Vector w = Vector::Zero(scheme.family->dim());
    traj.states.row(0) = w.transpose();
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const Matrix g = noise.at(grid[k]);
        w = table.step(k) * (w + g * coarse.increments.row(k).transpose());
        traj.states.row(k + 1) = w.transpose();
    }
    if (theta != 0.0) {
        for (std::size_t m = 0; m < grid.size(); ++m) {
            const auto dec = scheme.family->decomposition(grid[m]);
            traj.states.row(m) =
                dec.apply_power(theta, traj.states.row(m).transpose()).transpose();
        }
    }
    traj.validate();
    return traj;
}

NoiseConditionReport noise_condition_check(const NoiseMap& noise,
                                           const OperatorFamily& family,
                                           double delta, double delta1, double sigma,
                                           const std::vector<double>& times) {
    require(delta > 0.5, "(G1) requires delta > 1/2");
    require(delta1 >= delta && delta1 <= 1.0,
            "(G2) requires delta <= delta1 <= 1");
    require(sigma > 0.0 && sigma < 1.0, "(G1) requires 0 < sigma < 1");
    require(sigma <= family.mu(),
            "(G1)->(G2) transport requires sigma <= mu");
    require(times.size() >= 3, "noise_condition_check: need at least three times");
    require(times.front() == 0.0, "noise_condition_check: times must start at 0");
    require(noise.rows == family.dim(), "noise_condition_check: noise rows");

    const std::size_t m = times.size();
    std::vector<SpectralDecomposition> decs;
    std::vector<Matrix> g;
    decs.reserve(m);
    g.reserve(m);
    for (double t : times) {
        decs.push_back(family.decomposition(t));
        g.push_back(noise.at(t));
    }

    NoiseConditionReport rep;
    rep.delta = delta;
    rep.delta1 = delta1;
    rep.sigma = sigma;

    const auto& ref = family.reference();
    std::vector<Matrix> adg(m), refg(m);
    for (std::size_t i = 0; i < m; ++i) {
        adg[i] = decs[i].power(delta) * g[i];
        refg[i] = ref.power(delta1) * g[i];
        rep.sup_frozen = std::max(rep.sup_frozen, ambient_map_norm(family, refg[i]));
    }
    rep.g0_level = ambient_map_norm(family, ref.power(delta) * g[0]);

    for (std::size_t j = 1; j < m; ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            const double gap = times[j] - times[i];
            require(gap > 0.0, "noise_condition_check: times must increase");
            const double denom = std::pow(gap, sigma);
            rep.zeta_hat = std::max(
                rep.zeta_hat, ambient_map_norm(family, adg[j] - adg[i]) / denom);
            rep.zeta_bar_hat = std::max(
                rep.zeta_bar_hat,
                ambient_map_norm(family, ref.power(delta1) * (g[j] - g[i])) / denom);
        }
    }

    // Transported bound: split A(t)^delta G through A(0)^{delta1} with the
    // intermediate exponent delta' = (delta + delta1) / 2 on the second leg.
    const double delta_p = 0.5 * (delta + delta1);
    rep.alpha_d_d1 = detail::fractional_difference_scan(family, delta, delta1, times);
    rep.alpha_d_dp = detail::fractional_difference_scan(family, delta, delta_p, times);
    rep.alpha_dp_d1 = detail::fractional_difference_scan(family, delta_p, delta1, times);

    const double horizon = times.back();
    const double mu = family.mu();
    const double frozen_d_d1 = ambient_operator_norm(family, ref.power(delta - delta1));
    const double frozen_dp_d1 = ambient_operator_norm(family, ref.power(delta_p - delta1));
    rep.derived_g1_constant =
        (rep.alpha_d_d1 * std::pow(horizon, mu) + frozen_d_d1) * rep.zeta_bar_hat +
        rep.alpha_d_dp *
            (rep.alpha_dp_d1 * std::pow(horizon, mu) + frozen_dp_d1) *
            rep.sup_frozen * std::pow(horizon, mu - sigma);

    rep.g1_holds = std::isfinite(rep.zeta_hat) && std::isfinite(rep.g0_level);
    rep.g2_holds = std::isfinite(rep.zeta_bar_hat) && std::isfinite(rep.sup_frozen);
    require_finite(rep.derived_g1_constant, "derived (G1) constant");
    return rep;
}

MomentDiagnostics moment_diagnostics(const IntegrandFamily& family, int paths,
                                     double p, std::uint64_t seed, int threads) {
    require(paths >= 20, "moment_diagnostics: need at least 20 paths");
    require(p > 1.0, "moment_diagnostics: p must exceed 1");
    require(family.grid.size() >= 3, "moment_diagnostics: grid too short");
    require(static_cast<bool>(family.make), "moment_diagnostics: empty integrand");

    const std::size_t steps = family.grid.size() - 1;
    // Mean-zero checkpoints at eight dyadic fractions of the horizon.
    std::vector<std::size_t> checkpoints;
    for (int c = 1; c <= 8; ++c) checkpoints.push_back(steps * c / 8);

    std::vector<Matrix> fixed_phi;
    if (!family.adapted) {
        const BrownianPath probe = sample_brownian(family.d, family.grid, seed, 0);
        fixed_phi = family.make(probe);
    }

    std::vector<double> final_sq(paths), qv(paths), sup_p(paths), qv_p(paths);
    Matrix checkpoint_sums(paths, checkpoints.size() * family.value_dim);

    parallel_for(paths, threads, [&](std::size_t i) {
        const BrownianPath path = sample_brownian(family.d, family.grid, seed, i);
        const std::vector<Matrix>& phi = family.adapted ? family.make(path) : fixed_phi;
        require(phi.size() == steps, "moment_diagnostics: integrand step count");
        Vector msum = Vector::Zero(family.value_dim);
        double q = 0.0, sup_norm = 0.0;
        std::size_t next_cp = 0;
        for (std::size_t k = 0; k < steps; ++k) {
            require(phi[k].rows() == family.value_dim && phi[k].cols() == family.d,
                    "moment_diagnostics: integrand shape");
            const double dt = family.grid[k + 1] - family.grid[k];
            msum += phi[k] * path.increments.row(k).transpose();
            q += phi[k].squaredNorm() * dt;
            sup_norm = std::max(sup_norm, msum.norm());
            while (next_cp < checkpoints.size() && checkpoints[next_cp] == k + 1) {
                checkpoint_sums.block(i, next_cp * family.value_dim, 1,
                                      family.value_dim) = msum.transpose();
                ++next_cp;
            }
        }
        final_sq[i] = msum.squaredNorm();
        qv[i] = q;
        sup_p[i] = std::pow(sup_norm, p);
        qv_p[i] = std::pow(q, 0.5 * p);
    });

    // Batch-mean standard errors for the two ratios of means.
    constexpr int batches = 20;
    const auto ratio_stats = [&](const std::vector<double>& num,
                                 const std::vector<double>& den) {
        std::vector<double> batch_ratio;
        for (int b = 0; b < batches; ++b) {
            double ns = 0, ds = 0;
            int count = 0;
            for (int i = b; i < paths; i += batches) {
                ns += num[i];
                ds += den[i];
                ++count;
            }
            if (count > 0 && ds > 0) batch_ratio.push_back(ns / ds);
        }
        double mean = 0;
        for (double r : batch_ratio) mean += r;
        mean /= batch_ratio.size();
        double var = 0;
        for (double r : batch_ratio) var += (r - mean) * (r - mean);
        var /= (batch_ratio.size() - 1.0);
        return std::pair<double, double>(mean, std::sqrt(var / batch_ratio.size()));
    };

    MomentDiagnostics diag;
    diag.paths = paths;
    diag.p = p;
    double num = 0, den = 0, snum = 0, sden = 0;
    for (int i = 0; i < paths; ++i) {
        num += final_sq[i];
        den += qv[i];
        snum += sup_p[i];
        sden += qv_p[i];
    }
    require(den > 0 && sden > 0, "moment_diagnostics: degenerate integrand");
    diag.isometry_ratio = num / den;
    diag.bdg_ratio = snum / sden;
    diag.isometry_se = ratio_stats(final_sq, qv).second;
    diag.bdg_se = ratio_stats(sup_p, qv_p).second;
    diag.c_p_reference = std::pow(p / (p - 1.0), p);
    diag.c_p_hat = diag.bdg_ratio / diag.c_p_reference;

    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        for (int j = 0; j < family.value_dim; ++j) {
            const auto col = checkpoint_sums.col(c * family.value_dim + j);
            const double mean = col.mean();
            const double var = (col.array() - mean).square().sum() / (paths - 1.0);
            if (var > 0)
                diag.martingale_max_z =
                    std::max(diag.martingale_max_z,
                             std::abs(mean) / std::sqrt(var / paths));
        }
    }
    return diag;
}

}  // namespace sevolab
