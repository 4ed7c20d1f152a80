#include "sevolab/holder_spaces.hpp"

#include <algorithm>
#include <limits>

namespace sevolab {

NormFn l2_norm() {
    return [](const Vector& v) { return v.norm(); };
}

SampledPath SampledPath::scalar(std::vector<double> times, std::vector<double> vals) {
    require(times.size() == vals.size(), "SampledPath: time/value count mismatch");
    SampledPath path;
    path.times = std::move(times);
    path.values.reserve(vals.size());
    for (double v : vals) path.values.push_back(Vector::Constant(1, v));
    path.validate();
    return path;
}

void SampledPath::validate(bool positive_times) const {
    require(times.size() == values.size(), "SampledPath: time/value count mismatch");
    require(times.size() >= 2, "SampledPath: need at least two samples");
    require(values.front().size() >= 1, "SampledPath: empty values");
    const auto d = values.front().size();
    for (std::size_t i = 0; i < times.size(); ++i) {
        require_finite(times[i], "SampledPath time");
        if (positive_times) require(times[i] > 0.0, "SampledPath: times must be positive");
        else require(times[i] >= 0.0, "SampledPath: times must be nonnegative");
        if (i > 0) require(times[i] > times[i - 1], "SampledPath: times must increase");
        require(values[i].size() == d, "SampledPath: ragged value dimensions");
        if (!values[i].allFinite()) throw NumericError("SampledPath: non-finite value");
    }
}

int SampledPath::dim() const { return values.empty() ? 0 : static_cast<int>(values.front().size()); }

void WeightedHolderParams::validate() const {
    require(beta > 0.0 && beta <= 1.0, "(F1) requires 0 < beta <= 1");
    require(sigma > 0.0 && sigma < 1.0, "(F1) requires 0 < sigma < 1");
}

namespace {

// Core weighted scan shared by the three ops.
WeightedHolderReport weighted_scan(const SampledPath& path,
                                   const WeightedHolderParams& params,
                                   const NormFn& norm) {
    params.validate();
    path.validate(/*positive_times=*/true);
    require(static_cast<bool>(norm), "weighted scan: empty norm");
    const std::size_t m = path.times.size();

    WeightedHolderReport rep;
    std::vector<double> value_norm(m);
    for (std::size_t i = 0; i < m; ++i) {
        value_norm[i] = norm(path.values[i]);
        require_finite(value_norm[i], "weighted scan: sample norm");
        rep.sup_term = std::max(rep.sup_term,
                                std::pow(path.times[i], 1.0 - params.beta) * value_norm[i]);
    }

    rep.modulus_times = path.times;
    rep.modulus_values.assign(m, 0.0);
    const double wexp = 1.0 - params.beta + params.sigma;
    for (std::size_t j = 1; j < m; ++j) {
        double wj = 0.0;
        for (std::size_t i = 0; i < j; ++i) {
            const double gap = path.times[j] - path.times[i];
            const double q = std::pow(path.times[i], wexp) *
                             norm(path.values[j] - path.values[i]) /
                             std::pow(gap, params.sigma);
            wj = std::max(wj, q);
        }
        rep.modulus_values[j] = wj;
        rep.seminorm = std::max(rep.seminorm, wj);
    }
    rep.norm = rep.sup_term + rep.seminorm;
    return rep;
}

void fill_membership(WeightedHolderReport& rep, const SampledPath& path,
                     const WeightedHolderParams& params, const NormFn& norm) {
    const std::size_t m = path.times.size();
    if (m < 8) return;  // one-sided limits need a usable prefix
    rep.membership_evaluated = true;
    rep.seminorm_finite = std::isfinite(rep.seminorm);

    // (i) proxy: the weighted value t^{1-beta} ||f(t)|| must stabilize over the
    // earliest quarter of the samples.
    const std::size_t k = std::max<std::size_t>(2, m / 4);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double v = std::pow(path.times[i], 1.0 - params.beta) * norm(path.values[i]);
        scale = std::max(scale, v);
        if (i < k) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    rep.limit_exists = (hi - lo) <= 0.25 * scale + tol_spec;

    // (iii) proxy: the modulus over the earliest quarter must sit well below
    // its overall level.
    double early = 0.0, overall = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        overall = std::max(overall, rep.modulus_values[i]);
        if (i < k) early = std::max(early, rep.modulus_values[i]);
    }
    rep.modulus_vanishes = early <= 0.25 * overall + tol_spec;
    rep.member = rep.limit_exists && rep.seminorm_finite && rep.modulus_vanishes;
}

}  // namespace

WeightedHolderReport weighted_holder_norm(const SampledPath& path,
                                          const WeightedHolderParams& params,
                                          const NormFn& norm) {
    WeightedHolderReport rep = weighted_scan(path, params, norm);
    fill_membership(rep, path, params, norm);
    return rep;
}

std::pair<std::vector<double>, std::vector<double>> weighted_modulus(
    const SampledPath& path, const WeightedHolderParams& params, const NormFn& norm) {
    WeightedHolderReport rep = weighted_scan(path, params, norm);
    return {std::move(rep.modulus_times), std::move(rep.modulus_values)};
}

WeightedHolderReport check_weighted_membership(const SampledPath& path,
                                               const WeightedHolderParams& params,
                                               const NormFn& norm) {
    require(path.times.size() >= 8,
            "check_weighted_membership: need at least 8 samples to judge the limit at 0");
    return weighted_holder_norm(path, params, norm);
}

double holder_norm(const SampledPath& path, double gamma, double window_lo,
                   double window_hi, const NormFn& norm) {
    require(gamma > 0.0 && gamma <= 1.0, "holder_norm: gamma must lie in (0, 1]");
    require(window_lo >= 0.0 && window_hi > window_lo, "holder_norm: bad window");
    path.validate();
    require(static_cast<bool>(norm), "holder_norm: empty norm");

    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < path.times.size(); ++i)
        if (path.times[i] >= window_lo - 1e-12 && path.times[i] <= window_hi + 1e-12)
            idx.push_back(i);
    require(idx.size() >= 2, "holder_norm: fewer than two samples in the window");

    double sup = 0.0, semi = 0.0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
        sup = std::max(sup, norm(path.values[idx[a]]));
        for (std::size_t b = 0; b < a; ++b) {
            const double gap = path.times[idx[a]] - path.times[idx[b]];
            semi = std::max(semi, norm(path.values[idx[a]] - path.values[idx[b]]) /
                                      std::pow(gap, gamma));
        }
    }
    return sup + semi;
}

}  // namespace sevolab
