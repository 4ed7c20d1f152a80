#pragma once

#include "sevolab/common.hpp"

namespace sevolab {

using NormFn = std::function<double(const Vector&)>;

NormFn l2_norm();

// Vector-valued function sampled on a strictly increasing time grid.
struct SampledPath {
    std::vector<double> times;
    std::vector<Vector> values;
    std::string norm_kind = "l2";  // artifact metadata only

    static SampledPath scalar(std::vector<double> times, std::vector<double> vals);
    void validate(bool positive_times = false) const;
    int dim() const;
};

struct WeightedHolderParams {
    double beta;   // weight exponent, 0 < beta <= 1
    double sigma;  // Holder exponent, 0 < sigma < 1
    void validate() const;
};

struct WeightedHolderReport {
    double norm = 0.0;       // sup_term + seminorm
    double sup_term = 0.0;   // sup t^{1-beta} ||f(t)||
    double seminorm = 0.0;   // sup s^{1-beta+sigma} ||f(t)-f(s)|| / (t-s)^sigma
    std::vector<double> modulus_times;   // sampled t
    std::vector<double> modulus_values;  // w_f(t) = sup over s < t with upper point t
    bool membership_evaluated = false;   // needs >= 8 samples
    bool limit_exists = false;      // weighted value stabilizes toward t = 0
    bool seminorm_finite = false;
    bool modulus_vanishes = false;  // w_f small on the earliest quarter of samples
    bool member = false;
};

// Norm and modulus over the sampled pairs. Accepts >= 2 samples; membership
// flags are filled only when >= 8 samples are present. Sample times must be
// positive (the weight degenerates at 0).
WeightedHolderReport weighted_holder_norm(const SampledPath& path,
                                          const WeightedHolderParams& params,
                                          const NormFn& norm = l2_norm());

// Just the modulus curve (times, w_f values).
std::pair<std::vector<double>, std::vector<double>> weighted_modulus(
    const SampledPath& path, const WeightedHolderParams& params,
    const NormFn& norm = l2_norm());

// Requires >= 8 samples; throws ValidationError otherwise.
WeightedHolderReport check_weighted_membership(const SampledPath& path,
                                               const WeightedHolderParams& params,
                                               const NormFn& norm = l2_norm());

// Classical gamma-Holder norm sup||f|| + sup ||f(t)-f(s)||/(t-s)^gamma over
// sample times inside [window_lo, window_hi].
double holder_norm(const SampledPath& path, double gamma, double window_lo,
                   double window_hi, const NormFn& norm = l2_norm());

}  // namespace sevolab
