#include "retq/classical_model.hpp"

#include <cmath>
#include <stdexcept>

namespace retq {

void ClassicalParams::validate() const {
    if (attention.empty() || attention.size() != channel_probs.size())
        throw std::invalid_argument("ClassicalParams: attention and channel_probs must be non-empty and equal-sized");
    double sum = 0.0;
    for (double q : attention) {
        if (q < 0.0 || q > 1.0) throw std::invalid_argument("ClassicalParams: attention weight outside [0,1]");
        sum += q;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("ClassicalParams: attention weights must sum to 1 within 1e-12");
    for (double p : channel_probs)
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("ClassicalParams: channel probability outside [0,1]");
}

double total_probability(const ClassicalParams& params, std::span<const int> active_set) {
    if (active_set.empty()) throw std::invalid_argument("total_probability: active set is empty");
    const int n = params.capacity();
    double total = 0.0;
    for (int j : active_set) {
        if (j < 1 || j > n) throw std::out_of_range("total_probability: channel index outside 1..N");
        total += params.attention[static_cast<std::size_t>(j - 1)] *
                 params.channel_probs[static_cast<std::size_t>(j - 1)];
    }
    return total;
}

double predict_classical(const ClassicalFit& fit, int n) {
    if (n < 1) throw std::out_of_range("predict_classical: n must be >= 1");
    const int effective = n < fit.n_max_fitted ? n : fit.n_max_fitted;
    return fit.anchor + fit.slope * static_cast<double>(effective - 1);
}

ClassicalFit fit_classical(const PatternStats& stats, const ClassicalFitOptions& options) {
    if (!stats.populated(1))
        throw std::invalid_argument("fit_classical: stats carry no n=1 pattern");
    if (stats.populated_count() < 2)
        throw std::invalid_argument("fit_classical: need at least two populated channel counts");
    for (int n = 1; n <= stats.n_max(); ++n) {
        const double y = stats.row(n).mean_probability;
        if (stats.populated(n) && !(y >= 0.0 && y <= 1.0))
            throw std::invalid_argument("fit_classical: observed mean outside [0,1]");
    }

    ClassicalFit fit;
    fit.anchor = stats.row(1).mean_probability;

    double num = 0.0;
    double den = 0.0;
    for (int n = 2; n <= stats.n_max(); ++n) {
        if (!stats.populated(n)) continue;
        const double w =
            options.weight_by_instance_count ? static_cast<double>(stats.row(n).instance_count) : 1.0;
        const double step = static_cast<double>(n - 1);
        num += w * step * (stats.row(n).mean_probability - fit.anchor);
        den += w * step * step;
        fit.n_max_fitted = n;
    }
    const double unconstrained = num / den;
    fit.slope = unconstrained > 0.0 ? unconstrained : 0.0;

    for (int n = 1; n <= stats.n_max(); ++n) {
        if (!stats.populated(n)) continue;
        const double w =
            options.weight_by_instance_count ? static_cast<double>(stats.row(n).instance_count) : 1.0;
        const double err = predict_classical(fit, n) - stats.row(n).mean_probability;
        fit.residual += w * err * err;
    }
    return fit;
}

} // namespace retq
