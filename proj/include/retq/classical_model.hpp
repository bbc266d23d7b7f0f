#pragma once

#include <span>
#include <vector>

#include "retq/cascade.hpp"

namespace retq {

/// Attention-weighted channel model: the receiver splits unit attention
/// q_1..q_N over N channels and the transfer probability over an active set
/// follows the law of total probability.
struct ClassicalParams {
    std::vector<double> attention;     // q_j, sums to 1
    std::vector<double> channel_probs; // per-channel transfer probability

    int capacity() const { return static_cast<int>(attention.size()); }

    /// Throws std::invalid_argument if weights are out of range or do not
    /// sum to 1 within 1e-12.
    void validate() const;
};

/// Sum over the active channels of q_j * channel_prob(j).
/// Channel indices are 1-based; an index outside 1..N throws.
double total_probability(const ClassicalParams& params, std::span<const int> active_set);

/// Line through the fixed anchor P(1) with non-negative slope, constant
/// beyond the plateau boundary.
struct ClassicalFit {
    double anchor = 0.0;   // observed P(1), hit exactly at n = 1
    double slope = 0.0;    // >= 0
    int n_max_fitted = 1;  // plateau boundary
    double residual = 0.0; // sum of squared errors over the fitted points
};

/// anchor + slope*(n-1) for n <= n_max_fitted, constant afterwards.
double predict_classical(const ClassicalFit& fit, int n);

struct ClassicalFitOptions {
    bool weight_by_instance_count = false;
};

/// Least-squares slope through the fixed point (1, P(1)), clamped at 0.
/// Closed form and deterministic. Requires stats populated at n = 1 and at
/// least one n >= 2; throws std::invalid_argument otherwise.
ClassicalFit fit_classical(const PatternStats& stats, const ClassicalFitOptions& options = {});

} // namespace retq
