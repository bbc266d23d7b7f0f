#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "retq/cascade.hpp"

namespace retq {

using Complex = std::complex<double>;

/// Amplitude version of the attention model: attention weights and channel
/// transfer probabilities become complex amplitudes, and the probability over
/// an active set is the squared magnitude of the summed path amplitudes.
struct QuantumParams {
    std::vector<Complex> attention; // psi_j, sum of |psi_j|^2 is 1
    std::vector<Complex> channels;  // per-channel transfer amplitude, |.|^2 in [0,1]

    int channel_count() const { return static_cast<int>(attention.size()); }

    /// Throws std::invalid_argument when the attention norm is off by more
    /// than 1e-12 or a channel amplitude leaves the unit disc.
    void validate() const;
};

/// Sum over the active set of psi_j * channel_amplitude(j).
/// Indices are 1-based; an index outside 1..K throws std::out_of_range.
Complex total_amplitude(const QuantumParams& params, std::span<const int> active_set);

struct ProbabilityResult {
    double value = 0.0;
    bool exceeds_unit = false; // flagged, never clamped
};

/// Squared magnitude of the total amplitude. Values above 1 are possible for
/// unconstrained parameters and are flagged rather than clamped.
ProbabilityResult transfer_probability(const QuantumParams& params, std::span<const int> active_set);

/// Cross term between two paths:
///   2 * |psi_i psi_j ch_i ch_j| * cos(theta_ij)
/// with theta_ij the phase of conj(psi_i) psi_j conj(ch_i) ch_j. Symmetric
/// in (i, j); i == j throws.
double interference_term(const QuantumParams& params, int i, int j);

struct InterferenceEntry {
    int i = 0;
    int j = 0;
    double value = 0.0;
};

/// Split of the transfer probability into the per-path classical sum and the
/// pairwise interference terms; value == classical_part + sum of entries.
struct Decomposition {
    double classical_part = 0.0;
    std::vector<InterferenceEntry> interference; // i < j, in active-set order

    double interference_sum() const {
        double s = 0.0;
        for (const auto& e : interference) s += e.value;
        return s;
    }
    double total() const { return classical_part + interference_sum(); }
};

Decomposition decompose(const QuantumParams& params, std::span<const int> active_set);

/// Fitted amplitude model in the homogeneous parameterization:
///   psi_1 = sqrt(q1), psi_j = sqrt((1-q1)/(K-1)) for j >= 2,
///   channel_amplitude(j) = sqrt(channel_prob) * exp(i*theta_j), theta_1 = 0.
struct QuantumFit {
    int channel_count = 0;      // K
    double q1 = 0.0;            // attention weight on the first channel
    double channel_prob = 0.0;  // shared |channel amplitude|^2
    std::vector<double> phases; // theta_2..theta_K, each in [0, 2*pi)
    double residual = 0.0;      // sum of squared errors against the observed means
    bool converged = true;
    int winning_start = 0;
};

/// Probability over the nested set {1..n} under the fit's parameterization.
double predict_quantum(const QuantumFit& fit, int n);

/// Expands a fit into explicit amplitudes.
QuantumParams fit_params(const QuantumFit& fit);

struct QuantumFitConfig {
    int starts = 64;          // multi-start grid size
    int max_evals = 2000;     // objective evaluations per start
    double penalty = 1e3;     // weight on bound violations
    std::uint64_t seed = 0;   // start grid derivation
    int threads = 1;          // starts may run in parallel; result is identical
};

/// Fits channel_prob and the free phases to the observed pattern means with
/// the anchor constraint q1 * channel_prob == observed P(1) enforced exactly.
/// Deterministic multi-start Nelder-Mead over a seed-derived start grid; the
/// winner is selected by (residual, start index). Requires stats populated at
/// n = 1 and at least one n >= 2; throws std::invalid_argument otherwise.
QuantumFit fit_quantum(const PatternStats& stats, const QuantumFitConfig& config = {});

} // namespace retq
