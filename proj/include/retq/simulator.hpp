#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "retq/ingest.hpp"

namespace retq {

/// A batch of independent star-shaped worlds: in each, one source posts M
/// tweets, n intermediates relay them independently, and one receiver
/// re-retweets what it sees. Seed plus config fully determine the corpus.
struct WorldConfig {
    std::uint64_t worlds = 1;               // number of independent gadgets
    std::string name_prefix = "w";          // usernames derive from this
    std::vector<double> relay_probs;        // per-channel relay probability r_j
    std::vector<double> reretweet_probs;    // per-channel re-retweet probability c_j
    std::uint64_t tweets_per_source = 100;  // M
    std::uint64_t seed = 0;
    std::int64_t base_timestamp = 1243814400;

    int channel_count() const { return static_cast<int>(relay_probs.size()); }

    /// Throws std::invalid_argument naming the violated constraint.
    void validate() const;
};

/// Expected instance probability for a world: sum over channels of r_j*c_j.
/// Can exceed 1; the observable is clamped downstream.
double ground_truth(const WorldConfig& config);

/// Emits source posts, relay retweets and receiver re-retweets drawn with
/// the configured probabilities. Identical config and seed produce an
/// identical record sequence.
std::vector<TweetRecord> simulate_classical_world(const WorldConfig& config);

/// Worlds whose per-pattern means realize an arbitrary target sequence
/// P(1..n_max), including non-monotone ones. For each n and instance, the
/// receiver's matching-retweet count is binomial(M, target(n)), spread over
/// n channels with every channel hit at least once (by rejection).
struct SequenceConfig {
    std::vector<double> targets;             // target P(n) for n = 1..targets.size()
    std::uint64_t instances_per_pattern = 1;
    std::uint64_t tweets_per_source = 100;   // M
    std::uint64_t seed = 0;
    std::string name_prefix = "q";
    std::int64_t base_timestamp = 1243814400;

    int n_max() const { return static_cast<int>(targets.size()); }

    /// Throws std::invalid_argument naming the violated constraint; in
    /// particular target(n)*M < n makes the n-channel guarantee infeasible.
    void validate() const;
};

std::vector<TweetRecord> simulate_sequence_world(const SequenceConfig& config);

/// Parsed flat key-value simulation config (one `key = value` per line,
/// `#` comments). `mode` selects which of the two configs is active.
struct SimulationPlan {
    enum class Mode { classical, sequence };
    Mode mode = Mode::classical;
    WorldConfig world;
    SequenceConfig sequence;
};

/// Throws std::invalid_argument on unknown keys, bad values or violated
/// constraints, naming the offender.
SimulationPlan parse_simulation_config(std::istream& in);

} // namespace retq
