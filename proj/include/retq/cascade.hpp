#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "retq/ingest.hpp"

namespace retq {

/// One (source A, receiver C, channel set {B_j}) triple observed over a
/// corpus. relayed_retweet_count counts C's tweets whose chain starts
/// "RT @B_j: RT @A" for some B_j in channels.
struct TransferInstance {
    std::string source;               // A
    std::string receiver;             // C
    std::set<std::string> channels;   // distinct B_j
    std::uint64_t relayed_retweet_count = 0;
    std::uint64_t source_tweet_count = 0;

    int channel_count() const { return static_cast<int>(channels.size()); }

    bool operator==(const TransferInstance&) const = default;
};

struct PatternRow {
    std::uint64_t instance_count = 0;
    std::uint64_t tweet_count = 0; // total relayed retweets behind the mean
    double mean_probability = 0.0;
    double std_error = 0.0; // sample standard deviation / sqrt(instance_count)

    bool operator==(const PatternRow&) const = default;
};

/// Per-channel-count aggregate over instance probabilities, n = 1..n_max.
struct PatternStats {
    std::vector<PatternRow> rows; // rows[0] holds n = 1

    PatternStats() = default;
    explicit PatternStats(int n_max) : rows(static_cast<std::size_t>(n_max)) {}

    int n_max() const { return static_cast<int>(rows.size()); }
    PatternRow& row(int n) { return rows[static_cast<std::size_t>(n - 1)]; }
    const PatternRow& row(int n) const { return rows[static_cast<std::size_t>(n - 1)]; }
    bool populated(int n) const {
        return n >= 1 && n <= n_max() && row(n).instance_count > 0;
    }
    int populated_count() const;

    bool operator==(const PatternStats&) const = default;
};

struct BuildCounters {
    std::uint64_t matched_tweets = 0;        // 2-hop retweets grouped into instances
    std::uint64_t excluded_tweets = 0;       // 2-hop retweets failing identity constraints
    std::uint64_t groups_total = 0;          // distinct (A, C) groups before drops
    std::uint64_t dropped_over_nmax = 0;     // groups with more than n_max channels
    std::uint64_t dropped_no_source = 0;     // groups whose source posted nothing
    std::uint64_t direct_retweet_pairs = 0;  // kept groups where C also retweeted A directly

    std::uint64_t instances_kept() const {
        return groups_total - dropped_over_nmax - dropped_no_source;
    }
};

struct BuildResult {
    std::vector<TransferInstance> instances; // sorted by (source, receiver)
    BuildCounters counters;
};

/// Exact per-author tweet totals; retweets count as posted tweets.
std::map<std::string, std::uint64_t> author_tweet_counts(std::span<const TweetRecord> records);

/// Single-pass accumulator behind build_instances. Memory grows with the
/// number of distinct authors and (source, receiver) pairs, not with the
/// record count, so corpora never need to be materialized.
class InstanceBuilder {
public:
    explicit InstanceBuilder(int n_max);

    /// Feed one record; order does not matter.
    void add(const TweetRecord& record);

    /// Resolves source totals, applies the drop rules and returns the
    /// instances sorted by (source, receiver). The builder is spent.
    BuildResult finish();

private:
    struct Group {
        std::set<std::string> channels;
        std::uint64_t tweets = 0;
    };

    int n_max_;
    std::map<std::string, std::uint64_t> author_counts_;
    std::map<std::pair<std::string, std::string>, Group> groups_;
    std::set<std::pair<std::string, std::string>> direct_pairs_;
    BuildCounters counters_;
};

/// Groups 2-hop retweets by (source, receiver) and forms one TransferInstance
/// per group. Only the first two hops of deeper chains are used. Tweets
/// violating source != receiver, source not-in channels or receiver not-in
/// channels are excluded before grouping; groups with more than n_max
/// channels or with an absent source are dropped and counted.
BuildResult build_instances(std::span<const TweetRecord> records, int n_max);

/// relayed_retweet_count / source_tweet_count, clamped to 1.
double instance_probability(const TransferInstance& instance);

/// True when the raw ratio exceeds 1 (visible in truncated corpora).
bool probability_clamped(const TransferInstance& instance);

std::uint64_t count_clamped(std::span<const TransferInstance> instances);

/// Arithmetic mean and standard error of instance probabilities per channel
/// count. Throws std::invalid_argument if an instance falls outside 1..n_max.
PatternStats aggregate_patterns(std::span<const TransferInstance> instances, int n_max);

} // namespace retq
