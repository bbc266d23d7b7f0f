#include "retq/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace retq {

int PatternStats::populated_count() const {
    int count = 0;
    for (const auto& r : rows)
        if (r.instance_count > 0) ++count;
    return count;
}

std::map<std::string, std::uint64_t> author_tweet_counts(std::span<const TweetRecord> records) {
    std::map<std::string, std::uint64_t> counts;
    for (const auto& r : records) ++counts[r.author];
    return counts;
}

InstanceBuilder::InstanceBuilder(int n_max) : n_max_(n_max) {
    if (n_max < 1) throw std::invalid_argument("build_instances: n_max must be >= 1");
}

void InstanceBuilder::add(const TweetRecord& record) {
    ++author_counts_[record.author];

    const RetweetChain chain = extract_retweet_chain(record.text);
    if (chain.relays.empty()) return;
    direct_pairs_.emplace(chain.relays[0], record.author);
    if (chain.size() < 2) return;

    // Only the first two hops are used: C retweeted B, who retweeted A.
    const std::string& channel = chain.relays[0];
    const std::string& source = chain.relays[1];
    const std::string& receiver = record.author;
    if (source == receiver || channel == source || channel == receiver) {
        ++counters_.excluded_tweets;
        return;
    }
    auto& group = groups_[{source, receiver}];
    group.channels.insert(channel);
    ++group.tweets;
    ++counters_.matched_tweets;
}

BuildResult InstanceBuilder::finish() {
    BuildResult result;
    counters_.groups_total = groups_.size();

    // std::map keys keep the output independent of record order.
    for (auto& [key, group] : groups_) {
        const auto it = author_counts_.find(key.first);
        if (it == author_counts_.end()) {
            ++counters_.dropped_no_source;
            continue;
        }
        if (static_cast<int>(group.channels.size()) > n_max_) {
            ++counters_.dropped_over_nmax;
            continue;
        }
        if (direct_pairs_.count(key)) ++counters_.direct_retweet_pairs;
        result.instances.push_back(TransferInstance{
            key.first, key.second, std::move(group.channels), group.tweets, it->second});
    }
    result.counters = counters_;
    return result;
}

BuildResult build_instances(std::span<const TweetRecord> records, int n_max) {
    InstanceBuilder builder(n_max);
    for (const auto& record : records) builder.add(record);
    return builder.finish();
}

double instance_probability(const TransferInstance& instance) {
    const double ratio = static_cast<double>(instance.relayed_retweet_count) /
                         static_cast<double>(instance.source_tweet_count);
    return ratio > 1.0 ? 1.0 : ratio;
}

bool probability_clamped(const TransferInstance& instance) {
    return instance.relayed_retweet_count > instance.source_tweet_count;
}

std::uint64_t count_clamped(std::span<const TransferInstance> instances) {
    std::uint64_t clamped = 0;
    for (const auto& inst : instances)
        if (probability_clamped(inst)) ++clamped;
    return clamped;
}

PatternStats aggregate_patterns(std::span<const TransferInstance> instances, int n_max) {
    if (n_max < 1) throw std::invalid_argument("aggregate_patterns: n_max must be >= 1");
    PatternStats stats(n_max);

    std::vector<std::vector<double>> probs(static_cast<std::size_t>(n_max));
    for (const auto& inst : instances) {
        const int n = inst.channel_count();
        if (n < 1 || n > n_max)
            throw std::invalid_argument("aggregate_patterns: instance channel count outside 1..n_max");
        probs[static_cast<std::size_t>(n - 1)].push_back(instance_probability(inst));
        stats.row(n).tweet_count += inst.relayed_retweet_count;
    }

    for (int n = 1; n <= n_max; ++n) {
        auto& row = stats.row(n);
        const auto& values = probs[static_cast<std::size_t>(n - 1)];
        row.instance_count = values.size();
        if (values.empty()) continue;
        double sum = 0.0;
        for (double v : values) sum += v;
        row.mean_probability = sum / static_cast<double>(values.size());
        if (values.size() > 1) {
            double ss = 0.0;
            for (double v : values) ss += (v - row.mean_probability) * (v - row.mean_probability);
            const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
            row.std_error = sd / std::sqrt(static_cast<double>(values.size()));
        }
    }
    return stats;
}

} // namespace retq
