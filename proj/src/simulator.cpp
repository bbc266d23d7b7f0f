#include "retq/simulator.hpp"

#include <charconv>
#include <istream>
#include <map>
#include <stdexcept>
#include <string_view>

#include "retq/rng.hpp"

namespace retq {

namespace {

std::string world_name(const std::string& prefix, std::uint64_t world, char role, int channel = 0) {
    std::string name = prefix + std::to_string(world) + role;
    if (role == 'b') name += std::to_string(channel);
    return name;
}

void check_names(const std::string& prefix, std::uint64_t worlds, int channels, const char* who) {
    const std::string longest = world_name(prefix, worlds == 0 ? 0 : worlds - 1, 'b', channels);
    if (!normalize_username(longest))
        throw std::invalid_argument(std::string(who) + ": name_prefix yields invalid usernames (1-15 chars of [a-z0-9_])");
}

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument(std::string(what) + " outside [0,1]");
}

} // namespace

void WorldConfig::validate() const {
    if (worlds < 1) throw std::invalid_argument("WorldConfig: worlds must be >= 1");
    if (tweets_per_source < 1) throw std::invalid_argument("WorldConfig: tweets_per_source must be >= 1");
    if (relay_probs.empty()) throw std::invalid_argument("WorldConfig: at least one channel required");
    if (relay_probs.size() != reretweet_probs.size())
        throw std::invalid_argument("WorldConfig: relay_probs and reretweet_probs must be equal-sized");
    for (double r : relay_probs) check_probability(r, "WorldConfig: relay probability");
    for (double c : reretweet_probs) check_probability(c, "WorldConfig: reretweet probability");
    check_names(name_prefix, worlds, channel_count(), "WorldConfig");
}

double ground_truth(const WorldConfig& config) {
    double expected = 0.0;
    for (std::size_t j = 0; j < config.relay_probs.size(); ++j)
        expected += config.relay_probs[j] * config.reretweet_probs[j];
    return expected;
}

std::vector<TweetRecord> simulate_classical_world(const WorldConfig& config) {
    config.validate();
    std::vector<TweetRecord> records;
    const int n = config.channel_count();
    const std::uint64_t m = config.tweets_per_source;

    for (std::uint64_t w = 0; w < config.worlds; ++w) {
        const CounterRng rng(CounterRng::derive(config.seed, w));
        const std::string source = world_name(config.name_prefix, w, 'a');
        const std::string receiver = world_name(config.name_prefix, w, 'c');
        std::vector<std::string> channels;
        std::vector<std::string> relay_prefix;    // "RT @<source>: "
        std::vector<std::string> reretweet_prefix; // "RT @<channel>: RT @<source>: "
        for (int j = 0; j < n; ++j) {
            channels.push_back(world_name(config.name_prefix, w, 'b', j + 1));
            relay_prefix.push_back("RT @" + source + ": ");
            reretweet_prefix.push_back("RT @" + channels.back() + ": RT @" + source + ": ");
        }
        std::int64_t ts = config.base_timestamp;
        for (std::uint64_t k = 0; k < m; ++k) {
            const std::string post = "post " + std::to_string(k);
            records.push_back(TweetRecord{source, ts++, post});
            for (int j = 0; j < n; ++j) {
                const std::uint64_t counter = (k * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(j)) * 2;
                if (!rng.bernoulli(counter, config.relay_probs[static_cast<std::size_t>(j)])) continue;
                const auto jz = static_cast<std::size_t>(j);
                records.push_back(TweetRecord{channels[jz], ts++, relay_prefix[jz] + post});
                if (!rng.bernoulli(counter + 1, config.reretweet_probs[static_cast<std::size_t>(j)])) continue;
                records.push_back(TweetRecord{receiver, ts++, reretweet_prefix[jz] + post});
            }
        }
    }
    return records;
}

void SequenceConfig::validate() const {
    if (targets.empty()) throw std::invalid_argument("SequenceConfig: targets must be non-empty");
    if (instances_per_pattern < 1)
        throw std::invalid_argument("SequenceConfig: instances_per_pattern must be >= 1");
    if (tweets_per_source < 1) throw std::invalid_argument("SequenceConfig: tweets_per_source must be >= 1");
    for (int n = 1; n <= n_max(); ++n) {
        const double target = targets[static_cast<std::size_t>(n - 1)];
        check_probability(target, "SequenceConfig: target");
        if (target * static_cast<double>(tweets_per_source) < static_cast<double>(n))
            throw std::invalid_argument(
                "SequenceConfig: target(" + std::to_string(n) + ")*tweets_per_source < " + std::to_string(n) +
                " channels; the n-channel guarantee is infeasible");
    }
    check_names(name_prefix, static_cast<std::uint64_t>(n_max()) * instances_per_pattern, n_max(),
                "SequenceConfig");
}

std::vector<TweetRecord> simulate_sequence_world(const SequenceConfig& config) {
    config.validate();
    std::vector<TweetRecord> records;
    const std::uint64_t m = config.tweets_per_source;

    std::uint64_t instance_index = 0;
    for (int n = 1; n <= config.n_max(); ++n) {
        const double target = config.targets[static_cast<std::size_t>(n - 1)];
        for (std::uint64_t i = 0; i < config.instances_per_pattern; ++i, ++instance_index) {
            const CounterRng rng(CounterRng::derive(config.seed, instance_index));
            const std::string source = world_name(config.name_prefix, instance_index, 'a');
            const std::string receiver = world_name(config.name_prefix, instance_index, 'c');

            // Rejection over the joint draw until every channel is hit.
            std::vector<int> assignment(m, -1);
            for (std::uint64_t attempt = 0;; ++attempt) {
                if (attempt >= 100000)
                    throw std::runtime_error("simulate_sequence_world: channel coverage rejection did not terminate");
                const std::uint64_t base = attempt * 2 * m;
                std::vector<bool> hit(static_cast<std::size_t>(n), false);
                std::uint64_t matched = 0;
                for (std::uint64_t k = 0; k < m; ++k) {
                    if (rng.bernoulli(base + 2 * k, target)) {
                        const int channel = static_cast<int>(rng.below(base + 2 * k + 1, static_cast<std::uint64_t>(n)));
                        assignment[k] = channel;
                        hit[static_cast<std::size_t>(channel)] = true;
                        ++matched;
                    } else {
                        assignment[k] = -1;
                    }
                }
                bool covered = matched >= static_cast<std::uint64_t>(n);
                for (int j = 0; covered && j < n; ++j) covered = hit[static_cast<std::size_t>(j)];
                if (covered) break;
            }

            std::vector<std::string> reretweet_prefix;
            for (int j = 0; j < n; ++j)
                reretweet_prefix.push_back("RT @" + world_name(config.name_prefix, instance_index, 'b', j + 1) +
                                           ": RT @" + source + ": post ");
            std::int64_t ts = config.base_timestamp;
            for (std::uint64_t k = 0; k < m; ++k)
                records.push_back(TweetRecord{source, ts++, "post " + std::to_string(k)});
            for (std::uint64_t k = 0; k < m; ++k) {
                if (assignment[k] < 0) continue;
                records.push_back(TweetRecord{
                    receiver, ts++,
                    reretweet_prefix[static_cast<std::size_t>(assignment[k])] + std::to_string(k)});
            }
        }
    }
    return records;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_double_or_throw(std::string_view value, const std::string& key) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw std::invalid_argument("simulation config: bad numeric value for '" + key + "'");
    return out;
}

std::uint64_t parse_u64_or_throw(std::string_view value, const std::string& key) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw std::invalid_argument("simulation config: bad integer value for '" + key + "'");
    return out;
}

std::int64_t parse_i64_or_throw(std::string_view value, const std::string& key) {
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw std::invalid_argument("simulation config: bad integer value for '" + key + "'");
    return out;
}

std::vector<double> parse_double_list(std::string_view value, const std::string& key) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= value.size()) {
        std::size_t comma = value.find(',', start);
        if (comma == std::string_view::npos) comma = value.size();
        const auto item = trim(value.substr(start, comma - start));
        if (item.empty())
            throw std::invalid_argument("simulation config: empty element in list '" + key + "'");
        out.push_back(parse_double_or_throw(item, key));
        start = comma + 1;
        if (comma == value.size()) break;
    }
    return out;
}

} // namespace

SimulationPlan parse_simulation_config(std::istream& in) {
    SimulationPlan plan;
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument("simulation config: expected 'key = value', got '" + std::string(stripped) + "'");
        const std::string key(trim(stripped.substr(0, eq)));
        const std::string value(trim(stripped.substr(eq + 1)));
        if (key.empty()) throw std::invalid_argument("simulation config: empty key");
        if (!kv.emplace(key, value).second)
            throw std::invalid_argument("simulation config: duplicate key '" + key + "'");
    }

    const auto mode = kv.find("mode");
    if (mode == kv.end()) throw std::invalid_argument("simulation config: missing 'mode'");
    if (mode->second == "classical")
        plan.mode = SimulationPlan::Mode::classical;
    else if (mode->second == "sequence")
        plan.mode = SimulationPlan::Mode::sequence;
    else
        throw std::invalid_argument("simulation config: mode must be 'classical' or 'sequence'");

    for (const auto& [key, value] : kv) {
        if (key == "mode") continue;
        if (key == "seed") {
            plan.world.seed = plan.sequence.seed = parse_u64_or_throw(value, key);
        } else if (key == "tweets_per_source") {
            plan.world.tweets_per_source = plan.sequence.tweets_per_source = parse_u64_or_throw(value, key);
        } else if (key == "base_timestamp") {
            plan.world.base_timestamp = plan.sequence.base_timestamp = parse_i64_or_throw(value, key);
        } else if (key == "prefix") {
            plan.world.name_prefix = plan.sequence.name_prefix = value;
        } else if (key == "worlds") {
            plan.world.worlds = parse_u64_or_throw(value, key);
        } else if (key == "relay_probs") {
            plan.world.relay_probs = parse_double_list(value, key);
        } else if (key == "reretweet_probs") {
            plan.world.reretweet_probs = parse_double_list(value, key);
        } else if (key == "targets") {
            plan.sequence.targets = parse_double_list(value, key);
        } else if (key == "instances_per_pattern") {
            plan.sequence.instances_per_pattern = parse_u64_or_throw(value, key);
        } else {
            throw std::invalid_argument("simulation config: unknown key '" + key + "'");
        }
    }

    if (plan.mode == SimulationPlan::Mode::classical)
        plan.world.validate();
    else
        plan.sequence.validate();
    return plan;
}

} // namespace retq
