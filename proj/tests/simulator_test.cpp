#include "doctest.h"

#include <stdexcept>

#include <cmath>
#include <sstream>

#include "retq/cascade.hpp"
#include "retq/simulator.hpp"

using namespace retq;

namespace {

std::string serialize(const std::vector<TweetRecord>& records, WireFormat format) {
    std::ostringstream out;
    write_corpus(out, records, format);
    return out.str();
}

PatternStats extract_stats(const std::vector<TweetRecord>& records, int n_max) {
    return aggregate_patterns(build_instances(records, n_max).instances, n_max);
}

} // namespace

TEST_CASE("ground truth is the sum of per-channel relay*reretweet") {
    WorldConfig config;
    config.relay_probs = {0.2};
    config.reretweet_probs = {0.25};
    CHECK(ground_truth(config) == doctest::Approx(0.05).epsilon(1e-15));

    config.relay_probs = {0.2, 0.2};
    config.reretweet_probs = {0.25, 0.25};
    CHECK(ground_truth(config) == doctest::Approx(0.10).epsilon(1e-15));

    config.relay_probs = {1.0, 1.0};
    config.reretweet_probs = {1.0, 1.0};
    CHECK(ground_truth(config) == 2.0); // clamped downstream, not here
}

TEST_CASE("certain single-channel world emits exactly three tweets") {
    WorldConfig config;
    config.relay_probs = {1.0};
    config.reretweet_probs = {1.0};
    config.tweets_per_source = 1;
    config.seed = 5;
    const auto records = simulate_classical_world(config);
    REQUIRE(records.size() == 3);
    CHECK(records[0].text == "post 0");
    CHECK(records[1].text == "RT @w0a: post 0");
    CHECK(records[2].text == "RT @w0b1: RT @w0a: post 0");

    const auto stats = extract_stats(records, 6);
    CHECK(stats.row(1).instance_count == 1);
    CHECK(stats.row(1).mean_probability == 1.0);
}

TEST_CASE("same seed produces byte-identical corpora") {
    WorldConfig config;
    config.relay_probs = {0.3, 0.1};
    config.reretweet_probs = {0.5, 0.9};
    config.tweets_per_source = 200;
    config.worlds = 3;
    config.seed = 77;
    const auto a = simulate_classical_world(config);
    const auto b = simulate_classical_world(config);
    CHECK(a == b);
    CHECK(serialize(a, WireFormat::snap) == serialize(b, WireFormat::snap));
    CHECK(serialize(a, WireFormat::jsonl) == serialize(b, WireFormat::jsonl));

    config.seed = 78;
    CHECK(simulate_classical_world(config) != a);
}

TEST_CASE("recovered mean tracks ground truth at the binomial rate") {
    WorldConfig config;
    config.relay_probs = {0.2};
    config.reretweet_probs = {0.25};
    config.tweets_per_source = 10000;
    config.seed = 123;
    const auto stats = extract_stats(simulate_classical_world(config), 6);
    REQUIRE(stats.row(1).instance_count == 1);
    const double m = static_cast<double>(config.tweets_per_source);
    const double se = std::sqrt(0.05 * 0.95 / m);
    CHECK(std::abs(stats.row(1).mean_probability - 0.05) <= 3.0 * se);
}

TEST_CASE("oracle agreement per channel count at m=1e4") {
    for (int n = 1; n <= 3; ++n) {
        WorldConfig config;
        config.relay_probs.assign(static_cast<std::size_t>(n), 0.2);
        config.reretweet_probs.assign(static_cast<std::size_t>(n), 0.25);
        config.tweets_per_source = 10000;
        config.seed = 1000 + static_cast<std::uint64_t>(n);
        const auto stats = extract_stats(simulate_classical_world(config), 6);
        REQUIRE(stats.row(n).instance_count == 1);
        const double expected = ground_truth(config);
        const double m = static_cast<double>(config.tweets_per_source);
        const double se = std::sqrt(static_cast<double>(n) * 0.05 * 0.95 / m);
        CHECK(std::abs(stats.row(n).mean_probability - expected) <= 3.0 * se);
    }
}

TEST_CASE("everything the simulator emits parses cleanly") {
    WorldConfig config;
    config.relay_probs = {0.5, 0.5};
    config.reretweet_probs = {0.5, 0.5};
    config.tweets_per_source = 100;
    config.worlds = 2;
    config.seed = 9;
    const auto records = simulate_classical_world(config);

    for (const WireFormat format : {WireFormat::snap, WireFormat::jsonl}) {
        std::istringstream in(serialize(records, format));
        std::vector<TweetRecord> parsed;
        const auto stats = parse_stream(in, format, [&](TweetRecord&& r) { parsed.push_back(std::move(r)); });
        CHECK(stats.malformed == 0);
        CHECK(parsed == records);
    }

    // re-retweets carry exactly the intended two-hop chain
    for (const auto& r : records) {
        const auto chain = extract_retweet_chain(r.text);
        if (r.author == "w0c" || r.author == "w1c") {
            REQUIRE(chain.size() == 2);
            CHECK(chain.relays[1] == (r.author == "w0c" ? "w0a" : "w1a"));
        }
    }
}

TEST_CASE("sequence world realizes a non-monotone target profile") {
    SequenceConfig config;
    config.targets = {0.05, 0.04};
    config.instances_per_pattern = 50;
    config.tweets_per_source = 2000;
    config.seed = 31;
    const auto stats = extract_stats(simulate_sequence_world(config), 2);
    REQUIRE(stats.row(1).instance_count == 50);
    REQUIRE(stats.row(2).instance_count == 50);
    const double m = static_cast<double>(config.tweets_per_source);
    const double inst = static_cast<double>(config.instances_per_pattern);
    for (int n = 1; n <= 2; ++n) {
        const double t = config.targets[static_cast<std::size_t>(n - 1)];
        const double se = std::sqrt(t * (1.0 - t) / m / inst);
        CHECK(std::abs(stats.row(n).mean_probability - t) <= 3.0 * se);
    }
    CHECK(stats.row(2).mean_probability < stats.row(1).mean_probability); // the 1->2 drop survives
}

TEST_CASE("flat targets recover a flat profile") {
    SequenceConfig config;
    config.targets = {0.1, 0.1};
    config.instances_per_pattern = 50;
    config.tweets_per_source = 1000;
    config.seed = 32;
    const auto stats = extract_stats(simulate_sequence_world(config), 2);
    const double se = std::sqrt(0.1 * 0.9 / 1000.0 / 50.0);
    CHECK(std::abs(stats.row(1).mean_probability - 0.1) <= 3.0 * se);
    CHECK(std::abs(stats.row(2).mean_probability - 0.1) <= 3.0 * se);
}

TEST_CASE("every sequence instance keeps its full channel set") {
    SequenceConfig config;
    config.targets = {0.2, 0.05, 0.08};
    config.instances_per_pattern = 20;
    config.tweets_per_source = 200;
    config.seed = 33;
    const auto result = build_instances(simulate_sequence_world(config), 3);
    REQUIRE(result.instances.size() == 60);
    for (const auto& inst : result.instances)
        CHECK(inst.relayed_retweet_count >= static_cast<std::uint64_t>(inst.channel_count()));
}

TEST_CASE("infeasible targets are rejected up front") {
    SequenceConfig config;
    config.targets = {0.05, 0.001}; // 0.001 * 100 = 0.1 expected matches < 2 channels
    config.instances_per_pattern = 1;
    config.tweets_per_source = 100;
    CHECK_THROWS_AS((void)simulate_sequence_world(config), std::invalid_argument);
}

TEST_CASE("sequence worlds are deterministic") {
    SequenceConfig config;
    config.targets = {0.05, 0.04};
    config.instances_per_pattern = 5;
    config.tweets_per_source = 500;
    config.seed = 34;
    const auto a = simulate_sequence_world(config);
    const auto b = simulate_sequence_world(config);
    CHECK(a == b);
    CHECK(serialize(a, WireFormat::snap) == serialize(b, WireFormat::snap));
}

TEST_CASE("config validation names the violated constraint") {
    WorldConfig bad;
    bad.relay_probs = {0.5};
    bad.reretweet_probs = {1.5};
    CHECK_THROWS_WITH_AS((void)simulate_classical_world(bad), doctest::Contains("reretweet"),
                         std::invalid_argument);

    WorldConfig empty;
    CHECK_THROWS_AS((void)simulate_classical_world(empty), std::invalid_argument);

    WorldConfig long_names;
    long_names.relay_probs = {0.5};
    long_names.reretweet_probs = {0.5};
    long_names.name_prefix = "averylongprefix_x";
    CHECK_THROWS_AS((void)simulate_classical_world(long_names), std::invalid_argument);
}

TEST_CASE("simulation config files parse into validated plans") {
    std::istringstream classical(
        "# two-channel world\n"
        "mode = classical\n"
        "worlds = 4\n"
        "tweets_per_source = 1000\n"
        "seed = 42\n"
        "relay_probs = 0.2, 0.2\n"
        "reretweet_probs = 0.25, 0.25\n");
    const auto plan = parse_simulation_config(classical);
    CHECK(plan.mode == SimulationPlan::Mode::classical);
    CHECK(plan.world.worlds == 4);
    CHECK(plan.world.relay_probs == std::vector<double>{0.2, 0.2});

    std::istringstream sequence(
        "mode = sequence\n"
        "targets = 0.05, 0.04\n"
        "instances_per_pattern = 3\n"
        "tweets_per_source = 500\n"
        "seed = 7\n");
    const auto seq = parse_simulation_config(sequence);
    CHECK(seq.mode == SimulationPlan::Mode::sequence);
    CHECK(seq.sequence.targets.size() == 2);

    std::istringstream missing_mode("worlds = 2\n");
    CHECK_THROWS_AS((void)parse_simulation_config(missing_mode), std::invalid_argument);

    std::istringstream unknown("mode = classical\nbogus = 1\n");
    CHECK_THROWS_AS((void)parse_simulation_config(unknown), std::invalid_argument);

    std::istringstream infeasible(
        "mode = sequence\n"
        "targets = 0.05, 0.001\n"
        "instances_per_pattern = 1\n"
        "tweets_per_source = 100\n");
    CHECK_THROWS_AS((void)parse_simulation_config(infeasible), std::invalid_argument);
}
