// retq: extract retweet transfer patterns from tweet corpora, fit the
// classical and quantum attention models, and simulate synthetic corpora
// with known ground truth.

#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "retq/cascade.hpp"
#include "retq/classical_model.hpp"
#include "retq/ingest.hpp"
#include "retq/quantum_model.hpp"
#include "retq/report.hpp"
#include "retq/simulator.hpp"

namespace {

using namespace retq;

WireFormat parse_format(const std::string& name) {
    return name == "jsonl" ? WireFormat::jsonl : WireFormat::snap;
}

// Corpora are never materialized; records flow straight into the sink.
ParseStats stream_inputs(const std::vector<std::string>& paths, WireFormat format, const RecordSink& sink) {
    ParseStats stats;
    for (const auto& path : paths) {
        if (path == "-") {
            stats += parse_stream(std::cin, format, sink);
            continue;
        }
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open input '" + path + "'");
        stats += parse_stream(in, format, sink);
    }
    return stats;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output '" + path + "'");
    return out;
}

// Returns the stream for `path`, with "-" meaning stdout.
std::ostream& output_stream(const std::string& path, std::ofstream& storage) {
    if (path == "-") return std::cout;
    storage = open_output(path);
    return storage;
}

// Data files are closed and checked before any further diagnostics are
// printed, so a reader that stops consuming our stderr cannot truncate them.
void close_or_throw(std::ofstream& out, const std::string& path) {
    out.close();
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

void finish_output(const std::string& path, std::ofstream& storage) {
    if (path == "-") {
        std::cout.flush();
        if (!std::cout) throw std::runtime_error("failed writing to stdout");
    } else {
        close_or_throw(storage, path);
    }
}

void print_extract_summary(std::ostream& err, const ParseStats& parse, const BuildCounters& build,
                           std::uint64_t clamped) {
    err << "records parsed: " << parse.records << " (malformed: " << parse.malformed << ")\n"
        << "two-hop retweets: " << build.matched_tweets << " (excluded: " << build.excluded_tweets << ")\n"
        << "instances kept: " << build.instances_kept() << " of " << build.groups_total
        << " (dropped over n_max: " << build.dropped_over_nmax
        << ", dropped no source: " << build.dropped_no_source << ")\n"
        << "direct retweet pairs: " << build.direct_retweet_pairs << "\n"
        << "clamped probabilities: " << clamped << "\n";
}

int run_extract(const std::vector<std::string>& inputs, const std::string& format, int n_max,
                const std::string& out_stem) {
    InstanceBuilder builder(n_max);
    const ParseStats parse =
        stream_inputs(inputs, parse_format(format), [&](TweetRecord&& r) { builder.add(r); });
    const BuildResult built = builder.finish();
    const PatternStats stats = aggregate_patterns(built.instances, n_max);

    {
        auto patterns = open_output(out_stem + ".patterns.csv");
        write_pattern_csv(patterns, stats);
        close_or_throw(patterns, out_stem + ".patterns.csv");
        auto instances = open_output(out_stem + ".instances.csv");
        write_instance_csv(instances, built.instances);
        close_or_throw(instances, out_stem + ".instances.csv");
    }
    print_extract_summary(std::cerr, parse, built.counters, count_clamped(built.instances));
    return 0;
}

int run_fit(const std::string& stats_path, const std::string& model, const std::string& out_path,
            const QuantumFitConfig& qconfig, bool weighted) {
    PatternStats stats;
    if (stats_path == "-") {
        stats = read_pattern_csv(std::cin);
    } else {
        std::ifstream in(stats_path);
        if (!in) throw std::runtime_error("cannot open input '" + stats_path + "'");
        stats = read_pattern_csv(in);
    }

    std::ofstream storage;
    std::ostream& out = output_stream(out_path, storage);
    bool first = true;
    if (model == "classical" || model == "both") {
        const ClassicalFit fit = fit_classical(stats, ClassicalFitOptions{weighted});
        write_classical_report(out, fit, stats);
        first = false;
    }
    if (model == "quantum" || model == "both") {
        if (!first) out << '\n';
        const QuantumFit fit = fit_quantum(stats, qconfig);
        write_quantum_report(out, fit, stats);
    }
    finish_output(out_path, storage);
    return 0;
}

int run_simulate(const std::string& config_path, const std::string& out_path, const std::string& format,
                 bool seed_given, std::uint64_t seed) {
    SimulationPlan plan;
    if (config_path == "-") {
        plan = parse_simulation_config(std::cin);
    } else {
        std::ifstream in(config_path);
        if (!in) throw std::runtime_error("cannot open config '" + config_path + "'");
        plan = parse_simulation_config(in);
    }
    if (seed_given) {
        plan.world.seed = seed;
        plan.sequence.seed = seed;
    }

    std::vector<TweetRecord> records;
    if (plan.mode == SimulationPlan::Mode::classical) {
        records = simulate_classical_world(plan.world);
        std::cerr << "ground truth: n=" << plan.world.channel_count()
                  << " expected=" << format_double(ground_truth(plan.world)) << " per world\n";
    } else {
        records = simulate_sequence_world(plan.sequence);
        for (int n = 1; n <= plan.sequence.n_max(); ++n)
            std::cerr << "ground truth: n=" << n
                      << " target=" << format_double(plan.sequence.targets[static_cast<std::size_t>(n - 1)])
                      << "\n";
    }

    std::ofstream storage;
    std::ostream& out = output_stream(out_path, storage);
    write_corpus(out, records, parse_format(format));
    finish_output(out_path, storage);
    std::cerr << "records written: " << records.size() << "\n";
    return 0;
}

int run_report(const std::vector<std::string>& inputs, const std::string& format, int n_max,
               const std::string& model, const std::string& out_path, const QuantumFitConfig& qconfig,
               bool weighted) {
    using Clock = std::chrono::steady_clock;

    RunReport report;
    report.inputs = inputs;
    report.format = format;

    const auto extract_begin = Clock::now();
    InstanceBuilder builder(n_max);
    const ParseStats parse =
        stream_inputs(inputs, parse_format(format), [&](TweetRecord&& r) { builder.add(r); });
    const BuildResult built = builder.finish();
    report.stats = aggregate_patterns(built.instances, n_max);
    report.records_parsed = parse.records;
    report.records_malformed = parse.malformed;
    report.build = built.counters;
    report.clamped_instances = count_clamped(built.instances);
    report.extract_seconds = std::chrono::duration<double>(Clock::now() - extract_begin).count();

    const auto fit_begin = Clock::now();
    if (model == "classical" || model == "both")
        report.classical = fit_classical(report.stats, ClassicalFitOptions{weighted});
    if (model == "quantum" || model == "both") report.quantum = fit_quantum(report.stats, qconfig);
    report.fit_seconds = std::chrono::duration<double>(Clock::now() - fit_begin).count();

    std::ofstream storage;
    std::ostream& out = output_stream(out_path, storage);
    write_run_report(out, report);
    finish_output(out_path, storage);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"retweet transfer pattern extraction and attention-model fitting"};
    app.require_subcommand(1);

    std::vector<std::string> inputs;
    std::string format = "snap";
    std::string model = "both";
    std::string out_path = "-";
    std::string out_stem = "out";
    std::string stats_path;
    std::string config_path;
    int n_max = 6;
    bool weighted = false;
    QuantumFitConfig qconfig;
    std::uint64_t seed = 0;

    auto* extract = app.add_subcommand("extract", "parse a corpus and write instance and pattern tables");
    extract->add_option("inputs", inputs, "corpus files ('-' for stdin)")->required();
    extract->add_option("--format", format, "input wire format")->check(CLI::IsMember({"snap", "jsonl"}));
    extract->add_option("--nmax", n_max, "largest channel count kept")->check(CLI::PositiveNumber);
    extract->add_option("--out", out_stem, "output stem for <stem>.patterns.csv and <stem>.instances.csv");

    auto* fit = app.add_subcommand("fit", "fit models to a pattern-stats table");
    fit->add_option("stats", stats_path, "pattern-stats csv ('-' for stdin)")->required();
    fit->add_option("--model", model, "model selection")->check(CLI::IsMember({"classical", "quantum", "both"}));
    fit->add_option("--out", out_path, "report path ('-' for stdout)");
    fit->add_option("--seed", qconfig.seed, "start-grid seed");
    fit->add_option("--starts", qconfig.starts, "multi-start count")->check(CLI::PositiveNumber);
    fit->add_option("--evals", qconfig.max_evals, "objective evaluations per start")->check(CLI::PositiveNumber);
    fit->add_option("--threads", qconfig.threads, "parallel starts")->check(CLI::PositiveNumber);
    fit->add_flag("--weighted", weighted, "weight the classical regression by instance counts");

    auto* simulate = app.add_subcommand("simulate", "generate a synthetic corpus from a config file");
    simulate->add_option("config", config_path, "flat key-value config ('-' for stdin)")->required();
    simulate->add_option("--out", out_path, "corpus path ('-' for stdout)");
    simulate->add_option("--format", format, "output wire format")->check(CLI::IsMember({"snap", "jsonl"}));
    auto* seed_opt = simulate->add_option("--seed", seed, "override the config seed");

    auto* report = app.add_subcommand("report", "run extract and fit, emit one bundled report");
    report->add_option("inputs", inputs, "corpus files ('-' for stdin)")->required();
    report->add_option("--format", format, "input wire format")->check(CLI::IsMember({"snap", "jsonl"}));
    report->add_option("--nmax", n_max, "largest channel count kept")->check(CLI::PositiveNumber);
    report->add_option("--model", model, "model selection")->check(CLI::IsMember({"classical", "quantum", "both"}));
    report->add_option("--seed", qconfig.seed, "quantum start-grid seed");
    report->add_option("--starts", qconfig.starts, "multi-start count")->check(CLI::PositiveNumber);
    report->add_option("--evals", qconfig.max_evals, "objective evaluations per start")->check(CLI::PositiveNumber);
    report->add_option("--threads", qconfig.threads, "parallel starts")->check(CLI::PositiveNumber);
    report->add_flag("--weighted", weighted, "weight the classical regression by instance counts");
    report->add_option("--out", out_path, "report path ('-' for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (extract->parsed()) return run_extract(inputs, format, n_max, out_stem);
        if (fit->parsed()) return run_fit(stats_path, model, out_path, qconfig, weighted);
        if (simulate->parsed())
            return run_simulate(config_path, out_path, format, seed_opt->count() > 0, seed);
        if (report->parsed())
            return run_report(inputs, format, n_max, model, out_path, qconfig, weighted);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
