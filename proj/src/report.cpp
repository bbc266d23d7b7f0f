#include "retq/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace retq {

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    // trim to the shortest representation that still round-trips
    for (int precision = 1; precision < 17; ++precision) {
        char probe[32];
        std::snprintf(probe, sizeof(probe), "%.*g", precision, value);
        double back = 0.0;
        std::sscanf(probe, "%lf", &back);
        if (back == value) return probe;
    }
    return buf;
}

void write_pattern_csv(std::ostream& out, const PatternStats& stats) {
    out << "n,instance_count,mean_probability,std_error,tweet_count\n";
    for (int n = 1; n <= stats.n_max(); ++n) {
        const auto& row = stats.row(n);
        out << n << ',' << row.instance_count << ',';
        if (row.instance_count > 0)
            out << format_double(row.mean_probability) << ',' << format_double(row.std_error);
        else
            out << ',';
        out << ',' << row.tweet_count << '\n';
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    if (!cells.empty() && !cells.back().empty() && cells.back().back() == '\r') cells.back().pop_back();
    return cells;
}

double parse_csv_double(const std::string& cell, int line_no) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw std::runtime_error("pattern csv: bad number on line " + std::to_string(line_no));
    return out;
}

std::uint64_t parse_csv_u64(const std::string& cell, int line_no) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw std::runtime_error("pattern csv: bad count on line " + std::to_string(line_no));
    return out;
}

} // namespace

PatternStats read_pattern_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("pattern csv: empty input");
    auto header = split_csv_line(line);
    if (header.size() < 4 || header[0] != "n" || header[1] != "instance_count" ||
        header[2] != "mean_probability" || header[3] != "std_error")
        throw std::runtime_error("pattern csv: unexpected header");

    std::map<int, PatternRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() < header.size())
            throw std::runtime_error("pattern csv: wrong cell count on line " + std::to_string(line_no));
        const std::uint64_t n64 = parse_csv_u64(cells[0], line_no);
        if (n64 < 1 || n64 > 10000)
            throw std::runtime_error("pattern csv: channel count out of range on line " + std::to_string(line_no));
        const int n = static_cast<int>(n64);
        PatternRow row;
        row.instance_count = parse_csv_u64(cells[1], line_no);
        if (row.instance_count > 0) {
            row.mean_probability = parse_csv_double(cells[2], line_no);
            row.std_error = parse_csv_double(cells[3], line_no);
        } else if (!cells[2].empty() || !cells[3].empty()) {
            row.mean_probability = cells[2].empty() ? 0.0 : parse_csv_double(cells[2], line_no);
            row.std_error = cells[3].empty() ? 0.0 : parse_csv_double(cells[3], line_no);
        }
        if (!(row.mean_probability >= 0.0 && row.mean_probability <= 1.0) ||
            !(row.std_error >= 0.0) || !std::isfinite(row.std_error))
            throw std::runtime_error("pattern csv: probability fields out of range on line " +
                                     std::to_string(line_no));
        if (header.size() >= 5 && header[4] == "tweet_count" && cells.size() >= 5 && !cells[4].empty())
            row.tweet_count = parse_csv_u64(cells[4], line_no);
        if (!rows.emplace(n, row).second)
            throw std::runtime_error("pattern csv: duplicate row for n=" + std::to_string(n));
    }
    if (rows.empty()) throw std::runtime_error("pattern csv: no rows");

    PatternStats stats(rows.rbegin()->first);
    for (const auto& [n, row] : rows) stats.row(n) = row;
    return stats;
}

void write_instance_csv(std::ostream& out, std::span<const TransferInstance> instances) {
    out << "source,receiver,n,relayed,source_total,probability\n";
    for (const auto& inst : instances) {
        out << inst.source << ',' << inst.receiver << ',' << inst.channel_count() << ','
            << inst.relayed_retweet_count << ',' << inst.source_tweet_count << ','
            << format_double(instance_probability(inst)) << '\n';
    }
}

namespace {

void write_observed_predicted(std::ostream& out, const PatternStats& stats,
                              const std::function<double(int)>& predict, int n_limit) {
    for (int n = 1; n <= stats.n_max(); ++n) {
        if (!stats.populated(n)) continue;
        out << "observed." << n << " = " << format_double(stats.row(n).mean_probability) << '\n';
        if (n <= n_limit) out << "predicted." << n << " = " << format_double(predict(n)) << '\n';
    }
}

} // namespace

void write_classical_report(std::ostream& out, const ClassicalFit& fit, const PatternStats& stats) {
    out << "model = classical\n"
        << "anchor = " << format_double(fit.anchor) << '\n'
        << "slope = " << format_double(fit.slope) << '\n'
        << "n_max_fitted = " << fit.n_max_fitted << '\n'
        << "residual = " << format_double(fit.residual) << '\n';
    write_observed_predicted(out, stats, [&](int n) { return predict_classical(fit, n); }, stats.n_max());
}

void write_quantum_report(std::ostream& out, const QuantumFit& fit, const PatternStats& stats) {
    out << "model = quantum\n"
        << "q1 = " << format_double(fit.q1) << '\n'
        << "channel_prob = " << format_double(fit.channel_prob) << '\n';
    for (std::size_t i = 0; i < fit.phases.size(); ++i)
        out << "theta." << (i + 2) << " = " << format_double(fit.phases[i]) << '\n';
    out << "residual = " << format_double(fit.residual) << '\n'
        << "converged = " << (fit.converged ? 1 : 0) << '\n'
        << "winning_start = " << fit.winning_start << '\n';
    write_observed_predicted(out, stats, [&](int n) { return predict_quantum(fit, n); }, fit.channel_count);

    const QuantumParams params = fit_params(fit);
    for (int i = 1; i <= fit.channel_count; ++i)
        for (int j = i + 1; j <= fit.channel_count; ++j)
            out << "interference." << i << '.' << j << " = "
                << format_double(interference_term(params, i, j)) << '\n';
}

void write_run_report(std::ostream& out, const RunReport& report) {
    for (std::size_t i = 0; i < report.inputs.size(); ++i)
        out << "input." << i << " = " << report.inputs[i] << '\n';
    out << "format = " << report.format << '\n'
        << "records.parsed = " << report.records_parsed << '\n'
        << "records.malformed = " << report.records_malformed << '\n'
        << "records.seen = " << (report.records_parsed + report.records_malformed) << '\n'
        << "tweets.matched = " << report.build.matched_tweets << '\n'
        << "tweets.excluded = " << report.build.excluded_tweets << '\n'
        << "instances.total = " << report.build.groups_total << '\n'
        << "instances.dropped_over_nmax = " << report.build.dropped_over_nmax << '\n'
        << "instances.dropped_no_source = " << report.build.dropped_no_source << '\n'
        << "instances.kept = " << report.build.instances_kept() << '\n'
        << "instances.direct_retweet_pairs = " << report.build.direct_retweet_pairs << '\n'
        << "instances.clamped = " << report.clamped_instances << '\n';
    for (int n = 1; n <= report.stats.n_max(); ++n) {
        const auto& row = report.stats.row(n);
        out << "pattern." << n << ".count = " << row.instance_count << '\n';
        out << "pattern." << n << ".tweets = " << row.tweet_count << '\n';
        if (row.instance_count > 0) {
            out << "pattern." << n << ".mean = " << format_double(row.mean_probability) << '\n';
            out << "pattern." << n << ".std_error = " << format_double(row.std_error) << '\n';
        }
    }
    out << "timing.extract_seconds = " << format_double(report.extract_seconds) << '\n';
    if (report.classical || report.quantum)
        out << "timing.fit_seconds = " << format_double(report.fit_seconds) << '\n';
    if (report.classical) {
        out << '\n';
        write_classical_report(out, *report.classical, report.stats);
    }
    if (report.quantum) {
        out << '\n';
        write_quantum_report(out, *report.quantum, report.stats);
    }
}

} // namespace retq
