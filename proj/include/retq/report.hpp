#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "retq/cascade.hpp"
#include "retq/classical_model.hpp"
#include "retq/quantum_model.hpp"

namespace retq {

/// Shortest decimal form that round-trips a double.
std::string format_double(double value);

/// Columns: n,instance_count,mean_probability,std_error,tweet_count.
/// Rows with instance_count 0 leave the probability fields empty.
void write_pattern_csv(std::ostream& out, const PatternStats& stats);

/// Accepts the four base columns with tweet_count optional.
/// Throws std::runtime_error on malformed input.
PatternStats read_pattern_csv(std::istream& in);

/// Columns: source,receiver,n,relayed,source_total,probability.
void write_instance_csv(std::ostream& out, std::span<const TransferInstance> instances);

/// Flat key-value fit report with per-n observed/predicted rows.
void write_classical_report(std::ostream& out, const ClassicalFit& fit, const PatternStats& stats);

/// Adds the fitted parameters, phases and the per-pair interference table.
void write_quantum_report(std::ostream& out, const QuantumFit& fit, const PatternStats& stats);

struct RunReport {
    std::vector<std::string> inputs;
    std::string format;
    std::uint64_t records_parsed = 0;
    std::uint64_t records_malformed = 0;
    BuildCounters build;
    std::uint64_t clamped_instances = 0;
    PatternStats stats;
    std::optional<ClassicalFit> classical;
    std::optional<QuantumFit> quantum;
    double extract_seconds = 0.0;
    double fit_seconds = 0.0;
};

void write_run_report(std::ostream& out, const RunReport& report);

} // namespace retq
