#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace retq {

/// One normalized tweet. Authors are lowercase handles; text keeps its
/// original casing but never contains newline characters.
struct TweetRecord {
    std::string author;     // 1-15 chars of [a-z0-9_]
    std::int64_t timestamp = 0; // seconds since epoch, UTC
    std::string text;

    bool operator==(const TweetRecord&) const = default;
};

/// Usernames found after each "RT @" marker, in textual order.
struct RetweetChain {
    std::vector<std::string> relays;

    bool empty() const { return relays.empty(); }
    std::size_t size() const { return relays.size(); }
};

struct ParseStats {
    std::uint64_t records = 0;   // well-formed records emitted
    std::uint64_t malformed = 0; // blocks/lines skipped

    ParseStats& operator+=(const ParseStats& o) {
        records += o.records;
        malformed += o.malformed;
        return *this;
    }
};

enum class WireFormat { snap, jsonl };

using RecordSink = std::function<void(TweetRecord&&)>;

/// Parses the 3-line block stream format:
///   T <YYYY-MM-DD HH:MM:SS>
///   U http://twitter.com/<username>
///   W <text>
/// Blocks are separated by blank lines. Malformed blocks are skipped and
/// counted, never fatal.
ParseStats parse_snap_stream(std::istream& in, const RecordSink& sink);

/// Parses one flat JSON object per line with fields "user", "text" and
/// "created_at" (epoch seconds integer, or the timestamp string format
/// used by parse_snap_stream). Unparseable lines are skipped and counted.
ParseStats parse_jsonl_stream(std::istream& in, const RecordSink& sink);

ParseStats parse_stream(std::istream& in, WireFormat format, const RecordSink& sink);

/// Lists every username immediately following an occurrence of the marker
/// "RT @" ("RT" case-insensitive, exactly one space, then '@'), in textual
/// order. A username is the maximal run of [A-Za-z0-9_] after the '@',
/// truncated at 15 chars; markers followed by no username char contribute
/// nothing. Pure and deterministic.
RetweetChain extract_retweet_chain(std::string_view text);

void write_snap_record(std::ostream& out, const TweetRecord& record);
void write_jsonl_record(std::ostream& out, const TweetRecord& record);
void write_corpus(std::ostream& out, std::span<const TweetRecord> records, WireFormat format);

/// Validates and lowercases a handle: 1-15 chars of [A-Za-z0-9_].
std::optional<std::string> normalize_username(std::string_view raw);

/// Proleptic Gregorian calendar to seconds since epoch, UTC.
std::int64_t civil_to_epoch(int year, int month, int day, int hour, int minute, int second);

/// Parses "YYYY-MM-DD HH:MM:SS" (UTC). Rejects out-of-range fields.
std::optional<std::int64_t> parse_timestamp(std::string_view s);

/// Inverse of parse_timestamp.
std::string format_timestamp(std::int64_t epoch_seconds);

} // namespace retq
