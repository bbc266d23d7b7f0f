#include "retq/ingest.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <istream>
#include <ostream>

#include "json.hpp"

namespace retq {

namespace {

constexpr std::size_t kMaxUsernameLen = 15;

bool is_username_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

char to_lower_ascii(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool parse_fixed_uint(std::string_view s, int& out) {
    for (char c : s)
        if (c < '0' || c > '9') return false;
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) return false;
    out = value;
    return true;
}

bool leap_year(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

int days_in_month(int y, int m) {
    static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && leap_year(y)) return 29;
    return kDays[static_cast<std::size_t>(m - 1)];
}

// Howard Hinnant's days_from_civil / civil_from_days.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yr + (m <= 2));
}

// Euclidean divmod so negative epochs map to the correct day.
void floor_divmod(std::int64_t a, std::int64_t b, std::int64_t& q, std::int64_t& r) {
    q = a / b;
    r = a % b;
    if (r < 0) {
        q -= 1;
        r += b;
    }
}

std::string normalize_text(std::string_view raw) {
    std::string text(raw);
    for (char& c : text) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return text;
}

} // namespace

std::optional<std::string> normalize_username(std::string_view raw) {
    if (raw.empty() || raw.size() > kMaxUsernameLen) return std::nullopt;
    std::string name;
    name.reserve(raw.size());
    for (char c : raw) {
        if (!is_username_char(c)) return std::nullopt;
        name.push_back(to_lower_ascii(c));
    }
    return name;
}

std::int64_t civil_to_epoch(int year, int month, int day, int hour, int minute, int second) {
    return days_from_civil(year, month, day) * 86400 + static_cast<std::int64_t>(hour) * 3600 +
           static_cast<std::int64_t>(minute) * 60 + second;
}

std::optional<std::int64_t> parse_timestamp(std::string_view s) {
    // YYYY-MM-DD HH:MM:SS, fixed width
    if (s.size() != 19 || s[4] != '-' || s[7] != '-' || s[10] != ' ' || s[13] != ':' || s[16] != ':')
        return std::nullopt;
    int y, mo, d, h, mi, sec;
    if (!parse_fixed_uint(s.substr(0, 4), y) || !parse_fixed_uint(s.substr(5, 2), mo) ||
        !parse_fixed_uint(s.substr(8, 2), d) || !parse_fixed_uint(s.substr(11, 2), h) ||
        !parse_fixed_uint(s.substr(14, 2), mi) || !parse_fixed_uint(s.substr(17, 2), sec))
        return std::nullopt;
    if (mo < 1 || mo > 12 || d < 1 || d > days_in_month(y, mo)) return std::nullopt;
    if (h > 23 || mi > 59 || sec > 59) return std::nullopt;
    return civil_to_epoch(y, mo, d, h, mi, sec);
}

std::string format_timestamp(std::int64_t epoch_seconds) {
    std::int64_t days, rem;
    floor_divmod(epoch_seconds, 86400, days, rem);
    int y, m, d;
    civil_from_days(days, y, m, d);
    const int h = static_cast<int>(rem / 3600);
    const int mi = static_cast<int>((rem / 60) % 60);
    const int s = static_cast<int>(rem % 60);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", y, m, d, h, mi, s);
    return buf;
}

namespace {

// One SNAP block being assembled. Any structural irregularity marks the
// whole block malformed; it is counted once when flushed.
struct SnapBlock {
    std::optional<std::int64_t> timestamp;
    std::optional<std::string> author;
    std::optional<std::string> text;
    bool any_line = false;
    bool bad = false;

    void reset() { *this = SnapBlock{}; }

    void flush(const RecordSink& sink, ParseStats& stats) {
        if (!any_line) return;
        if (!bad && timestamp && author && text) {
            sink(TweetRecord{std::move(*author), *timestamp, std::move(*text)});
            ++stats.records;
        } else {
            ++stats.malformed;
        }
        reset();
    }
};

} // namespace

ParseStats parse_snap_stream(std::istream& in, const RecordSink& sink) {
    ParseStats stats;
    SnapBlock block;
    std::string line;
    while (std::getline(in, line)) {
        strip_cr(line);
        if (line.empty()) {
            block.flush(sink, stats);
            continue;
        }
        block.any_line = true;
        if (line.size() < 2 || (line[1] != ' ' && line[1] != '\t')) {
            block.bad = true;
            continue;
        }
        const std::string_view payload = std::string_view(line).substr(2);
        switch (line[0]) {
        case 'T': {
            if (block.timestamp) block.bad = true;
            block.timestamp = parse_timestamp(payload);
            if (!block.timestamp) block.bad = true;
            break;
        }
        case 'U': {
            if (block.author) block.bad = true;
            const auto slash = payload.rfind('/');
            if (slash == std::string_view::npos) {
                block.bad = true;
                break;
            }
            block.author = normalize_username(payload.substr(slash + 1));
            if (!block.author) block.bad = true;
            break;
        }
        case 'W': {
            if (block.text) block.bad = true;
            block.text = normalize_text(payload);
            break;
        }
        default:
            block.bad = true;
            break;
        }
    }
    block.flush(sink, stats);
    return stats;
}

ParseStats parse_jsonl_stream(std::istream& in, const RecordSink& sink) {
    ParseStats stats;
    std::string line;
    while (std::getline(in, line)) {
        strip_cr(line);
        const auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded() || !j.is_object() || !j.contains("user") || !j.contains("text") ||
            !j.contains("created_at") || !j["user"].is_string() || !j["text"].is_string()) {
            ++stats.malformed;
            continue;
        }
        std::optional<std::int64_t> ts;
        const auto& created = j["created_at"];
        if (created.is_number_integer()) {
            ts = created.get<std::int64_t>();
        } else if (created.is_string()) {
            ts = parse_timestamp(created.get_ref<const std::string&>());
        }
        auto author = normalize_username(j["user"].get_ref<const std::string&>());
        if (!ts || !author) {
            ++stats.malformed;
            continue;
        }
        sink(TweetRecord{std::move(*author), *ts, normalize_text(j["text"].get_ref<const std::string&>())});
        ++stats.records;
    }
    return stats;
}

ParseStats parse_stream(std::istream& in, WireFormat format, const RecordSink& sink) {
    return format == WireFormat::snap ? parse_snap_stream(in, sink) : parse_jsonl_stream(in, sink);
}

RetweetChain extract_retweet_chain(std::string_view text) {
    RetweetChain chain;
    std::size_t i = 0;
    while (i + 4 <= text.size()) {
        const bool marker = (text[i] == 'R' || text[i] == 'r') && (text[i + 1] == 'T' || text[i + 1] == 't') &&
                            text[i + 2] == ' ' && text[i + 3] == '@';
        if (!marker) {
            ++i;
            continue;
        }
        const std::size_t start = i + 4;
        std::size_t end = start;
        while (end < text.size() && end - start < kMaxUsernameLen && is_username_char(text[end])) ++end;
        if (end > start) {
            std::string name(text.substr(start, end - start));
            for (char& c : name) c = to_lower_ascii(c);
            chain.relays.push_back(std::move(name));
        }
        i += 4;
    }
    return chain;
}

void write_snap_record(std::ostream& out, const TweetRecord& record) {
    out << "T " << format_timestamp(record.timestamp) << '\n'
        << "U http://twitter.com/" << record.author << '\n'
        << "W " << record.text << '\n'
        << '\n';
}

void write_jsonl_record(std::ostream& out, const TweetRecord& record) {
    nlohmann::json j;
    j["user"] = record.author;
    j["text"] = record.text;
    j["created_at"] = record.timestamp;
    out << j.dump() << '\n';
}

void write_corpus(std::ostream& out, std::span<const TweetRecord> records, WireFormat format) {
    for (const auto& r : records) {
        if (format == WireFormat::snap)
            write_snap_record(out, r);
        else
            write_jsonl_record(out, r);
    }
}

} // namespace retq
