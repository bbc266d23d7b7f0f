#include "doctest.h"

#include <cctype>
#include <ctime>
#include <random>
#include <sstream>

#include "retq/ingest.hpp"

using namespace retq;

namespace {

struct Parsed {
    std::vector<TweetRecord> records;
    ParseStats stats;
};

Parsed parse_all(const std::string& input, WireFormat format) {
    Parsed out;
    std::istringstream in(input);
    out.stats = parse_stream(in, format, [&](TweetRecord&& r) { out.records.push_back(std::move(r)); });
    return out;
}

std::string serialize(const std::vector<TweetRecord>& records, WireFormat format) {
    std::ostringstream out;
    write_corpus(out, records, format);
    return out.str();
}

// Independent oracle: libc's calendar-to-epoch conversion.
std::int64_t timegm_oracle(int y, int mo, int d, int h, int mi, int s) {
    std::tm tm{};
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = s;
    return static_cast<std::int64_t>(timegm(&tm));
}

bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Independent restatement of the chain-length contract: count positions where
// the marker is followed by at least one username character.
std::size_t count_marker_occurrences(const std::string& text) {
    std::size_t count = 0;
    for (std::size_t i = 0; i + 4 < text.size(); ++i) {
        const bool marker = (text[i] == 'R' || text[i] == 'r') && (text[i + 1] == 'T' || text[i + 1] == 't') &&
                            text[i + 2] == ' ' && text[i + 3] == '@';
        if (marker && word_char(text[i + 4])) ++count;
    }
    return count;
}

} // namespace

TEST_CASE("snap block yields author, UTC timestamp and text") {
    CHECK(timegm_oracle(2009, 6, 1, 0, 0, 1) == 1243814401); // oracle agrees with the frozen value
    const auto out = parse_all("T 2009-06-01 00:00:01\nU http://twitter.com/alice\nW hello\n", WireFormat::snap);
    REQUIRE(out.records.size() == 1);
    CHECK(out.records[0] == TweetRecord{"alice", 1243814401, "hello"});
    CHECK(out.stats.malformed == 0);
}

TEST_CASE("empty snap stream") {
    const auto out = parse_all("", WireFormat::snap);
    CHECK(out.records.empty());
    CHECK(out.stats.records == 0);
    CHECK(out.stats.malformed == 0);
}

TEST_CASE("snap block with empty username is skipped and counted") {
    const auto out = parse_all("T 2009-06-01 00:00:01\nU http://twitter.com/\nW hello\n", WireFormat::snap);
    CHECK(out.records.empty());
    CHECK(out.stats.malformed == 1);
}

TEST_CASE("snap malformed variants never abort") {
    // missing W line
    auto out = parse_all("T 2009-06-01 00:00:01\nU http://twitter.com/alice\n\n", WireFormat::snap);
    CHECK(out.stats.malformed == 1);
    // bad month
    out = parse_all("T 2009-13-01 00:00:01\nU http://twitter.com/alice\nW x\n", WireFormat::snap);
    CHECK(out.stats.malformed == 1);
    // stray line inside the block
    out = parse_all("T 2009-06-01 00:00:01\nU http://twitter.com/alice\nW x\nX junk\n\n", WireFormat::snap);
    CHECK(out.stats.malformed == 1);
    // username longer than 15 chars
    out = parse_all("T 2009-06-01 00:00:01\nU http://twitter.com/abcdefghijklmnop\nW x\n", WireFormat::snap);
    CHECK(out.stats.malformed == 1);
    // signed year is not a timestamp
    out = parse_all("T -123-06-01 00:00:01\nU http://twitter.com/alice\nW x\n", WireFormat::snap);
    CHECK(out.stats.malformed == 1);
    // a good block after a bad one still parses
    out = parse_all("W orphan\n\nT 2009-06-01 00:00:01\nU http://twitter.com/Bob\nW ok\n", WireFormat::snap);
    CHECK(out.stats.malformed == 1);
    REQUIRE(out.records.size() == 1);
    CHECK(out.records[0].author == "bob"); // case-normalized
}

TEST_CASE("snap accepts tab separators and CRLF") {
    const auto out =
        parse_all("T\t2009-06-01 00:00:01\r\nU\thttp://twitter.com/alice\r\nW\thello there\r\n\r\n", WireFormat::snap);
    REQUIRE(out.records.size() == 1);
    CHECK(out.records[0].text == "hello there");
}

TEST_CASE("jsonl maps fields directly with case normalization") {
    const auto out =
        parse_all(R"({"user":"Bob","text":"RT @alice: hi","created_at":100})" "\n", WireFormat::jsonl);
    REQUIRE(out.records.size() == 1);
    CHECK(out.records[0] == TweetRecord{"bob", 100, "RT @alice: hi"});
}

TEST_CASE("jsonl skips and counts unparseable lines") {
    const auto out = parse_all("not-a-record\n", WireFormat::jsonl);
    CHECK(out.records.empty());
    CHECK(out.stats.malformed == 1);
}

TEST_CASE("jsonl additivity: three valid lines plus one invalid") {
    const std::string input = R"({"user":"a","text":"1","created_at":1})" "\n"
                              R"({"user":"b","text":"2","created_at":2})" "\n"
                              "garbage\n"
                              R"({"user":"c","text":"3","created_at":3})" "\n";
    const auto out = parse_all(input, WireFormat::jsonl);
    CHECK(out.records.size() == 3);
    CHECK(out.stats.malformed == 1);
}

TEST_CASE("jsonl created_at accepts the snap timestamp string") {
    const auto out = parse_all(
        R"({"user":"alice","text":"x","created_at":"2009-06-01 00:00:01"})" "\n", WireFormat::jsonl);
    REQUIRE(out.records.size() == 1);
    CHECK(out.records[0].timestamp == 1243814401);
}

TEST_CASE("jsonl rejects wrong field types and bad usernames") {
    CHECK(parse_all(R"({"user":"alice","text":"x","created_at":1.5})" "\n", WireFormat::jsonl).stats.malformed == 1);
    CHECK(parse_all(R"({"user":"has space","text":"x","created_at":1})" "\n", WireFormat::jsonl).stats.malformed == 1);
    CHECK(parse_all(R"({"user":"alice","text":3,"created_at":1})" "\n", WireFormat::jsonl).stats.malformed == 1);
    CHECK(parse_all(R"({"text":"x","created_at":1})" "\n", WireFormat::jsonl).stats.malformed == 1);
}

TEST_CASE("jsonl normalizes newlines inside text") {
    const auto out = parse_all(R"({"user":"a","text":"two\nlines","created_at":1})" "\n", WireFormat::jsonl);
    REQUIRE(out.records.size() == 1);
    CHECK(out.records[0].text == "two lines");
}

TEST_CASE("retweet chain: two-hop marker") {
    const auto chain = extract_retweet_chain("RT @B1: RT @A: hello");
    CHECK(chain.relays == std::vector<std::string>{"b1", "a"});
}

TEST_CASE("retweet chain: no marker") {
    CHECK(extract_retweet_chain("no retweet here").relays.empty());
}

TEST_CASE("retweet chain: case-insensitive markers in textual order") {
    const auto chain = extract_retweet_chain("rt @X: RT @Y: rt @Z: m");
    CHECK(chain.relays == std::vector<std::string>{"x", "y", "z"});
}

TEST_CASE("retweet chain: marker rules") {
    CHECK(extract_retweet_chain("RT@a").relays.empty());       // missing space
    CHECK(extract_retweet_chain("RT  @a").relays.empty());     // two spaces
    CHECK(extract_retweet_chain("RT @").relays.empty());       // no username
    CHECK(extract_retweet_chain("RT @: x").relays.empty());    // no username char
    // maximal run truncates at 15 chars
    const auto chain = extract_retweet_chain("RT @abcdefghijklmnopqr end");
    REQUIRE(chain.relays.size() == 1);
    CHECK(chain.relays[0] == "abcdefghijklmno");
    // marker overlapping a previous username is still an occurrence
    CHECK(extract_retweet_chain("RT @RT @x").relays == std::vector<std::string>{"rt", "x"});
}

TEST_CASE("chain length equals marker occurrence count on random text") {
    std::mt19937 gen(20090601);
    const std::string alphabet = "Rr Tt@a_1:x";
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::uniform_int_distribution<int> len(0, 40);
    for (int trial = 0; trial < 500; ++trial) {
        std::string text;
        const int l = len(gen);
        for (int i = 0; i < l; ++i) text.push_back(alphabet[pick(gen)]);
        const auto chain = extract_retweet_chain(text);
        CHECK(chain.size() == count_marker_occurrences(text));
        CHECK(extract_retweet_chain(text).relays == chain.relays); // deterministic
    }
}

TEST_CASE("timestamp parse/format round-trips and matches timegm") {
    std::mt19937_64 gen(42);
    std::uniform_int_distribution<std::int64_t> epochs(0, 4102444800); // through 2100
    for (int trial = 0; trial < 300; ++trial) {
        const std::int64_t t = epochs(gen);
        const std::string s = format_timestamp(t);
        const auto back = parse_timestamp(s);
        REQUIRE(back.has_value());
        CHECK(*back == t);
        const int y = std::stoi(s.substr(0, 4));
        const int mo = std::stoi(s.substr(5, 2));
        const int d = std::stoi(s.substr(8, 2));
        const int h = std::stoi(s.substr(11, 2));
        const int mi = std::stoi(s.substr(14, 2));
        const int sec = std::stoi(s.substr(17, 2));
        CHECK(civil_to_epoch(y, mo, d, h, mi, sec) == timegm_oracle(y, mo, d, h, mi, sec));
    }
    CHECK(!parse_timestamp("2009-02-29 00:00:00").has_value()); // not a leap year
    CHECK(parse_timestamp("2008-02-29 00:00:00").has_value());
}

namespace {

std::vector<TweetRecord> random_records(std::mt19937& gen, std::size_t count) {
    const std::string name_chars = "abcdefghijklmnopqrstuvwxyz0123456789_";
    std::uniform_int_distribution<std::size_t> name_pick(0, name_chars.size() - 1);
    std::uniform_int_distribution<int> name_len(1, 15);
    std::uniform_int_distribution<int> text_len(0, 60);
    std::uniform_int_distribution<int> text_char(32, 126);
    std::uniform_int_distribution<std::int64_t> epochs(0, 4102444800);

    std::vector<TweetRecord> records;
    for (std::size_t i = 0; i < count; ++i) {
        TweetRecord r;
        const int nl = name_len(gen);
        for (int j = 0; j < nl; ++j) r.author.push_back(name_chars[name_pick(gen)]);
        r.timestamp = epochs(gen);
        const int tl = text_len(gen);
        for (int j = 0; j < tl; ++j) r.text.push_back(static_cast<char>(text_char(gen)));
        records.push_back(std::move(r));
    }
    return records;
}

} // namespace

TEST_CASE("wire round-trip: serialize then parse is the identity") {
    std::mt19937 gen(7);
    for (const WireFormat format : {WireFormat::snap, WireFormat::jsonl}) {
        const auto records = random_records(gen, 50);
        const auto out = parse_all(serialize(records, format), format);
        CHECK(out.stats.malformed == 0);
        CHECK(out.records == records);
    }
}

TEST_CASE("parsing a concatenation yields the concatenation of the parses") {
    std::mt19937 gen(8);
    for (const WireFormat format : {WireFormat::snap, WireFormat::jsonl}) {
        const auto a = random_records(gen, 20);
        const auto b = random_records(gen, 30);
        const auto joint = parse_all(serialize(a, format) + serialize(b, format), format);
        auto expected = a;
        expected.insert(expected.end(), b.begin(), b.end());
        CHECK(joint.records == expected);
        CHECK(joint.stats.malformed == 0);
    }
}
