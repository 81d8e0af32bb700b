#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <set>

#include "cognistream/cognition.hpp"
#include "oracle.hpp"
#include "test_helpers.hpp"

using namespace cognistream;
using helpers::one_segment;

namespace {

std::map<Bytes, std::uint64_t> mined_map(const Bytes& stream, const MinerConfig& cfg) {
    auto segs = one_segment(stream);
    std::map<Bytes, std::uint64_t> out;
    for (const auto& [id, p] : mine_patterns(segs, cfg).patterns) out[p.bytes] = p.count;
    return out;
}

}  // namespace

TEST_CASE("abcabcabc mines to a single pattern", "[cognition]") {
    auto mined = mined_map("abcabcabc", {});
    REQUIRE(mined.size() == 1);
    CHECK(mined.at("abc") == 3);
    CHECK(mined == oracle::naive_mine_map("abcabcabc", {}));
}

TEST_CASE("a stream with no repeats mines to nothing", "[cognition]") {
    CHECK(mined_map("abcdef", {}).empty());
}

TEST_CASE("empty input mines to an empty dictionary", "[cognition]") {
    std::vector<Segment> none;
    CHECK(mine_patterns(none, {}).empty());
}

TEST_CASE("a 257-byte stream with min_len 1 always yields patterns", "[cognition]") {
    std::mt19937_64 rng(17);
    MinerConfig cfg;
    cfg.min_len = 1;
    for (int round = 0; round < 8; ++round) {
        Bytes stream(257, '\0');
        for (char& c : stream) c = static_cast<char>(rng() & 0xff);
        CHECK_FALSE(mined_map(stream, cfg).empty());
    }
}

TEST_CASE("miner matches the naive oracle on random streams", "[cognition]") {
    std::mt19937_64 rng(23);
    MinerConfig cfg;
    for (int round = 0; round < 40; ++round) {
        std::size_t length = 16 + rng() % 1024;
        Bytes stream = helpers::random_stream(rng, length, 6);
        INFO("round " << round << " length " << length);
        CHECK(mined_map(stream, cfg) == oracle::naive_mine_map(stream, cfg));
    }
}

TEST_CASE("miner matches the oracle with min_len 1 and longer caps", "[cognition]") {
    std::mt19937_64 rng(29);
    MinerConfig cfg;
    cfg.min_len = 1;
    cfg.max_len = 8;
    for (int round = 0; round < 10; ++round) {
        Bytes stream = helpers::random_stream(rng, 64 + rng() % 256, 4);
        CHECK(mined_map(stream, cfg) == oracle::naive_mine_map(stream, cfg));
    }
}

TEST_CASE("pattern ids are a pure function of bytes", "[cognition]") {
    auto a = mine_patterns(one_segment("abcabcabc"), {});
    auto b = mine_patterns(one_segment("xxabcxxabcxxabc"), {});
    PatternId id_a = 0;
    PatternId id_b = 0;
    for (const auto& [id, p] : a.patterns) {
        if (p.bytes == "abc") id_a = id;
    }
    for (const auto& [id, p] : b.patterns) {
        if (p.bytes == "abc") id_b = id;
    }
    REQUIRE(id_a != 0);
    CHECK(id_a == id_b);
}

TEST_CASE("tokenize emits longest matches with literal gaps", "[cognition]") {
    auto segs = one_segment("xxabcy");
    PatternDictionary dict;
    dict.add({pattern_id_of("abc"), "abc", 1, 0, 0});
    auto tokens = tokenize(segs, dict);
    REQUIRE(tokens.size() == 4);
    CHECK(tokens[0].is_gap());
    CHECK(tokens[0].byte == 'x');
    CHECK(tokens[1].is_gap());
    CHECK_FALSE(tokens[2].is_gap());
    CHECK(tokens[2].pattern == pattern_id_of("abc"));
    CHECK(tokens[2].offset == 2);
    CHECK(tokens[3].is_gap());
    CHECK(tokens[3].byte == 'y');
}

TEST_CASE("tokenize with an empty dictionary is all gaps", "[cognition]") {
    auto tokens = tokenize(one_segment("ab"), {});
    REQUIRE(tokens.size() == 2);
    CHECK(tokens[0].is_gap());
    CHECK(tokens[1].is_gap());
}

TEST_CASE("longest match wins over a shorter prefix", "[cognition]") {
    PatternDictionary dict;
    dict.add({pattern_id_of("ab"), "ab", 1, 0, 0});
    dict.add({pattern_id_of("abc"), "abc", 1, 0, 0});
    auto tokens = tokenize(one_segment("abc"), dict);
    REQUIRE(tokens.size() == 1);
    CHECK(tokens[0].pattern == pattern_id_of("abc"));
}

TEST_CASE("token spans tile the stream and reconstruct it", "[cognition]") {
    std::mt19937_64 rng(31);
    MinerConfig cfg;
    for (int round = 0; round < 20; ++round) {
        Bytes stream = helpers::random_stream(rng, 32 + rng() % 2048, 6);
        auto segs = one_segment(stream);
        auto dict = mine_patterns(segs, cfg);
        auto tokens = tokenize(segs, dict);
        Bytes rebuilt;
        std::uint64_t expected_offset = 0;
        for (const Token& t : tokens) {
            CHECK(t.offset == expected_offset);
            expected_offset += t.length;
            if (t.is_gap()) {
                rebuilt.push_back(static_cast<char>(t.byte));
            } else {
                rebuilt += dict.at(t.pattern).bytes;
            }
        }
        CHECK(rebuilt == stream);
    }
}

TEST_CASE("mining and tokenizing are deterministic", "[cognition]") {
    std::mt19937_64 rng(37);
    Bytes stream = helpers::random_stream(rng, 1024, 6);
    auto segs = one_segment(stream);
    auto d1 = mine_patterns(segs, {});
    auto d2 = mine_patterns(segs, {});
    CHECK(export_dictionary(d1) == export_dictionary(d2));
    auto t1 = tokenize(segs, d1);
    auto t2 = tokenize(segs, d2);
    REQUIRE(t1.size() == t2.size());
    for (std::size_t i = 0; i < t1.size(); ++i) {
        CHECK(t1[i].offset == t2[i].offset);
        CHECK(t1[i].kind == t2[i].kind);
    }
}

TEST_CASE("retained counts meet min_support", "[cognition]") {
    std::mt19937_64 rng(41);
    MinerConfig cfg;
    cfg.min_support = 3;
    for (int round = 0; round < 10; ++round) {
        Bytes stream = helpers::random_stream(rng, 512, 4);
        for (const auto& [bytes, count] : mined_map(stream, cfg)) {
            CHECK(count >= cfg.min_support);
        }
    }
}

TEST_CASE("window assignment is dense with a partial tail", "[cognition]") {
    MinerConfig cfg;
    auto make_tokens = [](std::size_t n) {
        std::vector<Token> tokens(n);
        for (std::size_t i = 0; i < n; ++i) {
            tokens[i].offset = i;
            tokens[i].segment = 0;
        }
        return tokens;
    };

    auto t1 = make_tokens(2048);
    auto w1 = assign_windows(t1, cfg);
    REQUIRE(w1.size() == 2);
    CHECK(w1[0].token_count == 1024);
    CHECK(w1[1].token_count == 1024);

    auto t2 = make_tokens(1025);
    auto w2 = assign_windows(t2, cfg);
    REQUIRE(w2.size() == 2);
    CHECK(w2[0].token_count == 1024);
    CHECK(w2[1].token_count == 1);
    CHECK(t2[1024].window == 1);

    std::vector<Token> t3;
    CHECK(assign_windows(t3, cfg).empty());
}

TEST_CASE("dictionary window annotations track tokens", "[cognition]") {
    MinerConfig cfg;
    cfg.window_size = 4;
    auto segs = one_segment("abXYabZWab");
    auto dict = mine_patterns(segs, cfg);
    auto tokens = tokenize(segs, dict);
    assign_windows(tokens, cfg);
    annotate_pattern_windows(dict, tokens);
    const Pattern& ab = dict.at(pattern_id_of("ab"));
    CHECK(ab.first_seen == 0);
    CHECK(ab.last_seen == 1);
}

TEST_CASE("dictionary export is canonical", "[cognition]") {
    auto dict = mine_patterns(one_segment("abcabcabc"), {});
    std::string text = export_dictionary(dict);
    CHECK(text == hex64(pattern_id_of("abc")) + "\t616263\t3\t0\t0\n");
}
