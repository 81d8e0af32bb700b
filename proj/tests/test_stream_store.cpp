#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include "cognistream/stream_store.hpp"

using namespace cognistream;

TEST_CASE("first append gets id 0", "[stream_store]") {
    StreamStore store;
    CHECK(store.append("abc", 1, "t") == 0);
    CHECK(store.read(0).bytes == "abc");
    CHECK(store.read(0).timestamp == 1);
}

TEST_CASE("appends hand out dense increasing ids", "[stream_store]") {
    StreamStore store;
    CHECK(store.append("a", 0, "t") == 0);
    CHECK(store.append("b", 0, "t") == 1);
    CHECK(store.append("c", 3, "t") == 2);
}

TEST_CASE("timestamp regression is rejected", "[stream_store]") {
    StreamStore store;
    store.append("abc", 5, "t");
    CHECK_THROWS_MATCHES(store.append("x", 0, "t"), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == Errc::TimestampRegression;
                         }));
}

TEST_CASE("empty segments are rejected", "[stream_store]") {
    StreamStore store;
    CHECK_THROWS_MATCHES(store.append("", 0, "t"), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == Errc::EmptySegment;
                         }));
}

TEST_CASE("random bytes round-trip bit-exact", "[stream_store]") {
    std::mt19937_64 rng(7);
    Bytes blob(4096, '\0');
    for (char& c : blob) c = static_cast<char>(rng() & 0xff);
    StreamStore store;
    store.append(Bytes(blob), 0, "t");
    CHECK(store.read(0).bytes == blob);
}

TEST_CASE("unknown segment read fails", "[stream_store]") {
    StreamStore store;
    store.append("a", 0, "t");
    store.append("b", 0, "t");
    store.append("c", 0, "t");
    CHECK_THROWS_MATCHES(store.read(7), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == Errc::UnknownSegment;
                         }));
}

TEST_CASE("snapshot lists ids, timestamps and lengths in order", "[stream_store]") {
    StreamStore store;
    CHECK(store.snapshot().empty());
    store.append("abc", 1, "t");
    store.append("abcde", 2, "t");
    auto snap = store.snapshot();
    REQUIRE(snap.size() == 2);
    CHECK(snap[0].id == 0);
    CHECK(snap[0].timestamp == 1);
    CHECK(snap[0].length == 3);
    CHECK(snap[1].id == 1);
    CHECK(snap[1].timestamp == 2);
    CHECK(snap[1].length == 5);
}

TEST_CASE("snapshot lengths add up over many appends", "[stream_store]") {
    std::mt19937_64 rng(11);
    StreamStore store;
    std::uint64_t total = 0;
    for (int i = 0; i < 100; ++i) {
        std::size_t len = 1 + rng() % 64;
        Bytes b(len, '\0');
        for (char& c : b) c = static_cast<char>(rng() & 0xff);
        total += len;
        store.append(std::move(b), i, "t");
    }
    std::uint64_t listed = 0;
    for (const auto& e : store.snapshot()) listed += e.length;
    CHECK(listed == total);
}

TEST_CASE("file-backed store reconstructs the input file", "[stream_store]") {
    std::mt19937_64 rng(13);
    auto dir = std::filesystem::temp_directory_path() /
               ("cognistream_store_test_" + std::to_string(rng()));
    Bytes whole;
    {
        StreamStore store(dir);
        for (int i = 0; i < 20; ++i) {
            std::size_t len = 1 + rng() % 128;
            Bytes b(len, '\0');
            for (char& c : b) c = static_cast<char>(rng() & 0xff);
            whole += b;
            store.append(std::move(b), i, "chunk");
        }
    }
    {
        StreamStore reopened(dir);
        REQUIRE(reopened.size() == 20);
        Bytes rebuilt;
        for (const Segment& s : reopened.segments()) rebuilt += s.bytes;
        CHECK(rebuilt == whole);
        CHECK(reopened.read(3).source_tag == "chunk");
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("reopening yields an identical snapshot", "[stream_store]") {
    auto dir = std::filesystem::temp_directory_path() / "cognistream_store_snap_test";
    std::filesystem::remove_all(dir);
    std::vector<SnapshotEntry> before;
    {
        StreamStore store(dir);
        store.append("hello", 3, "a");
        store.append("world!", 9, "b");
        before = store.snapshot();
    }
    StreamStore reopened(dir);
    auto after = reopened.snapshot();
    REQUIRE(after.size() == before.size());
    for (std::size_t i = 0; i < after.size(); ++i) {
        CHECK(after[i].id == before[i].id);
        CHECK(after[i].timestamp == before[i].timestamp);
        CHECK(after[i].length == before[i].length);
    }
    std::filesystem::remove_all(dir);
}
