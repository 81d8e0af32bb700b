#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace cognistream {

// Raw byte buffer. std::string keeps memcmp ordering (unsigned bytewise) and
// cheap hashing, which the canonical export formats rely on.
using Bytes = std::string;

using PatternId = std::uint64_t;
using NodeId = std::uint64_t;
using SubjectId = std::uint64_t;  // patterns and template nodes share one score table
using SegmentId = std::int64_t;
using WindowIndex = std::int64_t;

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = kFnvOffset) {
    for (unsigned char c : data) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

// Content identity: equal bytes hash to equal ids on every unit.
inline PatternId pattern_id_of(const Bytes& bytes) { return fnv1a(bytes); }

inline std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::string hex_byte(std::uint8_t b) {
    static constexpr char digits[] = "0123456789abcdef";
    return {digits[b >> 4], digits[b & 0xf]};
}

inline std::string hex_encode(const Bytes& bytes) {
    std::string out;
    out.reserve(bytes.size() * 2);
    for (unsigned char c : bytes) out += hex_byte(c);
    return out;
}

inline int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

// Returns false on odd length or non-hex characters.
inline bool hex_decode(std::string_view hex, Bytes& out) {
    if (hex.size() % 2 != 0) return false;
    out.clear();
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_nibble(hex[i]);
        int lo = hex_nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) return false;
        out.push_back(static_cast<char>((hi << 4) | lo));
    }
    return true;
}

// One position of a structure: either a mined pattern or a literal stream byte
// that never made it into the dictionary. Ordering is (kind, value), which
// coincides with the ordering of the canonical text keys (pattern hex sorts
// before "lit:xx").
struct ItemRef {
    enum class Kind : std::uint8_t { Pattern = 0, Literal = 1 };

    Kind kind = Kind::Pattern;
    std::uint64_t value = 0;

    static ItemRef pattern(PatternId id) { return {Kind::Pattern, id}; }
    static ItemRef literal(std::uint8_t b) { return {Kind::Literal, b}; }

    bool is_pattern() const { return kind == Kind::Pattern; }

    friend constexpr auto operator<=>(const ItemRef&, const ItemRef&) = default;
};

inline std::string item_key(const ItemRef& item) {
    if (item.kind == ItemRef::Kind::Pattern) return hex64(item.value);
    return "lit:" + hex_byte(static_cast<std::uint8_t>(item.value));
}

}  // namespace cognistream
