#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cognistream/errors.hpp"
#include "cognistream/ids.hpp"
#include "cognistream/stream_store.hpp"

namespace cognistream {

struct MinerConfig {
    std::size_t min_len = 2;
    std::size_t max_len = 16;
    std::uint64_t min_support = 2;
    std::size_t window_size = 1024;

    void validate() const {
        if (min_len < 1 || min_len > max_len) {
            raise(Errc::BadConfig, "cognition", "need 1 <= min_len <= max_len");
        }
        if (min_support < 2) raise(Errc::BadConfig, "cognition", "min_support must be >= 2");
        if (window_size < 1) raise(Errc::BadConfig, "cognition", "window_size must be >= 1");
    }
};

struct Pattern {
    PatternId id = 0;
    Bytes bytes;
    std::uint64_t count = 0;
    WindowIndex first_seen = 0;
    WindowIndex last_seen = 0;
};

struct PatternDictionary {
    std::map<PatternId, Pattern> patterns;

    bool contains(PatternId id) const { return patterns.count(id) != 0; }
    bool empty() const { return patterns.empty(); }
    std::size_t size() const { return patterns.size(); }

    const Pattern& at(PatternId id) const {
        auto it = patterns.find(id);
        if (it == patterns.end()) raise(Errc::UnknownNode, "cognition", "pattern " + hex64(id));
        return it->second;
    }

    void add(Pattern p) {
        auto [it, inserted] = patterns.emplace(p.id, p);
        if (!inserted) {
            it->second.count += p.count;
            it->second.first_seen = std::min(it->second.first_seen, p.first_seen);
            it->second.last_seen = std::max(it->second.last_seen, p.last_seen);
        }
    }
};

struct Token {
    enum class Kind : std::uint8_t { PatternOccurrence, LiteralGap };

    Kind kind = Kind::LiteralGap;
    PatternId pattern = 0;       // set iff PatternOccurrence
    std::uint8_t byte = 0;       // set iff LiteralGap
    std::uint64_t offset = 0;    // offset in the concatenated stream
    std::uint32_t length = 1;    // span covered by this token
    WindowIndex window = 0;
    SegmentId segment = 0;       // segment holding the first byte
    std::uint64_t segment_offset = 0;

    bool is_gap() const { return kind == Kind::LiteralGap; }

    ItemRef item() const {
        return is_gap() ? ItemRef::literal(byte) : ItemRef::pattern(pattern);
    }
};

// Segments concatenated into one addressable byte stream.
struct FlatStream {
    Bytes bytes;
    struct Extent {
        SegmentId segment;
        std::uint64_t begin;
        std::uint64_t length;
    };
    std::vector<Extent> extents;

    // Maps a global offset back to (segment, in-segment offset).
    std::pair<SegmentId, std::uint64_t> locate(std::uint64_t offset) const {
        auto it = std::upper_bound(extents.begin(), extents.end(), offset,
                                   [](std::uint64_t o, const Extent& e) { return o < e.begin; });
        const Extent& e = *std::prev(it);
        return {e.segment, offset - e.begin};
    }
};

inline FlatStream flatten(std::span<const Segment> segments) {
    FlatStream flat;
    for (const Segment& s : segments) {
        flat.extents.push_back({s.id, flat.bytes.size(), s.bytes.size()});
        flat.bytes += s.bytes;
    }
    return flat;
}

namespace detail {

// Maximal uncovered runs as [begin, end) pairs.
inline std::vector<std::pair<std::size_t, std::size_t>> uncovered_runs(
    const std::vector<char>& covered) {
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    std::size_t i = 0;
    const std::size_t n = covered.size();
    while (i < n) {
        while (i < n && covered[i]) ++i;
        std::size_t begin = i;
        while (i < n && !covered[i]) ++i;
        if (i > begin) runs.emplace_back(begin, i);
    }
    return runs;
}

struct Candidate {
    Bytes bytes;
    std::uint64_t count = 0;  // leftmost-greedy non-overlapping occurrences
    std::vector<std::size_t> taken;

    std::uint64_t score() const { return count * bytes.size(); }
};

// True when a beats b under score desc, then length desc, then smaller bytes.
inline bool beats(const Candidate& a, const Candidate& b) {
    if (a.score() != b.score()) return a.score() > b.score();
    if (a.bytes.size() != b.bytes.size()) return a.bytes.size() > b.bytes.size();
    return a.bytes < b.bytes;
}

}  // namespace detail

// Greedy coverage miner. Each round scores every substring of length
// [min_len, max_len] that lies wholly inside the still-uncovered regions by
// count * length (count = leftmost-greedy non-overlapping occurrences), keeps
// the best candidate with count >= min_support, covers its occurrences, and
// repeats until nothing qualifies.
inline PatternDictionary mine_patterns(std::span<const Segment> segments,
                                       const MinerConfig& config) {
    config.validate();
    PatternDictionary dict;
    FlatStream flat = flatten(segments);
    const Bytes& stream = flat.bytes;
    const std::size_t n = stream.size();
    if (n == 0) return dict;

    std::vector<char> covered(n, 0);
    while (true) {
        auto runs = detail::uncovered_runs(covered);
        if (runs.empty()) break;

        detail::Candidate best;
        bool have_best = false;
        for (std::size_t len = config.min_len; len <= config.max_len; ++len) {
            // Occurrence starts per distinct substring; starts are ascending
            // because the runs and the in-run scan both go left to right.
            std::unordered_map<Bytes, std::vector<std::size_t>> starts;
            for (const auto& [begin, end] : runs) {
                if (end - begin < len) continue;
                for (std::size_t i = begin; i + len <= end; ++i) {
                    starts[stream.substr(i, len)].push_back(i);
                }
            }
            for (auto& [bytes, positions] : starts) {
                if (positions.size() < config.min_support) continue;
                detail::Candidate cand;
                cand.bytes = bytes;
                std::size_t cursor = 0;
                for (std::size_t pos : positions) {
                    if (pos < cursor) continue;
                    cand.taken.push_back(pos);
                    cursor = pos + len;
                }
                cand.count = cand.taken.size();
                if (cand.count < config.min_support) continue;
                if (!have_best || detail::beats(cand, best)) {
                    best = std::move(cand);
                    have_best = true;
                }
            }
        }
        if (!have_best) break;

        for (std::size_t pos : best.taken) {
            std::fill(covered.begin() + static_cast<std::ptrdiff_t>(pos),
                      covered.begin() + static_cast<std::ptrdiff_t>(pos + best.bytes.size()), 1);
        }
        Pattern p;
        p.id = pattern_id_of(best.bytes);
        p.bytes = best.bytes;
        p.count = best.count;
        dict.add(std::move(p));
    }
    return dict;
}

// Left-to-right longest-match scan. Every byte lands in exactly one token, so
// concatenating the output reproduces the stream bit-exact.
inline std::vector<Token> tokenize(std::span<const Segment> segments,
                                   const PatternDictionary& dict) {
    FlatStream flat = flatten(segments);
    const Bytes& stream = flat.bytes;

    std::unordered_map<Bytes, PatternId> by_bytes;
    std::vector<std::size_t> lengths;
    for (const auto& [id, p] : dict.patterns) {
        by_bytes.emplace(p.bytes, id);
        lengths.push_back(p.bytes.size());
    }
    std::sort(lengths.begin(), lengths.end(), std::greater<>());
    lengths.erase(std::unique(lengths.begin(), lengths.end()), lengths.end());

    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < stream.size()) {
        Token tok;
        tok.offset = i;
        auto [seg, seg_off] = flat.locate(i);
        tok.segment = seg;
        tok.segment_offset = seg_off;
        bool matched = false;
        for (std::size_t len : lengths) {
            if (len > stream.size() - i) continue;
            auto it = by_bytes.find(stream.substr(i, len));
            if (it != by_bytes.end()) {
                tok.kind = Token::Kind::PatternOccurrence;
                tok.pattern = it->second;
                tok.length = static_cast<std::uint32_t>(len);
                matched = true;
                break;
            }
        }
        if (!matched) {
            tok.kind = Token::Kind::LiteralGap;
            tok.byte = static_cast<std::uint8_t>(stream[i]);
            tok.length = 1;
        }
        tokens.push_back(tok);
        i += tok.length;
    }
    return tokens;
}

// Dense window indices over runs of window_size tokens; a trailing partial
// window is allowed.
inline std::vector<StreamWindow> assign_windows(std::vector<Token>& tokens,
                                                const MinerConfig& config) {
    std::vector<StreamWindow> windows;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        WindowIndex w = static_cast<WindowIndex>(i / config.window_size);
        tokens[i].window = w;
        if (windows.size() <= static_cast<std::size_t>(w)) {
            windows.push_back({w, tokens[i].segment, tokens[i].segment, 0});
        }
        StreamWindow& win = windows.back();
        win.first_segment = std::min(win.first_segment, tokens[i].segment);
        win.last_segment = std::max(win.last_segment, tokens[i].segment);
        ++win.token_count;
    }
    return windows;
}

// Fills first_seen/last_seen from the windowed token stream.
inline void annotate_pattern_windows(PatternDictionary& dict, std::span<const Token> tokens) {
    std::unordered_set<PatternId> seen;
    for (const Token& t : tokens) {
        if (t.is_gap()) continue;
        auto it = dict.patterns.find(t.pattern);
        if (it == dict.patterns.end()) continue;
        if (seen.insert(t.pattern).second) {
            it->second.first_seen = t.window;
            it->second.last_seen = t.window;
        } else {
            it->second.last_seen = std::max(it->second.last_seen, t.window);
        }
    }
}

// Canonical form: pattern_id \t hex(bytes) \t count \t first_seen \t last_seen,
// sorted by pattern_id.
inline std::string export_dictionary(const PatternDictionary& dict) {
    std::string out;
    for (const auto& [id, p] : dict.patterns) {
        out += hex64(id);
        out += '\t';
        out += hex_encode(p.bytes);
        out += '\t';
        out += std::to_string(p.count);
        out += '\t';
        out += std::to_string(p.first_seen);
        out += '\t';
        out += std::to_string(p.last_seen);
        out += '\n';
    }
    return out;
}

}  // namespace cognistream
