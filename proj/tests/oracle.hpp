#pragma once

// Test-only miner oracle: a plain transcription of the selection rule, kept
// independent of the production implementation. Every round it enumerates all
// substrings of configured lengths that lie wholly inside uncovered bytes,
// counts leftmost-greedy non-overlapping occurrences, and picks the candidate
// with the highest count * length (ties: longer, then smaller bytes).

#include <map>
#include <string>
#include <vector>

#include "cognistream/cognition.hpp"

namespace oracle {

struct Picked {
    cognistream::Bytes bytes;
    std::uint64_t count;
};

inline std::vector<Picked> naive_mine(const cognistream::Bytes& stream,
                                      const cognistream::MinerConfig& cfg) {
    const std::size_t n = stream.size();
    std::vector<bool> covered(n, false);
    std::vector<Picked> picked;

    while (true) {
        std::map<cognistream::Bytes, std::vector<std::size_t>> occurrences;
        for (std::size_t len = cfg.min_len; len <= cfg.max_len && len <= n; ++len) {
            for (std::size_t i = 0; i + len <= n; ++i) {
                bool clean = true;
                for (std::size_t k = i; k < i + len; ++k) {
                    if (covered[k]) {
                        clean = false;
                        break;
                    }
                }
                if (clean) occurrences[stream.substr(i, len)].push_back(i);
            }
        }

        bool have_best = false;
        cognistream::Bytes best_bytes;
        std::vector<std::size_t> best_taken;
        for (const auto& [bytes, positions] : occurrences) {
            std::vector<std::size_t> taken;
            std::size_t cursor = 0;
            bool first = true;
            for (std::size_t pos : positions) {
                if (first || pos >= cursor) {
                    taken.push_back(pos);
                    cursor = pos + bytes.size();
                    first = false;
                }
            }
            if (taken.size() < cfg.min_support) continue;
            std::uint64_t score = taken.size() * bytes.size();
            std::uint64_t best_score = best_taken.size() * best_bytes.size();
            bool wins = false;
            if (!have_best) {
                wins = true;
            } else if (score != best_score) {
                wins = score > best_score;
            } else if (bytes.size() != best_bytes.size()) {
                wins = bytes.size() > best_bytes.size();
            } else {
                wins = bytes < best_bytes;
            }
            if (wins) {
                have_best = true;
                best_bytes = bytes;
                best_taken = taken;
            }
        }
        if (!have_best) break;

        for (std::size_t pos : best_taken) {
            for (std::size_t k = pos; k < pos + best_bytes.size(); ++k) covered[k] = true;
        }
        picked.push_back({best_bytes, best_taken.size()});
    }
    return picked;
}

// The oracle result keyed like a dictionary export, for direct comparison.
inline std::map<cognistream::Bytes, std::uint64_t> naive_mine_map(
    const cognistream::Bytes& stream, const cognistream::MinerConfig& cfg) {
    std::map<cognistream::Bytes, std::uint64_t> out;
    for (const Picked& p : naive_mine(stream, cfg)) out[p.bytes] += p.count;
    return out;
}

}  // namespace oracle
