#pragma once

#include <random>
#include <span>
#include <vector>

#include "cognistream/stream_store.hpp"

namespace helpers {

inline std::vector<cognistream::Segment> one_segment(const cognistream::Bytes& bytes) {
    cognistream::Segment s;
    s.id = 0;
    s.bytes = bytes;
    s.timestamp = 0;
    s.source_tag = "test";
    return {s};
}

inline cognistream::Bytes random_stream(std::mt19937_64& rng, std::size_t length,
                                        int alphabet) {
    std::uniform_int_distribution<int> dist(0, alphabet - 1);
    cognistream::Bytes out;
    out.reserve(length);
    for (std::size_t i = 0; i < length; ++i) {
        out.push_back(static_cast<char>('a' + dist(rng)));
    }
    return out;
}

}  // namespace helpers
