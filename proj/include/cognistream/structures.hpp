#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cognistream/cognition.hpp"
#include "cognistream/errors.hpp"
#include "cognistream/ids.hpp"

namespace cognistream {

// An ordered run of items cut from the token stream. timestamp is the window
// of the first token; origin pins the instance to its place in the store.
struct StructureInstance {
    std::vector<ItemRef> items;
    WindowIndex timestamp = 0;
    SegmentId segment = 0;
    std::uint64_t offset = 0;  // in-segment byte offset of the first token

    std::size_t arity() const { return items.size(); }
};

// Identity of a structure is its item list alone.
using StructureKey = std::vector<ItemRef>;

struct StructureGroup {
    StructureKey items;
    std::uint64_t count = 0;
    std::vector<StructureInstance> instances;  // timestamp-ordered
};

using StructureGroups = std::map<StructureKey, StructureGroup>;

struct WindowExtract {
    std::size_t k = 3;
};

struct DelimiterExtract {
    PatternId delimiter = 0;
};

using ExtractMode = std::variant<WindowExtract, DelimiterExtract>;

inline bool instance_order(const StructureInstance& a, const StructureInstance& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    if (a.segment != b.segment) return a.segment < b.segment;
    return a.offset < b.offset;
}

namespace detail {

inline StructureInstance make_instance(std::span<const Token> run) {
    StructureInstance inst;
    inst.items.reserve(run.size());
    for (const Token& t : run) inst.items.push_back(t.item());
    inst.timestamp = run.front().window;
    inst.segment = run.front().segment;
    inst.offset = run.front().segment_offset;
    return inst;
}

}  // namespace detail

// Window mode: gap tokens are dropped, then every k-wide stride-1 window over
// the remaining pattern tokens becomes an instance. Delimiter mode: maximal
// token runs between delimiter occurrences become instances, gaps kept as
// literal items; runs shorter than two tokens are discarded.
inline std::vector<StructureInstance> extract(std::span<const Token> tokens,
                                              const PatternDictionary& dict,
                                              const ExtractMode& mode) {
    std::vector<StructureInstance> out;
    if (const auto* wm = std::get_if<WindowExtract>(&mode)) {
        if (wm->k < 2) raise(Errc::BadArity, "structures", "window k must be >= 2");
        std::vector<Token> kept;
        for (const Token& t : tokens) {
            if (!t.is_gap()) kept.push_back(t);
        }
        if (kept.size() >= wm->k) {
            for (std::size_t i = 0; i + wm->k <= kept.size(); ++i) {
                out.push_back(detail::make_instance({kept.data() + i, wm->k}));
            }
        }
    } else {
        const auto& dm = std::get<DelimiterExtract>(mode);
        if (!dict.contains(dm.delimiter)) {
            raise(Errc::UnknownDelimiter, "structures",
                  "delimiter pattern " + hex64(dm.delimiter) + " not in dictionary");
        }
        std::size_t run_begin = 0;
        auto flush = [&](std::size_t end) {
            if (end - run_begin >= 2) {
                out.push_back(detail::make_instance({tokens.data() + run_begin, end - run_begin}));
            }
        };
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (!tokens[i].is_gap() && tokens[i].pattern == dm.delimiter) {
                flush(i);
                run_begin = i + 1;
            }
        }
        flush(tokens.size());
    }
    return out;
}

// Positional mismatch count (Hamming). Only defined across equal arity.
inline std::size_t distance(std::span<const ItemRef> a, std::span<const ItemRef> b) {
    if (a.size() != b.size()) {
        raise(Errc::ArityMismatch, "structures",
              "arity " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) ++d;
    }
    return d;
}

inline std::size_t distance(const StructureInstance& a, const StructureInstance& b) {
    return distance(std::span<const ItemRef>(a.items), std::span<const ItemRef>(b.items));
}

inline std::vector<std::size_t> mismatch_positions(std::span<const ItemRef> a,
                                                   std::span<const ItemRef> b) {
    if (a.size() != b.size()) {
        raise(Errc::ArityMismatch, "structures",
              "arity " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) out.push_back(i);
    }
    return out;
}

inline StructureGroups dedupe(std::vector<StructureInstance> instances) {
    StructureGroups groups;
    std::stable_sort(instances.begin(), instances.end(), instance_order);
    for (StructureInstance& inst : instances) {
        StructureGroup& g = groups[inst.items];
        if (g.count == 0) g.items = inst.items;
        ++g.count;
        g.instances.push_back(std::move(inst));
    }
    return groups;
}

inline std::string render_items(std::span<const ItemRef> items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ',';
        out += item_key(items[i]);
    }
    return out;
}

// Canonical form: arity \t item1,item2,... \t count, sorted by (arity, items).
inline std::string export_structures(const StructureGroups& groups) {
    std::vector<const StructureGroup*> order;
    order.reserve(groups.size());
    for (const auto& [key, g] : groups) order.push_back(&g);
    std::sort(order.begin(), order.end(), [](const StructureGroup* a, const StructureGroup* b) {
        if (a->items.size() != b->items.size()) return a->items.size() < b->items.size();
        return a->items < b->items;
    });
    std::string out;
    for (const StructureGroup* g : order) {
        out += std::to_string(g->items.size());
        out += '\t';
        out += render_items(g->items);
        out += '\t';
        out += std::to_string(g->count);
        out += '\n';
    }
    return out;
}

}  // namespace cognistream
