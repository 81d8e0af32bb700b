#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cognistream/cognition.hpp"
#include "cognistream/errors.hpp"
#include "cognistream/generalization.hpp"
#include "cognistream/ids.hpp"
#include "cognistream/relevancy.hpp"

namespace cognistream {

// How a leaf has to relate to the resolved keywords.
//   Exact:   every keyword present among the leaf's items.
//   Broaden: every keyword present directly or through a slot-mate (synonym).
//   Narrow:  keywords appear in the given order as a subsequence of the items.
enum class MatchSemantics : std::uint8_t { Exact, Broaden, Narrow };

struct Query {
    std::uint64_t id = 0;
    std::vector<Bytes> keywords;
    std::vector<PatternId> resolved;
    std::vector<Bytes> unresolved;
    WindowIndex received_window = 0;
};

struct PlannedQuery {
    Query query;
    std::vector<NodeId> candidates;  // nodes whose literals or slots hold a resolved id
};

struct GeneralizedRequest {
    NodeId template_id = 0;
    std::vector<std::uint64_t> member_queries;
    std::uint64_t priority = 0;  // = member count
};

namespace detail {

// Items distributionally equivalent to the given one: fellow members of any
// slot vector containing it (the item itself included).
inline std::set<ItemRef> synonym_class(const Hierarchy& h, const ItemRef& item) {
    std::set<ItemRef> out{item};
    for (const auto& [id, n] : h.nodes) {
        for (const Position& p : n.positions) {
            const auto* slot = std::get_if<SlotVector>(&p);
            if (!slot || !slot->contains(item)) continue;
            for (const auto& [member, count] : slot->members) out.insert(member);
        }
    }
    return out;
}

inline bool node_mentions(const TemplateNode& n, const std::set<ItemRef>& wanted) {
    for (const Position& p : n.positions) {
        if (const auto* lit = std::get_if<ItemRef>(&p)) {
            if (wanted.count(*lit)) return true;
        } else {
            for (const auto& [member, count] : std::get<SlotVector>(p).members) {
                if (wanted.count(member)) return true;
            }
        }
    }
    return false;
}

inline bool leaf_matches(const std::vector<ItemRef>& items, const Query& q,
                         const Hierarchy& h, MatchSemantics semantics) {
    switch (semantics) {
        case MatchSemantics::Exact: {
            for (PatternId r : q.resolved) {
                if (std::find(items.begin(), items.end(), ItemRef::pattern(r)) == items.end()) {
                    return false;
                }
            }
            return true;
        }
        case MatchSemantics::Broaden: {
            for (PatternId r : q.resolved) {
                std::set<ItemRef> syn = synonym_class(h, ItemRef::pattern(r));
                bool hit = false;
                for (const ItemRef& item : items) {
                    if (syn.count(item)) {
                        hit = true;
                        break;
                    }
                }
                if (!hit) return false;
            }
            return true;
        }
        case MatchSemantics::Narrow: {
            std::size_t at = 0;
            for (PatternId r : q.resolved) {
                ItemRef want = ItemRef::pattern(r);
                while (at < items.size() && items[at] != want) ++at;
                if (at == items.size()) return false;
                ++at;
            }
            return true;
        }
    }
    return false;
}

}  // namespace detail

// Resolves keywords to pattern ids by exact bytes and collects the candidate
// nodes. Unresolved keywords are reported, not fatal; an empty keyword set is.
inline PlannedQuery plan(std::uint64_t query_id, std::vector<Bytes> keywords,
                         const PatternDictionary& dict, const Hierarchy& h,
                         WindowIndex received_window,
                         MatchSemantics semantics = MatchSemantics::Exact) {
    if (keywords.empty()) raise(Errc::NoKeywords, "queries", "query holds no keywords");
    PlannedQuery planned;
    planned.query.id = query_id;
    planned.query.keywords = std::move(keywords);
    planned.query.received_window = received_window;

    std::map<Bytes, PatternId> by_bytes;
    for (const auto& [id, p] : dict.patterns) by_bytes.emplace(p.bytes, id);
    for (const Bytes& kw : planned.query.keywords) {
        auto it = by_bytes.find(kw);
        if (it != by_bytes.end()) {
            planned.query.resolved.push_back(it->second);
        } else {
            planned.query.unresolved.push_back(kw);
        }
    }

    std::set<ItemRef> wanted;
    for (PatternId r : planned.query.resolved) {
        if (semantics == MatchSemantics::Broaden) {
            auto syn = detail::synonym_class(h, ItemRef::pattern(r));
            wanted.insert(syn.begin(), syn.end());
        } else {
            wanted.insert(ItemRef::pattern(r));
        }
    }
    if (!wanted.empty()) {
        for (const auto& [id, n] : h.nodes) {
            if (detail::node_mentions(n, wanted)) planned.candidates.push_back(id);
        }
    }
    return planned;
}

// Groups queries by shared candidate template; priority is the member count,
// ties broken by the summed relevancy of the members' resolved keywords.
inline std::vector<GeneralizedRequest> merge_requests(std::span<const PlannedQuery> planned,
                                                      const ScoreTable& scores) {
    std::map<NodeId, GeneralizedRequest> by_template;
    for (const PlannedQuery& pq : planned) {
        for (NodeId t : pq.candidates) {
            GeneralizedRequest& req = by_template[t];
            req.template_id = t;
            req.member_queries.push_back(pq.query.id);
            ++req.priority;
        }
    }

    auto member_relevancy = [&](const GeneralizedRequest& req) {
        double sum = 0.0;
        for (std::uint64_t qid : req.member_queries) {
            for (const PlannedQuery& pq : planned) {
                if (pq.query.id != qid) continue;
                for (PatternId r : pq.query.resolved) sum += scores.score(r);
            }
        }
        return sum;
    };

    std::vector<GeneralizedRequest> out;
    out.reserve(by_template.size());
    for (auto& [t, req] : by_template) out.push_back(std::move(req));
    std::stable_sort(out.begin(), out.end(),
                     [&](const GeneralizedRequest& a, const GeneralizedRequest& b) {
                         if (a.priority != b.priority) return a.priority > b.priority;
                         double ra = member_relevancy(a);
                         double rb = member_relevancy(b);
                         if (ra != rb) return ra > rb;
                         return a.template_id < b.template_id;
                     });
    return out;
}

// One template scan serving every member query: the leaves under the template
// are fetched once and post-filtered per query.
inline std::map<std::uint64_t, std::vector<StructureInstance>> execute(
    const GeneralizedRequest& request, const Hierarchy& h,
    std::span<const PlannedQuery> planned, MatchSemantics semantics = MatchSemantics::Exact) {
    std::vector<const TemplateNode*> leaves;
    for (NodeId lid : h.leaves_under(request.template_id)) leaves.push_back(&h.node(lid));

    std::map<std::uint64_t, std::vector<StructureInstance>> results;
    for (std::uint64_t qid : request.member_queries) {
        const PlannedQuery* pq = nullptr;
        for (const PlannedQuery& candidate : planned) {
            if (candidate.query.id == qid) {
                pq = &candidate;
                break;
            }
        }
        if (!pq) continue;
        auto& rows = results[qid];
        for (const TemplateNode* leaf : leaves) {
            if (!detail::leaf_matches(leaf->literal_items(), pq->query, h, semantics)) continue;
            rows.insert(rows.end(), leaf->instances.begin(), leaf->instances.end());
        }
        std::sort(rows.begin(), rows.end(), instance_order);
    }
    return results;
}

// Runs every request in priority order and merges the per-query results,
// deduplicating instances served through several templates.
inline std::map<std::uint64_t, std::vector<StructureInstance>> execute_all(
    std::span<const PlannedQuery> planned, const Hierarchy& h, const ScoreTable& scores,
    MatchSemantics semantics = MatchSemantics::Exact) {
    std::map<std::uint64_t, std::vector<StructureInstance>> merged;
    for (const PlannedQuery& pq : planned) merged[pq.query.id];  // empty default
    for (const GeneralizedRequest& req : merge_requests(planned, scores)) {
        for (auto& [qid, rows] : execute(req, h, planned, semantics)) {
            auto& dst = merged[qid];
            dst.insert(dst.end(), rows.begin(), rows.end());
        }
    }
    for (auto& [qid, rows] : merged) {
        std::sort(rows.begin(), rows.end(), [](const StructureInstance& a,
                                               const StructureInstance& b) {
            if (a.segment != b.segment) return a.segment < b.segment;
            if (a.offset != b.offset) return a.offset < b.offset;
            return a.items < b.items;
        });
        rows.erase(std::unique(rows.begin(), rows.end(),
                               [](const StructureInstance& a, const StructureInstance& b) {
                                   return a.segment == b.segment && a.offset == b.offset &&
                                          a.items == b.items;
                               }),
                   rows.end());
        std::sort(rows.begin(), rows.end(), instance_order);
    }
    return merged;
}

// Canonical form: query_id \t segment_id \t offset \t items.
inline std::string export_results(
    const std::map<std::uint64_t, std::vector<StructureInstance>>& results) {
    std::string out;
    for (const auto& [qid, rows] : results) {
        for (const StructureInstance& inst : rows) {
            out += std::to_string(qid);
            out += '\t';
            out += std::to_string(inst.segment);
            out += '\t';
            out += std::to_string(inst.offset);
            out += '\t';
            out += render_items(inst.items);
            out += '\n';
        }
    }
    return out;
}

}  // namespace cognistream
