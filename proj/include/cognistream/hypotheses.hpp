#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cognistream/errors.hpp"
#include "cognistream/generalization.hpp"
#include "cognistream/ids.hpp"
#include "cognistream/relevancy.hpp"
#include "cognistream/structures.hpp"

namespace cognistream {

struct HypothesisConfig {
    std::uint32_t distance_threshold = 1;  // near-misses worth recording
    std::uint32_t correction_quorum = 3;   // consistent near-misses before correcting
    std::uint32_t fluctuation_window = 5;  // checks without improvement before rejecting
    std::int64_t timeout_windows = 8;      // empty-history lifetime
    std::size_t budget = 4;                // new hypotheses per cycle

    void validate() const {
        if (distance_threshold < 1) raise(Errc::BadConfig, "hypotheses", "threshold >= 1");
        if (correction_quorum < 1) raise(Errc::BadConfig, "hypotheses", "quorum >= 1");
        if (fluctuation_window < 2) raise(Errc::BadConfig, "hypotheses", "fluctuation >= 2");
        if (timeout_windows < 1) raise(Errc::BadConfig, "hypotheses", "timeout >= 1");
        if (budget < 1) raise(Errc::BadConfig, "hypotheses", "budget >= 1");
    }
};

enum class HypothesisState : std::uint8_t { Proposed, Confirmed, Rejected, Superseded };

inline std::string_view state_name(HypothesisState s) {
    switch (s) {
        case HypothesisState::Proposed: return "Proposed";
        case HypothesisState::Confirmed: return "Confirmed";
        case HypothesisState::Rejected: return "Rejected";
        case HypothesisState::Superseded: return "Superseded";
    }
    return "?";
}

// One near-miss: how far the observed instance was and what it showed at the
// mismatched positions.
struct DistanceRecord {
    WindowIndex window = 0;
    std::uint32_t distance = 0;
    std::vector<std::pair<std::size_t, ItemRef>> mismatches;  // (position, observed)
};

struct Hypothesis {
    std::uint64_t id = 0;
    NodeId template_id = 0;
    std::vector<ItemRef> items;
    std::set<std::size_t> injected_positions;
    HypothesisState state = HypothesisState::Proposed;
    std::vector<DistanceRecord> history;
    WindowIndex born_window = 0;
    double score = 0.0;
    std::uint64_t successor_id = 0;  // set when Superseded

    bool live() const { return state == HypothesisState::Proposed; }
};

inline std::uint64_t hypothesis_id_of(NodeId template_id, std::span<const ItemRef> items) {
    return fnv1a(render_items(items), fnv1a(hex64(template_id)));
}

// Statement synthesis by slot substitution. For each slotted template in
// relevancy order and each of its slots V, candidate items come from synonym
// classes: any other slot vector V' that shares a member with V donates the
// items in V' \ V. The remaining slots take their most frequent member.
// Statements already observed as leaves or already hypothesized are skipped;
// the best `budget` survivors by score (geometric mean of template and
// candidate relevancy) are returned.
//
// `observed` overrides the observed-statement set (defaults to the
// hierarchy's leaves); the pipeline passes the leaves seen so far so that a
// statement only appearing later in the stream is still synthesizable.
inline std::vector<Hypothesis> synthesize(const Hierarchy& h, const ScoreTable& scores,
                                          const HypothesisConfig& config,
                                          WindowIndex current_window,
                                          std::span<const Hypothesis> existing = {},
                                          const std::set<StructureKey>* observed = nullptr) {
    config.validate();

    std::vector<const TemplateNode*> templates;
    for (const auto& [id, n] : h.nodes) {
        if (!n.is_leaf()) templates.push_back(&n);
    }
    if (templates.empty()) {
        raise(Errc::NoTemplates, "hypotheses", "hierarchy holds no slotted template");
    }
    std::sort(templates.begin(), templates.end(),
              [&](const TemplateNode* a, const TemplateNode* b) {
                  double sa = scores.score(a->id);
                  double sb = scores.score(b->id);
                  if (sa != sb) return sa > sb;
                  return shape_key(a->positions) < shape_key(b->positions);
              });

    std::set<StructureKey> seen_statements;
    if (observed) {
        seen_statements = *observed;
    } else {
        for (const auto& [id, n] : h.nodes) {
            if (n.is_leaf()) seen_statements.insert(n.literal_items());
        }
    }
    for (const Hypothesis& prior : existing) seen_statements.insert(prior.items);

    struct SlotRef {
        NodeId node;
        std::size_t position;
        const SlotVector* vector;
    };
    std::vector<SlotRef> all_slots;
    for (const auto& [id, n] : h.nodes) {
        for (std::size_t p = 0; p < n.positions.size(); ++p) {
            if (const auto* slot = std::get_if<SlotVector>(&n.positions[p])) {
                all_slots.push_back({id, p, slot});
            }
        }
    }

    auto subject_score = [&](const ItemRef& item) {
        return item.is_pattern() ? scores.score(item.value) : 0.0;
    };

    std::vector<Hypothesis> candidates;
    for (const TemplateNode* t : templates) {
        for (std::size_t p = 0; p < t->positions.size(); ++p) {
            const auto* vec = std::get_if<SlotVector>(&t->positions[p]);
            if (!vec) continue;
            std::set<ItemRef> injectable;
            for (const SlotRef& other : all_slots) {
                if (other.node == t->id && other.position == p) continue;
                bool shares = false;
                for (const auto& [item, count] : other.vector->members) {
                    if (vec->contains(item)) {
                        shares = true;
                        break;
                    }
                }
                if (!shares) continue;
                for (const auto& [item, count] : other.vector->members) {
                    if (!vec->contains(item)) injectable.insert(item);
                }
            }
            for (const ItemRef& item : injectable) {
                Hypothesis hyp;
                hyp.template_id = t->id;
                hyp.items.reserve(t->arity());
                for (std::size_t q = 0; q < t->positions.size(); ++q) {
                    if (q == p) {
                        hyp.items.push_back(item);
                    } else if (const auto* lit = std::get_if<ItemRef>(&t->positions[q])) {
                        hyp.items.push_back(*lit);
                    } else {
                        hyp.items.push_back(std::get<SlotVector>(t->positions[q]).dominant());
                    }
                }
                if (seen_statements.count(hyp.items)) continue;
                hyp.injected_positions = {p};
                hyp.id = hypothesis_id_of(t->id, hyp.items);
                hyp.born_window = current_window;
                hyp.score = std::sqrt(scores.score(t->id) * subject_score(item));
                candidates.push_back(std::move(hyp));
            }
        }
    }

    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Hypothesis& a, const Hypothesis& b) { return a.score > b.score; });
    std::vector<Hypothesis> out;
    std::set<StructureKey> emitted;
    for (Hypothesis& hyp : candidates) {
        if (out.size() >= config.budget) break;
        if (!emitted.insert(hyp.items).second) continue;
        out.push_back(std::move(hyp));
    }
    return out;
}

// Confirmation admits the injected items into the template's slot vectors.
struct Admission {
    std::uint64_t hypothesis_id;
    NodeId template_id;
    std::size_t position;
    ItemRef item;
};

inline void admit_knowledge(Hierarchy& h, NodeId template_id, std::size_t position,
                            const ItemRef& item) {
    if (!h.has(template_id)) return;
    TemplateNode& t = h.node_mut(template_id);
    if (position >= t.positions.size()) return;
    if (auto* slot = std::get_if<SlotVector>(&t.positions[position])) {
        slot->members[item] += 1;
    }
}

// Runs every incoming instance past every live hypothesis of equal arity.
// Exact match confirms and stores the injected knowledge; a distance within
// the threshold is recorded as a near-miss.
inline std::vector<Admission> check(std::vector<Hypothesis>& hypotheses,
                                    std::span<const StructureInstance> incoming, Hierarchy& h,
                                    const HypothesisConfig& config) {
    config.validate();
    std::vector<Admission> admissions;
    for (const StructureInstance& inst : incoming) {
        for (Hypothesis& hyp : hypotheses) {
            if (!hyp.live() || hyp.items.size() != inst.items.size()) continue;
            std::size_t d = distance(std::span<const ItemRef>(hyp.items),
                                     std::span<const ItemRef>(inst.items));
            if (d == 0) {
                hyp.state = HypothesisState::Confirmed;
                for (std::size_t q : hyp.injected_positions) {
                    admit_knowledge(h, hyp.template_id, q, hyp.items[q]);
                    admissions.push_back({hyp.id, hyp.template_id, q, hyp.items[q]});
                }
            } else if (d <= config.distance_threshold) {
                DistanceRecord rec;
                rec.window = inst.timestamp;
                rec.distance = static_cast<std::uint32_t>(d);
                for (std::size_t q : mismatch_positions(hyp.items, inst.items)) {
                    rec.mismatches.emplace_back(q, inst.items[q]);
                }
                hyp.history.push_back(std::move(rec));
            }
        }
    }
    return admissions;
}

// The slot position whose near-misses reached quorum, with the majority
// observed value there. Mismatches at literal positions point away from the
// template and are not correctable within it.
inline std::optional<std::pair<std::size_t, ItemRef>> correction_candidate(
    const Hypothesis& hyp, const Hierarchy& h, const HypothesisConfig& config) {
    if (!hyp.live() || !h.has(hyp.template_id)) return std::nullopt;
    const TemplateNode& t = h.node(hyp.template_id);

    std::map<std::size_t, std::map<ItemRef, std::uint32_t>> observed_at;
    std::map<std::size_t, std::uint32_t> entries_at;
    for (const DistanceRecord& rec : hyp.history) {
        for (const auto& [pos, item] : rec.mismatches) {
            if (pos >= t.positions.size() || !is_slot(t.positions[pos])) continue;
            observed_at[pos][item] += 1;
            entries_at[pos] += 1;
        }
    }

    std::optional<std::size_t> best_pos;
    std::uint32_t best_entries = 0;
    for (const auto& [pos, n] : entries_at) {
        if (n >= config.correction_quorum && n > best_entries) {
            best_pos = pos;
            best_entries = n;
        }
    }
    if (!best_pos) return std::nullopt;

    ItemRef majority{};
    std::uint32_t majority_count = 0;
    for (const auto& [item, n] : observed_at[*best_pos]) {
        if (n > majority_count) {
            majority = item;
            majority_count = n;
        }
    }
    return std::make_pair(*best_pos, majority);
}

// Supersedes the hypothesis with a successor carrying the majority observed
// value at the quorum position. The successor starts a fresh history.
inline Hypothesis correct(Hypothesis& predecessor, Hierarchy& h, const HypothesisConfig& config,
                          WindowIndex current_window) {
    config.validate();
    auto cand = correction_candidate(predecessor, h, config);
    if (!cand) {
        raise(Errc::NoQuorum, "hypotheses",
              "fewer than " + std::to_string(config.correction_quorum) +
                  " consistent near-misses");
    }
    auto [pos, value] = *cand;

    Hypothesis successor;
    successor.template_id = predecessor.template_id;
    successor.items = predecessor.items;
    successor.items[pos] = value;
    const TemplateNode& t = h.node(predecessor.template_id);
    for (std::size_t q = 0; q < successor.items.size(); ++q) {
        if (const auto* slot = std::get_if<SlotVector>(&t.positions[q])) {
            if (!slot->contains(successor.items[q])) successor.injected_positions.insert(q);
        }
    }
    successor.id = hypothesis_id_of(successor.template_id, successor.items);
    successor.born_window = current_window;
    successor.score = predecessor.score;

    predecessor.state = HypothesisState::Superseded;
    predecessor.successor_id = successor.id;
    return successor;
}

// Fluctuation: the last fluctuation_window near-misses never strictly lowered
// the running minimum distance. Timeout: no near-miss at all for longer than
// timeout_windows.
inline std::vector<std::pair<std::uint64_t, std::string>> lifecycle_scan(
    std::vector<Hypothesis>& hypotheses, WindowIndex current_window,
    const HypothesisConfig& config) {
    config.validate();
    std::vector<std::pair<std::uint64_t, std::string>> rejected;
    for (Hypothesis& hyp : hypotheses) {
        if (!hyp.live()) continue;
        if (hyp.history.size() >= config.fluctuation_window) {
            std::size_t start = hyp.history.size() - config.fluctuation_window;
            bool improved = false;
            std::uint32_t running_min = 0;
            for (std::size_t i = 0; i < hyp.history.size(); ++i) {
                if (i > 0 && i >= start && hyp.history[i].distance < running_min) {
                    improved = true;
                    break;
                }
                running_min = i == 0 ? hyp.history[i].distance
                                     : std::min(running_min, hyp.history[i].distance);
            }
            if (!improved) {
                hyp.state = HypothesisState::Rejected;
                rejected.emplace_back(hyp.id, "fluctuation");
                continue;
            }
        }
        if (hyp.history.empty() && current_window - hyp.born_window > config.timeout_windows) {
            hyp.state = HypothesisState::Rejected;
            rejected.emplace_back(hyp.id, "timeout");
        }
    }
    return rejected;
}

inline std::string render_history(const Hypothesis& hyp) {
    if (hyp.history.empty()) return "-";
    std::string out;
    for (std::size_t i = 0; i < hyp.history.size(); ++i) {
        if (i) out += ';';
        const DistanceRecord& rec = hyp.history[i];
        out += std::to_string(rec.window);
        out += ':';
        out += std::to_string(rec.distance);
        out += ':';
        for (std::size_t m = 0; m < rec.mismatches.size(); ++m) {
            if (m) out += ',';
            out += std::to_string(rec.mismatches[m].first);
            out += '=';
            out += item_key(rec.mismatches[m].second);
        }
    }
    return out;
}

// Append-only audit trail, one line per hypothesis in creation order.
inline std::string export_hypotheses(std::span<const Hypothesis> hypotheses) {
    std::string out;
    for (const Hypothesis& hyp : hypotheses) {
        out += hex64(hyp.id);
        out += '\t';
        out += hex64(hyp.template_id);
        out += '\t';
        out += render_items(hyp.items);
        out += '\t';
        out += std::string(state_name(hyp.state));
        out += '\t';
        out += std::to_string(hyp.born_window);
        out += '\t';
        out += render_history(hyp);
        out += '\n';
    }
    return out;
}

}  // namespace cognistream
