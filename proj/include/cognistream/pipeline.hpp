#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cognistream/cognition.hpp"
#include "cognistream/forecast.hpp"
#include "cognistream/generalization.hpp"
#include "cognistream/hypotheses.hpp"
#include "cognistream/queries.hpp"
#include "cognistream/relevancy.hpp"
#include "cognistream/stream_store.hpp"
#include "cognistream/structures.hpp"

namespace cognistream {

struct PipelineConfig {
    MinerConfig miner;
    RelevancyConfig relevancy;
    HypothesisConfig hypothesis;
    ExtractMode structure_mode = WindowExtract{3};
};

struct PipelineEvent {
    WindowIndex window = 0;
    std::string kind;
    std::string detail;
};

// Everything one cognition cycle derives from the raw segments.
struct PipelineState {
    PatternDictionary dictionary;
    std::vector<Token> tokens;
    std::vector<StreamWindow> windows;
    StructureGroups groups;
    Hierarchy hierarchy;
    ScoreTable scores;
    std::vector<Hypothesis> hypotheses;
    std::vector<Admission> admissions;
    std::vector<PipelineEvent> events;
};

// One full cognition cycle: mine -> tokenize -> window -> structures ->
// hierarchy, then a window-by-window replay driving relevancy and (optionally)
// the hypothesis lifecycle. Hypotheses synthesized at window w are checked
// against the instances of the following windows; statement novelty at w is
// judged against the leaves observed up to w.
inline PipelineState run_pipeline(std::span<const Segment> segments,
                                  const PipelineConfig& config, bool with_hypotheses) {
    PipelineState st;
    st.dictionary = mine_patterns(segments, config.miner);
    st.tokens = tokenize(segments, st.dictionary);
    st.windows = assign_windows(st.tokens, config.miner);
    annotate_pattern_windows(st.dictionary, st.tokens);
    st.groups = dedupe(extract(st.tokens, st.dictionary, config.structure_mode));
    st.hierarchy = build_hierarchy(st.groups);

    // Per-window subject counts: pattern occurrences plus instances matched
    // under each node.
    std::map<WindowIndex, std::map<SubjectId, std::uint64_t>> counts;
    for (const Token& t : st.tokens) {
        if (!t.is_gap()) counts[t.window][t.pattern] += 1;
    }
    for (const auto& [id, node] : st.hierarchy.nodes) {
        for (NodeId lid : st.hierarchy.leaves_under(id)) {
            for (const StructureInstance& inst : st.hierarchy.node(lid).instances) {
                counts[inst.timestamp][id] += 1;
            }
        }
    }

    std::vector<StructureInstance> all_instances;
    for (const auto& [key, group] : st.groups) {
        all_instances.insert(all_instances.end(), group.instances.begin(),
                             group.instances.end());
    }
    std::sort(all_instances.begin(), all_instances.end(), instance_order);

    std::map<WindowIndex, std::vector<StructureKey>> first_seen;
    for (const auto& [key, group] : st.groups) {
        if (!group.instances.empty()) first_seen[group.instances.front().timestamp].push_back(key);
    }

    bool any_template = false;
    for (const auto& [id, n] : st.hierarchy.nodes) {
        if (!n.is_leaf()) {
            any_template = true;
            break;
        }
    }

    std::set<StructureKey> observed;
    std::size_t budget_left = config.hypothesis.budget;
    std::size_t instance_cursor = 0;
    for (const StreamWindow& win : st.windows) {
        const WindowIndex w = win.index;
        auto cit = counts.find(w);
        update_window(st.scores, w,
                      cit == counts.end() ? std::map<SubjectId, std::uint64_t>{} : cit->second,
                      config.relevancy);
        if (!with_hypotheses) continue;

        std::size_t begin = instance_cursor;
        while (instance_cursor < all_instances.size() &&
               all_instances[instance_cursor].timestamp == w) {
            ++instance_cursor;
        }
        auto incoming = std::span<const StructureInstance>(all_instances.data() + begin,
                                                           instance_cursor - begin);
        for (const Admission& adm :
             check(st.hypotheses, incoming, st.hierarchy, config.hypothesis)) {
            st.admissions.push_back(adm);
            st.events.push_back({w, "confirm",
                                 hex64(adm.hypothesis_id) + " template=" + hex64(adm.template_id) +
                                     " pos=" + std::to_string(adm.position) +
                                     " item=" + item_key(adm.item)});
        }

        std::size_t existing = st.hypotheses.size();
        for (std::size_t i = 0; i < existing; ++i) {
            if (correction_candidate(st.hypotheses[i], st.hierarchy, config.hypothesis)) {
                Hypothesis successor =
                    correct(st.hypotheses[i], st.hierarchy, config.hypothesis, w);
                st.events.push_back({w, "correct",
                                     hex64(st.hypotheses[i].id) + " -> " + hex64(successor.id)});
                st.hypotheses.push_back(std::move(successor));
            }
        }

        for (const auto& [id, reason] :
             lifecycle_scan(st.hypotheses, w, config.hypothesis)) {
            st.events.push_back({w, "reject", hex64(id) + " " + reason});
        }

        if (auto fit = first_seen.find(w); fit != first_seen.end()) {
            for (const StructureKey& key : fit->second) observed.insert(key);
        }
        if (budget_left > 0 && any_template) {
            HypothesisConfig hc = config.hypothesis;
            hc.budget = budget_left;
            auto fresh = synthesize(st.hierarchy, st.scores, hc, w, st.hypotheses, &observed);
            for (Hypothesis& hyp : fresh) {
                st.events.push_back({w, "synthesize", hex64(hyp.id)});
                st.hypotheses.push_back(std::move(hyp));
                --budget_left;
            }
        }
    }
    return st;
}

}  // namespace cognistream
