#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cognistream/errors.hpp"
#include "cognistream/ids.hpp"
#include "cognistream/pipeline.hpp"

namespace cognistream {

enum class TopologyShape : std::uint8_t { Ring, Mesh, Grid };

struct Topology {
    TopologyShape shape = TopologyShape::Ring;
    std::map<int, std::vector<int>> adjacency;

    std::size_t size() const { return adjacency.size(); }

    void validate() const {
        if (adjacency.empty()) raise(Errc::BadConfig, "dpu", "topology holds no units");
        for (const auto& [u, neighbors] : adjacency) {
            for (int n : neighbors) {
                auto it = adjacency.find(n);
                if (it == adjacency.end() ||
                    std::find(it->second.begin(), it->second.end(), u) == it->second.end()) {
                    raise(Errc::BadConfig, "dpu", "asymmetric adjacency");
                }
            }
        }
        std::set<int> seen;
        std::vector<int> stack{adjacency.begin()->first};
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            if (!seen.insert(u).second) continue;
            for (int n : adjacency.at(u)) stack.push_back(n);
        }
        if (seen.size() != adjacency.size()) raise(Errc::BadConfig, "dpu", "disconnected topology");
    }
};

inline Topology make_ring(int units) {
    Topology t;
    t.shape = TopologyShape::Ring;
    for (int i = 0; i < units; ++i) {
        std::set<int> n{(i + 1) % units, (i + units - 1) % units};
        n.erase(i);
        t.adjacency[i] = {n.begin(), n.end()};
    }
    t.validate();
    return t;
}

inline Topology make_mesh(int units) {
    Topology t;
    t.shape = TopologyShape::Mesh;
    for (int i = 0; i < units; ++i) {
        for (int j = 0; j < units; ++j) {
            if (i != j) t.adjacency[i].push_back(j);
        }
        if (units == 1) t.adjacency[0];
    }
    t.validate();
    return t;
}

// Near-square 4-neighbor grid: rows is the largest divisor of units not above
// its square root (a prime count degenerates to a path).
inline Topology make_grid(int units) {
    int rows = 1;
    for (int r = 1; r * r <= units; ++r) {
        if (units % r == 0) rows = r;
    }
    int cols = units / rows;
    Topology t;
    t.shape = TopologyShape::Grid;
    auto id = [cols](int r, int c) { return r * cols + c; };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            auto& adj = t.adjacency[id(r, c)];
            if (r > 0) adj.push_back(id(r - 1, c));
            if (r + 1 < rows) adj.push_back(id(r + 1, c));
            if (c > 0) adj.push_back(id(r, c - 1));
            if (c + 1 < cols) adj.push_back(id(r, c + 1));
            std::sort(adj.begin(), adj.end());
        }
    }
    t.validate();
    return t;
}

inline Topology make_topology(TopologyShape shape, int units) {
    switch (shape) {
        case TopologyShape::Ring: return make_ring(units);
        case TopologyShape::Mesh: return make_mesh(units);
        case TopologyShape::Grid: return make_grid(units);
    }
    raise(Errc::BadConfig, "dpu", "unknown topology shape");
}

// --- protocol messages ------------------------------------------------------

struct IngestPayload {
    Segment segment;
};
struct MineRequestPayload {};
struct DictSyncPayload {
    std::vector<Pattern> patterns;
};
struct TemplateSyncPayload {
    std::vector<StructureGroup> groups;
};
struct QueryPayload {
    std::uint64_t query_id = 0;
    std::vector<Bytes> keywords;
};
struct QueryResultPayload {
    std::uint64_t query_id = 0;
    int target = 0;
    std::uint64_t result_count = 0;
    std::string rendered;
};
struct ConfirmSyncPayload {
    NodeId template_id = 0;
    std::uint64_t position = 0;
    ItemRef item;
};

using MessagePayload = std::variant<IngestPayload, MineRequestPayload, DictSyncPayload,
                                    TemplateSyncPayload, QueryPayload, QueryResultPayload,
                                    ConfirmSyncPayload>;

inline std::string_view payload_kind(const MessagePayload& p) {
    switch (p.index()) {
        case 0: return "Ingest";
        case 1: return "MineRequest";
        case 2: return "DictSync";
        case 3: return "TemplateSync";
        case 4: return "Query";
        case 5: return "QueryResult";
        case 6: return "ConfirmSync";
    }
    return "?";
}

// TTL-bounded flooded message. ttl strictly decreases on every forward and a
// unit never forwards to anyone in visited, so no copy can cycle forever;
// msg_id makes redeliveries over alternate paths harmless.
struct UnitMessage {
    MessagePayload payload;
    int ttl = 0;
    std::set<int> visited;
    int origin = 0;
    int sender = 0;
    std::uint64_t msg_id = 0;
};

inline bool is_point_to_point(const MessagePayload& p) {
    return std::holds_alternative<IngestPayload>(p);
}

// Union by content id: counts add, first_seen takes the min, last_seen the
// max. Commutative and associative with the empty dictionary as identity.
inline PatternDictionary sync_dictionaries(const PatternDictionary& a,
                                           const PatternDictionary& b) {
    PatternDictionary merged = a;
    for (const auto& [id, p] : b.patterns) merged.add(p);
    return merged;
}

inline StructureGroups merge_structure_groups(const StructureGroups& a,
                                              const StructureGroups& b) {
    StructureGroups merged = a;
    for (const auto& [key, group] : b) {
        StructureGroup& dst = merged[key];
        if (dst.count == 0) dst.items = group.items;
        dst.count += group.count;
        dst.instances.insert(dst.instances.end(), group.instances.begin(),
                             group.instances.end());
        std::sort(dst.instances.begin(), dst.instances.end(), instance_order);
    }
    return merged;
}

// --- the simulated matrix ----------------------------------------------------

struct Unit {
    int id = 0;
    std::set<SegmentId> owned;
    std::vector<Segment> segments;
    PatternDictionary dictionary;    // own mining result, grown by DictSync
    StructureGroups groups;          // own mined structures
    StructureGroups remote_groups;   // structures learned via TemplateSync
    Hierarchy hierarchy;
    ScoreTable scores;
    std::vector<Hypothesis> hypotheses;
    std::deque<UnitMessage> mailbox;
    std::set<std::uint64_t> seen_messages;
    bool mined = false;
};

struct World {
    Topology topology;
    int default_ttl = 0;
    PipelineConfig config;
    std::uint64_t seed = 0;
    std::map<int, Unit> units;
    std::map<int, std::vector<UnitMessage>> pending;  // delivered next round
    std::map<SegmentId, int> owner;
    SegmentId next_segment = 0;
    std::uint64_t next_msg = 1;
    std::int64_t round = 0;
    std::vector<std::string> transcript;
    std::map<std::uint64_t, std::uint64_t> deliveries;  // per msg_id, dups included
    std::map<std::uint64_t, std::vector<std::pair<int, std::string>>> query_results;

    void log(std::int64_t r, int unit, std::string_view event, const std::string& detail) {
        transcript.push_back(std::to_string(r) + '\t' + (unit < 0 ? "-" : "u" + std::to_string(unit)) +
                             '\t' + std::string(event) + '\t' + detail);
    }
};

inline World make_world(TopologyShape shape, int units, int ttl, const PipelineConfig& config,
                        std::uint64_t seed) {
    World w;
    w.topology = make_topology(shape, units);
    w.default_ttl = ttl > 0 ? ttl : units;
    w.config = config;
    w.seed = seed;
    for (const auto& [id, adj] : w.topology.adjacency) w.units[id].id = id;
    w.log(0, -1, "init",
          "shape=" + std::string(shape == TopologyShape::Ring   ? "ring"
                                 : shape == TopologyShape::Mesh ? "mesh"
                                                                : "grid") +
              " units=" + std::to_string(units) + " ttl=" + std::to_string(w.default_ttl) +
              " seed=" + std::to_string(seed));
    return w;
}

inline void inject(World& w, int unit, UnitMessage msg) {
    if (!w.units.count(unit)) raise(Errc::BadConfig, "dpu", "no unit " + std::to_string(unit));
    if (msg.msg_id == 0) msg.msg_id = w.next_msg++;
    w.pending[unit].push_back(std::move(msg));
}

// Registers ownership (exactly one owner per segment) and hands the segment to
// its owner through the protocol.
inline SegmentId world_ingest(World& w, int unit, Bytes bytes, std::int64_t timestamp,
                              const std::string& tag) {
    if (!w.units.count(unit)) raise(Errc::BadConfig, "dpu", "no unit " + std::to_string(unit));
    Segment seg;
    seg.id = w.next_segment++;
    seg.bytes = std::move(bytes);
    seg.timestamp = timestamp;
    seg.source_tag = tag;
    auto [it, inserted] = w.owner.emplace(seg.id, unit);
    if (!inserted) {
        raise(Errc::OwnershipViolation, "dpu",
              "segment " + std::to_string(seg.id) + " already owned by u" +
                  std::to_string(it->second));
    }
    UnitMessage msg;
    msg.payload = IngestPayload{std::move(seg)};
    msg.ttl = 0;
    msg.origin = unit;
    msg.sender = unit;
    SegmentId sid = w.next_segment - 1;
    inject(w, unit, std::move(msg));
    return sid;
}

inline void world_mine_request(World& w, int origin, bool flood) {
    UnitMessage msg;
    msg.payload = MineRequestPayload{};
    msg.ttl = flood ? w.default_ttl : 0;
    msg.origin = origin;
    msg.sender = origin;
    inject(w, origin, std::move(msg));
}

inline std::uint64_t world_query(World& w, int origin, std::vector<Bytes> keywords) {
    static_assert(sizeof(std::uint64_t) >= sizeof(int));
    std::uint64_t qid = w.next_msg;  // query ids share the message counter
    UnitMessage msg;
    msg.payload = QueryPayload{qid, std::move(keywords)};
    msg.ttl = w.default_ttl;
    msg.origin = origin;
    msg.sender = origin;
    inject(w, origin, std::move(msg));
    return qid;
}

namespace detail {

inline void flood_from(World& w, int unit, const UnitMessage& msg) {
    if (msg.ttl <= 0) {
        w.log(w.round, unit, "drop-ttl", "kind=" + std::string(payload_kind(msg.payload)) +
                                             " msg=" + std::to_string(msg.msg_id));
        return;
    }
    for (int n : w.topology.adjacency.at(unit)) {
        if (msg.visited.count(n) || n == unit) continue;
        UnitMessage copy = msg;
        copy.ttl = msg.ttl - 1;
        copy.visited.insert(unit);
        copy.sender = unit;
        w.log(w.round, unit, "forward",
              "kind=" + std::string(payload_kind(copy.payload)) + " msg=" +
                  std::to_string(copy.msg_id) + " to=u" + std::to_string(n) +
                  " ttl=" + std::to_string(copy.ttl));
        w.pending[n].push_back(std::move(copy));
    }
}

inline void emit_flood(World& w, int unit, MessagePayload payload) {
    UnitMessage msg;
    msg.payload = std::move(payload);
    msg.ttl = w.default_ttl;
    msg.origin = unit;
    msg.sender = unit;
    msg.msg_id = w.next_msg++;
    flood_from(w, unit, msg);
}

inline void run_local_pipeline(World& w, Unit& unit) {
    PipelineState st = run_pipeline(unit.segments, w.config, true);
    unit.dictionary = std::move(st.dictionary);
    unit.groups = std::move(st.groups);
    unit.hierarchy = std::move(st.hierarchy);
    unit.scores = std::move(st.scores);
    unit.hypotheses = std::move(st.hypotheses);
    unit.mined = true;
    w.log(w.round, unit.id, "mine",
          "patterns=" + std::to_string(unit.dictionary.size()) +
              " groups=" + std::to_string(unit.groups.size()) +
              " nodes=" + std::to_string(unit.hierarchy.nodes.size()) +
              " hypotheses=" + std::to_string(unit.hypotheses.size()) +
              " confirmed=" + std::to_string(st.admissions.size()));

    std::vector<Pattern> patterns;
    for (const auto& [id, p] : unit.dictionary.patterns) patterns.push_back(p);
    emit_flood(w, unit.id, DictSyncPayload{std::move(patterns)});
    std::vector<StructureGroup> groups;
    for (const auto& [key, g] : unit.groups) groups.push_back(g);
    emit_flood(w, unit.id, TemplateSyncPayload{std::move(groups)});
    for (const Admission& adm : st.admissions) {
        emit_flood(w, unit.id, ConfirmSyncPayload{adm.template_id, adm.position, adm.item});
    }
}

inline void rebuild_unit_hierarchy(Unit& unit) {
    unit.hierarchy = build_hierarchy(merge_structure_groups(unit.groups, unit.remote_groups));
}

inline void handle(World& w, Unit& unit, const UnitMessage& msg) {
    if (const auto* ingest = std::get_if<IngestPayload>(&msg.payload)) {
        auto it = w.owner.find(ingest->segment.id);
        if (it == w.owner.end() || it->second != unit.id) {
            raise(Errc::OwnershipViolation, "dpu",
                  "unit u" + std::to_string(unit.id) + " is not the owner of segment " +
                      std::to_string(ingest->segment.id));
        }
        unit.owned.insert(ingest->segment.id);
        unit.segments.push_back(ingest->segment);
        std::sort(unit.segments.begin(), unit.segments.end(),
                  [](const Segment& a, const Segment& b) { return a.id < b.id; });
        w.log(w.round, unit.id, "ingest",
              "seg=" + std::to_string(ingest->segment.id) +
                  " bytes=" + std::to_string(ingest->segment.bytes.size()));
    } else if (std::holds_alternative<MineRequestPayload>(msg.payload)) {
        if (unit.mined) {
            w.log(w.round, unit.id, "mine-skip", "msg=" + std::to_string(msg.msg_id));
        } else {
            run_local_pipeline(w, unit);
        }
    } else if (const auto* dict = std::get_if<DictSyncPayload>(&msg.payload)) {
        PatternDictionary incoming;
        for (const Pattern& p : dict->patterns) incoming.add(p);
        std::size_t before = unit.dictionary.size();
        unit.dictionary = sync_dictionaries(unit.dictionary, incoming);
        w.log(w.round, unit.id, "dict-merge",
              "from=u" + std::to_string(msg.origin) +
                  " added=" + std::to_string(unit.dictionary.size() - before) +
                  " total=" + std::to_string(unit.dictionary.size()));
    } else if (const auto* tmpl = std::get_if<TemplateSyncPayload>(&msg.payload)) {
        StructureGroups incoming;
        for (const StructureGroup& g : tmpl->groups) incoming.emplace(g.items, g);
        unit.remote_groups = merge_structure_groups(unit.remote_groups, incoming);
        rebuild_unit_hierarchy(unit);
        w.log(w.round, unit.id, "template-merge",
              "from=u" + std::to_string(msg.origin) + " groups=" +
                  std::to_string(tmpl->groups.size()) +
                  " nodes=" + std::to_string(unit.hierarchy.nodes.size()));
    } else if (const auto* query = std::get_if<QueryPayload>(&msg.payload)) {
        std::map<std::uint64_t, std::vector<StructureInstance>> rows;
        try {
            PlannedQuery pq = plan(query->query_id, query->keywords, unit.dictionary,
                                   unit.hierarchy, 0);
            std::vector<PlannedQuery> all{pq};
            rows = execute_all(all, unit.hierarchy, unit.scores);
        } catch (const Error&) {
            // no keywords resolve locally; reply with an empty result
        }
        std::string rendered = export_results(rows);
        std::uint64_t count = rows.count(query->query_id) ? rows[query->query_id].size() : 0;
        w.log(w.round, unit.id, "query-exec",
              "id=" + std::to_string(query->query_id) + " results=" + std::to_string(count));
        if (msg.origin == unit.id) {
            w.query_results[query->query_id].emplace_back(unit.id, rendered);
        } else {
            emit_flood(w, unit.id,
                       QueryResultPayload{query->query_id, msg.origin, count, rendered});
        }
    } else if (const auto* result = std::get_if<QueryResultPayload>(&msg.payload)) {
        if (result->target == unit.id) {
            w.query_results[result->query_id].emplace_back(msg.origin, result->rendered);
            w.log(w.round, unit.id, "result-recv",
                  "id=" + std::to_string(result->query_id) + " from=u" +
                      std::to_string(msg.origin) +
                      " results=" + std::to_string(result->result_count));
        }
    } else if (const auto* confirm = std::get_if<ConfirmSyncPayload>(&msg.payload)) {
        bool known = unit.hierarchy.has(confirm->template_id);
        if (known) {
            admit_knowledge(unit.hierarchy, confirm->template_id,
                            static_cast<std::size_t>(confirm->position), confirm->item);
        }
        w.log(w.round, unit.id, known ? "confirm-apply" : "confirm-miss",
              "template=" + hex64(confirm->template_id) + " pos=" +
                  std::to_string(confirm->position) + " item=" + item_key(confirm->item));
    }
}

}  // namespace detail

// One deterministic round: every unit in id order drains its mailbox FIFO,
// handling each message fully before the next; messages produced this round
// are delivered at the start of the next.
inline void step(World& w) {
    w.round += 1;
    for (auto& [id, msgs] : w.pending) {
        Unit& unit = w.units.at(id);
        for (UnitMessage& m : msgs) unit.mailbox.push_back(std::move(m));
    }
    w.pending.clear();

    for (auto& [id, unit] : w.units) {
        while (!unit.mailbox.empty()) {
            UnitMessage msg = std::move(unit.mailbox.front());
            unit.mailbox.pop_front();
            w.deliveries[msg.msg_id] += 1;
            w.log(w.round, id, "deliver",
                  "kind=" + std::string(payload_kind(msg.payload)) + " msg=" +
                      std::to_string(msg.msg_id) + " from=u" + std::to_string(msg.sender) +
                      " ttl=" + std::to_string(msg.ttl));
            if (!unit.seen_messages.insert(msg.msg_id).second) {
                w.log(w.round, id, "drop-dup", "msg=" + std::to_string(msg.msg_id));
                continue;
            }
            detail::handle(w, unit, msg);
            if (!is_point_to_point(msg.payload)) detail::flood_from(w, id, msg);
        }
    }
}

inline void run_rounds(World& w, int rounds) {
    for (int i = 0; i < rounds; ++i) step(w);
}

inline bool idle(const World& w) {
    if (!w.pending.empty()) return false;
    for (const auto& [id, unit] : w.units) {
        if (!unit.mailbox.empty()) return false;
    }
    return true;
}

// Full flood expansion of one message: the set of units (origin excluded)
// that receive and process it.
inline std::set<int> route(const UnitMessage& message, int from_unit, const Topology& topology) {
    std::set<int> delivered;
    std::set<int> processed{from_unit};
    struct Copy {
        int to;
        int ttl;
        std::set<int> visited;
    };
    std::deque<Copy> frontier;
    if (message.ttl > 0) {
        for (int n : topology.adjacency.at(from_unit)) {
            if (message.visited.count(n)) continue;
            std::set<int> visited = message.visited;
            visited.insert(from_unit);
            frontier.push_back({n, message.ttl - 1, std::move(visited)});
        }
    }
    while (!frontier.empty()) {
        Copy copy = std::move(frontier.front());
        frontier.pop_front();
        if (!processed.insert(copy.to).second) continue;  // duplicate: dropped
        delivered.insert(copy.to);
        if (copy.ttl <= 0) continue;
        for (int n : topology.adjacency.at(copy.to)) {
            if (copy.visited.count(n) || n == copy.to) continue;
            std::set<int> visited = copy.visited;
            visited.insert(copy.to);
            frontier.push_back({n, copy.ttl - 1, std::move(visited)});
        }
    }
    return delivered;
}

struct GlobalView {
    PatternDictionary dictionary;
    Hierarchy hierarchy;
};

// Folds the units' own mined state in unit_id order; content-hashed ids make
// the fold order irrelevant for the result.
inline GlobalView global_view(const World& w) {
    GlobalView view;
    StructureGroups merged;
    for (const auto& [id, unit] : w.units) {
        view.dictionary = sync_dictionaries(view.dictionary, unit.dictionary);
        merged = merge_structure_groups(merged, unit.groups);
    }
    view.hierarchy = build_hierarchy(merged);
    return view;
}

inline std::string export_transcript(const World& w) {
    std::string out;
    for (const std::string& line : w.transcript) {
        out += line;
        out += '\n';
    }
    return out;
}

}  // namespace cognistream
