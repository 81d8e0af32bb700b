#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cognistream/errors.hpp"
#include "cognistream/ids.hpp"
#include "cognistream/structures.hpp"

namespace cognistream {

// Abstract position: the observed substitutes with their instance counts.
struct SlotVector {
    std::map<ItemRef, std::uint64_t> members;

    bool contains(const ItemRef& item) const { return members.count(item) != 0; }

    // Most frequent member; ties go to the smallest item.
    ItemRef dominant() const {
        ItemRef best{};
        std::uint64_t best_count = 0;
        for (const auto& [item, count] : members) {
            if (count > best_count) {
                best = item;
                best_count = count;
            }
        }
        return best;
    }
};

// Literal or slot.
using Position = std::variant<ItemRef, SlotVector>;

inline bool is_slot(const Position& p) { return std::holds_alternative<SlotVector>(p); }

// Canonical text for one position; slot membership only, counts excluded, so
// that independently built equal templates get equal node ids.
inline std::string position_shape_key(const Position& p) {
    if (const auto* lit = std::get_if<ItemRef>(&p)) return "lit:" + item_key(*lit);
    std::string out = "slot:{";
    bool first = true;
    for (const auto& [item, count] : std::get<SlotVector>(p).members) {
        if (!first) out += ',';
        out += item_key(item);
        first = false;
    }
    out += '}';
    return out;
}

inline std::string shape_key(std::span<const Position> positions) {
    std::string out = "a" + std::to_string(positions.size());
    for (const Position& p : positions) {
        out += '|';
        out += position_shape_key(p);
    }
    return out;
}

inline NodeId node_id_of(std::span<const Position> positions) {
    return fnv1a(shape_key(positions));
}

// One node of the notion hierarchy. Level-0 nodes are concrete structures and
// carry their instances; higher levels are templates with one slot per
// generalized position.
struct TemplateNode {
    NodeId id = 0;
    std::vector<Position> positions;
    std::vector<NodeId> children;
    std::vector<NodeId> parents;
    std::uint64_t support = 0;          // total matched leaf instances
    std::uint64_t leaf_count = 0;       // instances of this exact structure (leaves)
    std::vector<StructureInstance> instances;  // leaves only, timestamp-ordered

    std::size_t arity() const { return positions.size(); }

    std::uint32_t level() const {
        std::uint32_t slots = 0;
        for (const Position& p : positions) {
            if (is_slot(p)) ++slots;
        }
        return slots;
    }

    bool is_leaf() const { return level() == 0; }

    std::vector<ItemRef> literal_items() const {
        std::vector<ItemRef> items;
        items.reserve(positions.size());
        for (const Position& p : positions) items.push_back(std::get<ItemRef>(p));
        return items;
    }
};

struct Hierarchy {
    std::map<NodeId, TemplateNode> nodes;
    std::vector<NodeId> roots;  // parentless nodes, most general first per arity

    bool has(NodeId id) const { return nodes.count(id) != 0; }

    const TemplateNode& node(NodeId id) const {
        auto it = nodes.find(id);
        if (it == nodes.end()) raise(Errc::UnknownNode, "generalization", "node " + hex64(id));
        return it->second;
    }

    TemplateNode& node_mut(NodeId id) {
        auto it = nodes.find(id);
        if (it == nodes.end()) raise(Errc::UnknownNode, "generalization", "node " + hex64(id));
        return it->second;
    }

    // Leaf nodes reachable through child links (the node itself when a leaf).
    std::vector<NodeId> leaves_under(NodeId id) const {
        std::vector<NodeId> out;
        std::set<NodeId> seen;
        std::vector<NodeId> stack{id};
        while (!stack.empty()) {
            NodeId cur = stack.back();
            stack.pop_back();
            if (!seen.insert(cur).second) continue;
            const TemplateNode& n = node(cur);
            if (n.is_leaf()) {
                out.push_back(cur);
            } else {
                for (NodeId c : n.children) stack.push_back(c);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }
};

// True iff every literal position equals the item and every slot vector
// contains it.
inline bool strict_match(const TemplateNode& node, std::span<const ItemRef> items) {
    if (items.size() != node.arity()) {
        raise(Errc::ArityMismatch, "generalization",
              "arity " + std::to_string(items.size()) + " vs node arity " +
                  std::to_string(node.arity()));
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (const auto* lit = std::get_if<ItemRef>(&node.positions[i])) {
            if (*lit != items[i]) return false;
        } else if (!std::get<SlotVector>(node.positions[i]).contains(items[i])) {
            return false;
        }
    }
    return true;
}

namespace detail {

// Per-position count a node contributes when one of its literals enters a
// slot: the node's whole support stands behind each of its literal positions.
inline void add_member(SlotVector& slot, const ItemRef& item, std::uint64_t count) {
    slot.members[item] += count;
}

inline void union_into(SlotVector& slot, const SlotVector& other) {
    for (const auto& [item, count] : other.members) slot.members[item] += count;
}

// Pairwise shape merge. Mergeable iff at most one position holds two unequal
// literals; that position becomes a new slot, literals join existing slots,
// slot vectors union member-wise.
inline std::optional<std::vector<Position>> merge_positions(const TemplateNode& u,
                                                            const TemplateNode& v) {
    std::size_t disagreements = 0;
    for (std::size_t i = 0; i < u.arity(); ++i) {
        const auto* lu = std::get_if<ItemRef>(&u.positions[i]);
        const auto* lv = std::get_if<ItemRef>(&v.positions[i]);
        if (lu && lv && *lu != *lv) ++disagreements;
    }
    if (disagreements > 1) return std::nullopt;

    std::vector<Position> merged;
    merged.reserve(u.arity());
    for (std::size_t i = 0; i < u.arity(); ++i) {
        const auto* lu = std::get_if<ItemRef>(&u.positions[i]);
        const auto* lv = std::get_if<ItemRef>(&v.positions[i]);
        if (lu && lv) {
            if (*lu == *lv) {
                merged.push_back(*lu);
            } else {
                SlotVector slot;
                add_member(slot, *lu, u.support);
                add_member(slot, *lv, v.support);
                merged.push_back(std::move(slot));
            }
        } else if (lu) {
            SlotVector slot = std::get<SlotVector>(v.positions[i]);
            add_member(slot, *lu, u.support);
            merged.push_back(std::move(slot));
        } else if (lv) {
            SlotVector slot = std::get<SlotVector>(u.positions[i]);
            add_member(slot, *lv, v.support);
            merged.push_back(std::move(slot));
        } else {
            SlotVector slot = std::get<SlotVector>(u.positions[i]);
            union_into(slot, std::get<SlotVector>(v.positions[i]));
            merged.push_back(std::move(slot));
        }
    }
    return merged;
}

}  // namespace detail

// Pairwise generalization. Returns nullopt when the nodes disagree on two or
// more literal positions. Merging a node with itself returns it unchanged.
inline std::optional<TemplateNode> merge(const TemplateNode& u, const TemplateNode& v) {
    if (u.arity() != v.arity()) {
        raise(Errc::ArityMismatch, "generalization",
              "arity " + std::to_string(u.arity()) + " vs " + std::to_string(v.arity()));
    }
    if (u.id == v.id) return u;
    auto merged = detail::merge_positions(u, v);
    if (!merged) return std::nullopt;
    TemplateNode result;
    result.positions = std::move(*merged);
    result.id = node_id_of(result.positions);
    result.support = u.support + v.support;
    if (result.id != u.id) result.children.push_back(u.id);
    if (result.id != v.id) result.children.push_back(v.id);
    return result;
}

namespace detail {

struct WorklistEntry {
    NodeId id;
    std::uint64_t support;
    std::string shape;
};

inline void sort_worklist(std::vector<WorklistEntry>& wl) {
    std::sort(wl.begin(), wl.end(), [](const WorklistEntry& a, const WorklistEntry& b) {
        if (a.support != b.support) return a.support > b.support;
        return a.shape < b.shape;
    });
}

}  // namespace detail

// Builds the per-arity hierarchy to fixpoint. The worklist holds the nodes not
// yet generalized away, canonically ordered (support descending, then shape);
// each round the first mergeable pair in that order is merged. A merge whose
// result gains no new slot position over a parent of equal level coalesces
// into it instead of nesting, keeping levels strictly increasing toward
// parents. A final pass links every leaf to every template it strict-matches
// and recomputes supports and slot counts from the matched leaves.
inline Hierarchy build_hierarchy(const StructureGroups& groups) {
    Hierarchy h;

    std::map<std::size_t, std::vector<detail::WorklistEntry>> active_by_arity;
    for (const auto& [key, group] : groups) {
        TemplateNode leaf;
        leaf.positions.reserve(key.size());
        for (const ItemRef& item : key) leaf.positions.emplace_back(item);
        leaf.id = node_id_of(leaf.positions);
        leaf.support = group.count;
        leaf.leaf_count = group.count;
        leaf.instances = group.instances;
        auto [it, inserted] = h.nodes.emplace(leaf.id, std::move(leaf));
        if (inserted) {
            active_by_arity[key.size()].push_back(
                {it->first, it->second.support, shape_key(it->second.positions)});
        } else {
            // Same structure delivered twice (e.g. merged unit states).
            it->second.support += group.count;
            it->second.leaf_count += group.count;
            it->second.instances.insert(it->second.instances.end(), group.instances.begin(),
                                        group.instances.end());
            std::sort(it->second.instances.begin(), it->second.instances.end(), instance_order);
            for (auto& e : active_by_arity[key.size()]) {
                if (e.id == it->first) e.support = it->second.support;
            }
        }
    }

    for (auto& [arity, active] : active_by_arity) {
        while (true) {
            detail::sort_worklist(active);
            bool merged_any = false;
            for (std::size_t i = 0; i < active.size() && !merged_any; ++i) {
                for (std::size_t j = i + 1; j < active.size() && !merged_any; ++j) {
                    const TemplateNode& u = h.node(active[i].id);
                    const TemplateNode& v = h.node(active[j].id);
                    auto positions = detail::merge_positions(u, v);
                    if (!positions) continue;

                    NodeId rid = node_id_of(*positions);
                    std::uint64_t rsupport = u.support + v.support;
                    std::uint32_t rlevel = 0;
                    for (const Position& p : *positions) {
                        if (is_slot(p)) ++rlevel;
                    }

                    // Collect child links and nodes to dissolve into the result.
                    std::vector<NodeId> link_children;
                    std::vector<NodeId> coalesce;
                    for (NodeId side : {active[i].id, active[j].id}) {
                        if (side == rid) continue;
                        if (h.node(side).level() < rlevel) {
                            link_children.push_back(side);
                        } else {
                            coalesce.push_back(side);  // equal level: absorb, don't nest
                        }
                    }

                    TemplateNode* result = nullptr;
                    auto found = h.nodes.find(rid);
                    if (found != h.nodes.end()) {
                        result = &found->second;
                        result->support = rsupport;
                        result->positions = std::move(*positions);
                    } else {
                        TemplateNode fresh;
                        fresh.id = rid;
                        fresh.positions = std::move(*positions);
                        fresh.support = rsupport;
                        result = &h.nodes.emplace(rid, std::move(fresh)).first->second;
                    }

                    for (NodeId cid : coalesce) {
                        TemplateNode& victim = h.node_mut(cid);
                        for (NodeId grandchild : victim.children) {
                            result->children.push_back(grandchild);
                            TemplateNode& g = h.node_mut(grandchild);
                            std::erase(g.parents, cid);
                            g.parents.push_back(rid);
                        }
                        h.nodes.erase(cid);
                    }
                    for (NodeId cid : link_children) {
                        result->children.push_back(cid);
                        h.node_mut(cid).parents.push_back(rid);
                    }

                    // Replace both sides with the result in the worklist.
                    std::vector<detail::WorklistEntry> next;
                    next.reserve(active.size());
                    for (std::size_t k = 0; k < active.size(); ++k) {
                        if (k == i || k == j || active[k].id == rid) continue;
                        next.push_back(active[k]);
                    }
                    next.push_back({rid, result->support, shape_key(result->positions)});
                    active = std::move(next);
                    merged_any = true;
                }
            }
            if (!merged_any) break;
        }
    }

    // Finalization: make ancestor-iff-strict-match hold for every (leaf, node)
    // pair, then derive supports and slot counts from the matched leaves.
    std::vector<NodeId> leaf_ids;
    std::vector<NodeId> template_ids;
    for (const auto& [id, n] : h.nodes) {
        (n.is_leaf() ? leaf_ids : template_ids).push_back(id);
    }
    for (NodeId tid : template_ids) {
        std::set<NodeId> under;
        for (NodeId l : h.leaves_under(tid)) under.insert(l);
        TemplateNode& t = h.node_mut(tid);
        for (NodeId lid : leaf_ids) {
            if (under.count(lid)) continue;
            const TemplateNode& leaf = h.node(lid);
            if (leaf.arity() != t.arity()) continue;
            if (strict_match(t, leaf.literal_items())) {
                t.children.push_back(lid);
                h.node_mut(lid).parents.push_back(tid);
            }
        }
    }
    for (NodeId tid : template_ids) {
        TemplateNode& t = h.node_mut(tid);
        t.support = 0;
        for (Position& p : t.positions) {
            if (is_slot(p)) {
                for (auto& [item, count] : std::get<SlotVector>(p).members) count = 0;
            }
        }
        for (NodeId lid : h.leaves_under(tid)) {
            const TemplateNode& leaf = h.node(lid);
            t.support += leaf.leaf_count;
            auto items = leaf.literal_items();
            for (std::size_t i = 0; i < items.size(); ++i) {
                if (auto* slot = std::get_if<SlotVector>(&t.positions[i])) {
                    slot->members[items[i]] += leaf.leaf_count;
                }
            }
        }
    }

    for (auto& [id, n] : h.nodes) {
        std::sort(n.children.begin(), n.children.end());
        n.children.erase(std::unique(n.children.begin(), n.children.end()), n.children.end());
        std::sort(n.parents.begin(), n.parents.end());
        n.parents.erase(std::unique(n.parents.begin(), n.parents.end()), n.parents.end());
    }

    for (const auto& [id, n] : h.nodes) {
        if (n.parents.empty()) h.roots.push_back(id);
    }
    std::sort(h.roots.begin(), h.roots.end(), [&](NodeId a, NodeId b) {
        const TemplateNode& na = h.node(a);
        const TemplateNode& nb = h.node(b);
        if (na.arity() != nb.arity()) return na.arity() < nb.arity();
        if (na.level() != nb.level()) return na.level() > nb.level();
        return a < b;
    });
    return h;
}

// Timestamp-ordered leaf instances under node_id whose item at the position
// equals the value.
inline std::vector<StructureInstance> relation_select(const Hierarchy& h, NodeId node_id,
                                                      std::size_t position,
                                                      const ItemRef& value) {
    const TemplateNode& n = h.node(node_id);
    if (position >= n.arity()) {
        raise(Errc::BadPosition, "generalization",
              "position " + std::to_string(position) + " >= arity " + std::to_string(n.arity()));
    }
    std::vector<StructureInstance> out;
    for (NodeId lid : h.leaves_under(node_id)) {
        const TemplateNode& leaf = h.node(lid);
        if (std::get<ItemRef>(leaf.positions[position]) != value) continue;
        out.insert(out.end(), leaf.instances.begin(), leaf.instances.end());
    }
    std::sort(out.begin(), out.end(), instance_order);
    return out;
}

// Deduplicated, timestamp-ordered union of the leaf instances under the nodes.
inline std::vector<StructureInstance> relation_union(const Hierarchy& h,
                                                     std::span<const NodeId> node_ids) {
    std::set<NodeId> leaves;
    for (NodeId id : node_ids) {
        for (NodeId lid : h.leaves_under(id)) leaves.insert(lid);
    }
    std::vector<StructureInstance> out;
    for (NodeId lid : leaves) {
        const TemplateNode& leaf = h.node(lid);
        out.insert(out.end(), leaf.instances.begin(), leaf.instances.end());
    }
    std::sort(out.begin(), out.end(), instance_order);
    return out;
}

inline std::string render_position(const Position& p) {
    if (const auto* lit = std::get_if<ItemRef>(&p)) return "lit:" + item_key(*lit);
    std::string out = "slot:{";
    bool first = true;
    for (const auto& [item, count] : std::get<SlotVector>(p).members) {
        if (!first) out += ',';
        out += item_key(item);
        out += ':';
        out += std::to_string(count);
        first = false;
    }
    out += '}';
    return out;
}

// Canonical form: node_id \t level \t pos0|pos1|... \t children, sorted by
// (arity, level, node_id); children comma-joined ascending.
inline std::string export_hierarchy(const Hierarchy& h) {
    std::vector<const TemplateNode*> order;
    order.reserve(h.nodes.size());
    for (const auto& [id, n] : h.nodes) order.push_back(&n);
    std::sort(order.begin(), order.end(), [](const TemplateNode* a, const TemplateNode* b) {
        if (a->arity() != b->arity()) return a->arity() < b->arity();
        if (a->level() != b->level()) return a->level() < b->level();
        return a->id < b->id;
    });
    std::string out;
    for (const TemplateNode* n : order) {
        out += hex64(n->id);
        out += '\t';
        out += std::to_string(n->level());
        out += '\t';
        for (std::size_t i = 0; i < n->positions.size(); ++i) {
            if (i) out += '|';
            out += render_position(n->positions[i]);
        }
        out += '\t';
        for (std::size_t i = 0; i < n->children.size(); ++i) {
            if (i) out += ',';
            out += hex64(n->children[i]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace cognistream
