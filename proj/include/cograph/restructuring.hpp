#pragma once

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "cograph/errors.hpp"
#include "cograph/graph.hpp"

namespace cograph {

enum class OpType { Conc, Aug, Pivot, Prune, Correct };

inline const char* to_string(OpType t) {
    switch (t) {
        case OpType::Conc: return "conc";
        case OpType::Aug: return "aug";
        case OpType::Pivot: return "pivot";
        case OpType::Prune: return "prune";
        case OpType::Correct: return "correct";
    }
    return "?";
}

struct RestructureIntent {
    OpType op_type = OpType::Aug;
    std::string rationale;
    std::optional<NodeId> focus_node;
    std::optional<EdgeId> focus_edge;
};

// --- the primitive edit alphabet Σ (no standalone edge removal) -----------

struct AddNodeEdit { ConceptNode node; };
struct AddEdgeEdit { RelationEdge edge; };
struct RemoveNodeEdit { NodeId node; };
struct ModifyNodeEdit {
    NodeId node;
    std::optional<std::string> name;
    std::optional<std::vector<std::string>> core_criteria;
    std::optional<std::vector<std::string>> supplementary_criteria;
    std::set<std::string> remove_items;  // the one documented I1 exception
};
struct ModifyEdgeEdit {
    EdgeId edge;
    std::optional<std::string> inquiry_goal;
    std::optional<std::vector<std::string>> core_criteria;
    std::optional<std::vector<std::string>> supplementary_criteria;
};

using EditPrimitive =
    std::variant<AddNodeEdit, AddEdgeEdit, RemoveNodeEdit, ModifyNodeEdit, ModifyEdgeEdit>;

enum class RefusalReason {
    ProtectedNodeDeletion,
    NonEmptyFindingsDeletion,
    DifficultyRationale,
    AggregationOnlyNode,
    ContradictsEvidence,
    PatternMismatch,
    DownstreamViolation,
};

inline const char* to_string(RefusalReason r) {
    switch (r) {
        case RefusalReason::ProtectedNodeDeletion: return "protected_node_deletion";
        case RefusalReason::NonEmptyFindingsDeletion: return "non_empty_findings_deletion";
        case RefusalReason::DifficultyRationale: return "difficulty_rationale";
        case RefusalReason::AggregationOnlyNode: return "aggregation_only_node";
        case RefusalReason::ContradictsEvidence: return "contradicts_evidence";
        case RefusalReason::PatternMismatch: return "pattern_mismatch";
        case RefusalReason::DownstreamViolation: return "downstream_violation";
    }
    return "?";
}

struct Refusal {
    RefusalReason reason;
    std::string detail;
};

struct RestructureReport {
    OpType op_type = OpType::Aug;
    int added = 0;
    int removed = 0;
    int violations = 0;
    int rounds = 0;
    bool rolled_back = false;
    std::optional<Refusal> refusal;
    bool success() const { return !rolled_back && !refusal; }
};

namespace detail {

struct EditCounts {
    int add_node = 0, add_edge = 0, remove_node = 0, modify_node = 0, modify_edge = 0;
};

inline EditCounts count_edits(const std::vector<EditPrimitive>& edits) {
    EditCounts c;
    for (const auto& e : edits) {
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, AddNodeEdit>) c.add_node++;
                else if constexpr (std::is_same_v<T, AddEdgeEdit>) c.add_edge++;
                else if constexpr (std::is_same_v<T, RemoveNodeEdit>) c.remove_node++;
                else if constexpr (std::is_same_v<T, ModifyNodeEdit>) c.modify_node++;
                else c.modify_edge++;
            },
            e);
    }
    return c;
}

inline std::string lower(std::string s) {
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

}  // namespace detail

/// Checks that a realization (edit list) fits the claimed operator's
/// Σ-pattern. Returns a refusal instead of mutating anything.
inline std::optional<Refusal> compile_intent(const RestructureIntent& intent,
                                             const CognitiveGraph& g,
                                             const std::vector<EditPrimitive>& edits) {
    auto c = detail::count_edits(edits);
    auto mismatch = [&](const std::string& why) {
        return Refusal{RefusalReason::PatternMismatch, why};
    };
    switch (intent.op_type) {
        case OpType::Conc:
            // m concrete instances replace prospective slots: paired
            // AddNode/AddEdge, optional removals of the emptied slots.
            if (c.add_node == 0 || c.add_node != c.add_edge || c.modify_node || c.modify_edge)
                return mismatch("conc requires m AddNode + m AddEdge (+ removals only)");
            break;
        case OpType::Aug:
            if (c.add_node != 1 || c.add_edge < 1 || c.remove_node || c.modify_node ||
                c.modify_edge)
                return mismatch("aug requires exactly 1 AddNode and >=1 AddEdge");
            break;
        case OpType::Pivot: {
            if (c.add_node == 0 || c.add_node != c.add_edge || c.remove_node == 0 ||
                c.modify_node || c.modify_edge)
                return mismatch("pivot requires N AddNode + N AddEdge + M RemoveNode");
            // criteria migration: every criterion of each removed dimension
            // node must survive in some added node's criteria
            std::vector<const ConceptNode*> added;
            for (const auto& e : edits)
                if (const auto* a = std::get_if<AddNodeEdit>(&e)) added.push_back(&a->node);
            for (const auto& e : edits) {
                const auto* r = std::get_if<RemoveNodeEdit>(&e);
                if (!r || !g.has_node(r->node)) continue;
                const auto& old = g.node(r->node);
                auto migrated = [&](const std::string& criterion) {
                    for (const auto* n : added) {
                        if (std::find(n->core_criteria.begin(), n->core_criteria.end(),
                                      criterion) != n->core_criteria.end())
                            return true;
                        if (std::find(n->supplementary_criteria.begin(),
                                      n->supplementary_criteria.end(),
                                      criterion) != n->supplementary_criteria.end())
                            return true;
                    }
                    return false;
                };
                for (const auto& criterion : old.core_criteria)
                    if (!migrated(criterion))
                        return mismatch("pivot drops criterion without migration: " + criterion);
            }
            break;
        }
        case OpType::Prune:
            if (c.remove_node != 1 || c.add_node || c.add_edge || c.modify_node ||
                c.modify_edge)
                return mismatch("prune is a single RemoveNode");
            break;
        case OpType::Correct: {
            if (c.add_node || c.add_edge || c.remove_node)
                return mismatch("correct may only modify existing nodes/edges");
            if (!intent.focus_node || !g.has_node(*intent.focus_node))
                return mismatch("correct requires an existing focus node");
            auto down = g.downstream(*intent.focus_node);
            down.insert(*intent.focus_node);
            for (const auto& e : edits) {
                if (const auto* m = std::get_if<ModifyNodeEdit>(&e)) {
                    if (!down.count(m->node))
                        return Refusal{RefusalReason::DownstreamViolation,
                                       "correct touches non-downstream node " + m->node};
                    if (!m->remove_items.empty())
                        return mismatch("correct never touches findings");
                } else if (const auto* me = std::get_if<ModifyEdgeEdit>(&e)) {
                    if (!g.has_edge(me->edge)) return mismatch("unknown edge " + me->edge);
                    const auto& edge = g.edge(me->edge);
                    if (!down.count(edge.source) && !down.count(edge.target))
                        return Refusal{RefusalReason::DownstreamViolation,
                                       "correct touches non-downstream edge " + me->edge};
                }
            }
            break;
        }
    }
    return std::nullopt;
}

/// I1/I2 gate plus the rationale rubric. Pure check; the graph is untouched.
inline std::optional<Refusal> validate_edits(const std::vector<EditPrimitive>& edits,
                                             const CognitiveGraph& g,
                                             const RestructureIntent& intent) {
    static const std::vector<std::string> difficulty_phrases = {
        "search has been difficult", "hard to find", "too difficult to search",
        "difficult to research", "searches keep failing"};
    auto rationale = detail::lower(intent.rationale);
    for (const auto& phrase : difficulty_phrases)
        if (rationale.find(phrase) != std::string::npos)
            return Refusal{RefusalReason::DifficultyRationale,
                           "rationale cites search difficulty"};
    for (const auto& e : edits) {
        if (const auto* r = std::get_if<RemoveNodeEdit>(&e)) {
            if (g.user_protected.count(r->node))
                return Refusal{RefusalReason::ProtectedNodeDeletion,
                               "node is user-protected: " + r->node};
            if (g.has_node(r->node) && g.node(r->node).findings_nonempty())
                return Refusal{RefusalReason::NonEmptyFindingsDeletion,
                               "node has findings: " + r->node};
            if (!g.has_node(r->node))
                return Refusal{RefusalReason::PatternMismatch, "unknown node: " + r->node};
        } else if (const auto* m = std::get_if<ModifyNodeEdit>(&e)) {
            if (!g.has_node(m->node))
                return Refusal{RefusalReason::PatternMismatch, "unknown node: " + m->node};
            for (const auto& item : m->remove_items)
                if (!g.node(m->node).item_findings.count(item))
                    return Refusal{RefusalReason::PatternMismatch,
                                   "remove_items names absent item: " + item};
        }
    }
    return std::nullopt;
}

/// Phase 1: apply the validated sequence surgically. RemoveNode cascades
/// incident edges; remove_items drops only the named item attributions.
inline void apply_phase1(const std::vector<EditPrimitive>& edits, CognitiveGraph& g) {
    for (const auto& e : edits) {
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, AddNodeEdit>) {
                    g.add_node(v.node);
                } else if constexpr (std::is_same_v<T, AddEdgeEdit>) {
                    g.add_edge(v.edge);
                } else if constexpr (std::is_same_v<T, RemoveNodeEdit>) {
                    g.remove_node(v.node);
                } else if constexpr (std::is_same_v<T, ModifyNodeEdit>) {
                    auto& n = g.node(v.node);
                    if (v.name) n.name = *v.name;
                    if (v.core_criteria) n.core_criteria = *v.core_criteria;
                    if (v.supplementary_criteria)
                        n.supplementary_criteria = *v.supplementary_criteria;
                    for (const auto& item : v.remove_items) n.item_findings.erase(item);
                    auto [core, supp] =
                        std::pair(n.core_criteria, n.supplementary_criteria);
                    n.core_pending.clear();
                    n.supplementary_pending.clear();
                    auto covered = [&](const std::string& criterion) {
                        for (const auto& [item, attrs] : n.item_findings)
                            if (attrs.count(criterion)) return true;
                        return n.cross_item_findings.count(criterion) > 0;
                    };
                    for (const auto& criterion : core)
                        if (!covered(criterion)) n.core_pending.push_back(criterion);
                    for (const auto& criterion : supp)
                        if (!covered(criterion)) n.supplementary_pending.push_back(criterion);
                    if (n.node_type != NodeType::Start)
                        n.cognitive_state =
                            compute_state(n.core_pending, n.findings_nonempty());
                } else {
                    auto& edge = g.edge(v.edge);
                    if (v.inquiry_goal) edge.inquiry_goal = *v.inquiry_goal;
                    if (v.core_criteria) edge.core_criteria = *v.core_criteria;
                    if (v.supplementary_criteria)
                        edge.supplementary_criteria = *v.supplementary_criteria;
                }
            },
            e);
    }
}

/// Phase-2 reconnection policy: proposes bridging edges for one orphan.
struct ReconnectPolicy {
    virtual ~ReconnectPolicy() = default;
    virtual std::optional<RelationEdge> propose(const CognitiveGraph& current,
                                                const CognitiveGraph& snapshot,
                                                const NodeId& orphan, int round) = 0;
};

/// Deterministic scripted policy: reattach each orphan to its most recent
/// surviving ancestor from the snapshot (falling back to any root).
struct NearestAncestorPolicy : ReconnectPolicy {
    std::optional<RelationEdge> propose(const CognitiveGraph& current,
                                        const CognitiveGraph& snapshot, const NodeId& orphan,
                                        int round) override {
        (void)round;
        // walk snapshot ancestors breadth-first, closest first
        std::deque<NodeId> frontier{orphan};
        std::set<NodeId> seen{orphan};
        while (!frontier.empty()) {
            NodeId cur = frontier.front();
            frontier.pop_front();
            for (const auto& [eid, e] : snapshot.edges) {
                if (e.target != cur || seen.count(e.source)) continue;
                if (current.has_node(e.source) && !current.node(e.source).unreachable &&
                    e.source != orphan) {
                    RelationEdge bridge;
                    bridge.id = "bridge_" + e.source + "_" + orphan;
                    bridge.source = e.source;
                    bridge.target = orphan;
                    bridge.inquiry_goal = "reconnect " + orphan;
                    bridge.status = EdgeStatus::Solved;  // structural bridge, not a task
                    return bridge;
                }
                seen.insert(e.source);
                frontier.push_back(e.source);
            }
        }
        for (const auto& r : current.root_ids) {
            if (r == orphan) continue;
            RelationEdge bridge;
            bridge.id = "bridge_" + r + "_" + orphan;
            bridge.source = r;
            bridge.target = orphan;
            bridge.inquiry_goal = "reconnect " + orphan;
            bridge.status = EdgeStatus::Solved;
            return bridge;
        }
        return std::nullopt;
    }
};

inline constexpr int kMaxReconnectRounds = 5;

/// Phase 2: up to five rounds of orphan reconnection. Returns the number of
/// rounds used, or nullopt when rollback is required.
inline std::optional<int> repair_orphans(CognitiveGraph& g, const CognitiveGraph& snapshot,
                                         ReconnectPolicy& policy) {
    for (int round = 0; round <= kMaxReconnectRounds; ++round) {
        recompute_hops(g);
        auto orphans = unreachable_nodes(g);
        if (orphans.empty()) return round;
        if (round == kMaxReconnectRounds) break;
        for (const auto& orphan : orphans) {
            auto bridge = policy.propose(g, snapshot, orphan, round + 1);
            if (!bridge) continue;
            try {
                g.add_edge(*bridge);
            } catch (const GraphStructureError&) {
                // proposal rejected (cycle/duplicate); a later round may differ
            }
        }
    }
    return std::nullopt;
}

/// The full schema-revision step: snapshot, compile, validate, apply, repair,
/// recompute hops — with rollback restoring the snapshot on any failure.
inline RestructureReport restructure(const RestructureIntent& intent,
                                     const std::vector<EditPrimitive>& edits,
                                     CognitiveGraph& g, ReconnectPolicy& policy) {
    RestructureReport report;
    report.op_type = intent.op_type;
    CognitiveGraph snapshot = g;

    if (auto refusal = compile_intent(intent, g, edits)) {
        report.refusal = refusal;
        report.violations = 1;
        return report;
    }
    if (auto refusal = validate_edits(edits, g, intent)) {
        report.refusal = refusal;
        report.violations = 1;
        return report;
    }
    try {
        apply_phase1(edits, g);
    } catch (const GraphStructureError& err) {
        g = snapshot;
        report.rolled_back = true;
        report.refusal = Refusal{RefusalReason::PatternMismatch, err.what()};
        return report;
    }
    auto rounds = repair_orphans(g, snapshot, policy);
    if (!rounds) {
        g = snapshot;
        report.rolled_back = true;
        report.rounds = kMaxReconnectRounds;
        return report;
    }
    report.rounds = *rounds;
    recompute_hops(g);
    auto c = detail::count_edits(edits);
    report.added = c.add_node;
    report.removed = c.remove_node;
    return report;
}

}  // namespace cograph
