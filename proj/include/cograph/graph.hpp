#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cograph/errors.hpp"

namespace cograph {

using NodeId = std::string;
using EdgeId = std::string;
using TaskId = std::string;

enum class CognitiveState { Start, Unknown, Partial, Known };
enum class EdgeStatus { ToSolve, Investigating, Solved, Exhausted };
enum class NodeType { Start, Placeholder, Discovered };
enum class StructureType { Serial, Parallel, Convergence, Mixed };
enum class TaskType { Open, Specified };

/// Four-level ordinal shared by finding_strength and the unexpected signal.
enum class Strength { None, Weak, Moderate, Strong };

enum class Barrier { Paywall, LoginRequired, RequiresDownload, DynamicLoad };

inline const char* to_string(CognitiveState s) {
    switch (s) {
        case CognitiveState::Start: return "START";
        case CognitiveState::Unknown: return "UNKNOWN";
        case CognitiveState::Partial: return "PARTIAL";
        case CognitiveState::Known: return "KNOWN";
    }
    return "?";
}

inline const char* to_string(EdgeStatus s) {
    switch (s) {
        case EdgeStatus::ToSolve: return "to_solve";
        case EdgeStatus::Investigating: return "investigating";
        case EdgeStatus::Solved: return "solved";
        case EdgeStatus::Exhausted: return "exhausted";
    }
    return "?";
}

inline const char* to_string(Strength s) {
    switch (s) {
        case Strength::None: return "none";
        case Strength::Weak: return "weak";
        case Strength::Moderate: return "moderate";
        case Strength::Strong: return "strong";
    }
    return "?";
}

inline const char* to_string(Barrier b) {
    switch (b) {
        case Barrier::Paywall: return "paywall";
        case Barrier::LoginRequired: return "login_required";
        case Barrier::RequiresDownload: return "requires_download";
        case Barrier::DynamicLoad: return "dynamic_load";
    }
    return "?";
}

/// Maximum attempts per edge before it exhausts.
inline constexpr int kMaxAttempts = 3;

/// Rolling window capacity for per-page composites on a node.
inline constexpr std::size_t kPageWindowCapacity = 50;

struct ContradictionRecord {
    std::string criterion;
    std::string old_claim;
    std::string new_claim;
    std::string resolution;
    enum class Kept { Old, New } kept = Kept::New;
};

/// Per-node evidence-quality aggregate over a bounded window of page
/// composites. Means and minima always reflect the current window.
struct QualityProfile {
    std::optional<double> mean_cr;
    std::optional<double> mean_aap;
    std::optional<double> min_cr;
    std::optional<double> min_aap;
    Strength finding_strength = Strength::None;
    Strength unexpected_strength = Strength::None;
    std::vector<Barrier> accessibility_barriers;
    std::deque<std::pair<double, double>> page_window;  // (cr, aap) pairs

    void push_page(double cr, double aap) {
        page_window.emplace_back(cr, aap);
        while (page_window.size() > kPageWindowCapacity) page_window.pop_front();
        recompute();
    }

    void add_barrier(Barrier b) {
        if (std::find(accessibility_barriers.begin(), accessibility_barriers.end(), b) ==
            accessibility_barriers.end()) {
            accessibility_barriers.push_back(b);
        }
    }

    bool accessibility_flag() const { return !accessibility_barriers.empty(); }

    void recompute() {
        if (page_window.empty()) {
            mean_cr.reset();
            mean_aap.reset();
            min_cr.reset();
            min_aap.reset();
            return;
        }
        double sum_cr = 0, sum_aap = 0;
        double lo_cr = 6, lo_aap = 6;
        for (const auto& [cr, aap] : page_window) {
            sum_cr += cr;
            sum_aap += aap;
            lo_cr = std::min(lo_cr, cr);
            lo_aap = std::min(lo_aap, aap);
        }
        const auto n = static_cast<double>(page_window.size());
        mean_cr = sum_cr / n;
        mean_aap = sum_aap / n;
        min_cr = lo_cr;
        min_aap = lo_aap;
    }
};

/// A concept under inquiry. Finding containers are append-only on the
/// regular update path; claims carry [[m]] markers into the evidence store.
struct ConceptNode {
    NodeId id;
    std::string name;
    NodeType node_type = NodeType::Placeholder;
    int hop_distance = 0;
    bool unreachable = false;      // transient flag set by recompute_hops
    bool deadline_flagged = false; // protected node left Unknown at the soft deadline
    std::optional<std::set<NodeId>> discovery_dependency;
    std::string type_constraint;
    std::vector<std::string> condition_constraints;
    std::vector<std::string> core_criteria;
    std::vector<std::string> supplementary_criteria;
    std::vector<std::string> core_pending;
    std::vector<std::string> supplementary_pending;
    std::set<std::string> discovered_items;
    // item -> attribute -> claims (latest claim is authoritative unless a
    // contradiction record says otherwise; values only ever grow)
    std::map<std::string, std::map<std::string, std::vector<std::string>>> item_findings;
    std::map<std::string, std::vector<std::string>> cross_item_findings;
    CognitiveState cognitive_state = CognitiveState::Unknown;
    QualityProfile quality_profile;
    std::vector<ContradictionRecord> contradictions;
    std::vector<std::string> unexpected_discoveries;
    std::string temporal_notes;
    std::vector<std::string> search_experience;
    std::set<TaskId> related_tasks;
    std::set<int> cited_refs;

    bool findings_nonempty() const {
        return !item_findings.empty() || !cross_item_findings.empty();
    }

    /// Count of (container key, claim) pairs; used by the append-only audit.
    std::size_t finding_claim_count() const {
        std::size_t n = 0;
        for (const auto& [item, attrs] : item_findings)
            for (const auto& [attr, claims] : attrs) n += claims.size();
        for (const auto& [label, claims] : cross_item_findings) n += claims.size();
        return n;
    }
};

struct SearchHistoryEntry {
    std::string query;
    std::string summary;
    std::string planner_feedback;
};

struct RelationEdge {
    EdgeId id;
    NodeId source;
    NodeId target;
    std::string inquiry_goal;
    std::vector<std::string> core_criteria;
    std::vector<std::string> supplementary_criteria;
    TaskType task_type = TaskType::Open;
    std::optional<std::string> specified_source;
    int attempt_count = 0;
    EdgeStatus status = EdgeStatus::ToSolve;
    std::vector<SearchHistoryEntry> search_history;
};

/// Pure state function over the criterion residues.
inline CognitiveState compute_state(const std::vector<std::string>& core_pending,
                                    bool findings_nonempty) {
    if (!findings_nonempty) return CognitiveState::Unknown;
    return core_pending.empty() ? CognitiveState::Known : CognitiveState::Partial;
}

/// The agent's mental model: structural state (nodes, edges, protected set)
/// plus per-node/per-edge content. Single-writer; copies are deep.
struct CognitiveGraph {
    std::map<NodeId, ConceptNode> nodes;
    std::map<EdgeId, RelationEdge> edges;
    std::set<NodeId> user_protected;
    StructureType structure_type = StructureType::Mixed;
    std::set<NodeId> root_ids;

    bool has_node(const NodeId& id) const { return nodes.count(id) > 0; }
    bool has_edge(const EdgeId& id) const { return edges.count(id) > 0; }

    const ConceptNode& node(const NodeId& id) const { return nodes.at(id); }
    ConceptNode& node(const NodeId& id) { return nodes.at(id); }
    const RelationEdge& edge(const EdgeId& id) const {
        auto it = edges.find(id);
        if (it == edges.end()) throw UnknownEdge(id);
        return it->second;
    }
    RelationEdge& edge(const EdgeId& id) {
        auto it = edges.find(id);
        if (it == edges.end()) throw UnknownEdge(id);
        return it->second;
    }

    void add_node(ConceptNode n) {
        if (has_node(n.id)) throw GraphStructureError("duplicate node id: " + n.id);
        if (n.node_type == NodeType::Start) {
            n.cognitive_state = CognitiveState::Start;
            root_ids.insert(n.id);
        }
        nodes.emplace(n.id, std::move(n));
    }

    /// Simple directed edges only; cycles rejected so downstream sets are
    /// well defined.
    void add_edge(RelationEdge e) {
        if (has_edge(e.id)) throw GraphStructureError("duplicate edge id: " + e.id);
        if (!has_node(e.source) || !has_node(e.target))
            throw GraphStructureError("edge endpoints must exist: " + e.id);
        for (const auto& [id, other] : edges)
            if (other.source == e.source && other.target == e.target)
                throw GraphStructureError("parallel edge rejected: " + e.id);
        if (reaches(e.target, e.source))
            throw GraphStructureError("cycle rejected at edge insertion: " + e.id);
        edges.emplace(e.id, std::move(e));
    }

    /// Removes a node together with all incident edges (there is no
    /// standalone edge removal).
    void remove_node(const NodeId& id) {
        if (!has_node(id)) throw GraphStructureError("remove of missing node: " + id);
        for (auto it = edges.begin(); it != edges.end();) {
            if (it->second.source == id || it->second.target == id)
                it = edges.erase(it);
            else
                ++it;
        }
        root_ids.erase(id);
        user_protected.erase(id);
        nodes.erase(id);
    }

    std::vector<EdgeId> out_edges(const NodeId& id) const {
        std::vector<EdgeId> out;
        for (const auto& [eid, e] : edges)
            if (e.source == id) out.push_back(eid);
        return out;
    }

    std::vector<EdgeId> in_edges(const NodeId& id) const {
        std::vector<EdgeId> in;
        for (const auto& [eid, e] : edges)
            if (e.target == id) in.push_back(eid);
        return in;
    }

    bool reaches(const NodeId& from, const NodeId& to) const {
        if (from == to) return true;
        std::set<NodeId> seen{from};
        std::deque<NodeId> frontier{from};
        while (!frontier.empty()) {
            NodeId cur = frontier.front();
            frontier.pop_front();
            for (const auto& [eid, e] : edges) {
                if (e.source != cur || seen.count(e.target)) continue;
                if (e.target == to) return true;
                seen.insert(e.target);
                frontier.push_back(e.target);
            }
        }
        return false;
    }

    /// Directed downstream closure of a node, excluding the node itself.
    std::set<NodeId> downstream(const NodeId& id) const {
        std::set<NodeId> seen;
        std::deque<NodeId> frontier{id};
        while (!frontier.empty()) {
            NodeId cur = frontier.front();
            frontier.pop_front();
            for (const auto& [eid, e] : edges) {
                if (e.source != cur || seen.count(e.target) || e.target == id) continue;
                seen.insert(e.target);
                frontier.push_back(e.target);
            }
        }
        return seen;
    }
};

/// Multi-source BFS from the roots over directed edges. Sets hop_distance
/// per node and flags unreachable nodes; idempotent.
inline void recompute_hops(CognitiveGraph& g) {
    std::map<NodeId, int> dist;
    std::deque<NodeId> frontier;
    for (const auto& r : g.root_ids) {
        if (!g.has_node(r)) continue;
        dist[r] = 0;
        frontier.push_back(r);
    }
    while (!frontier.empty()) {
        NodeId cur = frontier.front();
        frontier.pop_front();
        for (const auto& [eid, e] : g.edges) {
            if (e.source != cur || dist.count(e.target)) continue;
            dist[e.target] = dist[cur] + 1;
            frontier.push_back(e.target);
        }
    }
    for (auto& [id, n] : g.nodes) {
        auto it = dist.find(id);
        if (it == dist.end()) {
            n.unreachable = true;
        } else {
            n.unreachable = false;
            n.hop_distance = it->second;
        }
    }
}

inline std::vector<NodeId> unreachable_nodes(const CognitiveGraph& g) {
    std::vector<NodeId> out;
    for (const auto& [id, n] : g.nodes)
        if (n.unreachable) out.push_back(id);
    return out;
}

enum class EdgeEvent { Dispatched, TaskClosed };

/// Edge state machine: to-solve until first dispatch, investigating between
/// attempts, solved once the target is known, exhausted at the attempt cap.
inline RelationEdge edge_transition(RelationEdge e, EdgeEvent event,
                                    CognitiveState target_state) {
    switch (event) {
        case EdgeEvent::Dispatched:
            if (e.status != EdgeStatus::ToSolve && e.status != EdgeStatus::Investigating)
                throw IllegalTransition("dispatch on " + std::string(to_string(e.status)) +
                                        " edge " + e.id);
            if (e.attempt_count >= kMaxAttempts)
                throw IllegalTransition("dispatch beyond attempt cap on " + e.id);
            e.status = EdgeStatus::Investigating;
            e.attempt_count += 1;
            return e;
        case EdgeEvent::TaskClosed:
            if (e.status != EdgeStatus::Investigating)
                throw IllegalTransition("task_closed on " + std::string(to_string(e.status)) +
                                        " edge " + e.id);
            if (target_state == CognitiveState::Known)
                e.status = EdgeStatus::Solved;
            else if (e.attempt_count >= kMaxAttempts)
                e.status = EdgeStatus::Exhausted;
            // else stays Investigating
            return e;
    }
    throw IllegalTransition("unknown event on edge " + e.id);
}

}  // namespace cograph
