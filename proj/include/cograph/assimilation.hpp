#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cograph/deviation.hpp"
#include "cograph/errors.hpp"
#include "cograph/evidence.hpp"
#include "cograph/graph.hpp"

namespace cograph {

struct Finding {
    std::string criterion;        // which acceptance criterion it addresses
    std::string answer;
    std::string evidence_quote;   // 200-500 chars, verbatim
    std::string source_url;
    std::optional<std::string> attributed_item;
    std::string item_category;    // fixture tag consulted by the deny-list
};

enum class FindingClass { CriterionSatisfying, Redundant, Contradictory, Unexpected };

inline const char* to_string(FindingClass c) {
    switch (c) {
        case FindingClass::CriterionSatisfying: return "criterion_satisfying";
        case FindingClass::Redundant: return "redundant";
        case FindingClass::Contradictory: return "contradictory";
        case FindingClass::Unexpected: return "unexpected";
    }
    return "?";
}

struct AccessibilityNote {
    std::string criterion;
    Barrier barrier = Barrier::Paywall;
    std::string detail;
};

struct UnexpectedInsight {
    std::string label;
    std::string insight;
    std::string evidence;
};

struct Observation {
    TaskId task_id;
    NodeId target_node;
    EdgeId edge_id;
    std::vector<Finding> findings;
    std::vector<PageRating> page_scores;
    std::vector<AccessibilityNote> accessibility_notes;
    std::vector<UnexpectedInsight> unexpected_insights;
    std::vector<std::string> search_experience;  // access failures / confirmed absence
    std::vector<std::string> temporal_contexts;
    Strength psi = Strength::None;               // batch-level unexpected strength
    Strength finding_strength = Strength::None;
    std::string summary;                          // searcher synthesis for the edge history
    // evidence batch carried to the commit path; global ids are assigned
    // there (single-threaded) so replays stay deterministic
    std::vector<PendingRecord> pending_evidence;
};

/// Semantic judgments behind Γ. Real mode backs these with a model; the
/// scripted implementation below uses exact key matching so replays stay
/// deterministic.
struct Judger {
    virtual ~Judger() = default;
    // Does this finding address the given criterion?
    virtual bool matches_criterion(const Finding& f, const std::string& criterion) const = 0;
    // Are two claims the same content?
    virtual bool equivalent(const std::string& a, const std::string& b) const = 0;
    // May this discovered-item category enter discovered_items?
    virtual bool item_allowed(const std::string& category) const = 0;
};

struct ScriptedJudger : Judger {
    bool matches_criterion(const Finding& f, const std::string& criterion) const override {
        return f.criterion == criterion;
    }
    bool equivalent(const std::string& a, const std::string& b) const override { return a == b; }
    bool item_allowed(const std::string& category) const override {
        static const std::set<std::string> deny = {"person", "date", "event", "location",
                                                   "metric"};
        return deny.count(category) == 0;
    }
};

namespace detail {

// Existing claims under the finding's container key on a node.
inline const std::vector<std::string>* claims_for_key(const ConceptNode& n, const Finding& f) {
    if (f.attributed_item) {
        auto it = n.item_findings.find(*f.attributed_item);
        if (it == n.item_findings.end()) return nullptr;
        auto jt = it->second.find(f.criterion);
        return jt == it->second.end() ? nullptr : &jt->second;
    }
    auto it = n.cross_item_findings.find(f.criterion);
    return it == n.cross_item_findings.end() ? nullptr : &it->second;
}

}  // namespace detail

/// Classification is total and ordered: redundancy first (identical claim
/// already held), then contradiction (conflicting claim on the same key),
/// then the unexpected admission rule, else criterion-satisfying.
inline FindingClass classify_finding(const Finding& f, const ConceptNode& node,
                                     const std::vector<std::string>& task_criteria,
                                     const Judger& judger) {
    if (const auto* claims = detail::claims_for_key(node, f)) {
        for (const auto& c : *claims)
            if (judger.equivalent(c, f.answer)) return FindingClass::Redundant;
        if (!claims->empty()) return FindingClass::Contradictory;
    }
    auto in_list = [&](const std::vector<std::string>& criteria) {
        return std::any_of(criteria.begin(), criteria.end(),
                           [&](const std::string& c) { return judger.matches_criterion(f, c); });
    };
    bool in_task = in_list(task_criteria);
    bool in_node = in_list(node.core_criteria) || in_list(node.supplementary_criteria);
    if (!in_task && !in_node) return FindingClass::Unexpected;
    return FindingClass::CriterionSatisfying;
}

/// Pending lists are residues of the criteria lists against accumulated
/// coverage; a confirmed negative result is coverage like any other finding.
inline std::pair<std::vector<std::string>, std::vector<std::string>> reconcile_criteria(
    const std::vector<std::string>& core, const std::vector<std::string>& supplementary,
    const ConceptNode& node) {
    auto covered = [&](const std::string& criterion) {
        for (const auto& [item, attrs] : node.item_findings) {
            auto it = attrs.find(criterion);
            if (it != attrs.end() && !it->second.empty()) return true;
        }
        auto it = node.cross_item_findings.find(criterion);
        return it != node.cross_item_findings.end() && !it->second.empty();
    };
    std::vector<std::string> core_pending, supp_pending;
    for (const auto& c : core)
        if (!covered(c)) core_pending.push_back(c);
    for (const auto& c : supplementary)
        if (!covered(c)) supp_pending.push_back(c);
    return {core_pending, supp_pending};
}

/// Picks the destination node for one finding: the default target unless the
/// finding satisfies another non-start node's own acceptance criterion.
/// `cross_routed` tracks destinations already honored this task (cap 2).
inline NodeId route_cross_node(const Finding& f, const CognitiveGraph& g,
                               const NodeId& default_target, const Judger& judger,
                               std::set<NodeId>& cross_routed) {
    for (const auto& [id, n] : g.nodes) {
        if (id == default_target || n.node_type == NodeType::Start) continue;
        bool match = false;
        for (const auto& c : n.core_criteria)
            if (judger.matches_criterion(f, c)) match = true;
        for (const auto& c : n.supplementary_criteria)
            if (judger.matches_criterion(f, c)) match = true;
        if (!match) continue;
        if (cross_routed.count(id) || cross_routed.size() < 2) {
            cross_routed.insert(id);
            return id;
        }
        return default_target;  // cap reached: excess falls back
    }
    return default_target;
}

struct NodeDelta {
    NodeId node;
    std::vector<std::pair<std::string, std::string>> new_claims;  // (container key, answer)
    std::vector<ContradictionRecord> new_contradictions;
    std::vector<std::string> new_unexpected;
    std::vector<std::string> core_pending_after;
    bool task_added = false;
};

struct UpdateSet {
    std::vector<NodeDelta> entries;

    NodeDelta& entry_for(const NodeId& id) {
        for (auto& e : entries)
            if (e.node == id) return e;
        entries.push_back(NodeDelta{id, {}, {}, {}, {}, false});
        return entries.back();
    }
};

namespace detail {

inline void append_claim(ConceptNode& n, const Finding& f) {
    if (f.attributed_item)
        n.item_findings[*f.attributed_item][f.criterion].push_back(f.answer);
    else
        n.cross_item_findings[f.criterion].push_back(f.answer);
}

inline void merge_temporal(ConceptNode& n, const std::vector<std::string>& contexts) {
    for (const auto& c : contexts) {
        if (c.empty()) continue;
        // semicolon-delimited aggregation, deduplicated on exact segment
        bool present = false;
        std::size_t pos = 0;
        const std::string& t = n.temporal_notes;
        while (pos <= t.size()) {
            auto end = t.find("; ", pos);
            auto seg = t.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
            if (seg == c) present = true;
            if (end == std::string::npos) break;
            pos = end + 2;
        }
        if (present) continue;
        if (!n.temporal_notes.empty()) n.temporal_notes += "; ";
        n.temporal_notes += c;
    }
}

inline void refresh_node(ConceptNode& n) {
    auto [core, supp] = reconcile_criteria(n.core_criteria, n.supplementary_criteria, n);
    n.core_pending = std::move(core);
    n.supplementary_pending = std::move(supp);
    if (n.node_type != NodeType::Start)
        n.cognitive_state = compute_state(n.core_pending, n.findings_nonempty());
}

}  // namespace detail

/// The interpretive-update operator Γ. Routes and classifies every finding,
/// grows the append-only containers, recomputes residues and states, and
/// extends the target's quality window. Never touches a start node's content.
inline UpdateSet assimilate(CognitiveGraph& g, const Observation& obs, const Judger& judger) {
    if (!g.has_node(obs.target_node))
        throw GraphStructureError("assimilate target missing: " + obs.target_node);
    if (g.node(obs.target_node).node_type == NodeType::Start)
        throw TargetIsStart("assimilate into start node " + obs.target_node);
    const RelationEdge& edge = g.edge(obs.edge_id);  // throws UnknownEdge

    std::vector<std::string> task_criteria = edge.core_criteria;
    task_criteria.insert(task_criteria.end(), edge.supplementary_criteria.begin(),
                         edge.supplementary_criteria.end());

    UpdateSet updates;
    std::set<NodeId> cross_routed;
    std::set<NodeId> touched{obs.target_node};

    for (const auto& f : obs.findings) {
        NodeId dest = route_cross_node(f, g, obs.target_node, judger, cross_routed);
        if (g.node(dest).node_type == NodeType::Start) dest = obs.target_node;
        ConceptNode& n = g.node(dest);
        touched.insert(dest);
        auto& delta = updates.entry_for(dest);
        switch (classify_finding(f, n, task_criteria, judger)) {
            case FindingClass::Redundant:
                break;
            case FindingClass::Contradictory: {
                const auto* claims = detail::claims_for_key(n, f);
                ContradictionRecord rec;
                rec.criterion = f.criterion;
                rec.old_claim = claims && !claims->empty() ? claims->back() : "";
                rec.new_claim = f.answer;
                rec.resolution = "new claim kept (no judger rationale)";
                rec.kept = ContradictionRecord::Kept::New;
                n.contradictions.push_back(rec);
                delta.new_contradictions.push_back(rec);
                detail::append_claim(n, f);  // replace-by-append
                delta.new_claims.emplace_back(f.criterion, f.answer);
                break;
            }
            case FindingClass::Unexpected:
                n.unexpected_discoveries.push_back(f.answer);
                delta.new_unexpected.push_back(f.answer);
                break;
            case FindingClass::CriterionSatisfying:
                detail::append_claim(n, f);
                delta.new_claims.emplace_back(f.criterion, f.answer);
                if (f.attributed_item && judger.item_allowed(f.item_category))
                    n.discovered_items.insert(*f.attributed_item);
                break;
        }
    }

    ConceptNode& target = g.node(obs.target_node);
    for (const auto& u : obs.unexpected_insights) {
        target.unexpected_discoveries.push_back(u.label + ": " + u.insight);
        updates.entry_for(obs.target_node).new_unexpected.push_back(u.label);
    }
    for (const auto& s : obs.search_experience) target.search_experience.push_back(s);
    for (const auto& a : obs.accessibility_notes) {
        target.quality_profile.add_barrier(a.barrier);
        if (!a.detail.empty()) target.search_experience.push_back(a.detail);
    }
    for (const auto& p : obs.page_scores) {
        if (!p.accessible) {
            if (p.barrier) target.quality_profile.add_barrier(*p.barrier);
            continue;
        }
        auto [cr, aap] = page_composites(p);
        target.quality_profile.push_page(cr, aap);
    }
    target.quality_profile.unexpected_strength =
        std::max(target.quality_profile.unexpected_strength, obs.psi);
    target.quality_profile.finding_strength =
        std::max(target.quality_profile.finding_strength, obs.finding_strength);
    detail::merge_temporal(target, obs.temporal_contexts);

    for (const auto& id : touched) {
        ConceptNode& n = g.node(id);
        bool added = n.related_tasks.insert(obs.task_id).second;
        updates.entry_for(id).task_added = added;
        detail::refresh_node(n);
        updates.entry_for(id).core_pending_after = n.core_pending;
    }
    return updates;
}

/// Ablation A3 path: findings are appended verbatim with no classification,
/// no residue maintenance, and no state transitions (nodes can never reach
/// Known through this path).
inline UpdateSet append_verbatim(CognitiveGraph& g, const Observation& obs) {
    if (!g.has_node(obs.target_node))
        throw GraphStructureError("assimilate target missing: " + obs.target_node);
    if (g.node(obs.target_node).node_type == NodeType::Start)
        throw TargetIsStart("assimilate into start node " + obs.target_node);
    g.edge(obs.edge_id);
    ConceptNode& n = g.node(obs.target_node);
    UpdateSet updates;
    auto& delta = updates.entry_for(obs.target_node);
    for (const auto& f : obs.findings) {
        n.cross_item_findings["raw"].push_back(f.criterion + ": " + f.answer);
        delta.new_claims.emplace_back("raw", f.answer);
    }
    for (const auto& p : obs.page_scores) {
        if (!p.accessible) continue;
        auto [cr, aap] = page_composites(p);
        n.quality_profile.push_page(cr, aap);
    }
    delta.task_added = n.related_tasks.insert(obs.task_id).second;
    if (n.findings_nonempty() && n.cognitive_state == CognitiveState::Unknown)
        n.cognitive_state = CognitiveState::Partial;
    delta.core_pending_after = n.core_pending;
    return updates;
}

}  // namespace cograph
