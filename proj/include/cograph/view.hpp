#pragma once

#include <sstream>
#include <string>

#include "cograph/graph.hpp"

namespace cograph {

namespace detail {

inline void render_node(std::ostringstream& out, const ConceptNode& n) {
    out << "### " << n.name << " (" << n.id << ", hop=" << n.hop_distance << ") ["
        << to_string(n.cognitive_state) << "]\n";
    if (n.unreachable) out << "- flagged unreachable\n";
    if (!n.type_constraint.empty()) out << "- type constraint: " << n.type_constraint << "\n";
    for (const auto& c : n.condition_constraints) out << "- condition: " << c << "\n";
    if (!n.core_pending.empty()) {
        out << "- pending core criteria:";
        for (const auto& c : n.core_pending) out << " [" << c << "]";
        out << "\n";
    }
    if (!n.supplementary_pending.empty()) {
        out << "- pending supplementary criteria:";
        for (const auto& c : n.supplementary_pending) out << " [" << c << "]";
        out << "\n";
    }
    for (const auto& item : n.discovered_items) out << "- discovered item: " << item << "\n";
    // Findings render as attribute coverage only; claim text stays out of the
    // planning context (quotes live in the evidence store).
    for (const auto& [item, attrs] : n.item_findings) {
        out << "- findings on " << item << ":";
        for (const auto& [attr, claims] : attrs)
            out << " " << attr << " (" << claims.size() << ")";
        out << "\n";
    }
    for (const auto& [label, claims] : n.cross_item_findings)
        out << "- cross-item finding: " << label << " (" << claims.size() << ")\n";
    const auto& q = n.quality_profile;
    if (q.mean_cr && q.mean_aap) {
        out << "- evidence quality: CR=" << *q.mean_cr << " AAP=" << *q.mean_aap
            << " (min CR=" << *q.min_cr << ", min AAP=" << *q.min_aap << ")\n";
    }
    out << "- finding strength: " << to_string(q.finding_strength)
        << ", unexpected: " << to_string(q.unexpected_strength) << "\n";
    for (auto b : q.accessibility_barriers) out << "- access barrier: " << to_string(b) << "\n";
    for (const auto& c : n.contradictions)
        out << "- contradiction on [" << c.criterion << "]: " << c.resolution << "\n";
    // Keep the unexpected-discovery tail short so the view stays linear in
    // the frontier, not in the full observation history.
    const std::size_t tail = 3;
    std::size_t start = n.unexpected_discoveries.size() > tail
                            ? n.unexpected_discoveries.size() - tail
                            : 0;
    for (std::size_t i = start; i < n.unexpected_discoveries.size(); ++i)
        out << "- unexpected: " << n.unexpected_discoveries[i] << "\n";
    if (!n.temporal_notes.empty()) out << "- temporal notes: " << n.temporal_notes << "\n";
    for (const auto& e : n.search_experience) out << "- search experience: " << e << "\n";
}

inline void render_edge(std::ostringstream& out, const RelationEdge& e, bool with_history) {
    out << "- " << e.id << ": " << e.source << " -> " << e.target << " — " << e.inquiry_goal
        << " (attempts " << e.attempt_count << "/" << kMaxAttempts << ")\n";
    if (!e.core_criteria.empty()) {
        out << "  criteria:";
        for (const auto& c : e.core_criteria) out << " [" << c << "]";
        out << "\n";
    }
    if (e.task_type == TaskType::Specified && e.specified_source)
        out << "  specified source: " << *e.specified_source << "\n";
    if (with_history) {
        for (const auto& h : e.search_history) {
            out << "  attempt: query=\"" << h.query << "\" — " << h.summary;
            if (!h.planner_feedback.empty()) out << " (feedback: " << h.planner_feedback << ")";
            out << "\n";
        }
    }
}

}  // namespace detail

/// Renders the graph into the Markdown planning context. Per-node summaries
/// expose coverage and quality, never verbatim quotes; search history is
/// shown only for edges still under investigation.
inline std::string compile_planner_view(const CognitiveGraph& g) {
    std::ostringstream out;
    out << "# Current Cognitive Graph State\n\n";
    out << "Structure: " << to_string(g.structure_type) << "\n\n";
    out << "## Concepts\n\n";
    for (const auto& [id, n] : g.nodes) detail::render_node(out, n);

    auto group = [&](EdgeStatus st, const char* title, bool with_history) {
        bool any = false;
        for (const auto& [id, e] : g.edges)
            if (e.status == st) any = true;
        if (!any) return;
        out << "\n## " << title << "\n\n";
        for (const auto& [id, e] : g.edges)
            if (e.status == st) detail::render_edge(out, e, with_history);
    };
    group(EdgeStatus::ToSolve, "To-solve inquiry goals", false);
    group(EdgeStatus::Investigating, "Under investigation", true);
    group(EdgeStatus::Solved, "Solved", false);
    group(EdgeStatus::Exhausted, "Exhausted", false);
    return out.str();
}

/// Ablation A4 rendering: concepts as a flat "research dimensions" list with
/// no relational structure and no hop distances.
inline std::string compile_flat_view(const CognitiveGraph& g) {
    std::ostringstream out;
    out << "# Research Dimensions\n\n";
    for (const auto& [id, n] : g.nodes) {
        out << "- " << n.name << " (" << n.id << ") [" << to_string(n.cognitive_state) << "]";
        if (!n.core_pending.empty()) {
            out << " pending:";
            for (const auto& c : n.core_pending) out << " [" << c << "]";
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace cograph
