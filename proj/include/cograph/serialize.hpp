#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "cograph/errors.hpp"
#include "cograph/graph.hpp"

namespace cograph {

using json = nlohmann::json;

inline constexpr int kSnapshotSchemaVersion = 1;

inline CognitiveState state_from_string(const std::string& s) {
    if (s == "START") return CognitiveState::Start;
    if (s == "UNKNOWN") return CognitiveState::Unknown;
    if (s == "PARTIAL") return CognitiveState::Partial;
    if (s == "KNOWN") return CognitiveState::Known;
    throw GraphStructureError("bad cognitive state: " + s);
}

inline EdgeStatus edge_status_from_string(const std::string& s) {
    if (s == "to_solve") return EdgeStatus::ToSolve;
    if (s == "investigating") return EdgeStatus::Investigating;
    if (s == "solved") return EdgeStatus::Solved;
    if (s == "exhausted") return EdgeStatus::Exhausted;
    throw GraphStructureError("bad edge status: " + s);
}

inline Strength strength_from_string(const std::string& s) {
    if (s == "none") return Strength::None;
    if (s == "weak") return Strength::Weak;
    if (s == "moderate") return Strength::Moderate;
    if (s == "strong") return Strength::Strong;
    throw GraphStructureError("bad strength: " + s);
}

inline Barrier barrier_from_string(const std::string& s) {
    if (s == "paywall") return Barrier::Paywall;
    if (s == "login_required") return Barrier::LoginRequired;
    if (s == "requires_download") return Barrier::RequiresDownload;
    if (s == "dynamic_load") return Barrier::DynamicLoad;
    throw GraphStructureError("bad barrier: " + s);
}

inline const char* to_string(NodeType t) {
    switch (t) {
        case NodeType::Start: return "start";
        case NodeType::Placeholder: return "placeholder";
        case NodeType::Discovered: return "discovered";
    }
    return "?";
}

inline NodeType node_type_from_string(const std::string& s) {
    if (s == "start") return NodeType::Start;
    if (s == "placeholder") return NodeType::Placeholder;
    if (s == "discovered") return NodeType::Discovered;
    throw GraphStructureError("bad node type: " + s);
}

inline const char* to_string(StructureType t) {
    switch (t) {
        case StructureType::Serial: return "serial";
        case StructureType::Parallel: return "parallel";
        case StructureType::Convergence: return "convergence";
        case StructureType::Mixed: return "mixed";
    }
    return "?";
}

inline StructureType structure_type_from_string(const std::string& s) {
    if (s == "serial") return StructureType::Serial;
    if (s == "parallel") return StructureType::Parallel;
    if (s == "convergence") return StructureType::Convergence;
    if (s == "mixed") return StructureType::Mixed;
    throw GraphStructureError("bad structure type: " + s);
}

inline json to_json(const QualityProfile& q) {
    json j;
    if (q.mean_cr) j["mean_cr"] = *q.mean_cr;
    if (q.mean_aap) j["mean_aap"] = *q.mean_aap;
    if (q.min_cr) j["min_cr"] = *q.min_cr;
    if (q.min_aap) j["min_aap"] = *q.min_aap;
    j["finding_strength"] = to_string(q.finding_strength);
    j["unexpected_strength"] = to_string(q.unexpected_strength);
    json barriers = json::array();
    for (auto b : q.accessibility_barriers) barriers.push_back(to_string(b));
    j["accessibility_barriers"] = barriers;
    json window = json::array();
    for (const auto& [cr, aap] : q.page_window) window.push_back({cr, aap});
    j["page_window"] = window;
    return j;
}

inline QualityProfile quality_profile_from_json(const json& j) {
    QualityProfile q;
    q.finding_strength = strength_from_string(j.value("finding_strength", "none"));
    q.unexpected_strength = strength_from_string(j.value("unexpected_strength", "none"));
    for (const auto& b : j.value("accessibility_barriers", json::array()))
        q.accessibility_barriers.push_back(barrier_from_string(b.get<std::string>()));
    for (const auto& p : j.value("page_window", json::array()))
        q.page_window.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    q.recompute();
    return q;
}

inline json to_json(const ConceptNode& n) {
    json j;
    j["id"] = n.id;
    j["name"] = n.name;
    j["node_type"] = to_string(n.node_type);
    j["hop_distance"] = n.hop_distance;
    if (n.discovery_dependency)
        j["discovery_dependency"] = *n.discovery_dependency;
    j["type_constraint"] = n.type_constraint;
    j["condition_constraints"] = n.condition_constraints;
    j["core_criteria"] = n.core_criteria;
    j["supplementary_criteria"] = n.supplementary_criteria;
    j["core_pending"] = n.core_pending;
    j["supplementary_pending"] = n.supplementary_pending;
    j["discovered_items"] = n.discovered_items;
    j["item_findings"] = n.item_findings;
    j["cross_item_findings"] = n.cross_item_findings;
    j["cognitive_state"] = to_string(n.cognitive_state);
    j["quality_profile"] = to_json(n.quality_profile);
    json contras = json::array();
    for (const auto& c : n.contradictions) {
        contras.push_back({{"criterion", c.criterion},
                           {"old_claim", c.old_claim},
                           {"new_claim", c.new_claim},
                           {"resolution", c.resolution},
                           {"kept", c.kept == ContradictionRecord::Kept::New ? "new" : "old"}});
    }
    j["contradictions"] = contras;
    j["unexpected_discoveries"] = n.unexpected_discoveries;
    j["temporal_notes"] = n.temporal_notes;
    j["search_experience"] = n.search_experience;
    j["related_tasks"] = n.related_tasks;
    j["cited_refs"] = n.cited_refs;
    return j;
}

inline ConceptNode node_from_json(const json& j) {
    ConceptNode n;
    n.id = j.at("id").get<std::string>();
    n.name = j.value("name", "");
    n.node_type = node_type_from_string(j.value("node_type", "placeholder"));
    n.hop_distance = j.value("hop_distance", 0);
    if (j.contains("discovery_dependency"))
        n.discovery_dependency = j.at("discovery_dependency").get<std::set<NodeId>>();
    n.type_constraint = j.value("type_constraint", "");
    n.condition_constraints = j.value("condition_constraints", std::vector<std::string>{});
    n.core_criteria = j.value("core_criteria", std::vector<std::string>{});
    n.supplementary_criteria = j.value("supplementary_criteria", std::vector<std::string>{});
    n.core_pending = j.value("core_pending", n.core_criteria);
    n.supplementary_pending =
        j.value("supplementary_pending", n.supplementary_criteria);
    if (j.contains("discovered_items"))
        n.discovered_items = j.at("discovered_items").get<std::set<std::string>>();
    if (j.contains("item_findings"))
        n.item_findings = j.at("item_findings")
                              .get<std::map<std::string,
                                            std::map<std::string, std::vector<std::string>>>>();
    if (j.contains("cross_item_findings"))
        n.cross_item_findings =
            j.at("cross_item_findings").get<std::map<std::string, std::vector<std::string>>>();
    if (j.contains("cognitive_state"))
        n.cognitive_state = state_from_string(j.at("cognitive_state").get<std::string>());
    else
        n.cognitive_state = compute_state(n.core_pending, n.findings_nonempty());
    if (j.contains("quality_profile"))
        n.quality_profile = quality_profile_from_json(j.at("quality_profile"));
    for (const auto& c : j.value("contradictions", json::array())) {
        ContradictionRecord r;
        r.criterion = c.value("criterion", "");
        r.old_claim = c.value("old_claim", "");
        r.new_claim = c.value("new_claim", "");
        r.resolution = c.value("resolution", "");
        r.kept = c.value("kept", "new") == std::string("old")
                     ? ContradictionRecord::Kept::Old
                     : ContradictionRecord::Kept::New;
        n.contradictions.push_back(std::move(r));
    }
    n.unexpected_discoveries = j.value("unexpected_discoveries", std::vector<std::string>{});
    n.temporal_notes = j.value("temporal_notes", "");
    n.search_experience = j.value("search_experience", std::vector<std::string>{});
    if (j.contains("related_tasks"))
        n.related_tasks = j.at("related_tasks").get<std::set<TaskId>>();
    if (j.contains("cited_refs")) n.cited_refs = j.at("cited_refs").get<std::set<int>>();
    return n;
}

inline json to_json(const RelationEdge& e) {
    json j;
    j["id"] = e.id;
    j["source"] = e.source;
    j["target"] = e.target;
    j["inquiry_goal"] = e.inquiry_goal;
    j["core_criteria"] = e.core_criteria;
    j["supplementary_criteria"] = e.supplementary_criteria;
    j["task_type"] = e.task_type == TaskType::Specified ? "specified" : "open";
    if (e.specified_source) j["specified_source"] = *e.specified_source;
    j["attempt_count"] = e.attempt_count;
    j["status"] = to_string(e.status);
    json hist = json::array();
    for (const auto& h : e.search_history)
        hist.push_back({{"query", h.query},
                        {"summary", h.summary},
                        {"planner_feedback", h.planner_feedback}});
    j["search_history"] = hist;
    return j;
}

inline RelationEdge edge_from_json(const json& j) {
    RelationEdge e;
    e.id = j.at("id").get<std::string>();
    e.source = j.at("source").get<std::string>();
    e.target = j.at("target").get<std::string>();
    e.inquiry_goal = j.value("inquiry_goal", "");
    e.core_criteria = j.value("core_criteria", std::vector<std::string>{});
    e.supplementary_criteria = j.value("supplementary_criteria", std::vector<std::string>{});
    e.task_type = j.value("task_type", "open") == std::string("specified")
                      ? TaskType::Specified
                      : TaskType::Open;
    if (j.contains("specified_source"))
        e.specified_source = j.at("specified_source").get<std::string>();
    e.attempt_count = j.value("attempt_count", 0);
    e.status = edge_status_from_string(j.value("status", "to_solve"));
    for (const auto& h : j.value("search_history", json::array())) {
        SearchHistoryEntry s;
        s.query = h.value("query", "");
        s.summary = h.value("summary", "");
        s.planner_feedback = h.value("planner_feedback", "");
        e.search_history.push_back(std::move(s));
    }
    return e;
}

inline json to_json(const CognitiveGraph& g) {
    json j;
    j["schema_version"] = kSnapshotSchemaVersion;
    j["structure_type"] = to_string(g.structure_type);
    j["user_protected"] = g.user_protected;
    j["root_ids"] = g.root_ids;
    json nodes = json::array();
    for (const auto& [id, n] : g.nodes) nodes.push_back(to_json(n));
    j["nodes"] = nodes;
    json edges = json::array();
    for (const auto& [id, e] : g.edges) edges.push_back(to_json(e));
    j["edges"] = edges;
    return j;
}

inline CognitiveGraph graph_from_json(const json& j) {
    int ver = j.value("schema_version", 1);
    if (ver != kSnapshotSchemaVersion)
        throw GraphStructureError("unsupported snapshot schema version " +
                                  std::to_string(ver));
    CognitiveGraph g;
    g.structure_type = structure_type_from_string(j.value("structure_type", "mixed"));
    for (const auto& n : j.at("nodes")) g.add_node(node_from_json(n));
    for (const auto& e : j.at("edges")) g.add_edge(edge_from_json(e));
    if (j.contains("user_protected"))
        g.user_protected = j.at("user_protected").get<std::set<NodeId>>();
    if (j.contains("root_ids")) {
        for (const auto& r : j.at("root_ids").get<std::set<NodeId>>())
            g.root_ids.insert(r);
    }
    return g;
}

}  // namespace cograph
