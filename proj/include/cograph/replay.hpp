#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cograph/agents.hpp"
#include "cograph/errors.hpp"
#include "cograph/orchestrator.hpp"
#include "cograph/restructuring.hpp"
#include "cograph/serialize.hpp"
#include "cograph/writing.hpp"

namespace cograph {

// --- fixture parsing -------------------------------------------------------------

inline EditPrimitive edit_from_json(const nlohmann::json& j) {
    auto op = j.at("op").get<std::string>();
    if (op == "add_node") return AddNodeEdit{node_from_json(j.at("node"))};
    if (op == "add_edge") return AddEdgeEdit{edge_from_json(j.at("edge"))};
    if (op == "remove_node") return RemoveNodeEdit{j.at("node").get<std::string>()};
    if (op == "modify_node") {
        ModifyNodeEdit e;
        e.node = j.at("node").get<std::string>();
        if (j.contains("name")) e.name = j.at("name").get<std::string>();
        if (j.contains("core_criteria"))
            e.core_criteria = j.at("core_criteria").get<std::vector<std::string>>();
        if (j.contains("supplementary_criteria"))
            e.supplementary_criteria =
                j.at("supplementary_criteria").get<std::vector<std::string>>();
        if (j.contains("remove_items"))
            e.remove_items = j.at("remove_items").get<std::set<std::string>>();
        return e;
    }
    if (op == "modify_edge") {
        ModifyEdgeEdit e;
        e.edge = j.at("edge").get<std::string>();
        if (j.contains("inquiry_goal")) e.inquiry_goal = j.at("inquiry_goal").get<std::string>();
        if (j.contains("core_criteria"))
            e.core_criteria = j.at("core_criteria").get<std::vector<std::string>>();
        if (j.contains("supplementary_criteria"))
            e.supplementary_criteria =
                j.at("supplementary_criteria").get<std::vector<std::string>>();
        return e;
    }
    throw MalformedLog("unknown edit op: " + op);
}

inline OpType op_type_from_string(const std::string& s) {
    if (s == "conc") return OpType::Conc;
    if (s == "aug") return OpType::Aug;
    if (s == "pivot") return OpType::Pivot;
    if (s == "prune") return OpType::Prune;
    if (s == "correct") return OpType::Correct;
    throw MalformedLog("unknown op_type: " + s);
}

inline SearchTask task_from_json(const nlohmann::json& j) {
    SearchTask t;
    t.id = j.at("id").get<std::string>();
    t.edge_id = j.at("edge_id").get<std::string>();
    t.target_node = j.at("target_node").get<std::string>();
    t.node_name = j.value("node_name", "");
    t.goal = j.value("goal", "");
    t.is_verification = j.value("is_verification", false);
    t.core_criteria = j.value("core_criteria", std::vector<std::string>{});
    t.supplementary_criteria = j.value("supplementary_criteria", std::vector<std::string>{});
    t.task_type =
        j.value("task_type", "open") == std::string("specified") ? TaskType::Specified
                                                                 : TaskType::Open;
    if (j.contains("specified_source"))
        t.specified_source = j.at("specified_source").get<std::string>();
    return t;
}

inline PlannerTurn turn_from_json(const nlohmann::json& j) {
    PlannerTurn pt;
    auto type = j.at("type").get<std::string>();
    if (type == "add_tasks") {
        pt.kind = PlannerTurn::Kind::AddTasks;
        for (const auto& t : j.at("tasks")) pt.tasks.push_back(task_from_json(t));
    } else if (type == "restructure") {
        pt.kind = PlannerTurn::Kind::Restructure;
        const auto& intent = j.at("intent");
        pt.intent.op_type = op_type_from_string(intent.at("op_type").get<std::string>());
        pt.intent.rationale = intent.value("rationale", "");
        if (intent.contains("focus_node"))
            pt.intent.focus_node = intent.at("focus_node").get<std::string>();
        for (const auto& e : j.value("edits", nlohmann::json::array()))
            pt.edits.push_back(edit_from_json(e));
    } else if (type == "reflect") {
        pt.kind = PlannerTurn::Kind::Reflect;
        pt.note = j.value("note", "");
    } else if (type == "finish") {
        pt.kind = PlannerTurn::Kind::Finish;
    } else {
        throw MalformedLog("unknown planner turn type: " + type);
    }
    return pt;
}

/// Declarative scripted planner: the fixture lists one action batch per turn.
class ScriptedPlanner : public Planner {
  public:
    explicit ScriptedPlanner(std::vector<PlannerTurn> turns) : turns_(std::move(turns)) {}

    static ScriptedPlanner from_file(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw FixtureMiss("cannot open plan fixture: " + path);
        nlohmann::json j = nlohmann::json::parse(f);
        std::vector<PlannerTurn> turns;
        for (const auto& t : j.at("turns")) turns.push_back(turn_from_json(t));
        return ScriptedPlanner(std::move(turns));
    }

    PlannerTurn next_turn(const std::string& rendered_view, int turn) override {
        views_.push_back(rendered_view);
        if (next_ >= turns_.size())
            throw FixtureMiss("plan fixture exhausted at turn " + std::to_string(turn));
        return turns_[next_++];
    }

    const std::vector<std::string>& views() const { return views_; }

  private:
    std::vector<PlannerTurn> turns_;
    std::size_t next_ = 0;
    std::vector<std::string> views_;
};

// --- scripted writing pipeline -----------------------------------------------------

inline OutlineSection section_from_json(const nlohmann::json& j) {
    OutlineSection s;
    s.section_id = j.at("section_id").get<int>();
    s.title = j.value("title", "");
    s.description = j.value("description", "");
    s.answers_aspect = j.value("answers_aspect", "");
    s.relevant_node_ids = j.at("relevant_node_ids").get<std::set<NodeId>>();
    return s;
}

inline Insight insight_from_json(const nlohmann::json& j) {
    Insight i;
    i.claim = j.at("claim").get<std::string>();
    i.evidence_ids = j.at("evidence_ids").get<std::set<int>>();
    if (j.contains("presentation_hint")) {
        auto h = j.at("presentation_hint").get<std::string>();
        if (h == "table") i.presentation_hint = PresentationHint::Table;
        else if (h == "list") i.presentation_hint = PresentationHint::List;
        else if (h == "comparison") i.presentation_hint = PresentationHint::Comparison;
        else i.presentation_hint = PresentationHint::Narrative;
    }
    return i;
}

/// Builds the three-layer pipeline over a writing fixture: the outline,
/// per-section insight plans, and per-section prose all come from the
/// bundle; validation, information narrowing, and the citation filter run
/// exactly as in real mode.
inline ReportPipeline scripted_pipeline(nlohmann::json writing_fixture) {
    return [writing_fixture](const CognitiveGraph& g, const EvidenceStore& store,
                             WritingLog& log) -> std::string {
        OutlineProvider outline_provider = [&](const std::string&) {
            std::vector<OutlineSection> out;
            for (const auto& s : writing_fixture.at("outline")) out.push_back(section_from_json(s));
            return out;
        };
        auto sections = plan_outline(g, store, outline_provider, log);

        std::vector<SectionText> texts;
        std::vector<std::string> prior_claims;
        std::string report_so_far;
        for (const auto& section : sections) {
            auto index = store.section_index(g, section.relevant_node_ids);
            std::string key = std::to_string(section.section_id);
            SectionPlanProvider plan_provider = [&](const std::string&) {
                std::vector<Insight> out;
                const auto& plans = writing_fixture.at("plans");
                if (!plans.contains(key))
                    throw FixtureMiss("no section plan for section " + key);
                for (const auto& i : plans.at(key)) out.push_back(insight_from_json(i));
                return out;
            };
            auto insights = plan_section(section, index, prior_claims, plan_provider, log);
            for (const auto& i : insights) prior_claims.push_back(i.claim);

            SectionWriteProvider write_provider = [&](const std::string&) -> std::string {
                const auto& prose = writing_fixture.at("prose");
                if (!prose.contains(key))
                    throw FixtureMiss("no section prose for section " + key);
                return prose.at(key).get<std::string>();
            };
            auto text = write_section(section, insights, store, report_so_far,
                                      write_provider, log);
            report_so_far += text.prose + "\n";
            texts.push_back(std::move(text));
        }
        return assemble_report(texts, store, log);
    };
}

/// Loads a JSON file from a fixture bundle directory.
inline nlohmann::json load_fixture_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw FixtureMiss("cannot open fixture: " + path);
    return nlohmann::json::parse(f);
}

// --- scripted end-to-end wiring ------------------------------------------------

/// Owns everything a scripted run needs; keeps the engine's collaborators
/// alive for post-run inspection in tests and the CLI.
struct ScriptedRun {
    std::unique_ptr<ScriptedPlanner> planner;
    std::unique_ptr<ScriptedTaskRunner> runner;
    ScriptedJudger judger;
    NearestAncestorPolicy reconnect;
    VirtualClock clock;
    std::unique_ptr<Engine> engine;
    RunResult result;
};

/// Wires a scripted engine from a fixture bundle directory containing
/// graph.json, plan.json, writing.json, and observations/<task>.json.
inline std::unique_ptr<ScriptedRun> make_scripted_run(const std::string& fixture_dir,
                                                      const RunBudget& budget,
                                                      const AblationFlags& ablation,
                                                      int worker_cap = 4) {
    auto run = std::make_unique<ScriptedRun>();
    auto graph = graph_from_json(load_fixture_json(fixture_dir + "/graph.json"));
    recompute_hops(graph);
    run->planner = std::make_unique<ScriptedPlanner>(
        ScriptedPlanner::from_file(fixture_dir + "/plan.json"));
    run->runner = std::make_unique<ScriptedTaskRunner>(fixture_dir);
    auto pipeline = scripted_pipeline(load_fixture_json(fixture_dir + "/writing.json"));
    run->engine = std::make_unique<Engine>(std::move(graph), *run->planner, *run->runner,
                                           run->judger, run->reconnect, run->clock,
                                           std::move(pipeline));
    run->engine->budget = budget;
    run->engine->ablation = ablation;
    run->engine->worker_cap = worker_cap;
    return run;
}

}  // namespace cograph
