#pragma once

#include <atomic>
#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "cograph/agents.hpp"
#include "cograph/assimilation.hpp"
#include "cograph/deviation.hpp"
#include "cograph/errors.hpp"
#include "cograph/evidence.hpp"
#include "cograph/graph.hpp"
#include "cograph/restructuring.hpp"
#include "cograph/view.hpp"
#include "cograph/writing.hpp"

namespace cograph {

inline constexpr const char* kDeadlineMessage =
    "soft deadline reached: call finish() to write the report";

// --- time ----------------------------------------------------------------------

struct Clock {
    virtual ~Clock() = default;
    virtual double minutes_elapsed() = 0;
};

struct SteadyClock : Clock {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double minutes_elapsed() override {
        return std::chrono::duration<double, std::ratio<60>>(
                   std::chrono::steady_clock::now() - start)
            .count();
    }
};

struct VirtualClock : Clock {
    double minutes = 0;
    double minutes_elapsed() override { return minutes; }
    void advance(double m) { minutes += m; }
};

// --- budgets & planner turns ----------------------------------------------------

struct RunBudget {
    double soft_deadline_minutes = 70;
    int max_turn = 20;
    int hard_multiplier = 3;
    int hard_ceiling() const { return hard_multiplier * max_turn; }
};

struct AblationFlags {
    bool a1 = false;  // deviation feedback disabled (no router)
    bool a2 = false;  // restructuring restricted to {Aug, Prune}
    bool a3 = false;  // assimilation bypassed: verbatim append
    bool a4 = false;  // flat list: no edges, no hops, ops {Aug, Prune}
    bool any() const { return a1 || a2 || a3 || a4; }
};

/// One planner turn: a batch of same-type actions (the three action types
/// stay mutually exclusive within a turn). Reflect is a deliberate no-action
/// turn; it still consumes an iteration.
struct PlannerTurn {
    enum class Kind { AddTasks, Restructure, Reflect, Finish } kind = Kind::Reflect;
    std::vector<SearchTask> tasks;
    RestructureIntent intent;
    std::vector<EditPrimitive> edits;
    std::string note;
};

struct Planner {
    virtual ~Planner() = default;
    virtual PlannerTurn next_turn(const std::string& rendered_view, int turn) = 0;
};

// --- finish guard ----------------------------------------------------------------

struct GuardVerdict {
    bool accepted = true;
    // offending node → its incoming edges
    std::vector<std::pair<NodeId, std::vector<EdgeId>>> offending;
};

/// Convergence guard: Finish is rejected while any node is still Unknown
/// (deadline-flagged protected nodes are exempt — they were retained
/// deliberately when the deadline fired).
inline GuardVerdict guard_finish(const CognitiveGraph& g) {
    GuardVerdict v;
    for (const auto& [id, n] : g.nodes) {
        if (n.cognitive_state != CognitiveState::Unknown || n.deadline_flagged) continue;
        v.accepted = false;
        v.offending.emplace_back(id, g.in_edges(id));
    }
    return v;
}

/// Soft-deadline convergence: removes remaining Unknown nodes (their
/// findings are empty by definition); user-protected Unknown nodes are
/// retained and flagged instead of deleted.
inline void enforce_soft_deadline(CognitiveGraph& g, ReconnectPolicy& policy) {
    CognitiveGraph snapshot = g;
    std::vector<NodeId> doomed;
    for (auto& [id, n] : g.nodes) {
        if (n.cognitive_state != CognitiveState::Unknown) continue;
        if (g.user_protected.count(id)) {
            n.deadline_flagged = true;
        } else if (!n.findings_nonempty()) {
            doomed.push_back(id);
        }
    }
    for (const auto& id : doomed) g.remove_node(id);
    repair_orphans(g, snapshot, policy);
    recompute_hops(g);
}

// --- trajectory log ---------------------------------------------------------------

struct TrajectoryLog {
    std::vector<nlohmann::json> events;

    void push(nlohmann::json e, double ts_minutes) {
        e["ts"] = ts_minutes;
        events.push_back(std::move(e));
    }

    void save_ndjson(const std::string& path) const {
        std::ofstream f(path);
        for (const auto& e : events) f << e.dump() << "\n";
    }

    static std::vector<nlohmann::json> load_ndjson(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw MalformedLog("cannot open trajectory log: " + path);
        std::vector<nlohmann::json> out;
        std::string line;
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            out.push_back(nlohmann::json::parse(line));
        }
        return out;
    }
};

namespace detail {

// Per-node finding-container digest for the append-only audit: container
// key → claim count.
inline nlohmann::json findings_digest(const CognitiveGraph& g) {
    nlohmann::json digest = nlohmann::json::object();
    for (const auto& [id, n] : g.nodes) {
        nlohmann::json keys = nlohmann::json::object();
        for (const auto& [item, attrs] : n.item_findings)
            for (const auto& [attr, claims] : attrs)
                keys[item + "/" + attr] = claims.size();
        for (const auto& [label, claims] : n.cross_item_findings)
            keys["*/" + label] = claims.size();
        digest[id] = keys;
    }
    return digest;
}

}  // namespace detail

// --- engine -----------------------------------------------------------------------

using ReportPipeline = std::function<std::string(const CognitiveGraph&, const EvidenceStore&,
                                                 WritingLog&)>;

struct RunResult {
    std::string report;
    CognitiveGraph final_graph;
    int iterations = 0;
    bool deadline_fired = false;
    bool hard_ceiling_hit = false;
};

class Engine {
  public:
    Engine(CognitiveGraph initial, Planner& planner, TaskRunner& runner, Judger& judger,
           ReconnectPolicy& reconnect, Clock& clock, ReportPipeline pipeline)
        : graph_(std::move(initial)),
          planner_(planner),
          runner_(runner),
          judger_(judger),
          reconnect_(reconnect),
          clock_(clock),
          pipeline_(std::move(pipeline)) {}

    RunBudget budget;
    AblationFlags ablation;
    int worker_cap = 4;

    CognitiveGraph& graph() { return graph_; }
    const CognitiveGraph& graph() const { return graph_; }
    EvidenceStore& store() { return store_; }
    const EvidenceStore& store() const { return store_; }
    TrajectoryLog& log() { return log_; }
    const TrajectoryLog& log() const { return log_; }
    WritingLog& writing_log() { return writing_log_; }
    int intercepted_restructures() const { return intercepted_; }

    bool past_deadline() { return clock_.minutes_elapsed() >= budget.soft_deadline_minutes; }

    /// Compiles the searcher's local context: task spec + target node
    /// summary + direct upstream neighbours only (depth 1, never the full
    /// graph).
    std::string local_context(const SearchTask& task) const {
        std::ostringstream out;
        out << "Task: " << task.goal << "\n";
        if (!graph_.has_node(task.target_node)) return out.str();
        const auto& target = graph_.node(task.target_node);
        out << "Target: " << target.name << " [" << to_string(target.cognitive_state)
            << "]\n";
        for (const auto& c : target.core_pending) out << "- pending: " << c << "\n";
        for (const auto& eid : graph_.in_edges(task.target_node)) {
            const auto& e = graph_.edge(eid);
            const auto& parent = graph_.node(e.source);
            out << "Upstream " << parent.name << ":";
            for (const auto& [item, attrs] : parent.item_findings)
                out << " " << item;
            out << "\n";
        }
        return out.str();
    }

    /// Runs the whole dynamics loop to a report.
    RunResult run() {
        RunResult result;
        int turn = 0;
        while (true) {
            if (result.iterations >= budget.hard_ceiling()) {
                result.hard_ceiling_hit = true;
                log_.push({{"turn", turn}, {"type", "hard_ceiling"}},
                          clock_.minutes_elapsed());
                enforce_deadline_now(turn, result);
                result.report = write_report();
                break;
            }
            ++turn;
            ++result.iterations;
            std::string view =
                ablation.a4 ? compile_flat_view(graph_) : compile_planner_view(graph_);
            PlannerTurn pt = planner_.next_turn(view, turn);
            if (pt.kind == PlannerTurn::Kind::Finish) {
                auto verdict = guard_finish(graph_);
                log_guard(turn, verdict);
                if (verdict.accepted) {
                    result.report = write_report();
                    break;
                }
                continue;
            }
            try {
                step(turn, pt, result);
            } catch (const DeadlineSearchRejected&) {
                log_.push({{"turn", turn},
                           {"type", "deadline"},
                           {"message", kDeadlineMessage}},
                          clock_.minutes_elapsed());
                enforce_deadline_now(turn, result);
            }
        }
        result.final_graph = graph_;
        return result;
    }

    /// Applies one planner turn. Exactly one of structural-change /
    /// content-change happens per committed step.
    void step(int turn, const PlannerTurn& pt, RunResult& result) {
        switch (pt.kind) {
            case PlannerTurn::Kind::Reflect:
                log_.push({{"turn", turn}, {"type", "reflect"}, {"note", pt.note}},
                          clock_.minutes_elapsed());
                return;
            case PlannerTurn::Kind::AddTasks: {
                if (past_deadline() || turn > budget.max_turn)
                    throw DeadlineSearchRejected(kDeadlineMessage);
                run_tasks(turn, pt.tasks);
                return;
            }
            case PlannerTurn::Kind::Restructure: {
                if ((ablation.a2 || ablation.a4) && pt.intent.op_type != OpType::Aug &&
                    pt.intent.op_type != OpType::Prune) {
                    ++intercepted_;
                    log_.push({{"turn", turn},
                               {"type", "restructure_intercepted"},
                               {"op", to_string(pt.intent.op_type)}},
                              clock_.minutes_elapsed());
                    return;
                }
                auto report = restructure(pt.intent, pt.edits, graph_, reconnect_);
                nlohmann::json e = {{"turn", turn},
                                    {"type", "restructure"},
                                    {"op_type", to_string(report.op_type)},
                                    {"added", report.added},
                                    {"removed", report.removed},
                                    {"violations", report.violations},
                                    {"rounds", report.rounds},
                                    {"rolled_back", report.rolled_back}};
                if (report.refusal)
                    e["refusal"] = {{"reason", to_string(report.refusal->reason)},
                                    {"detail", report.refusal->detail}};
                e["findings_digest"] = detail::findings_digest(graph_);
                log_.push(std::move(e), clock_.minutes_elapsed());
                return;
            }
            case PlannerTurn::Kind::Finish:
                return;  // handled by run()
        }
    }

    /// Dispatches a batch of tasks across up to worker_cap threads; each
    /// searcher sees only its local context. Observations are committed
    /// one at a time, in dispatch order, on this (the commit) context.
    void run_tasks(int turn, std::vector<SearchTask> tasks) {
        for (auto& task : tasks) {
            task.node_content = local_context(task);
            auto& e = graph_.edge(task.edge_id);
            e = edge_transition(e, EdgeEvent::Dispatched, CognitiveState::Unknown);
            log_.push({{"turn", turn},
                       {"type", "add_task"},
                       {"task", task.id},
                       {"edge", task.edge_id},
                       {"target", task.target_node}},
                      clock_.minutes_elapsed());
        }
        std::vector<std::optional<Observation>> results(tasks.size());
        std::vector<std::string> failures(tasks.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= tasks.size()) return;
                try {
                    results[i] = runner_.run(tasks[i]);
                } catch (const FixtureMiss& err) {
                    failures[i] = std::string("fixture_miss:") + err.what();
                } catch (const std::exception& err) {
                    Observation obs;
                    obs.task_id = tasks[i].id;
                    obs.target_node = tasks[i].target_node;
                    obs.edge_id = tasks[i].edge_id;
                    obs.search_experience.push_back(std::string("task failed: ") +
                                                    err.what());
                    results[i] = std::move(obs);
                }
            }
        };
        std::vector<std::thread> pool;
        std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(worker_cap),
                                              tasks.size());
        for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            if (!results[i]) {
                if (!failures[i].empty() && failures[i].rfind("fixture_miss:", 0) == 0)
                    throw FixtureMiss(failures[i].substr(13));
                continue;
            }
            commit(turn, tasks[i], *results[i]);
        }
    }

    /// Commits one observation: assimilation, edge close, deviation signal,
    /// strategy routing, and the trajectory commit event.
    void commit(int turn, const SearchTask& task, Observation obs) {
        auto remap = store_.insert_batch(task.id, obs.pending_evidence);
        obs.summary = remap_markers(obs.summary, remap);
        UpdateSet updates = ablation.a3 ? append_verbatim(graph_, obs)
                                        : assimilate(graph_, obs, judger_);
        auto& edge = graph_.edge(task.edge_id);
        const auto& target = graph_.node(obs.target_node);
        edge.search_history.push_back({task.goal, obs.summary, ""});
        edge = edge_transition(edge, EdgeEvent::TaskClosed, target.cognitive_state);

        nlohmann::json e = {{"turn", turn},
                            {"type", "commit"},
                            {"task", task.id},
                            {"edge", task.edge_id},
                            {"target", obs.target_node},
                            {"target_state", to_string(target.cognitive_state)},
                            {"edge_status", to_string(edge.status)},
                            {"findings", obs.findings.size()}};
        if (!ablation.a1 && !ablation.a3) {
            auto delta = deviation_from_profile(target.quality_profile);
            e["delta"] = {{"mean_cr", delta.mean_cr},
                          {"mean_aap", delta.mean_aap},
                          {"phi", delta.phi},
                          {"psi", to_string(delta.psi)}};
            e["strategy"] = to_string(select_strategy(delta));
            e["quality_gap"] = quality_gap(delta);
        }
        nlohmann::json touched = nlohmann::json::array();
        for (const auto& u : updates.entries) touched.push_back(u.node);
        e["touched"] = touched;
        e["findings_digest"] = detail::findings_digest(graph_);
        log_.push(std::move(e), clock_.minutes_elapsed());
    }

  private:
    void enforce_deadline_now(int turn, RunResult& result) {
        if (result.deadline_fired) return;
        result.deadline_fired = true;
        enforce_soft_deadline(graph_, reconnect_);
        log_.push({{"turn", turn}, {"type", "deadline_enforced"}},
                  clock_.minutes_elapsed());
    }

    void log_guard(int turn, const GuardVerdict& v) {
        nlohmann::json offending = nlohmann::json::array();
        for (const auto& [node, edges] : v.offending)
            offending.push_back({{"node", node}, {"incoming", edges}});
        log_.push({{"turn", turn},
                   {"type", "finish_guard"},
                   {"accepted", v.accepted},
                   {"offending", offending}},
                  clock_.minutes_elapsed());
    }

    std::string write_report() {
        std::string report = pipeline_(graph_, store_, writing_log_);
        log_.push({{"turn", 0}, {"type", "report_written"}, {"chars", report.size()}},
                  clock_.minutes_elapsed());
        return report;
    }

    CognitiveGraph graph_;
    EvidenceStore store_;
    Planner& planner_;
    TaskRunner& runner_;
    Judger& judger_;
    ReconnectPolicy& reconnect_;
    Clock& clock_;
    ReportPipeline pipeline_;
    TrajectoryLog log_;
    WritingLog writing_log_;
    int intercepted_ = 0;
};

}  // namespace cograph
