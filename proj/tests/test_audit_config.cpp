#include <doctest.h>

#include <cstdlib>

#include <cograph/audit.hpp>
#include <cograph/config.hpp>

using namespace cograph;

namespace {

nlohmann::json digest(std::map<std::string, std::map<std::string, int>> d) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [node, keys] : d) {
        nlohmann::json k = nlohmann::json::object();
        for (const auto& [key, count] : keys) k[key] = count;
        out[node] = k;
    }
    return out;
}

// A minimal healthy trajectory: one commit growing a container, then a
// restructure that removes a node.
std::vector<nlohmann::json> healthy() {
    return {
        {{"turn", 1}, {"type", "add_task"}, {"task", "t1"}},
        {{"turn", 1},
         {"type", "commit"},
         {"task", "t1"},
         {"findings_digest", digest({{"s", {}}, {"a", {{"X/c1", 1}}}, {"b", {}}})}},
        {{"turn", 2},
         {"type", "restructure"},
         {"op_type", "prune"},
         {"added", 0},
         {"removed", 1},
         {"violations", 0},
         {"rolled_back", false},
         {"findings_digest", digest({{"s", {}}, {"a", {{"X/c1", 1}}}})}},
        {{"turn", 3}, {"type", "finish_guard"}, {"accepted", true}},
    };
}

}  // namespace

TEST_CASE("a healthy trajectory passes the audit") {
    CHECK_NOTHROW(audit_trajectory(healthy(), {"s"}, 60));
}

TEST_CASE("audit catches shrinking finding containers") {
    auto events = healthy();
    events.push_back({{"turn", 4},
                      {"type", "commit"},
                      {"task", "t2"},
                      {"findings_digest", digest({{"s", {}}, {"a", {{"X/c1", 0}}}})}});
    CHECK_THROWS_WITH_AS(audit_trajectory(events, {"s"}, 60),
                         doctest::Contains("I1"), AuditFailure);
}

TEST_CASE("audit catches node loss outside restructures") {
    auto events = healthy();
    events.push_back({{"turn", 4},
                      {"type", "commit"},
                      {"task", "t2"},
                      {"findings_digest", digest({{"s", {}}})}});
    CHECK_THROWS_WITH_AS(audit_trajectory(events, {"s"}, 60),
                         doctest::Contains("I1"), AuditFailure);
    // the same removal on a restructure step is legal
    auto ok = healthy();
    ok.push_back({{"turn", 4},
                  {"type", "restructure"},
                  {"op_type", "prune"},
                  {"findings_digest", digest({{"s", {}}})}});
    CHECK_NOTHROW(audit_trajectory(ok, {"s"}, 60));
}

TEST_CASE("audit catches a protected node missing from any digest") {
    CHECK_THROWS_WITH_AS(audit_trajectory(healthy(), {"s", "ghost"}, 60),
                         doctest::Contains("I2"), AuditFailure);
}

TEST_CASE("audit catches mixed structural and content mutations in one turn") {
    auto events = healthy();
    events.push_back({{"turn", 2},
                      {"type", "commit"},
                      {"task", "t9"},
                      {"findings_digest", digest({{"s", {}}, {"a", {{"X/c1", 1}}}})}});
    CHECK_THROWS_WITH_AS(audit_trajectory(events, {"s"}, 60),
                         doctest::Contains("exclusivity"), AuditFailure);
}

TEST_CASE("audit enforces the turn budget and the deadline search ban") {
    auto events = healthy();
    events.push_back({{"turn", 61}, {"type", "reflect"}});
    CHECK_THROWS_WITH_AS(audit_trajectory(events, {"s"}, 60),
                         doctest::Contains("budget"), AuditFailure);

    std::vector<nlohmann::json> late = {
        {{"turn", 1}, {"type", "deadline"}, {"message", kDeadlineMessage}},
        {{"turn", 2}, {"type", "add_task"}, {"task", "t1"}},
    };
    CHECK_THROWS_WITH_AS(audit_trajectory(late, {}, 60),
                         doctest::Contains("deadline"), AuditFailure);
}

TEST_CASE("inspect summarizes actions and counts search calls") {
    auto events = healthy();
    events.insert(events.begin() + 3,
                  nlohmann::json{{"turn", 3},
                                 {"type", "finish_guard"},
                                 {"accepted", false},
                                 {"offending", {{{"node", "b"}}}}});
    auto text = inspect_log(events);
    CHECK(text.find("search calls: 1") != std::string::npos);
    CHECK(text.find("guard rejections: 1") != std::string::npos);
    CHECK(text.find("added=0, removed=1, violations=0") != std::string::npos);
    CHECK(text.find("REJECTED b") != std::string::npos);

    auto filtered = inspect_log(events, "restructure");
    CHECK(filtered.find("add_task") == std::string::npos);
    CHECK(filtered.find("op=prune") != std::string::npos);
}

TEST_CASE("diff reports per-turn divergence only") {
    auto a = healthy();
    auto b = healthy();
    CHECK(diff_logs(a, b).empty());
    b[1]["task"] = "t9";
    auto d = diff_logs(a, b);
    CHECK(d.find("turn 1") != std::string::npos);
    CHECK(d.find("commit:t1") != std::string::npos);
    CHECK(d.find("commit:t9") != std::string::npos);
    CHECK(d.find("turn 2") == std::string::npos);
}

TEST_CASE("config round-trips through json") {
    RunConfig c;
    c.mode = BackendMode::Real;
    c.budget.soft_deadline_minutes = 45;
    c.budget.max_turn = 12;
    c.worker_cap = 2;
    c.ablation.a2 = true;
    c.fixture_dir = "fixtures/q53";
    c.chat_base_url = "http://localhost:9999";
    c.searcher_page_limit = 7;
    auto c2 = RunConfig::from_json(c.to_json());
    CHECK(c2.mode == BackendMode::Real);
    CHECK(c2.budget.soft_deadline_minutes == 45);
    CHECK(c2.budget.max_turn == 12);
    CHECK(c2.worker_cap == 2);
    CHECK(c2.ablation.a2);
    CHECK_FALSE(c2.ablation.a1);
    CHECK(c2.fixture_dir == "fixtures/q53");
    CHECK(c2.chat_base_url == "http://localhost:9999");
    CHECK(c2.searcher_page_limit == 7);
    CHECK(c2.to_json() == c.to_json());
}

TEST_CASE("a_full implies all four ablation flags") {
    auto c = RunConfig::from_json({{"ablation", {{"A_full", true}}}});
    CHECK(c.ablation.a1);
    CHECK(c.ablation.a2);
    CHECK(c.ablation.a3);
    CHECK(c.ablation.a4);
}

TEST_CASE("environment variables override file values") {
    setenv("COGRAPH_SOFT_DEADLINE_MINUTES", "33.5", 1);
    setenv("COGRAPH_MAX_TURN", "9", 1);
    setenv("COGRAPH_WORKER_CAP", "3", 1);
    setenv("COGRAPH_ABLATION", "13", 1);
    setenv("COGRAPH_CHAT_BASE_URL", "http://override:1234", 1);
    RunConfig c;
    c.apply_env_overrides();
    CHECK(c.budget.soft_deadline_minutes == doctest::Approx(33.5));
    CHECK(c.budget.max_turn == 9);
    CHECK(c.worker_cap == 3);
    CHECK(c.ablation.a1);
    CHECK_FALSE(c.ablation.a2);
    CHECK(c.ablation.a3);
    CHECK(c.chat_base_url == "http://override:1234");

    setenv("COGRAPH_ABLATION", "*", 1);
    RunConfig full;
    full.apply_env_overrides();
    CHECK(full.a_full);
    CHECK(full.ablation.a4);

    unsetenv("COGRAPH_SOFT_DEADLINE_MINUTES");
    unsetenv("COGRAPH_MAX_TURN");
    unsetenv("COGRAPH_WORKER_CAP");
    unsetenv("COGRAPH_ABLATION");
    unsetenv("COGRAPH_CHAT_BASE_URL");
}

TEST_CASE("apply_ablation wires flags and budget into the engine") {
    struct NullPlanner : Planner {
        PlannerTurn next_turn(const std::string&, int) override { return {}; }
    };
    struct NullRunner : TaskRunner {
        Observation run(const SearchTask&) override { return {}; }
    };
    CognitiveGraph g;
    ConceptNode s;
    s.id = "s";
    s.node_type = NodeType::Start;
    g.add_node(s);
    NullPlanner planner;
    NullRunner runner;
    ScriptedJudger judger;
    NearestAncestorPolicy reconnect;
    VirtualClock clock;
    Engine engine(g, planner, runner, judger, reconnect, clock,
                  [](const CognitiveGraph&, const EvidenceStore&, WritingLog&) {
                      return std::string();
                  });
    RunConfig c;
    c.ablation.a3 = true;
    c.budget.max_turn = 7;
    c.worker_cap = 1;
    apply_ablation(c, engine);
    CHECK(engine.ablation.a3);
    CHECK(engine.budget.max_turn == 7);
    CHECK(engine.budget.hard_ceiling() == 21);
    CHECK(engine.worker_cap == 1);
}
