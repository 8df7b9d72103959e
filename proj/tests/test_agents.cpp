#include <doctest.h>

#include <cograph/agents.hpp>

using namespace cograph;

TEST_CASE("whitespace normalization collapses runs and trims edges") {
    CHECK(normalize_whitespace("  a\n\tb   c ") == "a b c");
    CHECK(normalize_whitespace("") == "");
    CHECK(normalize_whitespace("  \n ") == "");
}

TEST_CASE("quote validity enforces length and in-page presence") {
    std::string core;
    for (int i = 0; i < 75; ++i) core += "word ";  // 375 chars incl. trailing space
    core.pop_back();
    std::string page = "prefix\n " + core + "\t suffix";
    CHECK(quote_valid(core, page));
    // whitespace differences are forgiven by normalization
    std::string reflowed = core;
    reflowed.replace(reflowed.find(' '), 1, "\n\t ");
    CHECK(quote_valid(" " + reflowed + " ", page));
    CHECK_FALSE(quote_valid(std::string(199, 'x'), page));
    CHECK_FALSE(quote_valid(std::string(501, 'x'), page + std::string(600, 'x')));
    CHECK_FALSE(quote_valid(std::string(300, 'y'), page));
}

TEST_CASE("template rendering substitutes named placeholders only") {
    auto out = render_template("Goal: {goal}; again {goal}; missing {nope}; lone { brace",
                               {{"goal", "profile NBIM"}});
    CHECK(out == "Goal: profile NBIM; again profile NBIM; missing {nope}; lone { brace");
}

TEST_CASE("scripted backend answers by (role, key) and records transcripts") {
    ScriptedBackend b;
    b.set(Role::Planner, "turn1", "{\"ok\":true}");
    CHECK(b.complete(Role::Planner, "turn1", "prompt text", "tag") == "{\"ok\":true}");
    CHECK_THROWS_AS(b.complete(Role::Planner, "turn2", "p", "tag"), FixtureMiss);
    CHECK_THROWS_AS(b.complete(Role::Reader, "turn1", "p", "tag"), FixtureMiss);
    REQUIRE(b.transcripts().size() == 3);
    CHECK(b.transcripts()[0].second == "prompt text");
}

TEST_CASE("prefilter skips duplicate urls mechanically and fails open") {
    std::vector<SearchHit> hits;
    hits.push_back({1, "https://x.org/a", "A", "alpha"});
    hits.push_back({2, "https://X.ORG/a#frag", "A again", "alpha copy"});
    hits.push_back({3, "https://x.org/b", "B", "beta"});
    hits.push_back({4, "https://x.org/c", "C", "gamma"});

    ScriptedBackend b;
    b.set(Role::Prefilter, "k1", R"({"skip": [4], "reasoning": "gamma off-topic"})");
    auto d = prefilter(hits, {"alpha"}, b, "k1");
    CHECK(d.read == std::set<int>{1, 3});
    CHECK(d.skip == std::set<int>{2, 4});
    CHECK(d.reasoning == "gamma off-topic");

    // malformed backend output: every candidate is read
    b.set(Role::Prefilter, "k2", "not json at all");
    auto open = prefilter(hits, {"alpha"}, b, "k2");
    CHECK(open.read == std::set<int>{1, 3, 4});
    CHECK(open.skip == std::set<int>{2});

    // a missing fixture is a test-harness bug and must propagate
    CHECK_THROWS_AS(prefilter(hits, {"alpha"}, b, "k-none"), FixtureMiss);
}

TEST_CASE("reader drops findings whose quotes fail validation") {
    std::string good_quote(250, 'g');
    std::string page = "intro " + good_quote + " outro";
    nlohmann::json reply = {
        {"findings",
         {{{"criterion", "c1"},
           {"answer", "kept"},
           {"evidence_quote", good_quote},
           {"source_url", "https://x/1"},
           {"attributed_item", "NBIM"},
           {"item_category", "organization"}},
          {{"criterion", "c2"},
           {"answer", "fabricated"},
           {"evidence_quote", std::string(250, 'z')},
           {"source_url", "https://x/2"}},
          {{"criterion", "c3"},
           {"answer", "too short"},
           {"evidence_quote", "tiny"},
           {"source_url", "https://x/3"}}}},
        {"gaps", {"nothing on c2"}},
        {"unexpected_insights",
         {{{"label", "scale"}, {"insight", "bigger than expected"}, {"evidence", "table"}}}},
        {"quality_scores",
         {{"currency", 4}, {"relevance", 4}, {"authority", 5}, {"accuracy", 4},
          {"purpose", 3}}},
        {"temporal_context", "as of 2024"}};

    ScriptedBackend b;
    b.set(Role::Reader, "p1", reply.dump());
    auto out = read_page(page, {"c1", "c2", "c3"}, b, "p1");
    REQUIRE(out.findings.size() == 1);
    CHECK(out.findings[0].criterion == "c1");
    CHECK(*out.findings[0].attributed_item == "NBIM");
    CHECK(out.dropped_findings.size() == 2);
    CHECK(out.quality_scores.authority == 5);
    CHECK(out.temporal_context == "as of 2024");
    REQUIRE(out.unexpected_insights.size() == 1);
    CHECK(out.unexpected_insights[0].label == "scale");
}

TEST_CASE("reader surfaces text-judged accessibility barriers") {
    nlohmann::json reply = {
        {"findings", nlohmann::json::array()},
        {"quality_scores",
         {{"currency", 1}, {"relevance", 1}, {"authority", 1}, {"accuracy", 1},
          {"purpose", 1}, {"accessible", false}, {"barrier", "paywall"}}},
        {"accessibility_notes",
         {{{"criterion", "c1"}, {"barrier", "login_required"},
           {"detail", "full report behind a member login"},
           {"alternative_hint", "press release mirrors the numbers"}}}}};
    ScriptedBackend b;
    b.set(Role::Reader, "p1", reply.dump());
    auto out = read_page("Subscribe to continue reading.", {"c1"}, b, "p1");
    CHECK(out.findings.empty());
    CHECK_FALSE(out.quality_scores.accessible);
    REQUIRE(out.quality_scores.barrier.has_value());
    CHECK(*out.quality_scores.barrier == Barrier::Paywall);
    REQUIRE(out.accessibility_notes.size() == 1);
    CHECK(out.accessibility_notes[0].barrier == Barrier::LoginRequired);
}

TEST_CASE("question parsing builds a normalized initial graph") {
    nlohmann::json doc = {
        {"schema_version", 1},
        {"structure_type", "convergence"},
        {"user_protected", {"s1"}},
        {"nodes",
         {{{"id", "s1"}, {"name", "anchor"}, {"node_type", "start"}},
          {{"id", "p1"},
           {"name", "dimension"},
           {"node_type", "placeholder"},
           {"core_criteria", {"crit"}}}}},
        {"edges",
         {{{"id", "r1"}, {"source", "s1"}, {"target", "p1"},
           {"inquiry_goal", "investigate"}, {"status", "solved"}}}}};
    ScriptedBackend b;
    b.set(Role::ParseQuestion, "parse", doc.dump());
    auto g = parse_question("compare the funds", b);
    CHECK(g.node("s1").cognitive_state == CognitiveState::Start);
    CHECK(g.node("p1").cognitive_state == CognitiveState::Unknown);
    CHECK(g.edge("r1").status == EdgeStatus::ToSolve);  // statuses reset
    CHECK(g.root_ids.count("s1") == 1);
    CHECK(g.node("p1").hop_distance == 1);
    CHECK(g.user_protected.count("s1") == 1);

    CHECK_THROWS_AS(parse_question("", b), UnparsableQuery);
    ScriptedBackend bad;
    bad.set(Role::ParseQuestion, "parse", "{\"nodes\": 7}");
    CHECK_THROWS_AS(parse_question("question", bad), UnparsableQuery);
}

TEST_CASE("scripted task runner replays fixtures and misses loudly") {
    ScriptedTaskRunner runner(std::string(COGRAPH_FIXTURE_DIR) + "/q53");
    SearchTask t;
    t.id = "t1";
    t.edge_id = "r1";
    t.target_node = "e2";
    auto obs = runner.run(t);
    CHECK(obs.task_id == "t1");
    CHECK(obs.target_node == "e2");
    CHECK(obs.findings.size() == 13);
    CHECK(obs.pending_evidence.size() == 13);
    CHECK(obs.pending_evidence[0].local_ref == 1);
    CHECK(obs.psi == Strength::Weak);

    SearchTask ghost;
    ghost.id = "no-such-task";
    CHECK_THROWS_AS(runner.run(ghost), FixtureMiss);
}
