#include <doctest.h>

#include <random>

#include <cograph/restructuring.hpp>
#include <cograph/serialize.hpp>

using namespace cograph;

namespace {

ConceptNode node(const std::string& id, std::vector<std::string> core = {}) {
    ConceptNode n;
    n.id = id;
    n.name = "node " + id;
    n.core_criteria = core;
    n.core_pending = core;
    return n;
}

RelationEdge edge(const std::string& id, const std::string& src, const std::string& tgt) {
    RelationEdge e;
    e.id = id;
    e.source = src;
    e.target = tgt;
    e.inquiry_goal = "goal " + id;
    return e;
}

// s -> a -> x, s -> b; b carries findings; s and b protected.
CognitiveGraph make_graph() {
    CognitiveGraph g;
    auto s = node("s");
    s.node_type = NodeType::Start;
    g.add_node(s);
    g.add_node(node("a", {"a-crit"}));
    g.add_node(node("x", {"x-crit"}));
    auto b = node("b", {"b-crit"});
    b.cross_item_findings["b-crit"] = {"held claim"};
    g.add_node(b);
    g.add_edge(edge("r1", "s", "a"));
    g.add_edge(edge("r2", "a", "x"));
    g.add_edge(edge("r3", "s", "b"));
    g.user_protected = {"s", "b"};
    recompute_hops(g);
    return g;
}

struct NeverReconnect : ReconnectPolicy {
    std::optional<RelationEdge> propose(const CognitiveGraph&, const CognitiveGraph&,
                                        const NodeId&, int) override {
        return std::nullopt;
    }
};

}  // namespace

TEST_CASE("operator patterns gate the edit alphabet") {
    auto g = make_graph();
    RestructureIntent conc{OpType::Conc, "evidence shows two concrete funds", "a", {}};

    // conc: paired AddNode/AddEdge required
    CHECK(compile_intent(conc, g, {EditPrimitive{AddNodeEdit{node("n1")}}}).has_value());
    CHECK_FALSE(compile_intent(conc, g,
                               {EditPrimitive{AddNodeEdit{node("n1")}},
                                EditPrimitive{AddEdgeEdit{edge("e1", "a", "n1")}}})
                    .has_value());

    RestructureIntent aug{OpType::Aug, "new dimension surfaced", "a", {}};
    CHECK_FALSE(compile_intent(aug, g,
                               {EditPrimitive{AddNodeEdit{node("n1")}},
                                EditPrimitive{AddEdgeEdit{edge("e1", "a", "n1")}}})
                    .has_value());
    CHECK(compile_intent(aug, g, {EditPrimitive{AddNodeEdit{node("n1")}}}).has_value());
    CHECK(compile_intent(aug, g,
                         {EditPrimitive{AddNodeEdit{node("n1")}},
                          EditPrimitive{AddNodeEdit{node("n2")}},
                          EditPrimitive{AddEdgeEdit{edge("e1", "a", "n1")}}})
              .has_value());

    RestructureIntent prune{OpType::Prune, "slot never produced evidence", "x", {}};
    CHECK_FALSE(compile_intent(prune, g, {EditPrimitive{RemoveNodeEdit{"x"}}}).has_value());
    CHECK(compile_intent(prune, g,
                         {EditPrimitive{RemoveNodeEdit{"x"}},
                          EditPrimitive{RemoveNodeEdit{"a"}}})
              .has_value());
}

TEST_CASE("pivot demands criteria migration from removed nodes") {
    auto g = make_graph();
    RestructureIntent pivot{OpType::Pivot, "reframe the dimension", "a", {}};

    auto fresh = node("n1", {"unrelated"});
    std::vector<EditPrimitive> drops = {EditPrimitive{AddNodeEdit{fresh}},
                                        EditPrimitive{AddEdgeEdit{edge("e1", "s", "n1")}},
                                        EditPrimitive{RemoveNodeEdit{"x"}}};
    auto refusal = compile_intent(pivot, g, drops);
    REQUIRE(refusal.has_value());
    CHECK(refusal->reason == RefusalReason::PatternMismatch);
    CHECK(refusal->detail.find("x-crit") != std::string::npos);

    auto carrier = node("n1", {"x-crit", "extra"});
    std::vector<EditPrimitive> keeps = {EditPrimitive{AddNodeEdit{carrier}},
                                        EditPrimitive{AddEdgeEdit{edge("e1", "s", "n1")}},
                                        EditPrimitive{RemoveNodeEdit{"x"}}};
    CHECK_FALSE(compile_intent(pivot, g, keeps).has_value());
}

TEST_CASE("correct is modification-only and downstream-only") {
    auto g = make_graph();
    RestructureIntent correct{OpType::Correct, "criterion was misworded", "a", {}};

    CHECK(compile_intent(correct, g, {EditPrimitive{RemoveNodeEdit{"x"}}}).has_value());

    ModifyNodeEdit fix_x{"x", std::nullopt, std::vector<std::string>{"renamed"}, {}, {}};
    CHECK_FALSE(compile_intent(correct, g, {EditPrimitive{fix_x}}).has_value());

    ModifyNodeEdit fix_b{"b", std::nullopt, std::vector<std::string>{"renamed"}, {}, {}};
    auto refusal = compile_intent(correct, g, {EditPrimitive{fix_b}});
    REQUIRE(refusal.has_value());
    CHECK(refusal->reason == RefusalReason::DownstreamViolation);

    ModifyNodeEdit kills_findings{"x", std::nullopt, std::nullopt, std::nullopt, {"item"}};
    CHECK(compile_intent(correct, g, {EditPrimitive{kills_findings}}).has_value());

    ModifyEdgeEdit fix_edge{"r2", "rephrased goal", std::nullopt, std::nullopt};
    CHECK_FALSE(compile_intent(correct, g, {EditPrimitive{fix_edge}}).has_value());
    ModifyEdgeEdit off_edge{"r3", "rephrased goal", std::nullopt, std::nullopt};
    CHECK(compile_intent(correct, g, {EditPrimitive{off_edge}}).has_value());
}

TEST_CASE("safety validation refuses protected and evidence-bearing deletions") {
    auto g = make_graph();
    RestructureIntent prune{OpType::Prune, "redundant slot", "x", {}};

    auto r1 = validate_edits({EditPrimitive{RemoveNodeEdit{"s"}}}, g, prune);
    REQUIRE(r1.has_value());
    CHECK(r1->reason == RefusalReason::ProtectedNodeDeletion);

    g.user_protected.erase("b");
    auto r2 = validate_edits({EditPrimitive{RemoveNodeEdit{"b"}}}, g, prune);
    REQUIRE(r2.has_value());
    CHECK(r2->reason == RefusalReason::NonEmptyFindingsDeletion);

    auto r3 = validate_edits({EditPrimitive{RemoveNodeEdit{"ghost"}}}, g, prune);
    REQUIRE(r3.has_value());

    RestructureIntent lazy{OpType::Prune, "this area is Hard To Find online", "x", {}};
    auto r4 = validate_edits({EditPrimitive{RemoveNodeEdit{"x"}}}, g, lazy);
    REQUIRE(r4.has_value());
    CHECK(r4->reason == RefusalReason::DifficultyRationale);

    auto r5 = validate_edits(
        {EditPrimitive{ModifyNodeEdit{"b", std::nullopt, std::nullopt, std::nullopt,
                                      {"no-such-item"}}}},
        g, prune);
    REQUIRE(r5.has_value());
}

TEST_CASE("remove_items is surgical and refreshes residues") {
    auto g = make_graph();
    auto& b = g.node("b");
    b.item_findings["fundA"]["b-crit"] = {"claim"};
    b.item_findings["fundB"]["other"] = {"claim"};
    b.cross_item_findings.clear();
    b.core_pending.clear();
    b.cognitive_state = CognitiveState::Known;

    apply_phase1({EditPrimitive{ModifyNodeEdit{"b", std::nullopt, std::nullopt, std::nullopt,
                                               {"fundA"}}}},
                 g);
    const auto& after = g.node("b");
    CHECK(after.item_findings.count("fundA") == 0);
    CHECK(after.item_findings.count("fundB") == 1);
    CHECK(after.core_pending == std::vector<std::string>{"b-crit"});
    CHECK(after.cognitive_state == CognitiveState::Partial);
}

TEST_CASE("orphan repair bridges to the nearest surviving ancestor") {
    auto g = make_graph();
    NearestAncestorPolicy policy;
    RestructureIntent prune{OpType::Prune, "slot superseded by evidence", "a", {}};
    auto report = restructure(prune, {EditPrimitive{RemoveNodeEdit{"a"}}}, g, policy);
    CHECK(report.success());
    CHECK(report.removed == 1);
    CHECK(report.rounds == 1);
    REQUIRE(g.has_edge("bridge_s_x"));
    CHECK(g.edge("bridge_s_x").status == EdgeStatus::Solved);
    CHECK_FALSE(g.node("x").unreachable);
    CHECK(g.node("x").hop_distance == 1);
}

TEST_CASE("irreparable orphans roll the whole revision back after five rounds") {
    auto g = make_graph();
    auto before = to_json(g);
    NeverReconnect policy;
    RestructureIntent prune{OpType::Prune, "slot superseded by evidence", "a", {}};
    auto report = restructure(prune, {EditPrimitive{RemoveNodeEdit{"a"}}}, g, policy);
    CHECK_FALSE(report.success());
    CHECK(report.rolled_back);
    CHECK(report.rounds == kMaxReconnectRounds);
    CHECK(to_json(g) == before);  // atomic: snapshot restored byte for byte
}

TEST_CASE("refused revisions leave the graph untouched") {
    auto g = make_graph();
    auto before = to_json(g);
    NearestAncestorPolicy policy;
    RestructureIntent aug{OpType::Aug, "new dimension", "a", {}};
    auto report = restructure(aug, {EditPrimitive{AddNodeEdit{node("n1")}}}, g, policy);
    CHECK(report.refusal.has_value());
    CHECK(report.violations == 1);
    CHECK(to_json(g) == before);
}

TEST_CASE("duplicate-id application rolls back atomically") {
    auto g = make_graph();
    auto before = to_json(g);
    NearestAncestorPolicy policy;
    RestructureIntent aug{OpType::Aug, "new dimension", "a", {}};
    // second edit collides with an existing node id -> phase-1 throw -> rollback
    auto dup = node("a");
    auto report = restructure(aug,
                              {EditPrimitive{AddNodeEdit{dup}},
                               EditPrimitive{AddEdgeEdit{edge("e9", "s", "a")}}},
                              g, policy);
    CHECK(report.rolled_back);
    CHECK(to_json(g) == before);
}

TEST_CASE("fuzzed revisions preserve the invariants") {
    std::mt19937 rng(1234);
    NearestAncestorPolicy policy;
    int applied = 0, refused = 0;

    for (int trial = 0; trial < 1000; ++trial) {
        auto g = make_graph();
        // seed findings onto x half the time so deletions trip I1
        if (rng() % 2) {
            g.node("x").cross_item_findings["x-crit"] = {"claim"};
            g.node("x").core_pending.clear();
            g.node("x").cognitive_state = CognitiveState::Known;
        }
        auto before = to_json(g);

        RestructureIntent intent;
        intent.op_type = static_cast<OpType>(rng() % 5);
        intent.rationale = (rng() % 4 == 0) ? "search has been difficult here"
                                            : "evidence points to a different shape";
        intent.focus_node = "a";

        std::vector<EditPrimitive> edits;
        int n_edits = 1 + static_cast<int>(rng() % 3);
        for (int k = 0; k < n_edits; ++k) {
            switch (rng() % 4) {
                case 0: edits.push_back(AddNodeEdit{node("n" + std::to_string(k))}); break;
                case 1:
                    edits.push_back(AddEdgeEdit{
                        edge("e" + std::to_string(k), "a", "n" + std::to_string(k))});
                    break;
                case 2: {
                    const char* targets[] = {"a", "x", "b", "s", "ghost"};
                    edits.push_back(RemoveNodeEdit{targets[rng() % 5]});
                    break;
                }
                default:
                    edits.push_back(ModifyNodeEdit{"x", std::nullopt,
                                                   std::vector<std::string>{"fuzzed"},
                                                   std::nullopt, {}});
            }
        }

        auto report = restructure(intent, edits, g, policy);
        if (report.success()) {
            ++applied;
            // I2: protected nodes survive every accepted revision
            CHECK(g.has_node("s"));
            CHECK(g.has_node("b"));
            // I1: held findings are never destroyed
            CHECK(g.node("b").findings_nonempty());
            // reachability: accepted graphs have no orphans
            recompute_hops(g);
            CHECK(unreachable_nodes(g).empty());
        } else {
            ++refused;
            // atomicity: failed revisions restore the snapshot exactly
            CHECK(to_json(g) == before);
        }
    }
    CHECK(applied > 0);
    CHECK(refused > 0);
}
