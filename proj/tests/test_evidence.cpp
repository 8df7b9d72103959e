#include <doctest.h>

#include <cstdio>
#include <thread>

#include <cograph/evidence.hpp>
#include <cograph/writing.hpp>

using namespace cograph;

namespace {
PendingRecord pending(int local, const std::string& url, const std::string& crit) {
    PendingRecord p;
    p.local_ref = local;
    p.verbatim_quote = std::string(220, 'q');
    p.summary = "summary for " + crit;
    p.criterion = crit;
    p.source_url = url;
    return p;
}
}  // namespace

TEST_CASE("url canonicalization lowercases scheme and host only") {
    CHECK(canonicalize_url("HTTPS://Example.ORG/Path?Q=A#frag") ==
          "https://example.org/Path?Q=A");
    CHECK(canonicalize_url("http://HOST.com") == "http://host.com");
    CHECK(canonicalize_url("https://a.b/x#") == "https://a.b/x");
    // No scheme: leave the string alone apart from the fragment.
    CHECK(canonicalize_url("Example.org/Path#f") == "Example.org/Path");
}

TEST_CASE("ids are assigned in insertion order from 1") {
    EvidenceStore store;
    auto remap = store.insert_batch("t1", {pending(1, "https://a/1", "c1"),
                                           pending(2, "https://a/2", "c2")});
    CHECK(remap.at(1) == 1);
    CHECK(remap.at(2) == 2);
    auto remap2 = store.insert_batch("t2", {pending(1, "https://a/3", "c3")});
    CHECK(remap2.at(1) == 3);
    CHECK(store.size() == 3);
    CHECK(store.get(3).task_id == "t2");
    CHECK(store.has(1));
    CHECK_FALSE(store.has(4));
    CHECK_THROWS_AS(store.get(0), InsufficientEvidence);
}

TEST_CASE("duplicate (canonical url, criterion) folds onto the existing record") {
    EvidenceStore store;
    store.insert_batch("t1", {pending(1, "https://Example.org/p#x", "c")});
    auto remap = store.insert_batch("t2", {pending(1, "https://example.org/p", "c"),
                                           pending(2, "https://example.org/p", "other")});
    CHECK(remap.at(1) == 1);   // same page, same criterion: dedup
    CHECK(remap.at(2) == 2);   // same page, different criterion: new record
    CHECK(store.size() == 2);
    CHECK(store.get(1).task_id == "t1");
}

TEST_CASE("records without quotes are rejected and logged") {
    EvidenceStore store;
    auto p = pending(1, "https://a/1", "c");
    p.verbatim_quote.clear();
    std::vector<std::string> rejected;
    auto remap = store.insert_batch("t1", {p}, &rejected);
    CHECK(remap.empty());
    CHECK(store.size() == 0);
    REQUIRE(rejected.size() == 1);
    CHECK(rejected[0].find("https://a/1") != std::string::npos);
}

TEST_CASE("remap rewrites local markers in a synthesis summary") {
    EvidenceStore store;
    store.insert_batch("t0", {pending(1, "https://z/0", "pad")});
    auto remap = store.insert_batch("t1", {pending(1, "https://a/1", "c1"),
                                           pending(2, "https://a/2", "c2")});
    auto out = remap_markers("claims [[1]] and [[2]], retold [[1]]", remap);
    CHECK(out == "claims [[2]] and [[3]], retold [[2]]");
}

TEST_CASE("jsonl round trip preserves records and dedup state") {
    std::string path = "evidence_roundtrip_test.jsonl";
    EvidenceStore store;
    store.insert_batch("t1", {pending(1, "https://a/1", "c1"),
                              pending(2, "https://a/2", "c2")});
    store.save_jsonl(path);

    EvidenceStore loaded;
    loaded.load_jsonl(path);
    CHECK(loaded.size() == 2);
    CHECK(loaded.get(2).criterion == "c2");
    CHECK(loaded.get(1).verbatim_quote == store.get(1).verbatim_quote);
    // Dedup map survives the reload.
    auto remap = loaded.insert_batch("t3", {pending(1, "https://a/1", "c1")});
    CHECK(remap.at(1) == 1);
    std::remove(path.c_str());

    EvidenceStore missing;
    CHECK_THROWS_AS(missing.load_jsonl("no_such_file.jsonl"), MalformedLog);
}

TEST_CASE("section index exposes ids and criteria only for the node subset") {
    CognitiveGraph g;
    ConceptNode a;
    a.id = "a";
    a.node_type = NodeType::Start;
    ConceptNode b;
    b.id = "b";
    b.related_tasks = {"t1"};
    ConceptNode c;
    c.id = "c";
    c.related_tasks = {"t2"};
    g.add_node(a);
    g.add_node(b);
    g.add_node(c);

    EvidenceStore store;
    store.insert_batch("t1", {pending(1, "https://a/1", "c1")});
    store.insert_batch("t2", {pending(1, "https://a/2", "c2")});

    auto index = store.section_index(g, {"b"});
    REQUIRE(index.size() == 1);
    CHECK(index[0].first == 1);
    CHECK(index[0].second == "c1");
    CHECK(store.section_index(g, {"b", "c"}).size() == 2);
    CHECK(store.section_index(g, {"ghost"}).empty());
}

TEST_CASE("concurrent appenders never skip or reuse an id") {
    EvidenceStore store;
    constexpr int kThreads = 8;
    constexpr int kPerThread = 50;
    std::vector<std::thread> workers;
    for (int t = 0; t < kThreads; ++t)
        workers.emplace_back([&store, t] {
            for (int i = 0; i < kPerThread; ++i) {
                auto url = "https://host/" + std::to_string(t) + "/" + std::to_string(i);
                store.insert_batch("t" + std::to_string(t), {pending(1, url, "c")});
            }
        });
    for (auto& w : workers) w.join();
    REQUIRE(store.size() == kThreads * kPerThread);
    auto all = store.all();
    for (int i = 0; i < static_cast<int>(all.size()); ++i)
        CHECK(all[static_cast<std::size_t>(i)].global_id == i + 1);
}
