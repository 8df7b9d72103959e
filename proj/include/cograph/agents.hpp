#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cograph/assimilation.hpp"
#include "cograph/errors.hpp"
#include "cograph/evidence.hpp"
#include "cograph/graph.hpp"
#include "cograph/serialize.hpp"
#include "cograph/writing.hpp"

namespace cograph {

enum class Role {
    System,
    ParseQuestion,
    Planner,
    GraphManager,
    Searcher,
    Prefilter,
    Reader,
    RestructureManager,
    Reconnect,
    OutlinePlanner,
    SectionPlanner,
    SectionWriter,
};

inline const char* to_string(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::ParseQuestion: return "parse_question";
        case Role::Planner: return "planner";
        case Role::GraphManager: return "graph_manager";
        case Role::Searcher: return "searcher";
        case Role::Prefilter: return "prefilter";
        case Role::Reader: return "reader";
        case Role::RestructureManager: return "restructure_manager";
        case Role::Reconnect: return "reconnect";
        case Role::OutlinePlanner: return "outline_planner";
        case Role::SectionPlanner: return "section_planner";
        case Role::SectionWriter: return "section_writer";
    }
    return "?";
}

/// All model-facing calls flow through this interface. `key` identifies the
/// call site deterministically (turn id, task id, section id) so the
/// scripted backend can answer without a model.
struct ChatBackend {
    virtual ~ChatBackend() = default;
    virtual std::string complete(Role role, const std::string& key,
                                 const std::string& rendered_prompt,
                                 const std::string& schema_tag) = 0;
};

struct SearchHit {
    int index = 0;
    std::string url;
    std::string title;
    std::string snippet;
};

struct SearchProvider {
    virtual ~SearchProvider() = default;
    virtual std::vector<SearchHit> search(const std::string& query) = 0;
};

struct PageProvider {
    virtual ~PageProvider() = default;
    // nullopt when retrieval fails (network/tool error, not a content barrier)
    virtual std::optional<std::string> fetch(const std::string& url) = 0;
};

// --- prompt templates ---------------------------------------------------------

/// Pure named-placeholder substitution over a template text.
inline std::string render_template(const std::string& tpl,
                                   const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tpl.size());
    std::size_t i = 0;
    while (i < tpl.size()) {
        if (tpl[i] == '{') {
            auto end = tpl.find('}', i + 1);
            if (end != std::string::npos) {
                auto name = tpl.substr(i + 1, end - i - 1);
                auto it = values.find(name);
                if (it != values.end()) {
                    out += it->second;
                    i = end + 1;
                    continue;
                }
            }
        }
        out += tpl[i++];
    }
    return out;
}

class PromptLibrary {
  public:
    explicit PromptLibrary(std::string dir) : dir_(std::move(dir)) {}

    std::string load(Role role) const {
        auto it = cache_.find(role);
        if (it != cache_.end()) return it->second;
        std::ifstream f(dir_ + "/" + to_string(role) + ".txt");
        if (!f) throw BackendFailure("missing prompt template for role " +
                                     std::string(to_string(role)));
        std::ostringstream s;
        s << f.rdbuf();
        cache_[role] = s.str();
        return cache_[role];
    }

    std::string render(Role role, const std::map<std::string, std::string>& values) const {
        return render_template(load(role), values);
    }

  private:
    std::string dir_;
    mutable std::map<Role, std::string> cache_;
};

// --- reader contract ----------------------------------------------------------

struct ReaderAccessNote {
    std::string criterion;
    Barrier barrier = Barrier::Paywall;
    std::string detail;
    std::string alternative_hint;
};

struct ReaderOutput {
    std::vector<Finding> findings;  // Part A, each quote-backed
    std::vector<std::string> gaps;
    std::vector<UnexpectedInsight> unexpected_insights;  // Part B
    PageRating quality_scores;
    std::string temporal_context;
    std::vector<ReaderAccessNote> accessibility_notes;
    std::vector<std::string> dropped_findings;  // quote-validation failures, logged
};

inline std::string normalize_whitespace(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool in_ws = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_ws = true;
            continue;
        }
        if (in_ws && !out.empty()) out += ' ';
        in_ws = false;
        out += c;
    }
    return out;
}

/// The verbatim constraint: quote length in [200,500] and quote present in
/// the page after whitespace normalization.
inline bool quote_valid(const std::string& quote, const std::string& page) {
    if (quote.size() < 200 || quote.size() > 500) return false;
    return normalize_whitespace(page).find(normalize_whitespace(quote)) != std::string::npos;
}

// --- prefilter ----------------------------------------------------------------

struct PrefilterDecision {
    std::set<int> read;
    std::set<int> skip;
    std::string reasoning;
};

/// Conservative hit triage. Duplicate URLs are skipped mechanically; the
/// backend classifies the rest and any hit it leaves unmentioned — or any
/// backend failure — resolves to read (fail-open).
inline PrefilterDecision prefilter(const std::vector<SearchHit>& hits,
                                   const std::vector<std::string>& criteria,
                                   ChatBackend& backend, const std::string& key) {
    PrefilterDecision d;
    std::set<std::string> seen_urls;
    std::set<int> candidates;
    for (const auto& h : hits) {
        if (!seen_urls.insert(canonicalize_url(h.url)).second) {
            d.skip.insert(h.index);
        } else {
            candidates.insert(h.index);
        }
    }
    std::ostringstream prompt;
    prompt << "Classify each search hit as read or skip. Skip only obvious off-topic "
              "results; when in doubt, keep.\nCriteria:";
    for (const auto& c : criteria) prompt << " [" << c << "]";
    prompt << "\nHits:\n";
    for (const auto& h : hits)
        if (candidates.count(h.index))
            prompt << h.index << ". " << h.title << " — " << h.url << " — " << h.snippet
                   << "\n";
    try {
        auto raw = backend.complete(Role::Prefilter, key, prompt.str(), "prefilter_decision");
        auto j = nlohmann::json::parse(raw);
        for (int i : j.value("skip", std::vector<int>{}))
            if (candidates.count(i)) {
                d.skip.insert(i);
                candidates.erase(i);
            }
        d.reasoning = j.value("reasoning", "");
    } catch (const FixtureMiss&) {
        throw;
    } catch (const std::exception&) {
        d.reasoning = "backend failure: all hits read";
    }
    d.read = candidates;  // everything not explicitly skipped is read
    return d;
}

// --- reader -------------------------------------------------------------------

inline Barrier barrier_from_text(const std::string& s) { return barrier_from_string(s); }

/// Runs the reader role over one page and enforces the output contract:
/// findings without a valid in-page quote are dropped (never fatal).
inline ReaderOutput read_page(const std::string& page_text,
                              const std::vector<std::string>& criteria, ChatBackend& backend,
                              const std::string& key) {
    std::ostringstream prompt;
    prompt << "Extract findings for the criteria below; every finding must carry a "
              "200-500 character verbatim quote from the page. Also report unexpected "
              "insights, quality ratings, temporal context, and accessibility notes.\n"
              "Criteria:";
    for (const auto& c : criteria) prompt << " [" << c << "]";
    prompt << "\nPage:\n" << page_text;

    auto raw = backend.complete(Role::Reader, key, prompt.str(), "reader_output");
    auto j = nlohmann::json::parse(raw);

    ReaderOutput out;
    for (const auto& f : j.value("findings", nlohmann::json::array())) {
        Finding finding;
        finding.criterion = f.value("criterion", "");
        finding.answer = f.value("answer", "");
        finding.evidence_quote = f.value("evidence_quote", "");
        finding.source_url = f.value("source_url", "");
        if (f.contains("attributed_item"))
            finding.attributed_item = f.at("attributed_item").get<std::string>();
        finding.item_category = f.value("item_category", "");
        if (finding.answer.empty() || !quote_valid(finding.evidence_quote, page_text)) {
            out.dropped_findings.push_back("quote validation failed for criterion [" +
                                           finding.criterion + "]");
            continue;
        }
        out.findings.push_back(std::move(finding));
    }
    out.gaps = j.value("gaps", std::vector<std::string>{});
    for (const auto& u : j.value("unexpected_insights", nlohmann::json::array()))
        out.unexpected_insights.push_back({u.value("label", ""), u.value("insight", ""),
                                           u.value("evidence", "")});
    if (j.contains("quality_scores")) {
        const auto& q = j.at("quality_scores");
        out.quality_scores.currency = q.value("currency", 1);
        out.quality_scores.relevance = q.value("relevance", 1);
        out.quality_scores.authority = q.value("authority", 1);
        out.quality_scores.accuracy = q.value("accuracy", 1);
        out.quality_scores.purpose = q.value("purpose", 1);
        out.quality_scores.accessible = q.value("accessible", true);
        if (q.contains("barrier"))
            out.quality_scores.barrier = barrier_from_text(q.at("barrier").get<std::string>());
    }
    out.temporal_context = j.value("temporal_context", "");
    for (const auto& a : j.value("accessibility_notes", nlohmann::json::array())) {
        ReaderAccessNote note;
        note.criterion = a.value("criterion", "");
        note.barrier = barrier_from_text(a.value("barrier", "paywall"));
        note.detail = a.value("detail", "");
        note.alternative_hint = a.value("alternative_hint", "");
        out.accessibility_notes.push_back(std::move(note));
    }
    return out;
}

// --- question parsing ---------------------------------------------------------

/// Builds the initial cognitive graph from the user query. The backend
/// returns the graph document; every non-start node starts Unknown, every
/// edge ToSolve, and user-named dimensions are protected.
inline CognitiveGraph parse_question(const std::string& query, ChatBackend& backend,
                                     int retries = 2) {
    if (query.empty()) throw UnparsableQuery("empty query");
    std::string prompt =
        "Decompose the research question into a concept-level cognitive graph with start "
        "node(s), placeholder nodes, to-solve inquiry edges, and a structure type.\n"
        "Question: " + query;
    std::string last_error;
    for (int attempt = 0; attempt <= retries; ++attempt) {
        auto raw = backend.complete(Role::ParseQuestion, "parse", prompt, "initial_graph");
        try {
            auto g = graph_from_json(nlohmann::json::parse(raw));
            for (auto& [id, n] : g.nodes) {
                if (n.node_type == NodeType::Start) {
                    n.cognitive_state = CognitiveState::Start;
                    g.root_ids.insert(id);
                } else if (!n.findings_nonempty()) {
                    n.cognitive_state = CognitiveState::Unknown;
                }
            }
            for (auto& [id, e] : g.edges) e.status = EdgeStatus::ToSolve;
            recompute_hops(g);
            return g;
        } catch (const std::exception& err) {
            last_error = err.what();
        }
    }
    throw UnparsableQuery("initial graph failed schema validation: " + last_error);
}

// --- search tasks -------------------------------------------------------------

struct SearchTask {
    TaskId id;
    EdgeId edge_id;
    NodeId target_node;
    std::string node_name;
    std::string node_content;  // free-text brief (searcher local context)
    bool is_verification = false;
    std::string goal;
    std::vector<std::string> core_criteria;
    std::vector<std::string> supplementary_criteria;
    TaskType task_type = TaskType::Open;
    std::optional<std::string> specified_source;
    StrategyKind strategy = StrategyKind::Explore;
};

/// Executes one search task end to end and returns the observation. The
/// scripted implementation replays a fixture; the real one drives the
/// searcher loop.
struct TaskRunner {
    virtual ~TaskRunner() = default;
    virtual Observation run(const SearchTask& task) = 0;
};

inline Observation observation_from_json(const nlohmann::json& j, const SearchTask& task) {
    Observation obs;
    obs.task_id = task.id;
    obs.target_node = j.value("target_node", task.target_node);
    obs.edge_id = j.value("edge_id", task.edge_id);
    std::vector<PendingRecord> pending;
    int local = 0;
    for (const auto& f : j.value("findings", nlohmann::json::array())) {
        Finding finding;
        finding.criterion = f.value("criterion", "");
        finding.answer = f.value("answer", "");
        finding.evidence_quote = f.value("evidence_quote", "");
        finding.source_url = f.value("source_url", "");
        if (f.contains("attributed_item"))
            finding.attributed_item = f.at("attributed_item").get<std::string>();
        finding.item_category = f.value("item_category", "");
        obs.findings.push_back(finding);
        PendingRecord p;
        p.local_ref = ++local;
        p.verbatim_quote = finding.evidence_quote;
        p.summary = finding.answer;
        p.criterion = finding.criterion;
        p.source_url = finding.source_url;
        pending.push_back(std::move(p));
    }
    for (const auto& p : j.value("page_scores", nlohmann::json::array())) {
        PageRating r;
        r.currency = p.value("currency", 1);
        r.relevance = p.value("relevance", 1);
        r.authority = p.value("authority", 1);
        r.accuracy = p.value("accuracy", 1);
        r.purpose = p.value("purpose", 1);
        r.accessible = p.value("accessible", true);
        if (p.contains("barrier"))
            r.barrier = barrier_from_string(p.at("barrier").get<std::string>());
        obs.page_scores.push_back(r);
    }
    for (const auto& a : j.value("accessibility_notes", nlohmann::json::array()))
        obs.accessibility_notes.push_back({a.value("criterion", ""),
                                           barrier_from_string(a.value("barrier", "paywall")),
                                           a.value("detail", "")});
    for (const auto& u : j.value("unexpected_insights", nlohmann::json::array()))
        obs.unexpected_insights.push_back({u.value("label", ""), u.value("insight", ""),
                                           u.value("evidence", "")});
    obs.search_experience = j.value("search_experience", std::vector<std::string>{});
    obs.temporal_contexts = j.value("temporal_contexts", std::vector<std::string>{});
    obs.psi = strength_from_string(j.value("psi", "none"));
    obs.finding_strength = strength_from_string(j.value("finding_strength", "none"));
    obs.pending_evidence = std::move(pending);
    obs.summary = j.value("summary", "");  // local refs; remapped at commit
    return obs;
}

/// Fixture-driven task runner: loads observations/<task id>.json from the
/// bundle directory and commits its evidence batch.
class ScriptedTaskRunner : public TaskRunner {
  public:
    explicit ScriptedTaskRunner(std::string fixture_dir)
        : fixture_dir_(std::move(fixture_dir)) {}

    Observation run(const SearchTask& task) override {
        std::ifstream f(fixture_dir_ + "/observations/" + task.id + ".json");
        if (!f) throw FixtureMiss("no observation fixture for task " + task.id);
        nlohmann::json j = nlohmann::json::parse(f);
        return observation_from_json(j, task);
    }

  private:
    std::string fixture_dir_;
};

/// Real-mode searcher loop: multi-query search with dedup merge, prefilter,
/// reader fan-out, quote-backed synthesis, evidence insertion with
/// local-to-global remap. Tool failures degrade to search_experience.
class RealTaskRunner : public TaskRunner {
  public:
    RealTaskRunner(ChatBackend& backend, SearchProvider& search, PageProvider& pages,
                   int max_queries = 5)
        : backend_(backend), search_(search), pages_(pages), max_queries_(max_queries) {}

    Observation run(const SearchTask& task) override {
        Observation obs;
        obs.task_id = task.id;
        obs.target_node = task.target_node;
        obs.edge_id = task.edge_id;

        std::vector<std::string> queries = plan_queries(task);
        std::vector<SearchHit> hits;
        std::set<std::string> seen;
        for (const auto& q : queries) {
            try {
                for (auto h : search_.search(q)) {
                    if (!seen.insert(canonicalize_url(h.url)).second) continue;
                    h.index = static_cast<int>(hits.size());
                    hits.push_back(std::move(h));
                }
            } catch (const std::exception& err) {
                obs.search_experience.push_back("search failed for query \"" + q +
                                                "\": " + err.what());
            }
        }
        auto criteria = task.core_criteria;
        criteria.insert(criteria.end(), task.supplementary_criteria.begin(),
                        task.supplementary_criteria.end());
        auto decision = prefilter(hits, criteria, backend_, task.id);

        std::vector<PendingRecord> pending;
        int local = 0;
        for (const auto& h : hits) {
            if (!decision.read.count(h.index)) continue;
            auto page = pages_.fetch(h.url);
            if (!page) {
                obs.search_experience.push_back("page retrieval failed: " + h.url);
                continue;
            }
            ReaderOutput ro;
            try {
                ro = read_page(*page, criteria, backend_, task.id + "/" + h.url);
            } catch (const std::exception& err) {
                obs.search_experience.push_back("reader failed on " + h.url + ": " +
                                                err.what());
                continue;  // fail-closed: drop the page
            }
            obs.page_scores.push_back(ro.quality_scores);
            if (!ro.temporal_context.empty())
                obs.temporal_contexts.push_back(ro.temporal_context);
            for (const auto& n : ro.accessibility_notes)
                obs.accessibility_notes.push_back({n.criterion, n.barrier, n.detail});
            for (const auto& u : ro.unexpected_insights) obs.unexpected_insights.push_back(u);
            for (auto f : ro.findings) {
                if (f.source_url.empty()) f.source_url = h.url;
                obs.findings.push_back(f);
                PendingRecord p;
                p.local_ref = ++local;
                p.verbatim_quote = f.evidence_quote;
                p.summary = f.answer;
                p.criterion = f.criterion;
                p.source_url = f.source_url;
                pending.push_back(std::move(p));
            }
        }
        obs.pending_evidence = std::move(pending);
        obs.summary = synthesize(task, obs);
        obs.psi = obs.unexpected_insights.empty() ? Strength::None : Strength::Moderate;
        obs.finding_strength = obs.findings.empty() ? Strength::None : Strength::Moderate;
        return obs;
    }

  private:
    std::vector<std::string> plan_queries(const SearchTask& task) {
        std::vector<std::string> out;
        if (task.task_type == TaskType::Specified && task.specified_source) {
            // source expressions x topic keywords
            for (const auto& c : task.core_criteria) {
                out.push_back("site:" + *task.specified_source + " " + c);
                if (static_cast<int>(out.size()) >= max_queries_) return out;
            }
        }
        out.push_back(task.goal);
        for (const auto& c : task.core_criteria) {
            if (static_cast<int>(out.size()) >= max_queries_) break;
            out.push_back(task.goal + " " + c);
        }
        return out;
    }

    std::string synthesize(const SearchTask& task, const Observation& obs) {
        std::ostringstream s;
        s << obs.findings.size() << " findings for " << task.goal;
        int local = 0;
        for (const auto& f : obs.findings) s << " [[" << ++local << "]]";
        return s.str();
    }

    ChatBackend& backend_;
    SearchProvider& search_;
    PageProvider& pages_;
    int max_queries_;
};

// --- scripted backend ---------------------------------------------------------

/// Deterministic replacement for every model call, keyed by (role, key).
/// Unknown keys raise FixtureMiss — the backend never fabricates.
class ScriptedBackend : public ChatBackend {
  public:
    ScriptedBackend() = default;

    static ScriptedBackend from_file(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw FixtureMiss("cannot open fixture bundle: " + path);
        nlohmann::json j = nlohmann::json::parse(f);
        ScriptedBackend b;
        for (auto it = j.begin(); it != j.end(); ++it) {
            const auto& v = it.value();
            b.responses_[it.key()] = v.is_string() ? v.get<std::string>() : v.dump();
        }
        return b;
    }

    void set(Role role, const std::string& key, const std::string& response) {
        responses_[std::string(to_string(role)) + "|" + key] = response;
    }

    std::string complete(Role role, const std::string& key, const std::string& rendered_prompt,
                         const std::string& schema_tag) override {
        (void)schema_tag;
        transcripts_.emplace_back(role, rendered_prompt);
        auto it = responses_.find(std::string(to_string(role)) + "|" + key);
        if (it == responses_.end())
            throw FixtureMiss("no fixture response for role " +
                              std::string(to_string(role)) + " key " + key);
        return it->second;
    }

    const std::vector<std::pair<Role, std::string>>& transcripts() const {
        return transcripts_;
    }

  private:
    std::map<std::string, std::string> responses_;
    std::vector<std::pair<Role, std::string>> transcripts_;
};

}  // namespace cograph
