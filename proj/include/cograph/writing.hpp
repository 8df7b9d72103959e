#pragma once

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cograph/errors.hpp"
#include "cograph/evidence.hpp"
#include "cograph/graph.hpp"

namespace cograph {

enum class PresentationHint { Table, List, Comparison, Narrative };

struct OutlineSection {
    int section_id = 0;
    std::string title;
    std::string description;
    std::string answers_aspect;
    std::set<NodeId> relevant_node_ids;  // V_k
};

struct Insight {
    std::string claim;
    std::set<int> evidence_ids;  // 2-5 global ids from the section index
    std::optional<PresentationHint> presentation_hint;
};

inline constexpr int kMinSectionRecords = 2;
inline constexpr std::size_t kTailCap = 15000;
inline constexpr std::size_t kInsightMinBinding = 2;
inline constexpr std::size_t kInsightMaxBinding = 5;

/// Prompt/response transcripts plus filter events, kept for boundary audits.
struct WritingLog {
    std::vector<std::string> layer1_prompts;
    std::vector<std::string> layer2_prompts;
    std::vector<std::string> layer3_prompts;
    std::vector<std::string> events;
};

// Providers stand in for the three writer roles; scripted mode backs them
// with fixtures, real mode with a chat backend.
using OutlineProvider = std::function<std::vector<OutlineSection>(const std::string& prompt)>;
using SectionPlanProvider = std::function<std::vector<Insight>(const std::string& prompt)>;
using SectionWriteProvider = std::function<std::string(const std::string& prompt)>;

// --- citation markers -------------------------------------------------------

namespace detail {

// Scans for [[m]] tokens (double-bracketed positive decimal integers).
// Calls fn(start, length, value) per token; everything else is untouched.
template <typename Fn>
inline void scan_markers(const std::string& text, Fn&& fn) {
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '[' || i + 1 >= text.size() || text[i + 1] != '[') {
            ++i;
            continue;
        }
        std::size_t j = i + 2;
        std::size_t digits_start = j;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        if (j > digits_start && j + 1 < text.size() && text[j] == ']' && text[j + 1] == ']') {
            int value = std::stoi(text.substr(digits_start, j - digits_start));
            fn(i, j + 2 - i, value);
            i = j + 2;
        } else {
            ++i;
        }
    }
}

}  // namespace detail

inline std::set<int> extract_markers(const std::string& text) {
    std::set<int> out;
    detail::scan_markers(text, [&](std::size_t, std::size_t, int v) { out.insert(v); });
    return out;
}

/// Removes every [[m]] marker, preserving all other bytes.
inline std::string strip_markers(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    std::size_t copied = 0;
    detail::scan_markers(text, [&](std::size_t start, std::size_t len, int) {
        out.append(text, copied, start - copied);
        copied = start + len;
    });
    out.append(text, copied, std::string::npos);
    return out;
}

/// Rewrites [[m]] markers through the given map; unmapped markers pass
/// through unchanged. Used for local→global reference remapping.
inline std::string remap_markers(const std::string& text, const std::map<int, int>& remap) {
    std::string out;
    out.reserve(text.size());
    std::size_t copied = 0;
    detail::scan_markers(text, [&](std::size_t start, std::size_t len, int v) {
        auto it = remap.find(v);
        if (it == remap.end()) return;
        out.append(text, copied, start - copied);
        out += "[[" + std::to_string(it->second) + "]]";
        copied = start + len;
    });
    out.append(text, copied, std::string::npos);
    return out;
}

/// Single-pass token filter: markers outside `bound` are removed; every
/// non-marker byte is preserved exactly.
inline std::pair<std::string, std::vector<int>> filter_invalid_citations(
    const std::string& text, const std::set<int>& bound) {
    std::string out;
    out.reserve(text.size());
    std::vector<int> removed;
    std::size_t copied = 0;
    detail::scan_markers(text, [&](std::size_t start, std::size_t len, int v) {
        if (bound.count(v)) return;
        out.append(text, copied, start - copied);
        copied = start + len;
        removed.push_back(v);
    });
    out.append(text, copied, std::string::npos);
    if (removed.empty()) return {text, removed};
    return {out, removed};
}

// --- Layer 1: outline --------------------------------------------------------

/// Availability index: per-node evidence-record counts, with no quote text.
inline std::map<NodeId, std::size_t> availability_index(const CognitiveGraph& g,
                                                        const EvidenceStore& store) {
    std::map<NodeId, std::size_t> idx;
    for (const auto& [id, n] : g.nodes) idx[id] = store.records_for_node(n).size();
    return idx;
}

inline std::string render_outline_prompt(const CognitiveGraph& g,
                                         const std::map<NodeId, std::size_t>& availability) {
    std::ostringstream out;
    out << "Plan a report outline over the researched concepts. Bind each section to "
           "the node ids whose findings it draws on; do not plan sections for concepts "
           "with little or no evidence.\n\nConcepts:\n";
    for (const auto& [id, n] : g.nodes) {
        out << "- " << id << " \"" << n.name << "\" [" << to_string(n.cognitive_state)
            << "] records=" << (availability.count(id) ? availability.at(id) : 0) << "\n";
    }
    return out.str();
}

inline std::vector<OutlineSection> plan_outline(const CognitiveGraph& g,
                                                const EvidenceStore& store,
                                                const OutlineProvider& provider,
                                                WritingLog& log,
                                                int min_records = kMinSectionRecords) {
    bool any_findings = false;
    for (const auto& [id, n] : g.nodes)
        if (n.findings_nonempty()) any_findings = true;
    if (!any_findings) throw NoWritableContent("graph has no findings anywhere");

    auto availability = availability_index(g, store);
    std::string prompt = render_outline_prompt(g, availability);
    log.layer1_prompts.push_back(prompt);

    std::vector<OutlineSection> accepted;
    for (auto section : provider(prompt)) {
        // root anchors without findings never anchor a section
        for (auto it = section.relevant_node_ids.begin();
             it != section.relevant_node_ids.end();) {
            bool drop = !g.has_node(*it) ||
                        (g.node(*it).node_type == NodeType::Start &&
                         !g.node(*it).findings_nonempty());
            it = drop ? section.relevant_node_ids.erase(it) : ++it;
        }
        if (section.relevant_node_ids.empty()) {
            log.events.push_back("Dropped section \"" + section.title +
                                 "\": no usable nodes");
            continue;
        }
        std::size_t records = 0;
        for (const auto& id : section.relevant_node_ids) records += availability[id];
        if (records < static_cast<std::size_t>(min_records)) {
            log.events.push_back("Dropped section \"" + section.title +
                                 "\": too-thin evidence (" + std::to_string(records) +
                                 " records)");
            continue;
        }
        accepted.push_back(std::move(section));
    }
    return accepted;
}

// --- Layer 2: section plans ---------------------------------------------------

inline std::string render_section_plan_prompt(
    const OutlineSection& section, const std::vector<std::pair<int, std::string>>& index,
    const std::vector<std::string>& prior_plan_claims) {
    std::ostringstream out;
    out << "Plan insights for section " << section.section_id << " \"" << section.title
        << "\". " << section.description
        << "\nBind each insight to 2-5 evidence ids from the index below; ids outside the "
           "index are invalid.\n\nEvidence index (id, criterion):\n";
    for (const auto& [id, criterion] : index)
        out << "- " << id << ": " << criterion << "\n";
    if (!prior_plan_claims.empty()) {
        out << "\nAlready planned in earlier sections (do not repeat):\n";
        for (const auto& c : prior_plan_claims) out << "- " << strip_markers(c) << "\n";
    }
    return out.str();
}

/// Validates one section's proposed insights against the section index:
/// out-of-index ids are stripped (logged), bindings outside [2,5] dropped,
/// claims already planned in earlier sections skipped.
inline std::vector<Insight> plan_section(const OutlineSection& section,
                                         const std::vector<std::pair<int, std::string>>& index,
                                         const std::vector<std::string>& prior_plan_claims,
                                         const SectionPlanProvider& provider,
                                         WritingLog& log) {
    std::string prompt = render_section_plan_prompt(section, index, prior_plan_claims);
    log.layer2_prompts.push_back(prompt);

    std::set<int> valid_ids;
    for (const auto& [id, criterion] : index) valid_ids.insert(id);
    std::set<std::string> prior(prior_plan_claims.begin(), prior_plan_claims.end());

    std::vector<Insight> accepted;
    for (auto insight : provider(prompt)) {
        std::set<int> invalid;
        for (auto it = insight.evidence_ids.begin(); it != insight.evidence_ids.end();) {
            if (valid_ids.count(*it)) {
                ++it;
            } else {
                invalid.insert(*it);
                it = insight.evidence_ids.erase(it);
            }
        }
        if (!invalid.empty()) {
            std::ostringstream msg;
            msg << "Removed invalid evidence refs {";
            bool first = true;
            for (int id : invalid) {
                if (!first) msg << ", ";
                msg << id;
                first = false;
            }
            msg << "} from section " << section.section_id;
            log.events.push_back(msg.str());
        }
        if (prior.count(insight.claim)) continue;  // subsumed by an earlier section
        if (insight.evidence_ids.size() < kInsightMinBinding ||
            insight.evidence_ids.size() > kInsightMaxBinding) {
            log.events.push_back("Dropped insight with " +
                                 std::to_string(insight.evidence_ids.size()) +
                                 " bound ids in section " + std::to_string(section.section_id));
            continue;
        }
        accepted.push_back(std::move(insight));
    }
    if (accepted.empty())
        throw InsufficientEvidence("no valid binding for section " +
                                   std::to_string(section.section_id));
    return accepted;
}

// --- Layer 3: section prose ---------------------------------------------------

struct SectionText {
    OutlineSection section;
    std::string prose;  // post-filter, markers all bound
    std::set<int> bound_ids;
};

inline std::string render_write_prompt(const OutlineSection& section,
                                       const std::vector<Insight>& insights,
                                       const std::vector<EvidenceRecord>& quotes,
                                       const std::string& tail) {
    std::ostringstream out;
    out << "Write section " << section.section_id << " \"" << section.title
        << "\". One claim per paragraph; cite evidence with [[m]] markers for the ids "
           "below only.\n\nInsights:\n";
    for (const auto& i : insights) {
        out << "- " << i.claim << " (evidence:";
        for (int id : i.evidence_ids) out << " " << id;
        out << ")\n";
    }
    out << "\nEvidence quotes:\n";
    for (const auto& r : quotes)
        out << "[[" << r.global_id << "]] (" << r.criterion << ", " << r.source_url
            << "): " << r.verbatim_quote << "\n";
    if (!tail.empty()) out << "\nReport so far (tail):\n" << tail << "\n";
    return out.str();
}

/// Layer 3 writer call for one section: quote payload restricted to the
/// union of this section's bindings, previous tail marker-stripped and
/// capped, output passed through the citation filter.
inline SectionText write_section(const OutlineSection& section,
                                 const std::vector<Insight>& insights,
                                 const EvidenceStore& store, const std::string& previous_text,
                                 const SectionWriteProvider& provider, WritingLog& log,
                                 std::size_t tail_cap = kTailCap) {
    std::set<int> bound;
    for (const auto& i : insights) bound.insert(i.evidence_ids.begin(), i.evidence_ids.end());
    std::vector<EvidenceRecord> quotes;
    for (int id : bound) quotes.push_back(store.get(id));

    std::string tail = strip_markers(previous_text);
    if (tail.size() > tail_cap) tail = tail.substr(tail.size() - tail_cap);

    std::string prompt = render_write_prompt(section, insights, quotes, tail);
    log.layer3_prompts.push_back(prompt);

    auto [prose, removed] = filter_invalid_citations(provider(prompt), bound);
    if (!removed.empty()) {
        std::ostringstream msg;
        msg << "Filtered unbound citation markers {";
        for (std::size_t i = 0; i < removed.size(); ++i)
            msg << (i ? ", " : "") << removed[i];
        msg << "} from section " << section.section_id;
        log.events.push_back(msg.str());
    }
    return SectionText{section, prose, bound};
}

// --- assembly -----------------------------------------------------------------

inline std::string assemble_report(const std::vector<SectionText>& sections,
                                   const EvidenceStore& store, WritingLog& log) {
    std::ostringstream out;
    std::set<int> cited;
    for (const auto& s : sections) {
        out << "## " << s.section.section_id << ". " << s.section.title << "\n\n"
            << s.prose << "\n\n";
        for (int id : extract_markers(s.prose)) {
            if (!store.has(id))
                throw AuditFailure("marker [[" + std::to_string(id) +
                                   "]] survived the filter but is absent from the store");
            cited.insert(id);
        }
    }
    out << "## References\n\n";
    if (cited.empty()) {
        log.events.push_back("Report cites no evidence records");
    } else {
        for (int id : cited)
            out << "[[" << id << "]] " << store.get(id).source_url << "\n";
    }
    return out.str();
}

}  // namespace cograph
