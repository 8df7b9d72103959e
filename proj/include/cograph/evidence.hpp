#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cograph/errors.hpp"
#include "cograph/graph.hpp"

namespace cograph {

class MissingQuote : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct EvidenceRecord {
    int global_id = 0;          // m
    std::string verbatim_quote; // v, 200-500 chars
    std::string summary;        // w
    std::string criterion;      // ℓ
    std::string source_url;
    TaskId task_id;
};

/// Lowercase scheme and host, strip the fragment; path/query untouched.
inline std::string canonicalize_url(const std::string& url) {
    std::string out = url;
    auto hash = out.find('#');
    if (hash != std::string::npos) out.erase(hash);
    auto scheme_end = out.find("://");
    std::size_t host_end = out.size();
    if (scheme_end != std::string::npos) {
        host_end = out.find('/', scheme_end + 3);
        if (host_end == std::string::npos) host_end = out.size();
    } else {
        scheme_end = 0;
        host_end = 0;
    }
    std::size_t lower_until = scheme_end == 0 ? 0 : host_end;
    for (std::size_t i = 0; i < lower_until; ++i)
        out[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(out[i])));
    return out;
}

/// One reader finding before it is assigned a global id.
struct PendingRecord {
    int local_ref = 0;  // [[m]] marker used inside the searcher synthesis
    std::string verbatim_quote;
    std::string summary;
    std::string criterion;
    std::string source_url;
};

/// Append-only, citation-traceable record store. Ids are assigned in
/// insertion order from 1 and never reused; concurrent appenders are
/// serialized on the id counter.
class EvidenceStore {
  public:
    /// Inserts a batch from one task and returns the local→global remap.
    /// Dedup key is (canonical URL, criterion): the same page cited again
    /// under the same criterion maps onto the existing record.
    std::map<int, int> insert_batch(const TaskId& task,
                                    const std::vector<PendingRecord>& batch,
                                    std::vector<std::string>* rejected_log = nullptr) {
        std::lock_guard<std::mutex> lock(mu_);
        std::map<int, int> remap;
        for (const auto& p : batch) {
            if (p.verbatim_quote.empty()) {
                if (rejected_log)
                    rejected_log->push_back("record rejected, missing quote: " + p.source_url);
                continue;
            }
            auto key = std::make_pair(canonicalize_url(p.source_url), p.criterion);
            auto it = dedup_.find(key);
            if (it != dedup_.end()) {
                remap[p.local_ref] = it->second;
                continue;
            }
            EvidenceRecord r;
            r.global_id = static_cast<int>(records_.size()) + 1;
            r.verbatim_quote = p.verbatim_quote;
            r.summary = p.summary;
            r.criterion = p.criterion;
            r.source_url = p.source_url;
            r.task_id = task;
            dedup_[key] = r.global_id;
            remap[p.local_ref] = r.global_id;
            records_.push_back(std::move(r));
        }
        return remap;
    }

    std::size_t size() const {
        std::lock_guard<std::mutex> lock(mu_);
        return records_.size();
    }

    bool has(int global_id) const {
        std::lock_guard<std::mutex> lock(mu_);
        return global_id >= 1 && global_id <= static_cast<int>(records_.size());
    }

    EvidenceRecord get(int global_id) const {
        std::lock_guard<std::mutex> lock(mu_);
        if (global_id < 1 || global_id > static_cast<int>(records_.size()))
            throw InsufficientEvidence("no record with id " + std::to_string(global_id));
        return records_[static_cast<std::size_t>(global_id - 1)];
    }

    std::vector<EvidenceRecord> all() const {
        std::lock_guard<std::mutex> lock(mu_);
        return records_;
    }

    /// Records contributed by any task related to the node.
    std::vector<EvidenceRecord> records_for_node(const ConceptNode& n) const {
        std::lock_guard<std::mutex> lock(mu_);
        std::vector<EvidenceRecord> out;
        for (const auto& r : records_)
            if (n.related_tasks.count(r.task_id)) out.push_back(r);
        return out;
    }

    /// Layer-2 projection: ids and criterion tags only, no quote text.
    std::vector<std::pair<int, std::string>> section_index(
        const CognitiveGraph& g, const std::set<NodeId>& subset) const {
        std::set<TaskId> tasks;
        for (const auto& id : subset) {
            if (!g.has_node(id)) continue;
            const auto& rt = g.node(id).related_tasks;
            tasks.insert(rt.begin(), rt.end());
        }
        std::lock_guard<std::mutex> lock(mu_);
        std::vector<std::pair<int, std::string>> out;
        for (const auto& r : records_)
            if (tasks.count(r.task_id)) out.emplace_back(r.global_id, r.criterion);
        return out;
    }

    void save_jsonl(const std::string& path) const {
        std::lock_guard<std::mutex> lock(mu_);
        std::ofstream f(path);
        for (const auto& r : records_) {
            nlohmann::json j = {{"m", r.global_id}, {"v", r.verbatim_quote},
                                {"w", r.summary},   {"l", r.criterion},
                                {"src", r.source_url}, {"task", r.task_id}};
            f << j.dump() << "\n";
        }
    }

    /// Loads a persisted store into this (empty) instance.
    void load_jsonl(const std::string& path) {
        EvidenceStore& store = *this;
        std::lock_guard<std::mutex> lock(mu_);
        std::ifstream f(path);
        if (!f) throw MalformedLog("cannot open evidence file: " + path);
        std::string line;
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            auto j = nlohmann::json::parse(line);
            EvidenceRecord r;
            r.global_id = j.at("m").get<int>();
            r.verbatim_quote = j.at("v").get<std::string>();
            r.summary = j.at("w").get<std::string>();
            r.criterion = j.at("l").get<std::string>();
            r.source_url = j.at("src").get<std::string>();
            r.task_id = j.at("task").get<std::string>();
            if (r.global_id != static_cast<int>(store.records_.size()) + 1)
                throw MalformedLog("non-contiguous evidence ids in " + path);
            store.dedup_[{canonicalize_url(r.source_url), r.criterion}] = r.global_id;
            store.records_.push_back(std::move(r));
        }
    }

  private:
    mutable std::mutex mu_;
    std::vector<EvidenceRecord> records_;
    std::map<std::pair<std::string, std::string>, int> dedup_;
};

}  // namespace cograph
