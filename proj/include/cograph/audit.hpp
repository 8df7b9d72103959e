#pragma once

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cograph/errors.hpp"
#include "cograph/graph.hpp"

namespace cograph {

/// Post-run invariant audit over a trajectory log. Verifies:
///  - I1: finding containers only ever grow on commit steps (keys and
///    per-key claim counts are monotone), with restructure steps as the
///    only place keys/nodes may disappear;
///  - I2: user-protected nodes appear in every digest;
///  - step exclusivity: no turn mixes commits with restructures;
///  - budget: no add_task after a deadline event, turns within the ceiling.
/// Throws AuditFailure naming the violated invariant.
inline void audit_trajectory(const std::vector<nlohmann::json>& events,
                             const std::set<NodeId>& user_protected, int hard_ceiling) {
    using Digest = std::map<std::string, std::map<std::string, int>>;
    Digest prev;
    bool have_prev = false;
    bool deadline_seen = false;
    std::map<int, std::set<std::string>> per_turn_kinds;

    for (const auto& e : events) {
        auto type = e.value("type", "");
        int turn = e.value("turn", 0);
        if (turn > hard_ceiling)
            throw AuditFailure("budget: turn " + std::to_string(turn) +
                               " exceeds hard ceiling " + std::to_string(hard_ceiling));
        if (type == "deadline" || type == "deadline_enforced") deadline_seen = true;
        if (type == "add_task" && deadline_seen)
            throw AuditFailure("budget: add_task accepted after the soft deadline");
        if (type == "commit" || type == "restructure") {
            per_turn_kinds[turn].insert(type);
            if (per_turn_kinds[turn].size() > 1)
                throw AuditFailure(
                    "step exclusivity: turn " + std::to_string(turn) +
                    " mutates both structural and content state");
        }
        if (!e.contains("findings_digest")) continue;

        Digest cur;
        for (const auto& [node, keys] : e.at("findings_digest").items()) {
            for (const auto& [key, count] : keys.items())
                cur[node][key] = count.get<int>();
            if (keys.empty()) cur[node];  // node present with no findings
        }
        for (const auto& id : user_protected)
            if (!cur.count(id))
                throw AuditFailure("I2: protected node " + id + " missing at turn " +
                                   std::to_string(turn));
        if (have_prev) {
            bool structural = (type == "restructure") || (type == "deadline_enforced");
            for (const auto& [node, keys] : prev) {
                auto it = cur.find(node);
                if (it == cur.end()) {
                    if (!structural)
                        throw AuditFailure("I1: node " + node +
                                           " vanished outside a restructure at turn " +
                                           std::to_string(turn));
                    continue;
                }
                for (const auto& [key, count] : keys) {
                    auto kt = it->second.find(key);
                    if (kt == it->second.end()) {
                        if (!structural)
                            throw AuditFailure("I1: finding container " + node + "/" + key +
                                               " removed outside a restructure at turn " +
                                               std::to_string(turn));
                        continue;  // documented remove_items exception
                    }
                    if (kt->second < count)
                        throw AuditFailure("I1: finding container " + node + "/" + key +
                                           " shrank at turn " + std::to_string(turn));
                }
            }
        }
        prev = std::move(cur);
        have_prev = true;
    }
}

/// Per-turn human-readable summary of a trajectory log: actions, strategies,
/// restructure reports, guard rejections, and the search-call count.
inline std::string inspect_log(const std::vector<nlohmann::json>& events,
                               const std::string& filter = "") {
    std::ostringstream out;
    int searches = 0, guard_rejections = 0;
    for (const auto& e : events) {
        auto type = e.value("type", "");
        std::ostringstream line;
        line << "turn " << e.value("turn", 0) << "  " << type;
        if (type == "add_task") {
            ++searches;
            line << " task=" << e.value("task", "") << " edge=" << e.value("edge", "");
        } else if (type == "commit") {
            line << " task=" << e.value("task", "")
                 << " state=" << e.value("target_state", "");
            if (e.contains("strategy")) line << " strategy=" << e.at("strategy").get<std::string>();
        } else if (type == "restructure") {
            line << " op=" << e.value("op_type", "") << " added=" << e.value("added", 0)
                 << ", removed=" << e.value("removed", 0)
                 << ", violations=" << e.value("violations", 0);
            if (e.value("rolled_back", false)) line << " ROLLED BACK";
        } else if (type == "finish_guard") {
            if (!e.value("accepted", true)) {
                ++guard_rejections;
                line << " REJECTED";
                for (const auto& o : e.value("offending", nlohmann::json::array()))
                    line << " " << o.value("node", "");
            } else {
                line << " accepted";
            }
        } else if (type == "deadline") {
            line << " " << e.value("message", "");
        }
        auto text = line.str();
        if (filter.empty() || text.find(filter) != std::string::npos) out << text << "\n";
    }
    out << "---\nsearch calls: " << searches << "\nguard rejections: " << guard_rejections
        << "\n";
    return out.str();
}

/// Per-turn action diff between two logs.
inline std::string diff_logs(const std::vector<nlohmann::json>& a,
                             const std::vector<nlohmann::json>& b) {
    auto summarize = [](const std::vector<nlohmann::json>& events) {
        std::map<int, std::vector<std::string>> by_turn;
        for (const auto& e : events)
            by_turn[e.value("turn", 0)].push_back(e.value("type", "") + ":" +
                                                  e.value("task", e.value("op_type", "")));
        return by_turn;
    };
    auto sa = summarize(a), sb = summarize(b);
    std::ostringstream out;
    std::set<int> turns;
    for (const auto& [t, v] : sa) turns.insert(t);
    for (const auto& [t, v] : sb) turns.insert(t);
    for (int t : turns) {
        const auto& va = sa[t];
        const auto& vb = sb[t];
        if (va == vb) continue;
        out << "turn " << t << ":\n";
        for (const auto& x : va) out << "  < " << x << "\n";
        for (const auto& x : vb) out << "  > " << x << "\n";
    }
    return out.str();
}

}  // namespace cograph
