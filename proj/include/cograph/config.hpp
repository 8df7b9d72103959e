#pragma once

#include <cstdlib>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "cograph/deviation.hpp"
#include "cograph/errors.hpp"
#include "cograph/orchestrator.hpp"

namespace cograph {

enum class BackendMode { Real, Scripted };

struct RunConfig {
    BackendMode mode = BackendMode::Scripted;
    RunBudget budget;
    int worker_cap = 4;
    double tau_h = kHighQualityThreshold;
    double tau_l = kLowQualityThreshold;
    Strength tau_psi = Strength::Moderate;
    AblationFlags ablation;
    bool a_full = false;
    std::string fixture_dir;
    std::string output_dir = ".";
    std::string prompt_dir = "assets/prompts";
    // real-mode endpoints; the API key comes from the environment only
    std::string chat_base_url;
    std::string search_base_url;
    std::string page_base_url;
    int searcher_page_limit = 20;  // no reference default; config-only knob

    nlohmann::json to_json() const {
        return {{"mode", mode == BackendMode::Real ? "real" : "scripted"},
                {"budget",
                 {{"soft_deadline_minutes", budget.soft_deadline_minutes},
                  {"max_turn", budget.max_turn},
                  {"hard_multiplier", budget.hard_multiplier}}},
                {"worker_cap", worker_cap},
                {"thresholds",
                 {{"tau_h", tau_h}, {"tau_l", tau_l}, {"tau_psi", to_string(tau_psi)}}},
                {"ablation",
                 {{"A1", ablation.a1},
                  {"A2", ablation.a2},
                  {"A3", ablation.a3},
                  {"A4", ablation.a4},
                  {"A_full", a_full}}},
                {"fixture_dir", fixture_dir},
                {"output_dir", output_dir},
                {"prompt_dir", prompt_dir},
                {"chat_base_url", chat_base_url},
                {"search_base_url", search_base_url},
                {"page_base_url", page_base_url},
                {"searcher_page_limit", searcher_page_limit}};
    }

    static RunConfig from_json(const nlohmann::json& j) {
        RunConfig c;
        c.mode = j.value("mode", "scripted") == std::string("real") ? BackendMode::Real
                                                                    : BackendMode::Scripted;
        if (j.contains("budget")) {
            const auto& b = j.at("budget");
            c.budget.soft_deadline_minutes =
                b.value("soft_deadline_minutes", c.budget.soft_deadline_minutes);
            c.budget.max_turn = b.value("max_turn", c.budget.max_turn);
            c.budget.hard_multiplier = b.value("hard_multiplier", c.budget.hard_multiplier);
        }
        c.worker_cap = j.value("worker_cap", c.worker_cap);
        if (j.contains("thresholds")) {
            const auto& t = j.at("thresholds");
            c.tau_h = t.value("tau_h", c.tau_h);
            c.tau_l = t.value("tau_l", c.tau_l);
            c.tau_psi = strength_from_string(t.value("tau_psi", "moderate"));
        }
        if (j.contains("ablation")) {
            const auto& a = j.at("ablation");
            c.ablation.a1 = a.value("A1", false);
            c.ablation.a2 = a.value("A2", false);
            c.ablation.a3 = a.value("A3", false);
            c.ablation.a4 = a.value("A4", false);
            c.a_full = a.value("A_full", false);
            if (c.a_full) c.ablation.a1 = c.ablation.a2 = c.ablation.a3 = c.ablation.a4 = true;
        }
        c.fixture_dir = j.value("fixture_dir", "");
        c.output_dir = j.value("output_dir", ".");
        c.prompt_dir = j.value("prompt_dir", "assets/prompts");
        c.chat_base_url = j.value("chat_base_url", "");
        c.search_base_url = j.value("search_base_url", "");
        c.page_base_url = j.value("page_base_url", "");
        c.searcher_page_limit = j.value("searcher_page_limit", 20);
        return c;
    }

    static RunConfig load(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw MalformedLog("cannot open config: " + path);
        auto c = from_json(nlohmann::json::parse(f));
        c.apply_env_overrides();
        return c;
    }

    /// Environment overrides for endpoints, budgets, and ablation flags.
    void apply_env_overrides() {
        auto env = [](const char* name) -> std::optional<std::string> {
            const char* v = std::getenv(name);
            if (!v) return std::nullopt;
            return std::string(v);
        };
        if (auto v = env("COGRAPH_CHAT_BASE_URL")) chat_base_url = *v;
        if (auto v = env("COGRAPH_SEARCH_BASE_URL")) search_base_url = *v;
        if (auto v = env("COGRAPH_PAGE_BASE_URL")) page_base_url = *v;
        if (auto v = env("COGRAPH_SOFT_DEADLINE_MINUTES"))
            budget.soft_deadline_minutes = std::stod(*v);
        if (auto v = env("COGRAPH_MAX_TURN")) budget.max_turn = std::stoi(*v);
        if (auto v = env("COGRAPH_WORKER_CAP")) worker_cap = std::stoi(*v);
        if (auto v = env("COGRAPH_ABLATION")) {
            ablation = AblationFlags{};
            a_full = false;
            for (char c : *v) {
                if (c == '1') ablation.a1 = true;
                if (c == '2') ablation.a2 = true;
                if (c == '3') ablation.a3 = true;
                if (c == '4') ablation.a4 = true;
                if (c == '*') a_full = true;
            }
            if (a_full) ablation.a1 = ablation.a2 = ablation.a3 = ablation.a4 = true;
        }
    }
};

/// Applies the ablation flags to an engine at wiring time. Flags compose a
/// different engine — they are not runtime toggles.
inline void apply_ablation(const RunConfig& config, Engine& engine) {
    engine.ablation = config.ablation;
    engine.budget = config.budget;
    engine.worker_cap = config.worker_cap;
}

}  // namespace cograph
