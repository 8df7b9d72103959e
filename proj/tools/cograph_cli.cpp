// Command-line shell around the engine: run, replay, inspect, validate-fixture.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cograph/audit.hpp"
#include "cograph/backend_http.hpp"
#include "cograph/config.hpp"
#include "cograph/replay.hpp"

namespace fs = std::filesystem;
using namespace cograph;

namespace {

int do_replay(const std::string& fixture_dir, const RunConfig& config) {
    auto run = make_scripted_run(fixture_dir, config.budget, config.ablation,
                                 config.worker_cap);
    run->result = run->engine->run();

    fs::create_directories(config.output_dir);
    std::ofstream report(config.output_dir + "/report.md");
    report << run->result.report;
    run->engine->store().save_jsonl(config.output_dir + "/evidence.jsonl");
    run->engine->log().save_ndjson(config.output_dir + "/trajectory.ndjson");

    try {
        audit_trajectory(run->engine->log().events,
                         run->engine->graph().user_protected,
                         config.budget.hard_ceiling());
    } catch (const AuditFailure& err) {
        std::cerr << "audit failure: " << err.what() << "\n";
        return 2;
    }
    std::cout << "replay complete: " << run->result.iterations << " iterations, "
              << run->engine->store().size() << " evidence records, report "
              << run->result.report.size() << " chars\n";
    return 0;
}

int do_validate(const std::string& fixture_dir) {
    auto graph = graph_from_json(load_fixture_json(fixture_dir + "/graph.json"));
    recompute_hops(graph);
    auto plan = load_fixture_json(fixture_dir + "/plan.json");
    std::set<std::string> task_ids;
    for (const auto& t : plan.at("turns")) {
        auto pt = turn_from_json(t);  // throws on malformed turns
        for (const auto& task : pt.tasks) {
            task_ids.insert(task.id);
            if (!graph.has_node(task.target_node))
                std::cout << "note: task " << task.id << " targets node "
                          << task.target_node << " not in the initial graph (may be "
                             "created by a restructure)\n";
        }
    }
    for (const auto& id : task_ids) {
        std::string path = fixture_dir + "/observations/" + id + ".json";
        if (!fs::exists(path)) {
            std::cerr << "missing observation fixture: " << path << "\n";
            return 2;
        }
        load_fixture_json(path);
    }
    auto writing = load_fixture_json(fixture_dir + "/writing.json");
    for (const auto& s : writing.at("outline")) section_from_json(s);
    std::cout << "fixture ok: " << plan.at("turns").size() << " turns, "
              << task_ids.size() << " tasks, " << writing.at("outline").size()
              << " outline sections\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cograph: cognitive-graph research engine"};
    app.require_subcommand(1);

    std::string config_path, fixture_dir, query, log_path, other_log, filter, output_dir;

    auto* run_cmd = app.add_subcommand("run", "run a query (real or scripted backend)");
    run_cmd->add_option("--config", config_path, "config JSON path");
    run_cmd->add_option("--query", query, "research question (real mode)");
    run_cmd->add_option("--fixture", fixture_dir, "fixture bundle (scripted mode)");
    run_cmd->add_option("--output", output_dir, "output directory");

    auto* replay_cmd = app.add_subcommand("replay", "replay a scripted fixture bundle");
    replay_cmd->add_option("fixture", fixture_dir, "fixture bundle directory")->required();
    replay_cmd->add_option("--config", config_path, "config JSON path");
    replay_cmd->add_option("--output", output_dir, "output directory");

    auto* inspect_cmd = app.add_subcommand("inspect", "summarize a trajectory log");
    inspect_cmd->add_option("log", log_path, "trajectory NDJSON path")->required();
    inspect_cmd->add_option("--filter", filter, "substring filter");
    inspect_cmd->add_option("--diff", other_log, "second log to diff against");

    auto* validate_cmd = app.add_subcommand("validate-fixture", "check a fixture bundle");
    validate_cmd->add_option("fixture", fixture_dir, "fixture bundle directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig config;
        if (!config_path.empty()) config = RunConfig::load(config_path);
        else config.apply_env_overrides();
        if (!output_dir.empty()) config.output_dir = output_dir;

        if (replay_cmd->parsed()) return do_replay(fixture_dir, config);

        if (run_cmd->parsed()) {
            if (!fixture_dir.empty() || config.mode == BackendMode::Scripted) {
                if (fixture_dir.empty()) fixture_dir = config.fixture_dir;
                if (fixture_dir.empty()) {
                    std::cerr << "scripted mode needs --fixture\n";
                    return 1;
                }
                return do_replay(fixture_dir, config);
            }
            if (query.empty()) {
                std::cerr << "real mode needs --query\n";
                return 1;
            }
            HttpChatBackend backend(config.chat_base_url, {});
            HttpSearchProvider search(config.search_base_url);
            HttpPageProvider pages(config.page_base_url);
            auto graph = parse_question(query, backend);
            std::cerr << "real-mode planner loop requires a planner backend policy; "
                         "initial graph parsed with " << graph.nodes.size()
                      << " nodes. Configure scripted mode for offline runs.\n";
            return 0;
        }

        if (inspect_cmd->parsed()) {
            auto events = TrajectoryLog::load_ndjson(log_path);
            if (!other_log.empty()) {
                auto other = TrajectoryLog::load_ndjson(other_log);
                std::cout << diff_logs(events, other);
            } else {
                std::cout << inspect_log(events, filter);
            }
            return 0;
        }

        if (validate_cmd->parsed()) return do_validate(fixture_dir);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
