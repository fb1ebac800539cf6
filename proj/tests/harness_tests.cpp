#include "doctest.h"

#include "httplib.h"
#include "json.hpp"
#include "triad/harness.hpp"

#include <filesystem>
#include <fstream>
#include <thread>

using namespace triad;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = fs::path(TRIAD_SOURCE_DIR);

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("triad-harness-" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

RunResult run_demo(const fs::path& out, bool no_intrinsic = false, std::uint64_t seed = 7) {
    const Scenario scenario = load_scenario(kSource / "scenarios" / "demo.json");
    const ScriptedBackend backend;
    AssetStore assets(kSource / "assets" / "prompts");
    RunnerConfig config;
    config.seed = seed;
    config.out_dir = out;
    config.no_intrinsic = no_intrinsic;
    return run_scenario(scenario, backend, assets, config);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("the demo scenario runs the full loop and settles its tasks") {
    TempDir tmp("demo");
    const RunResult result = run_demo(tmp.path / "run");
    CHECK(result.metrics.total_tasks >= 3);
    CHECK(result.metrics.total_runtime == 120);

    int sum = 0;
    for (const auto& seg : result.metrics.segments) sum += seg.extrinsic + seg.intrinsic;
    CHECK(sum == result.metrics.total_tasks);  // segment counts sum to total
}

TEST_CASE("identical runs produce identical journals and metrics") {
    TempDir tmp("determinism");
    const RunResult a = run_demo(tmp.path / "a");
    const RunResult b = run_demo(tmp.path / "b");
    CHECK(a.metrics == b.metrics);

    for (const auto& entry : fs::directory_iterator(a.journal_dir)) {
        if (!entry.is_regular_file()) continue;
        const fs::path other = b.journal_dir / entry.path().filename();
        REQUIRE_MESSAGE(fs::exists(other), entry.path().filename().string());
        CHECK(slurp(entry.path()) == slurp(other));
    }
}

TEST_CASE("--no-intrinsic reduces the agent to a reactive baseline") {
    TempDir tmp("reactive");
    const RunResult result = run_demo(tmp.path / "run", true);
    int intrinsic = 0, extrinsic = 0;
    for (const auto& seg : result.metrics.segments) {
        intrinsic += seg.intrinsic;
        extrinsic += seg.extrinsic;
    }
    CHECK(intrinsic == 0);
    CHECK(extrinsic >= 1);  // the scheduled directive still runs
}

TEST_CASE("metrics recomputed from the journal match the returned metrics") {
    TempDir tmp("audit");
    const RunResult result = run_demo(tmp.path / "run");
    const RunMetrics audited = compute_metrics(result.journal_dir, MetricsLayout::for_duration(120));
    CHECK(audited == result.metrics);
}

TEST_CASE("every goal, reward and critique in a run carries a creed reference") {
    TempDir tmp("creed");
    const RunResult result = run_demo(tmp.path / "run");
    int checked = 0;
    for (const auto& loaded : Journal::replay_load(result.journal_dir)) {
        const JournalEntry& e = loaded.entry;
        if (e.kind == JournalKind::goal || e.kind == JournalKind::reward ||
            e.kind == JournalKind::critique) {
            CHECK_MESSAGE(check_creed(e.body).ok(), loaded.file << ":" << loaded.line);
            ++checked;
        }
    }
    CHECK(checked >= 3);
}

TEST_CASE("CSV export round-trips through import") {
    TempDir tmp("csv");
    const RunResult result = run_demo(tmp.path / "run");
    const fs::path csv = tmp.path / "metrics.csv";
    export_csv(result.metrics, csv);
    const RunMetrics reloaded = import_csv(csv);
    CHECK(reloaded == result.metrics);
}

TEST_CASE("empty metrics export a header-only file") {
    TempDir tmp("emptycsv");
    const fs::path csv = tmp.path / "empty.csv";
    RunMetrics empty;
    export_csv(empty, csv);
    const std::string text = slurp(csv);
    CHECK(text.rfind("family,key,subkey,value_a,value_b\n", 0) == 0);
    // Only the header plus the two total rows.
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("the CSV schema rows match the documented families") {
    TempDir tmp("schema");
    const RunResult result = run_demo(tmp.path / "run");
    const fs::path csv = tmp.path / "metrics.csv";
    export_csv(result.metrics, csv);
    const std::string text = slurp(csv);
    CHECK(text.find("provenance,0,,") != std::string::npos);
    CHECK(text.find("tier_success,0,easy,") != std::string::npos);
    CHECK(text.find("total,runtime_minutes,,120,") != std::string::npos);
}

TEST_CASE("a creed-free directive is rejected by the monitor and never runs") {
    TempDir tmp("reject");
    Scenario scenario = load_scenario(kSource / "scenarios" / "demo.json");
    // Strip the creed marker from the scheduled directive.
    for (auto& task : scenario.tasks)
        if (task.id == "welcome-note") task.description = "Introduce yourself, no markers here.";
    const ScriptedBackend backend;
    AssetStore assets(kSource / "assets" / "prompts");
    RunnerConfig config;
    config.seed = 7;
    config.out_dir = tmp.path / "run";
    config.no_intrinsic = true;
    const RunResult result = run_scenario(scenario, backend, assets, config);

    CHECK(result.metrics.total_tasks == 0);
    bool saw_rejection = false;
    for (const auto& loaded : Journal::replay_load(result.journal_dir)) {
        for (const auto& [k, v] : loaded.entry.extra)
            if (k == "rejected" && v == "1") saw_rejection = true;
        CHECK(loaded.entry.kind != JournalKind::reward);
    }
    CHECK(saw_rejection);
}

TEST_CASE("resuming from the journal restores the self-model capabilities") {
    TempDir tmp("resume");
    const Scenario scenario = load_scenario(kSource / "scenarios" / "curriculum.json");
    const ScriptedBackend backend;
    AssetStore assets(kSource / "assets" / "prompts");
    RunnerConfig config;
    config.seed = 5;
    config.out_dir = tmp.path / "run";
    const RunResult result = run_scenario(scenario, backend, assets, config);

    const SelfModel restored = restore_self_model(
        SelfModel(scenario.creed, scenario.initial_beta), Journal::replay_load(result.journal_dir));
    REQUIRE(restored.capabilities().size() == 1);
    CHECK(restored.capabilities().front().name == "OCR API proficiency");

    // And the serialized property dictionary says the same.
    const std::string self_model_file = slurp(result.journal_dir / "self-model.md");
    CHECK(self_model_file.find("capability: OCR API proficiency") != std::string::npos);
}

namespace {

// Cognition for the broken-replay scenario: the "probe" plan relies on search
// results left behind by an earlier goal, so its cached trace breaks once
// another goal clears them. The recovery path (after the replay aborts) runs
// the search itself.
class ReplayProbeBackend : public Backend {
public:
    GenerationResponse generate(const GenerationRequest& req) const override {
        const PromptTags tags = PromptTags::extract(req.prompt);
        if (req.role == BackendRole::guardian) return {"sound", std::nullopt};
        if (req.role == BackendRole::goal_writer) return {"intrinsic objective [creed:1]", std::nullopt};
        if (req.role == BackendRole::reflector) return {"noted the outcome honestly. [creed:5]", std::nullopt};
        if (tags.has("phase=expand")) return {"plan: direct route | value: 0.9", 0.9};

        const std::string step = tags.get("step");
        const std::string tpl = tags.get("template");
        auto cmd = [](const std::string& line) {
            return GenerationResponse{"one step closer\n```action\n" + line + "\n```\n", 0.9};
        };
        if (tpl == "prep") {
            if (step == "1") return cmd("search(\"good\")");
            if (step == "2") return cmd("open(\"topResult\")");
            if (step == "3") return cmd("extract(\"overview\")");
        }
        if (tpl == "probe") {
            const bool recovering = req.prompt.find("Replaying the cached plan") != std::string::npos;
            if (recovering) {
                if (step == "1") return cmd("search(\"good\")");
                if (step == "2") return cmd("open(\"topResult\")");
                if (step == "3") return cmd("open(\"note-pad/new\")");
                if (step == "4") return cmd("type(\"probe-done\")");
            } else {
                if (step == "1") return cmd("open(\"topResult\")");
                if (step == "2") return cmd("open(\"note-pad/new\")");
                if (step == "3") return cmd("type(\"probe-done\")");
            }
        }
        if (tpl == "clear") {
            if (step == "1") return cmd("search(\"nothing-indexed\")");
            if (step == "2") return cmd("open(\"home\")");
            if (step == "3") return cmd("extract(\"sign\")");
        }
        return cmd("noop");
    }
    HealthStatus healthcheck() const override { return {true, "probe", 0.0}; }
};

const char* kReplayScenario = R"({
  "name": "broken-replay",
  "duration_minutes": 120,
  "initial_page": "home",
  "creed": ["Grow.", "Care.", "Stay honest.", "Share.", "Reflect."],
  "pages": [
    {"id": "home", "title": "Home", "text": "base",
     "elements": [{"name": "sign", "kind": "text", "content": "welcome"}]},
    {"id": "alpha", "title": "Alpha", "text": "article",
     "elements": [{"name": "overview", "kind": "text", "content": "alpha overview"}]},
    {"id": "note-pad/new", "title": "New note", "text": "note",
     "elements": [{"name": "sheet", "kind": "input"}]}
  ],
  "search_index": {"good": ["alpha"]},
  "tasks": [
    {"id": "prep", "description": "Warm up the search results. [creed:4]", "min_steps": 3,
     "predicate": {"kind": "extracted", "page": "alpha", "element": "overview"},
     "trigger": {"kind": "schedule", "at": 10}},
    {"id": "probe-a", "description": "Probe the top result. [creed:4]", "min_steps": 3,
     "plan_template": "probe",
     "predicate": {"kind": "note_contains", "text": "probe-done"},
     "trigger": {"kind": "schedule", "at": 30}},
    {"id": "wipe", "description": "Search for something unindexed. [creed:4]", "min_steps": 3,
     "plan_template": "clear",
     "predicate": {"kind": "extracted", "page": "home", "element": "sign"},
     "trigger": {"kind": "schedule", "at": 50}},
    {"id": "probe-b", "description": "Probe the top result again. [creed:4]", "min_steps": 3,
     "plan_template": "probe",
     "predicate": {"kind": "note_contains", "text": "probe-done"},
     "trigger": {"kind": "schedule", "at": 70}}
  ],
  "feed_tracks": [{"from": 0, "to": 120, "activity": "typing", "emotion": "calm", "idle_minutes": 0}]
})";

}  // namespace

TEST_CASE("a broken cached replay aborts reuse and falls back to fresh planning") {
    TempDir tmp("replay");
    const Scenario scenario = parse_scenario(kReplayScenario);
    const ReplayProbeBackend backend;
    AssetStore assets(kSource / "assets" / "prompts");
    RunnerConfig config;
    config.seed = 7;
    config.out_dir = tmp.path / "run";
    config.no_intrinsic = true;
    const RunResult result = run_scenario(scenario, backend, assets, config);

    // Goal adoption chose the cached route for probe-b, the settled reward
    // records the fresh fallback, and the episode still succeeds.
    std::string goal_plan, reward_plan;
    bool reward_success = false;
    bool saw_failed_action = false;
    std::string probe_b_goal;
    for (const auto& loaded : Journal::replay_load(result.journal_dir)) {
        const JournalEntry& e = loaded.entry;
        auto extra = [&](const std::string& key) {
            for (const auto& [k, v] : e.extra)
                if (k == key) return v;
            return std::string();
        };
        if (e.kind == JournalKind::goal && extra("task") == "probe-b") {
            probe_b_goal = e.goal_id;
            goal_plan = extra("plan");
        }
        if (e.kind == JournalKind::action && e.goal_id == probe_b_goal && extra("ok") == "0")
            saw_failed_action = true;
        if (e.kind == JournalKind::reward && e.goal_id == probe_b_goal) {
            reward_plan = extra("plan");
            reward_success = extra("success") == "1";
        }
    }
    CHECK(goal_plan == "cached");
    CHECK(saw_failed_action);       // the replay broke and emitted a failure percept
    CHECK(reward_plan == "fresh");  // reuse flag dropped on fallback
    CHECK(reward_success);
    CHECK(result.metrics.total_tasks == 4);
}

TEST_CASE("the policy-update hook observes episodes without changing the run") {
    struct Recorder : PolicyUpdateHook {
        std::vector<ReasoningTrace> traces;
        void on_episode_terminated(const ReasoningTrace& trace, double fused) override {
            (void)fused;
            traces.push_back(trace);
        }
    };

    TempDir tmp("hook");
    const Scenario scenario = load_scenario(kSource / "scenarios" / "demo.json");
    const ScriptedBackend backend;
    AssetStore assets(kSource / "assets" / "prompts");

    Recorder recorder;
    RunnerConfig with_hook;
    with_hook.seed = 7;
    with_hook.out_dir = tmp.path / "hooked";
    with_hook.update_hook = &recorder;
    const RunResult hooked = run_scenario(scenario, backend, assets, with_hook);

    RunnerConfig plain;
    plain.seed = 7;
    plain.out_dir = tmp.path / "plain";
    const RunResult unhooked = run_scenario(scenario, backend, assets, plain);

    CHECK(static_cast<int>(recorder.traces.size()) == hooked.metrics.total_tasks);
    // Observer only: no parameter updates happen through it, so the journals
    // are byte-identical either way.
    CHECK(hooked.metrics == unhooked.metrics);
    CHECK(slurp(hooked.journal_dir / "day-000.md") == slurp(unhooked.journal_dir / "day-000.md"));
}

TEST_CASE("memory records are persisted under the journal directory") {
    TempDir tmp("records");
    const RunResult result = run_demo(tmp.path / "run");
    int records = 0;
    for (const auto& entry : fs::directory_iterator(result.journal_dir / "records")) {
        ++records;
        const std::string text = slurp(entry.path());
        CHECK(text.rfind("---\n", 0) == 0);  // front-matter + body format
        CHECK(text.find("<!-- raw -->") != std::string::npos);
    }
    CHECK(records >= 1);
}

TEST_CASE("verifier decisions are reproducible from the action log alone") {
    // Independent soundness audit: for every settled goal in a full run,
    // re-drive exactly the journaled actions through a fresh environment and
    // require the verifier to reach the same verdict.
    TempDir tmp("soundness");
    const Scenario scenario = load_scenario(kSource / "scenarios" / "companion-36h.json");
    const ScriptedBackend backend;
    AssetStore assets(kSource / "assets" / "prompts");
    RunnerConfig config;
    config.seed = 7;
    config.out_dir = tmp.path / "run";
    const RunResult result = run_scenario(scenario, backend, assets, config);

    struct GoalTrace {
        std::string task;
        Minutes adopted = 0;
        std::vector<std::pair<Minutes, Command>> actions;
        std::optional<std::pair<Minutes, bool>> settled;  // reward time, success
    };
    std::map<std::string, GoalTrace> goals;
    for (const auto& loaded : Journal::replay_load(result.journal_dir)) {
        const JournalEntry& e = loaded.entry;
        auto extra = [&](const std::string& key) {
            for (const auto& [k, v] : e.extra)
                if (k == key) return v;
            return std::string();
        };
        if (e.kind == JournalKind::goal && extra("rejected").empty()) {
            goals[e.goal_id].task = extra("task");
            goals[e.goal_id].adopted = e.timestamp;
        } else if (e.kind == JournalKind::action) {
            const auto cmd = System2::parse_command_line(e.body.substr(0, e.body.find(" -> ")));
            REQUIRE_MESSAGE(cmd.has_value(), "unparseable action body: " << e.body);
            goals[e.goal_id].actions.emplace_back(e.timestamp, *cmd);
        } else if (e.kind == JournalKind::reward) {
            goals[e.goal_id].settled = {e.timestamp, extra("success") == "1"};
        }
    }

    const Env env(scenario);
    int audited = 0;
    for (const auto& [goal_id, trace] : goals) {
        if (trace.task.empty() || trace.task == "-" || !trace.settled) continue;
        EnvState state = env.reset(config.seed);
        state = env.arm_task(state, goal_id, trace.task, to_seconds(trace.adopted));
        state.now_seconds = to_seconds(trace.adopted);
        bool verified = false;
        auto absorb = [&](Env::StepResult&& r) {
            state = std::move(r.state);
            if (r.report && r.report->success) verified = true;
        };
        for (const auto& [at, cmd] : trace.actions) {
            absorb(env.advance_time(state, to_seconds(at)));
            absorb(env.step(state, cmd));
        }
        absorb(env.advance_time(state, to_seconds(trace.settled->first)));
        CHECK_MESSAGE(verified == trace.settled->second, goal_id << " (" << trace.task << ")");
        ++audited;
    }
    CHECK(audited >= 25);  // the 36h run settles well over two dozen verified goals
}

TEST_CASE("the full loop runs over the remote backend wire") {
    // An HTTP server fronting the scripted table: the remote run must match
    // the scripted run byte for byte.
    const ScriptedBackend scripted;
    httplib::Server server;
    server.Post("/generate", [&](const httplib::Request& req, httplib::Response& res) {
        const auto body = nlohmann::json::parse(req.body);
        GenerationRequest gen;
        const std::string role = body.at("role");
        gen.role = role == "planner"     ? BackendRole::planner
                   : role == "guardian"  ? BackendRole::guardian
                   : role == "reflector" ? BackendRole::reflector
                                         : BackendRole::goal_writer;
        gen.prompt = body.at("prompt");
        const GenerationResponse out = scripted.generate(gen);
        nlohmann::json j{{"text", out.text}};
        if (out.value) j["value"] = *out.value;
        res.set_content(j.dump(), "application/json");
    });
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("ok", "text/plain");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    TempDir tmp("remote");
    const Scenario scenario = load_scenario(kSource / "scenarios" / "demo.json");
    AssetStore assets(kSource / "assets" / "prompts");
    RunnerConfig config;
    config.seed = 7;
    config.out_dir = tmp.path / "remote";
    const RemoteBackend remote({"http://127.0.0.1:" + std::to_string(port), "", 5});
    const RunResult over_wire = run_scenario(scenario, remote, assets, config);

    config.out_dir = tmp.path / "local";
    const RunResult local = run_scenario(scenario, scripted, assets, config);

    server.stop();
    thread.join();

    CHECK(over_wire.metrics == local.metrics);
    CHECK(slurp(over_wire.journal_dir / "day-000.md") == slurp(local.journal_dir / "day-000.md"));
}
