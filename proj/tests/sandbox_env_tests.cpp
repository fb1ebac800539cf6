#include "doctest.h"

#include "triad/sandbox_env.hpp"

#include <filesystem>
#include <random>

using namespace triad;

namespace {

Scenario companion_scenario() {
    return load_scenario(std::filesystem::path(TRIAD_SOURCE_DIR) / "scenarios" / "companion-36h.json");
}

// Drives the clock to `target` minutes, ticking feeds on cadence.
EnvState roll_forward(const Env& env, EnvState state, VirtualClock& clock, Minutes target) {
    while (clock.now() < target) {
        clock.advance();
        if (VirtualClock::feed_due(clock.now())) state = env.feed_tick(state, clock);
        state = env.advance_time(state, to_seconds(clock.now())).state;
    }
    return state;
}

}  // namespace

TEST_CASE("reset is deterministic and starts cold") {
    const Env env(companion_scenario());
    const EnvState a = env.reset(42);
    const EnvState b = env.reset(42);
    CHECK(a.current_page == "home");
    CHECK(a.feed_log.empty());
    CHECK(a.now_seconds == 0);
    CHECK(a.current_page == b.current_page);
    CHECK(a.rng_state == b.rng_state);
    CHECK(a.feed_log == b.feed_log);
}

TEST_CASE("malformed scenarios fail validation before reaching the env") {
    CHECK_THROWS_AS(parse_scenario(R"({"name": "x"})"), ScenarioError);
}

TEST_CASE("stress action sequence satisfies the activity verifier") {
    const Env env(companion_scenario());
    EnvState state = env.reset(1);
    state = env.arm_task(state, "g-test", "stress-care", 0);

    auto opened = env.step(state, Command::open("wellness/breathing-game"));
    CHECK(opened.obs.action_ok);
    CHECK_FALSE(opened.report);

    auto clicked = env.step(opened.state, Command::click("#start-btn"));
    CHECK(clicked.obs.action_ok);
    CHECK_FALSE(clicked.report);

    auto waited = env.step(clicked.state, Command::wait(180));
    CHECK(waited.obs.action_ok);
    CHECK(waited.state.timer_pending());

    // Three virtual minutes later the 180 s activity requirement holds.
    auto matured = env.advance_time(waited.state, 180);
    REQUIRE(matured.report);
    CHECK(matured.report->task_id == "stress-care");
    CHECK(matured.report->success);
    CHECK_FALSE(matured.report->message.empty());
    CHECK_FALSE(matured.state.attempt.has_value());  // one report per attempt
}

TEST_CASE("clicking an absent element is a recoverable failure, not a crash") {
    const Env env(companion_scenario());
    EnvState state = env.reset(1);
    auto result = env.step(state, Command::click("#missing"));
    CHECK_FALSE(result.obs.action_ok);
    CHECK(result.obs.action_error.find("element not found") != std::string::npos);
    CHECK(result.state.current_page == state.current_page);
}

TEST_CASE("search surfaces the indexed top result") {
    const Env env(companion_scenario());
    EnvState state = env.reset(1);
    auto searched = env.step(state, Command::search("Reinforcement learning"));
    REQUIRE_FALSE(searched.state.last_search_results.empty());
    CHECK(searched.state.last_search_results.front() == "arxiv/rl-survey");
    CHECK(searched.obs.search_results == searched.state.last_search_results);

    auto opened = env.step(searched.state, Command::open("topResult"));
    CHECK(opened.state.current_page == "arxiv/rl-survey");
    auto extracted = env.step(opened.state, Command::extract("abstract"));
    CHECK(extracted.obs.extracted_content.find("reward feedback") != std::string::npos);
}

TEST_CASE("feed tick reproduces the scripted stress entry") {
    const Env env(companion_scenario());
    VirtualClock clock;
    EnvState state = roll_forward(env, env.reset(7), clock, 860);
    REQUIRE_FALSE(state.feed_log.empty());
    const UserFeedEntry& entry = state.feed_log.back();
    CHECK(entry.timestamp == 860);
    CHECK(entry.emotion == Emotion::stressed);
    CHECK(entry.idle_minutes == 60);
}

TEST_CASE("feed tick reproduces the reading_docs entry at 545") {
    const Env env(companion_scenario());
    VirtualClock clock;
    EnvState state = roll_forward(env, env.reset(7), clock, 545);
    CHECK(state.feed_log.back().activity == Activity::reading_docs);
}

TEST_CASE("uncovered minutes fall back to the default fill rule") {
    Scenario scn = parse_scenario(R"({
        "name": "empty-track", "duration_minutes": 30, "initial_page": "home",
        "creed": ["a.","b.","c.","d.","e."],
        "pages": [{"id": "home"}]})");
    const Env env(scn);
    VirtualClock clock;
    EnvState state = roll_forward(env, env.reset(3), clock, 10);
    REQUIRE(state.feed_log.size() == 2);
    CHECK(state.feed_log[0].emotion == Emotion::neutral);
    CHECK(state.feed_log[0].activity == Activity::idle);
    CHECK(state.feed_log[0].idle_minutes == 5);
    CHECK(state.feed_log[1].idle_minutes == 10);  // previous + 5
}

TEST_CASE("feed spacing is exactly five minutes across a long run") {
    const Env env(companion_scenario());
    VirtualClock clock;
    EnvState state = roll_forward(env, env.reset(11), clock, 600);
    REQUIRE(state.feed_log.size() == 120);
    for (std::size_t i = 1; i < state.feed_log.size(); ++i)
        CHECK(state.feed_log[i].timestamp - state.feed_log[i - 1].timestamp == 5);
}

TEST_CASE("off-cadence feed ticks are rejected") {
    const Env env(companion_scenario());
    VirtualClock clock;
    EventBroker broker(clock);
    advance_clock(clock, broker);  // now = 1
    CHECK_THROWS_AS(env.feed_tick(env.reset(1), clock), CadenceError);
}

TEST_CASE("observe delivers each feed entry exactly once") {
    const Env env(companion_scenario());
    VirtualClock clock;
    EnvState state = env.reset(5);
    std::map<Minutes, int> deliveries;
    while (clock.now() < 120) {
        clock.advance();
        if (VirtualClock::feed_due(clock.now())) state = env.feed_tick(state, clock);
        auto [obs, next] = env.observe(state);
        state = next;
        for (const auto& e : obs.new_feed) deliveries[e.timestamp]++;
    }
    REQUIRE(deliveries.size() == 24);
    for (const auto& [ts, count] : deliveries) CHECK(count == 1);
}

TEST_CASE("verifier success is sound against independent predicate evaluation") {
    const Env env(companion_scenario());
    EnvState state = env.reset(2);
    state = env.arm_task(state, "g-x", "welcome-note", 0);
    const TaskSpec* task = env.scenario().find_task("welcome-note");
    REQUIRE(task);

    auto opened = env.step(state, Command::open("note-pad/new"));
    CHECK_FALSE(opened.report);
    CHECK_FALSE(Env::predicate_holds(task->predicate, *opened.state.attempt, 0));

    const TaskAttempt attempt_before = *opened.state.attempt;
    auto typed = env.step(opened.state, Command::type_text("I am your desk companion."));
    REQUIRE(typed.report);
    CHECK(typed.report->success);

    // Re-evaluate from the attempt snapshot the report was issued for.
    TaskAttempt replay = attempt_before;
    replay.typed_notes += "I am your desk companion.\n";
    CHECK(Env::predicate_holds(task->predicate, replay, 0));
}

TEST_CASE("replay determinism: same scenario, seed and actions, same stream") {
    const Env env(companion_scenario());
    auto run_once = [&] {
        VirtualClock clock;
        EnvState state = env.reset(9);
        std::string digest;
        while (clock.now() < 200) {
            clock.advance();
            if (VirtualClock::feed_due(clock.now())) state = env.feed_tick(state, clock);
            state = env.advance_time(state, to_seconds(clock.now())).state;
            auto stepped = env.step(state, Command::open(clock.now() % 2 ? "search" : "home"));
            state = stepped.state;
            digest += stepped.obs.page_id + "|";
            for (const auto& e : state.feed_log.empty()
                                     ? std::vector<UserFeedEntry>{}
                                     : std::vector<UserFeedEntry>{state.feed_log.back()})
                digest += e.to_json_line();
        }
        return digest;
    };
    CHECK(run_once() == run_once());
}

TEST_CASE("random command storms never fault and keep the state consistent") {
    const Env env(companion_scenario());
    std::vector<std::string> page_ids;
    for (const auto& [id, page] : env.scenario().pages.pages) page_ids.push_back(id);

    std::mt19937_64 rng(2718);
    for (int trial = 0; trial < 30; ++trial) {
        EnvState state = env.reset(trial);
        for (int i = 0; i < 100; ++i) {
            Command cmd;
            switch (rng() % 7) {
                case 0: cmd = Command::open(rng() % 2 ? page_ids[rng() % page_ids.size()] : "ghost"); break;
                case 1: cmd = Command::click(rng() % 2 ? "#start-btn" : "#missing"); break;
                case 2: cmd = Command::type_text("x"); break;
                case 3: cmd = Command::wait(1 + static_cast<Seconds>(rng() % 300)); break;
                case 4: cmd = Command::extract(rng() % 2 ? "overview" : "nothing"); break;
                case 5: cmd = Command::search(rng() % 2 ? "good" : "zzz"); break;
                default: cmd = Command::noop(); break;
            }
            auto result = env.step(state, cmd);
            state = std::move(result.state);
            CHECK(env.scenario().pages.find(state.current_page) != nullptr);
            CHECK_FALSE(result.report.has_value());  // nothing armed, nothing verified
        }
    }
}

TEST_CASE("arm_task rejects unknown tasks and double arming") {
    const Env env(companion_scenario());
    EnvState state = env.reset(1);
    CHECK_THROWS_AS(env.arm_task(state, "g", "no-such-task", 0), WiringError);
    state = env.arm_task(state, "g", "welcome-note", 0);
    CHECK_THROWS_AS(env.arm_task(state, "g2", "stress-care", 0), WiringError);
    state = env.disarm(state);
    CHECK_FALSE(state.attempt.has_value());
}
