#pragma once

#include "triad/assets.hpp"
#include "triad/backend.hpp"
#include "triad/journal.hpp"
#include "triad/kernel.hpp"
#include "triad/memory.hpp"
#include "triad/models.hpp"
#include "triad/reward.hpp"
#include "triad/sandbox_env.hpp"
#include "triad/scenario.hpp"
#include "triad/system1.hpp"
#include "triad/system2.hpp"
#include "triad/system3.hpp"
#include "triad/types.hpp"

#include <filesystem>
#include <map>
#include <vector>

namespace triad {

// ─── Metrics ────────────────────────────────────────────────────────────────

inline constexpr Minutes kSegmentMinutes = 360;  // 6 virtual hours per provenance bar

struct SegmentCounts {
    Minutes segment_start = 0;
    int extrinsic = 0;
    int intrinsic = 0;

    bool operator==(const SegmentCounts&) const = default;
};

struct TierCheckpoint {
    Minutes at = 0;
    Difficulty tier = Difficulty::easy;
    int successes = 0;  // first-attempt successes up to the checkpoint
    int attempts = 0;

    double rate() const { return attempts == 0 ? 0.0 : static_cast<double>(successes) / attempts; }
    bool operator==(const TierCheckpoint&) const = default;
};

struct RunMetrics {
    std::vector<SegmentCounts> segments;
    std::vector<TierCheckpoint> tier_success;
    std::map<std::string, std::vector<int>> recurring_steps;  // template -> steps per episode
    Minutes total_runtime = 0;
    int total_tasks = 0;

    bool operator==(const RunMetrics&) const = default;
};

struct MetricsLayout {
    Minutes duration = 0;
    std::vector<Minutes> checkpoints;  // default: 0/12/24/36 virtual hours, clipped

    static MetricsLayout for_duration(Minutes duration);
};

// Metrics recomputed purely from journal entries, so every figure is
// auditable post hoc. Equals the live metrics of the run that wrote them.
RunMetrics compute_metrics(const std::filesystem::path& journal_dir, const MetricsLayout& layout);

// CSV schema (stable ordering, header always present):
//   family,key,subkey,value_a,value_b
//   provenance,<segment_start>,,<extrinsic>,<intrinsic>
//   tier_success,<checkpoint_min>,<tier>,<successes>,<attempts>
//   recurring,<template>,<episode_index>,<steps>,
//   total,runtime_minutes,,<minutes>,
//   total,tasks,,<count>,
void export_csv(const RunMetrics& metrics, const std::filesystem::path& path);
RunMetrics import_csv(const std::filesystem::path& path);

// ─── Runner ─────────────────────────────────────────────────────────────────

struct RunnerConfig {
    std::uint64_t seed = 7;
    Minutes duration = 0;  // 0 = scenario duration
    bool no_intrinsic = false;
    std::filesystem::path out_dir;
    SearchBudget budget{32, 3, 0.8};
    double relevance_threshold = 0.75;
    std::size_t retrieval_k = 5;
    int max_episode_commands = 32;
    Minutes intrinsic_cooldown = 30;
    std::size_t percept_window = 16;
    PolicyUpdateHook* update_hook = nullptr;  // observer only, never required
};

struct RunResult {
    RunMetrics metrics;
    std::filesystem::path journal_dir;
};

struct FirstAttemptRecord {
    Minutes at = 0;
    Difficulty tier = Difficulty::easy;
    bool success = false;
};

// Executes one scenario end to end through the full cognitive loop.
// Deterministic under the scripted backend: (scenario, seed, flags) fixes
// every journal byte. Invariant violations abort with a diagnostic naming
// the module.
class Runner {
public:
    Runner(Scenario scenario, const Backend& backend, const AssetStore& assets, RunnerConfig config);

    RunResult run();

private:
    struct ActiveEpisode {
        Goal goal;
        MetaDecision decision;
        ThoughtTree tree;
        int selected_node = -1;
        std::string plan_seed;
        bool cached = false;
        bool reuse_aborted = false;
        std::string signature;
        ScratchPad pad;
        std::vector<Command> cached_commands;
        std::size_t cached_index = 0;
        int step_index = 1;
        int consecutive_parse_errors = 0;
        std::vector<ActionRecord> actions;
        std::vector<Command> commands;
        std::vector<std::string> observations;
        std::vector<std::string> episode_pages;
        std::set<std::string> prev_visited;
        std::map<std::string, double> skill_rate_before;
        bool resolving = false;
        SalientFeed feed_at_adoption;
        std::optional<VerifierReport> report;
        std::optional<EpisodeLog> log;
        std::optional<HybridReward> hybrid;
    };

    void tick();
    void drain_events();
    void handle(const EventEnvelope& ev);
    void handle_feed(const FeedPayload& payload, Minutes at);
    void handle_directive(const DirectivePayload& payload);
    void handle_verifier(const VerifierPayload& payload);
    void handle_reward(const RewardPayload& payload);
    void handle_reflection_due(const ReflectionDuePayload& payload);

    void maybe_adopt_goal();
    void adopt(Goal goal);
    void step_episode();
    bool execute_command(const Command& command);
    void finish_failed_episode(const std::string& why);

    void record_task_metrics(const Goal& goal, bool success, int steps, Minutes at, bool first);
    void journal_goal(const Goal& goal, bool cached, const std::string& note);
    SalientFeed current_feed() const;
    std::string command_tags(const ActiveEpisode& ep) const;

    Scenario scenario_;
    const Backend* backend_;
    const AssetStore* assets_;
    RunnerConfig config_;

    Env env_;
    VirtualClock clock_;
    EventBroker broker_;
    Journal journal_;
    EpisodicStore memory_;
    TaskCache task_cache_;
    SelfModel self_;
    UserModel user_;
    System1 sys1_;
    System2 sys2_;
    System3 sys3_;

    EnvState env_state_;
    PerceptWindow window_;
    std::vector<DirectivePayload> pending_directives_;
    std::optional<ActiveEpisode> episode_;
    std::uint64_t goal_counter_ = 0;
    Minutes last_event_timestamp_ = 0;
    std::set<std::string> attempted_tasks_;

    MetricsLayout layout_;
    std::vector<JournalEntry> day_entries_;  // current virtual day, for the critique

    // Live accumulators, compared against the journal recomputation at the
    // end of the run (audit path).
    std::vector<std::tuple<Minutes, GoalOrigin>> live_completions_;
    std::vector<FirstAttemptRecord> live_first_attempts_;
    std::map<std::string, std::vector<int>> live_recurring_;
};

// Convenience wrapper used by the CLI.
RunResult run_scenario(const Scenario& scenario, const Backend& backend, const AssetStore& assets,
                       const RunnerConfig& config);

}  // namespace triad
