#pragma once

#include "triad/kernel.hpp"
#include "triad/scenario.hpp"
#include "triad/types.hpp"

#include <map>
#include <memory>
#include <set>

namespace triad {

// ─── Deterministic RNG ──────────────────────────────────────────────────────

// splitmix64: tiny, seedable, byte-stable across platforms. Only the feed
// fill draws from it.
struct Rng {
    std::uint64_t state = 0;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next_below(std::uint64_t bound) { return next() % bound; }

    bool operator==(const Rng&) const = default;
};

// ─── Observations ───────────────────────────────────────────────────────────

struct Observation {
    Seconds at = 0;
    std::string page_id;
    std::string page_title;
    std::string page_text;
    std::vector<std::string> element_names;
    std::vector<UserFeedEntry> new_feed;  // unread entries, delivered once
    bool action_ok = true;
    std::string action_error;  // recoverable failure text, e.g. "element not found"
    std::string extracted_name;
    std::string extracted_content;
    std::vector<std::string> search_results;
};

// ─── Environment state ──────────────────────────────────────────────────────

struct PendingTimer {
    Seconds expires_at = 0;
};

// Per-attempt verification context. Predicates are evaluated against what
// happened since the attempt was armed, so recurring tasks re-verify cleanly.
struct TaskAttempt {
    std::string goal_id;
    std::string task_id;
    Seconds adopted_at = 0;
    std::set<std::string> pages_visited;
    std::set<std::string> clicked;                       // "page#element"
    std::map<std::string, Seconds> activity_started_at;  // "page#element" -> click time
    std::set<std::string> extracted;                     // "page#element"
    std::string typed_notes;
};

struct EnvState {
    std::string current_page;
    std::shared_ptr<const PageGraph> page_graph;  // immutable during a run
    Seconds now_seconds = 0;
    std::vector<PendingTimer> pending_timers;
    std::vector<UserFeedEntry> feed_log;  // append-only
    std::size_t feed_read_cursor = 0;
    Rng rng_state;
    std::vector<std::string> last_search_results;
    std::optional<TaskAttempt> attempt;
    std::string note_pad;
    std::map<std::string, std::string> page_inputs;

    bool timer_pending() const {
        for (const auto& t : pending_timers)
            if (t.expires_at > now_seconds) return true;
        return false;
    }
};

// ─── Environment ────────────────────────────────────────────────────────────

// Offline browser-sandbox world. The scenario (page graph, tasks, feed
// tracks) is immutable; every transition is a pure function of
// (state, action, rng_state), so replays are fully determined by
// (scenario, seed, action sequence).
class Env {
public:
    explicit Env(Scenario scenario);

    const Scenario& scenario() const { return scenario_; }

    // Deterministic initial state: feed log empty, clock at 0.
    EnvState reset(std::uint64_t seed) const;

    struct StepResult {
        EnvState state;
        Observation obs;
        std::optional<VerifierReport> report;
    };

    // Applies one primitive action. Unknown selectors yield recoverable
    // failure observations, never faults. A verifier report is emitted iff
    // the armed attempt's predicate transitions to satisfied.
    StepResult step(const EnvState& state, const Command& action) const;

    // Appends exactly one feed entry drawn from the scripted track (seeded
    // fill for unspecified fields). Errors off the five-minute cadence.
    EnvState feed_tick(const EnvState& state, const VirtualClock& clock) const;

    // Read-only projection plus feed cursor advance in the returned state.
    std::pair<Observation, EnvState> observe(const EnvState& state) const;

    // Moves virtual time forward, expiring timers and re-checking the armed
    // attempt (activity predicates only mature with the clock).
    StepResult advance_time(const EnvState& state, Seconds now_seconds) const;

    // Arms the verifier for one attempt of `task_id` under `goal_id`.
    EnvState arm_task(const EnvState& state, const std::string& goal_id, const std::string& task_id,
                      Seconds now) const;

    // Cancels the armed attempt without a report (the caller reports failure).
    EnvState disarm(const EnvState& state) const;

    EnvState mark_feed_read(const EnvState& state) const;

    // Independent predicate evaluation over an attempt snapshot; exposed so
    // verifier soundness can be audited from outside.
    static bool predicate_holds(const Predicate& p, const TaskAttempt& attempt, Seconds now);

private:
    Observation project(const EnvState& state) const;
    StepResult settle(EnvState state, Observation obs) const;
    const FeedTrackEntry* match_track(Minutes now) const;

    Scenario scenario_;
    std::shared_ptr<const PageGraph> graph_;
};

}  // namespace triad
