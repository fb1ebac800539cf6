#pragma once

#include "triad/types.hpp"

#include <atomic>
#include <cstdint>
#include <mutex>
#include <variant>

namespace triad {

// ─── Virtual clock ──────────────────────────────────────────────────────────

// Virtual-minute clock driving the executive loop. Monotone, advanced by
// exactly one tick per loop iteration; wall-clock time never enters here.
class VirtualClock {
public:
    explicit VirtualClock(Minutes tick_size = 1) : tick_size_(tick_size) {
        if (tick_size < 1) throw WiringError("kernel: tick_size must be >= 1");
    }

    Minutes now() const { return now_.load(std::memory_order_acquire); }
    Minutes tick_size() const { return tick_size_; }

    Minutes advance() {
        return now_.fetch_add(tick_size_, std::memory_order_acq_rel) + tick_size_;
    }

    // The synthetic user feed fires on every fifth virtual minute.
    static bool feed_due(Minutes now) { return now > 0 && now % kFeedCadenceMinutes == 0; }

private:
    std::atomic<Minutes> now_{0};
    Minutes tick_size_;
};

// ─── Event envelopes ────────────────────────────────────────────────────────

struct FeedPayload {
    UserFeedEntry entry;
};
struct DirectivePayload {
    std::string task_id;
    std::string text;  // user-issued directive text, carries creed markers
};
struct PerceptPayload {
    PerceptEvent percept;
};
struct VerifierPayload {
    VerifierReport report;
    std::string goal_id;
};
struct RewardPayload {
    ExtrinsicReward reward;
    std::string goal_id;
};
struct ReflectionDuePayload {
    std::string goal_id;
    std::string reason;
};

using EventPayload = std::variant<PerceptPayload, RewardPayload, VerifierPayload, FeedPayload,
                                  DirectivePayload, ReflectionDuePayload>;

EventKind kind_of(const EventPayload& payload);

// Urgency bands, lower is more urgent: verifier=0, reward=1, feed=2,
// percept=3, directive=4, reflection-due=5.
int priority_band(EventKind kind);

struct EventEnvelope {
    std::uint64_t id = 0;  // unique, strictly increasing in publish order
    Minutes timestamp = 0;
    EventKind kind = EventKind::percept;
    int priority = 0;  // in [0, 9]
    EventPayload payload;
};

// ─── Event broker ───────────────────────────────────────────────────────────

// Priority queue keyed by (priority, id). Safe for concurrent producers with
// a single consumer; the dequeue order of any published multiset equals the
// lexicographic sort by (priority, id).
class EventBroker {
public:
    explicit EventBroker(const VirtualClock& clock) : clock_(&clock) {}

    // Enqueues and returns the assigned envelope id. Rejects events whose
    // timestamp is in the future of the clock (scenario bug).
    std::uint64_t publish(EventPayload payload, Minutes timestamp);

    // Pops the minimum (priority, id) element; empty when the queue is empty.
    std::optional<EventEnvelope> next_event();

    bool empty() const;
    std::size_t size() const;
    std::vector<std::uint64_t> pending_ids() const;

private:
    const VirtualClock* clock_;
    mutable std::mutex mu_;
    std::uint64_t next_id_ = 1;
    std::vector<EventEnvelope> heap_;  // min-heap on (priority, id)
};

// Advances the clock by one tick. Errors if events are still due: draining
// before advancing is what keeps replays deterministic.
Minutes advance_clock(VirtualClock& clock, const EventBroker& broker);

// ─── Executive context ──────────────────────────────────────────────────────

// Snapshot handed to the executive monitor on every decision (the reasoning
// context: clock, pending work, active goal, recent percepts, current beta).
struct ExecutiveContext {
    Minutes now = 0;
    std::vector<std::uint64_t> pending_event_ids;
    std::optional<Goal> active_goal;
    PerceptWindow percepts{16};
    double beta = 0.5;
};

}  // namespace triad
