#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace triad {

using Minutes = std::int64_t;  // virtual minutes since scenario epoch
using Seconds = std::int64_t;  // virtual seconds since scenario epoch

inline constexpr Seconds kSecondsPerMinute = 60;
inline constexpr Minutes kMinutesPerDay = 1440;
inline constexpr Minutes kFeedCadenceMinutes = 5;

inline constexpr Seconds to_seconds(Minutes m) { return m * kSecondsPerMinute; }

// ─── Errors ─────────────────────────────────────────────────────────────────

// Scenario file failed schema validation; message names the offending field.
struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An event was published with a timestamp ahead of the virtual clock.
struct FutureTimestampError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// feed_tick invoked off the five-minute cadence.
struct CadenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Internal wiring bug (mismatched ids, events left pending, broken invariant).
// Always names the module that detected it.
struct WiringError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct JournalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BackendUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ─── Enums ──────────────────────────────────────────────────────────────────

enum class EventKind { percept, reward, verifier, feed, directive, reflection_due };
enum class GoalOrigin { extrinsic, intrinsic };
enum class Difficulty { easy, medium, hard, unknown };
enum class Emotion { calm, stressed, neutral };
enum class Activity { idle, reading_docs, typing, away };
enum class Verb { open, click, type, wait, extract, search, noop };
enum class PerceptSource { page, feed, verifier };

std::string to_string(EventKind k);
std::string to_string(GoalOrigin o);
std::string to_string(Difficulty d);
std::string to_string(Emotion e);
std::string to_string(Activity a);
std::string to_string(Verb v);
std::string to_string(PerceptSource s);

std::optional<Emotion> parse_emotion(const std::string& s);
std::optional<Activity> parse_activity(const std::string& s);
std::optional<Verb> parse_verb(const std::string& s);
std::optional<Difficulty> parse_difficulty(const std::string& s);
std::optional<GoalOrigin> parse_origin(const std::string& s);

// Difficulty banding by minimum solving steps: 1-3 easy, 4-8 medium, >8 hard.
Difficulty tier_for_steps(int min_steps);

// ─── Commands ───────────────────────────────────────────────────────────────

// A machine-executable command produced by the reasoner and consumed by the
// actuator. `argument` carries the selector/path/text/query; `wait_seconds`
// is set only for wait.
struct Command {
    Verb verb = Verb::noop;
    std::string argument;
    Seconds wait_seconds = 0;

    static Command open(std::string path);
    static Command click(std::string selector);
    static Command type_text(std::string text);
    static Command wait(Seconds seconds);
    static Command extract(std::string selector);
    static Command search(std::string query);
    static Command noop();

    // Throws WiringError on malformed commands (empty selector, wait <= 0).
    void validate() const;

    // Canonical textual form, e.g. open("search") or wait(180s).
    std::string render() const;

    bool operator==(const Command&) const = default;
};

// ─── Goals ──────────────────────────────────────────────────────────────────

struct Goal {
    std::string id;
    std::string text;  // natural language, carries [creed:N] markers
    GoalOrigin origin = GoalOrigin::intrinsic;
    std::set<int> creed_refs;
    Difficulty difficulty = Difficulty::unknown;
    std::optional<std::string> parent_goal;

    // Rule/template that produced the goal; keys trace signatures and the
    // scripted cognition tables.
    std::string template_id;
    // Sandbox task whose verifier settles this goal; empty for agent-internal
    // goals (housekeeping).
    std::string task_id;
    // Free-form parameter of the template (curiosity target page, skill key).
    std::string subject;
    Seconds adopted_at = 0;
};

// ─── Feed & verifier records ────────────────────────────────────────────────

// One entry of the synthetic user-behaviour stream. Serialized as a JSON
// object with fields timestamp, emotion, activity, idle_minutes.
struct UserFeedEntry {
    Minutes timestamp = 0;
    Emotion emotion = Emotion::neutral;
    Activity activity = Activity::idle;
    int idle_minutes = 0;

    std::string to_json_line() const;
    bool operator==(const UserFeedEntry&) const = default;
};

struct VerifierReport {
    std::string task_id;
    bool success = false;
    std::string message;  // one-sentence statement, never empty
    Seconds at = 0;
};

// ─── System 1 records ───────────────────────────────────────────────────────

struct PerceptEvent {
    Seconds timestamp = 0;
    PerceptSource source = PerceptSource::page;
    std::vector<std::string> tags;  // typed "key:value" tags
    std::string text;
};

struct ExtrinsicReward {
    bool success = false;
    Seconds latency = 0;  // virtual-seconds from goal adoption to verifier report
    int cost = 0;         // primitive actions executed
};

// One line of the append-only action log kept by the actuator.
struct ActionRecord {
    Seconds at = 0;
    std::string goal_id;
    Command command;
    bool ok = true;
    std::string note;
};

// ─── Bounded percept window ─────────────────────────────────────────────────

class PerceptWindow {
public:
    explicit PerceptWindow(std::size_t capacity = 16) : capacity_(capacity) {}

    void push(PerceptEvent ev) {
        items_.push_back(std::move(ev));
        while (items_.size() > capacity_) items_.pop_front();
    }

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return items_.empty(); }
    const std::deque<PerceptEvent>& items() const { return items_; }
    void clear() { items_.clear(); }

private:
    std::size_t capacity_;
    std::deque<PerceptEvent> items_;
};

}  // namespace triad
