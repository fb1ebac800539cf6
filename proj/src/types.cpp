#include "triad/types.hpp"

#include <sstream>

namespace triad {

std::string to_string(EventKind k) {
    switch (k) {
        case EventKind::percept: return "percept";
        case EventKind::reward: return "reward";
        case EventKind::verifier: return "verifier";
        case EventKind::feed: return "feed";
        case EventKind::directive: return "directive";
        case EventKind::reflection_due: return "reflection-due";
    }
    return "?";
}

std::string to_string(GoalOrigin o) {
    return o == GoalOrigin::extrinsic ? "extrinsic" : "intrinsic";
}

std::string to_string(Difficulty d) {
    switch (d) {
        case Difficulty::easy: return "easy";
        case Difficulty::medium: return "medium";
        case Difficulty::hard: return "hard";
        case Difficulty::unknown: return "unknown";
    }
    return "?";
}

std::string to_string(Emotion e) {
    switch (e) {
        case Emotion::calm: return "calm";
        case Emotion::stressed: return "stressed";
        case Emotion::neutral: return "neutral";
    }
    return "?";
}

std::string to_string(Activity a) {
    switch (a) {
        case Activity::idle: return "idle";
        case Activity::reading_docs: return "reading_docs";
        case Activity::typing: return "typing";
        case Activity::away: return "away";
    }
    return "?";
}

std::string to_string(Verb v) {
    switch (v) {
        case Verb::open: return "open";
        case Verb::click: return "click";
        case Verb::type: return "type";
        case Verb::wait: return "wait";
        case Verb::extract: return "extract";
        case Verb::search: return "search";
        case Verb::noop: return "noop";
    }
    return "?";
}

std::string to_string(PerceptSource s) {
    switch (s) {
        case PerceptSource::page: return "page";
        case PerceptSource::feed: return "feed";
        case PerceptSource::verifier: return "verifier";
    }
    return "?";
}

std::optional<Emotion> parse_emotion(const std::string& s) {
    if (s == "calm") return Emotion::calm;
    if (s == "stressed") return Emotion::stressed;
    if (s == "neutral") return Emotion::neutral;
    return std::nullopt;
}

std::optional<Activity> parse_activity(const std::string& s) {
    if (s == "idle") return Activity::idle;
    if (s == "reading_docs") return Activity::reading_docs;
    if (s == "typing") return Activity::typing;
    if (s == "away") return Activity::away;
    return std::nullopt;
}

std::optional<Verb> parse_verb(const std::string& s) {
    if (s == "open") return Verb::open;
    if (s == "click") return Verb::click;
    if (s == "type") return Verb::type;
    if (s == "wait") return Verb::wait;
    if (s == "extract") return Verb::extract;
    if (s == "search") return Verb::search;
    if (s == "noop") return Verb::noop;
    return std::nullopt;
}

std::optional<Difficulty> parse_difficulty(const std::string& s) {
    if (s == "easy") return Difficulty::easy;
    if (s == "medium") return Difficulty::medium;
    if (s == "hard") return Difficulty::hard;
    if (s == "unknown") return Difficulty::unknown;
    return std::nullopt;
}

std::optional<GoalOrigin> parse_origin(const std::string& s) {
    if (s == "extrinsic") return GoalOrigin::extrinsic;
    if (s == "intrinsic") return GoalOrigin::intrinsic;
    return std::nullopt;
}

Difficulty tier_for_steps(int min_steps) {
    if (min_steps <= 3) return Difficulty::easy;
    if (min_steps <= 8) return Difficulty::medium;
    return Difficulty::hard;
}

Command Command::open(std::string path) { return {Verb::open, std::move(path), 0}; }
Command Command::click(std::string selector) { return {Verb::click, std::move(selector), 0}; }
Command Command::type_text(std::string text) { return {Verb::type, std::move(text), 0}; }
Command Command::wait(Seconds seconds) { return {Verb::wait, "", seconds}; }
Command Command::extract(std::string selector) { return {Verb::extract, std::move(selector), 0}; }
Command Command::search(std::string query) { return {Verb::search, std::move(query), 0}; }
Command Command::noop() { return {Verb::noop, "", 0}; }

void Command::validate() const {
    switch (verb) {
        case Verb::wait:
            if (wait_seconds <= 0) throw WiringError("command: wait duration must be > 0");
            return;
        case Verb::open:
        case Verb::click:
        case Verb::extract:
            if (argument.empty())
                throw WiringError("command: " + to_string(verb) + " requires a non-empty selector/path");
            return;
        case Verb::search:
            if (argument.empty()) throw WiringError("command: search requires a non-empty query");
            return;
        case Verb::type:
        case Verb::noop:
            return;
    }
}

std::string Command::render() const {
    if (verb == Verb::noop) return "noop";
    if (verb == Verb::wait) return "wait(" + std::to_string(wait_seconds) + "s)";
    return to_string(verb) + "(\"" + argument + "\")";
}

std::string UserFeedEntry::to_json_line() const {
    std::ostringstream os;
    os << "{\"timestamp\": " << timestamp << ", \"emotion\": \"" << to_string(emotion)
       << "\", \"activity\": \"" << to_string(activity) << "\", \"idle_minutes\": " << idle_minutes
       << "}";
    return os.str();
}

}  // namespace triad
