#pragma once

#include "triad/types.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace triad {

// ─── Page graph ─────────────────────────────────────────────────────────────

enum class ElementKind { button, link, input, text };

struct PageElement {
    std::string name;
    ElementKind kind = ElementKind::text;
    std::string target;   // destination page for buttons/links, may be empty
    std::string content;  // extractable text
};

struct Page {
    std::string id;
    std::string title;
    std::string text;
    std::vector<PageElement> elements;

    const PageElement* find_element(const std::string& name) const;
};

struct PageGraph {
    std::map<std::string, Page> pages;

    const Page* find(const std::string& id) const;
};

// ─── Task predicates ────────────────────────────────────────────────────────

// Declarative condition over the sandbox state, evaluated per task attempt.
struct Predicate {
    enum class Kind { page_visited, element_clicked, activity_for, note_contains, extracted, all_of };

    Kind kind = Kind::page_visited;
    std::string page;
    std::string element;
    std::string text;
    Seconds seconds = 0;
    std::vector<Predicate> children;  // all_of
};

struct TaskTrigger {
    enum class Kind { schedule, feed_rule, generated };

    Kind kind = Kind::generated;
    Minutes at = 0;    // schedule
    std::string rule;  // feed_rule: stress_over_45 | reading_docs
};

struct TaskSpec {
    std::string id;
    std::string description;  // carries creed markers for extrinsic directives
    int min_steps = 1;
    std::string skill;          // competence exercised; keys failure counters
    std::string plan_template;  // cognition template that solves this task (defaults to id)
    std::string grants_capability;  // capability earned on verified success
    Predicate predicate;
    TaskTrigger trigger;

    Difficulty tier() const { return tier_for_steps(min_steps); }
};

// ─── Feed tracks ────────────────────────────────────────────────────────────

// Scripted slice of the user-behaviour stream. Point entries (`at`) beat
// interval entries (`from`..`to`); unspecified fields are filled from the
// seeded generator at tick time.
struct FeedTrackEntry {
    std::optional<Minutes> at;
    std::optional<Minutes> from;
    std::optional<Minutes> to;
    std::optional<Emotion> emotion;
    std::optional<Activity> activity;
    std::optional<int> idle_minutes;
    std::optional<int> idle_minutes_start;  // intervals: idle grows from this value
};

struct CuriosityTarget {
    std::string page;
    std::string task_id;
};

// ─── Scenario descriptor ────────────────────────────────────────────────────

struct Scenario {
    std::string name;
    Minutes duration_minutes = 0;
    std::string initial_page;
    double initial_beta = 0.5;
    std::array<std::string, 5> creed;
    PageGraph pages;
    std::map<std::string, std::vector<std::string>> search_index;  // lowercased query -> page ids
    std::vector<TaskSpec> tasks;
    std::vector<FeedTrackEntry> feed_tracks;
    std::vector<CuriosityTarget> curiosity_targets;

    const TaskSpec* find_task(const std::string& id) const;
};

// Parses and validates a scenario descriptor. Throws ScenarioError naming the
// offending field on any schema violation.
Scenario load_scenario(const std::filesystem::path& file);
Scenario parse_scenario(const std::string& json_text, const std::string& origin = "<inline>");

}  // namespace triad
