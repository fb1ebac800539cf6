#include "triad/sandbox_env.hpp"

#include <algorithm>

namespace triad {

namespace {

std::string element_key(const std::string& page, const std::string& element) {
    return page + "#" + element;
}

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

Env::Env(Scenario scenario)
    : scenario_(std::move(scenario)), graph_(std::make_shared<const PageGraph>(scenario_.pages)) {}

EnvState Env::reset(std::uint64_t seed) const {
    EnvState s;
    s.current_page = scenario_.initial_page;
    s.page_graph = graph_;
    s.now_seconds = 0;
    s.rng_state.state = seed * 0x2545f4914f6cdd1dULL + 0x9e3779b97f4a7c15ULL;
    return s;
}

Observation Env::project(const EnvState& state) const {
    Observation obs;
    obs.at = state.now_seconds;
    const Page* page = graph_->find(state.current_page);
    if (page) {
        obs.page_id = page->id;
        obs.page_title = page->title;
        obs.page_text = page->text;
        for (const auto& el : page->elements) obs.element_names.push_back(el.name);
    }
    for (std::size_t i = state.feed_read_cursor; i < state.feed_log.size(); ++i)
        obs.new_feed.push_back(state.feed_log[i]);
    obs.search_results = state.last_search_results;
    return obs;
}

bool Env::predicate_holds(const Predicate& p, const TaskAttempt& attempt, Seconds now) {
    switch (p.kind) {
        case Predicate::Kind::page_visited:
            return attempt.pages_visited.count(p.page) > 0;
        case Predicate::Kind::element_clicked:
            return attempt.clicked.count(element_key(p.page, p.element)) > 0;
        case Predicate::Kind::activity_for: {
            auto it = attempt.activity_started_at.find(element_key(p.page, p.element));
            if (it == attempt.activity_started_at.end()) return false;
            return now - it->second >= p.seconds;
        }
        case Predicate::Kind::note_contains:
            return attempt.typed_notes.find(p.text) != std::string::npos;
        case Predicate::Kind::extracted:
            return attempt.extracted.count(element_key(p.page, p.element)) > 0;
        case Predicate::Kind::all_of:
            for (const auto& c : p.children)
                if (!predicate_holds(c, attempt, now)) return false;
            return true;
    }
    return false;
}

Env::StepResult Env::settle(EnvState state, Observation obs) const {
    StepResult out;
    if (state.attempt) {
        const TaskSpec* task = scenario_.find_task(state.attempt->task_id);
        if (!task) throw WiringError("sandbox-env: armed attempt references unknown task '" +
                                     state.attempt->task_id + "'");
        if (predicate_holds(task->predicate, *state.attempt, state.now_seconds)) {
            VerifierReport report;
            report.task_id = task->id;
            report.success = true;
            report.at = state.now_seconds;
            report.message = "Task '" + task->id + "' completed successfully.";
            out.report = report;
            state.attempt.reset();
        }
    }
    out.state = std::move(state);
    out.obs = std::move(obs);
    return out;
}

Env::StepResult Env::step(const EnvState& state, const Command& action) const {
    EnvState next = state;
    Observation obs;

    auto failure = [&](const std::string& why) {
        obs = project(next);
        obs.action_ok = false;
        obs.action_error = why;
        StepResult out;
        out.state = std::move(next);
        out.obs = std::move(obs);
        return out;
    };

    switch (action.verb) {
        case Verb::open: {
            std::string target = action.argument;
            if (target == "topResult") {
                if (next.last_search_results.empty()) return failure("no search results to open");
                target = next.last_search_results.front();
            }
            if (!graph_->find(target)) return failure("page not found: " + target);
            next.current_page = target;
            if (next.attempt) next.attempt->pages_visited.insert(target);
            break;
        }
        case Verb::click: {
            const Page* page = graph_->find(next.current_page);
            const PageElement* el = page ? page->find_element(action.argument) : nullptr;
            if (!el) return failure("element not found: " + action.argument);
            if (el->kind != ElementKind::button && el->kind != ElementKind::link)
                return failure("element not clickable: " + action.argument);
            const std::string key = element_key(next.current_page, el->name);
            if (next.attempt) {
                next.attempt->clicked.insert(key);
                next.attempt->activity_started_at.emplace(key, next.now_seconds);
            }
            if (!el->target.empty()) {
                next.current_page = el->target;
                if (next.attempt) next.attempt->pages_visited.insert(el->target);
            }
            break;
        }
        case Verb::type: {
            next.page_inputs[next.current_page] += action.argument;
            if (next.current_page == "search") {
                const auto it = scenario_.search_index.find(lowercase(action.argument));
                next.last_search_results =
                    it == scenario_.search_index.end() ? std::vector<std::string>{} : it->second;
            }
            if (next.current_page.rfind("note-pad", 0) == 0) {
                next.note_pad += action.argument;
                next.note_pad += '\n';
                if (next.attempt) {
                    next.attempt->typed_notes += action.argument;
                    next.attempt->typed_notes += '\n';
                }
            }
            break;
        }
        case Verb::wait: {
            if (action.wait_seconds <= 0) return failure("wait duration must be positive");
            next.pending_timers.push_back(PendingTimer{next.now_seconds + action.wait_seconds});
            break;
        }
        case Verb::extract: {
            const Page* page = graph_->find(next.current_page);
            const PageElement* el = page ? page->find_element(action.argument) : nullptr;
            if (!el) return failure("element not found: " + action.argument);
            obs.extracted_name = el->name;
            obs.extracted_content = el->content;
            if (next.attempt) next.attempt->extracted.insert(element_key(next.current_page, el->name));
            break;
        }
        case Verb::search: {
            if (action.argument.empty()) return failure("empty search query");
            const auto it = scenario_.search_index.find(lowercase(action.argument));
            next.last_search_results =
                it == scenario_.search_index.end() ? std::vector<std::string>{} : it->second;
            break;
        }
        case Verb::noop:
            break;
    }

    Observation projected = project(next);
    projected.extracted_name = obs.extracted_name;
    projected.extracted_content = obs.extracted_content;
    return settle(std::move(next), std::move(projected));
}

const FeedTrackEntry* Env::match_track(Minutes now) const {
    const FeedTrackEntry* interval = nullptr;
    for (const auto& e : scenario_.feed_tracks) {
        if (e.at && *e.at == now) return &e;
        if (!interval && e.from && e.to && *e.from <= now && now <= *e.to) interval = &e;
    }
    return interval;
}

EnvState Env::feed_tick(const EnvState& state, const VirtualClock& clock) const {
    const Minutes now = clock.now();
    if (now % kFeedCadenceMinutes != 0)
        throw CadenceError("sandbox-env: feed_tick at t=" + std::to_string(now) +
                           " is off the five-minute cadence");
    if (!state.feed_log.empty() && state.feed_log.back().timestamp + kFeedCadenceMinutes != now)
        throw CadenceError("sandbox-env: feed spacing would break at t=" + std::to_string(now));

    EnvState next = state;
    const int prev_idle = next.feed_log.empty() ? 0 : next.feed_log.back().idle_minutes;

    UserFeedEntry entry;
    entry.timestamp = now;
    const FeedTrackEntry* track = match_track(now);
    if (!track) {
        entry.emotion = Emotion::neutral;
        entry.activity = Activity::idle;
        entry.idle_minutes = prev_idle + static_cast<int>(kFeedCadenceMinutes);
    } else {
        if (track->emotion) {
            entry.emotion = *track->emotion;
        } else {
            entry.emotion = next.rng_state.next_below(2) == 0 ? Emotion::calm : Emotion::neutral;
        }
        if (track->activity) {
            entry.activity = *track->activity;
        } else {
            static constexpr Activity fills[] = {Activity::idle, Activity::typing, Activity::away};
            entry.activity = fills[next.rng_state.next_below(3)];
        }
        if (track->idle_minutes) {
            entry.idle_minutes = *track->idle_minutes;
        } else if (track->idle_minutes_start && track->from) {
            entry.idle_minutes = *track->idle_minutes_start + static_cast<int>(now - *track->from);
        } else if (entry.activity == Activity::idle || entry.activity == Activity::away) {
            entry.idle_minutes = prev_idle + static_cast<int>(kFeedCadenceMinutes);
        } else {
            entry.idle_minutes = 0;
        }
    }
    next.feed_log.push_back(entry);
    return next;
}

std::pair<Observation, EnvState> Env::observe(const EnvState& state) const {
    Observation obs = project(state);
    EnvState next = state;
    next.feed_read_cursor = next.feed_log.size();
    return {std::move(obs), std::move(next)};
}

Env::StepResult Env::advance_time(const EnvState& state, Seconds now_seconds) const {
    if (now_seconds < state.now_seconds)
        throw WiringError("sandbox-env: time moved backwards");
    EnvState next = state;
    next.now_seconds = now_seconds;
    std::erase_if(next.pending_timers,
                  [&](const PendingTimer& t) { return t.expires_at <= now_seconds; });
    Observation obs = project(next);
    return settle(std::move(next), std::move(obs));
}

EnvState Env::arm_task(const EnvState& state, const std::string& goal_id, const std::string& task_id,
                       Seconds now) const {
    if (!scenario_.find_task(task_id))
        throw WiringError("sandbox-env: arm_task for unknown task '" + task_id + "'");
    if (state.attempt)
        throw WiringError("sandbox-env: attempt already armed for goal '" + state.attempt->goal_id + "'");
    EnvState next = state;
    TaskAttempt attempt;
    attempt.goal_id = goal_id;
    attempt.task_id = task_id;
    attempt.adopted_at = now;
    attempt.pages_visited.insert(state.current_page);
    next.attempt = std::move(attempt);
    return next;
}

EnvState Env::disarm(const EnvState& state) const {
    EnvState next = state;
    next.attempt.reset();
    return next;
}

EnvState Env::mark_feed_read(const EnvState& state) const {
    EnvState next = state;
    next.feed_read_cursor = next.feed_log.size();
    return next;
}

}  // namespace triad
