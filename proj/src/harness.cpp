#include "triad/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace triad {

namespace fs = std::filesystem;

// ─── Metrics layout ─────────────────────────────────────────────────────────

MetricsLayout MetricsLayout::for_duration(Minutes duration) {
    MetricsLayout layout;
    layout.duration = duration;
    for (Minutes at : {Minutes{0}, Minutes{720}, Minutes{1440}, Minutes{2160}}) {
        if (at <= duration) layout.checkpoints.push_back(at);
    }
    if (layout.checkpoints.back() != duration) layout.checkpoints.push_back(duration);
    return layout;
}

namespace {

RunMetrics build_metrics(const MetricsLayout& layout,
                         const std::vector<std::tuple<Minutes, GoalOrigin>>& completions,
                         const std::vector<FirstAttemptRecord>& first_attempts,
                         const std::map<std::string, std::vector<int>>& recurring) {
    RunMetrics m;
    const Minutes segment_count = (layout.duration + kSegmentMinutes - 1) / kSegmentMinutes;
    for (Minutes i = 0; i < segment_count; ++i)
        m.segments.push_back(SegmentCounts{i * kSegmentMinutes, 0, 0});
    for (const auto& [at, origin] : completions) {
        auto& seg = m.segments[static_cast<std::size_t>(std::min(at / kSegmentMinutes, segment_count - 1))];
        (origin == GoalOrigin::extrinsic ? seg.extrinsic : seg.intrinsic)++;
        ++m.total_tasks;
    }
    for (Minutes checkpoint : layout.checkpoints) {
        for (Difficulty tier : {Difficulty::easy, Difficulty::medium, Difficulty::hard}) {
            TierCheckpoint row;
            row.at = checkpoint;
            row.tier = tier;
            for (const auto& fa : first_attempts) {
                if (fa.tier != tier || fa.at > checkpoint) continue;
                ++row.attempts;
                if (fa.success) ++row.successes;
            }
            m.tier_success.push_back(row);
        }
    }
    m.recurring_steps = recurring;
    m.total_runtime = layout.duration;
    return m;
}

}  // namespace

RunMetrics compute_metrics(const fs::path& journal_dir, const MetricsLayout& layout) {
    std::vector<std::tuple<Minutes, GoalOrigin>> completions;
    std::vector<FirstAttemptRecord> first_attempts;
    std::map<std::string, std::vector<int>> recurring;

    for (const auto& loaded : Journal::replay_load(journal_dir)) {
        const JournalEntry& e = loaded.entry;
        if (e.kind != JournalKind::reward) continue;
        GoalOrigin origin = GoalOrigin::intrinsic;
        Difficulty tier = Difficulty::unknown;
        bool success = false, first = false;
        int steps = 0;
        std::string template_id;
        for (const auto& [k, v] : e.extra) {
            if (k == "origin") origin = parse_origin(v).value_or(GoalOrigin::intrinsic);
            if (k == "tier") tier = parse_difficulty(v).value_or(Difficulty::unknown);
            if (k == "success") success = (v == "1");
            if (k == "first_attempt") first = (v == "1");
            if (k == "steps") steps = std::stoi(v);
            if (k == "template") template_id = v;
        }
        completions.emplace_back(e.timestamp, origin);
        if (first) first_attempts.push_back(FirstAttemptRecord{e.timestamp, tier, success});
        recurring[template_id].push_back(steps);
    }
    return build_metrics(layout, completions, first_attempts, recurring);
}

// ─── CSV export / import ────────────────────────────────────────────────────

void export_csv(const RunMetrics& metrics, const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw WiringError("harness: cannot write metrics CSV " + path.string());
    out << "family,key,subkey,value_a,value_b\n";
    for (const auto& seg : metrics.segments)
        out << "provenance," << seg.segment_start << ",," << seg.extrinsic << "," << seg.intrinsic
            << "\n";
    for (const auto& row : metrics.tier_success)
        out << "tier_success," << row.at << "," << to_string(row.tier) << "," << row.successes << ","
            << row.attempts << "\n";
    for (const auto& [template_id, steps] : metrics.recurring_steps) {
        for (std::size_t i = 0; i < steps.size(); ++i)
            out << "recurring," << template_id << "," << (i + 1) << "," << steps[i] << ",\n";
    }
    out << "total,runtime_minutes,," << metrics.total_runtime << ",\n";
    out << "total,tasks,," << metrics.total_tasks << ",\n";
}

RunMetrics import_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw WiringError("harness: cannot read metrics CSV " + path.string());
    RunMetrics m;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::string col;
        std::istringstream row(line);
        while (std::getline(row, col, ',')) cols.push_back(col);
        cols.resize(5);
        if (cols[0] == "provenance") {
            m.segments.push_back(
                SegmentCounts{std::stoll(cols[1]), std::stoi(cols[3]), std::stoi(cols[4])});
        } else if (cols[0] == "tier_success") {
            TierCheckpoint row_out;
            row_out.at = std::stoll(cols[1]);
            row_out.tier = parse_difficulty(cols[2]).value_or(Difficulty::unknown);
            row_out.successes = std::stoi(cols[3]);
            row_out.attempts = std::stoi(cols[4]);
            m.tier_success.push_back(row_out);
        } else if (cols[0] == "recurring") {
            m.recurring_steps[cols[1]].push_back(std::stoi(cols[3]));
        } else if (cols[0] == "total" && cols[1] == "runtime_minutes") {
            m.total_runtime = std::stoll(cols[3]);
        } else if (cols[0] == "total" && cols[1] == "tasks") {
            m.total_tasks = std::stoi(cols[3]);
        }
    }
    return m;
}

// ─── Runner ─────────────────────────────────────────────────────────────────

namespace {

// A run owns its journal directory: stale entries from a previous run would
// shadow the replay determinism and the journal audit.
fs::path fresh_journal_dir(const fs::path& dir) {
    std::error_code ec;
    fs::remove_all(dir, ec);
    return dir;
}

}  // namespace

Runner::Runner(Scenario scenario, const Backend& backend, const AssetStore& assets,
               RunnerConfig config)
    : scenario_(std::move(scenario)),
      backend_(&backend),
      assets_(&assets),
      config_(std::move(config)),
      env_(scenario_),
      clock_(1),
      broker_(clock_),
      journal_(fresh_journal_dir(config_.out_dir / "journal")),
      memory_(&journal_),
      task_cache_(8),
      self_(scenario_.creed, scenario_.initial_beta),
      user_(),
      sys1_(env_, broker_),
      sys2_(assets),
      sys3_(backend, assets,
            System3Config{config_.budget, 45, config_.intrinsic_cooldown}),
      window_(config_.percept_window) {
    if (config_.duration <= 0) config_.duration = scenario_.duration_minutes;
    layout_ = MetricsLayout::for_duration(config_.duration);
    env_state_ = env_.reset(config_.seed);
    self_.mark_visited(scenario_.initial_page);
}

std::string Runner::command_tags(const ActiveEpisode& ep) const {
    std::vector<std::pair<std::string, std::string>> kv = {
        {"phase", "command"},
        {"template", ep.goal.template_id},
        {"step", std::to_string(ep.step_index)}};
    if (!ep.goal.subject.empty()) {
        kv.emplace_back("target", ep.goal.subject);
        kv.emplace_back("skill", ep.goal.subject);
    }
    std::vector<std::string> bare;
    for (const auto& cap : self_.capabilities()) bare.push_back("cap:" + cap.skill);
    return render_tags(kv, bare);
}

SalientFeed Runner::current_feed() const {
    SalientFeed feed;
    if (const auto& last = user_.last_entry()) {
        feed.emotion = last->emotion;
        feed.activity = last->activity;
        feed.idle_minutes = last->idle_minutes;
    }
    return feed;
}

void Runner::journal_goal(const Goal& goal, bool cached, const std::string& note) {
    JournalEntry entry;
    entry.timestamp = clock_.now();
    entry.kind = JournalKind::goal;
    entry.goal_id = goal.id;
    entry.extra = {{"origin", to_string(goal.origin)},
                   {"template", goal.template_id},
                   {"tier", to_string(goal.difficulty)},
                   {"task", goal.task_id.empty() ? "-" : goal.task_id},
                   {"plan", cached ? "cached" : "fresh"}};
    if (!note.empty()) entry.extra.emplace_back("note", note);
    entry.body = goal.text;
    journal_.append_entry(entry);
    day_entries_.push_back(entry);
}

void Runner::adopt(Goal goal) {
    char id[16];
    std::snprintf(id, sizeof id, "g-%04llu", static_cast<unsigned long long>(++goal_counter_));
    goal.id = id;
    goal.adopted_at = to_seconds(clock_.now());

    auto reject = [&](const std::string& reason) {
        JournalEntry entry;
        entry.timestamp = clock_.now();
        entry.kind = JournalKind::goal;
        entry.goal_id = goal.id;
        entry.extra = {{"origin", to_string(goal.origin)},
                       {"template", goal.template_id},
                       {"rejected", "1"},
                       {"note", reason}};
        entry.body = goal.text;
        journal_.append_entry(entry);
        day_entries_.push_back(entry);
    };

    // The monitor admits no goal without a creed reference.
    if (goal.creed_refs.empty()) {
        reject("goal carries no creed reference");
        return;
    }

    ActiveEpisode ep;
    ep.feed_at_adoption = current_feed();
    PlanDecision plan = sys2_.plan_or_reuse(goal, ep.feed_at_adoption, memory_, ep.pad);
    ep.signature = plan.signature;

    if (plan.source == PlanDecision::Source::cached) {
        ep.cached = true;
        ep.cached_commands = plan.cached_commands;
        ep.goal = goal;
        ep.decision.goal = goal;
        ep.decision.beta = self_.beta();
        ep.decision.reward_spec.rationale =
            "Replay the cached plan in service of: " + goal.text;
    } else {
        ExecutiveContext ctx;
        ctx.now = clock_.now();
        ctx.pending_event_ids = broker_.pending_ids();
        ctx.active_goal = goal;
        ctx.percepts = window_;
        ctx.beta = self_.beta();
        GoalContext goal_ctx{&scenario_, &user_, &self_, &memory_, clock_.now()};
        MetaStepResult res = sys3_.meta_step(ctx, goal_ctx);
        if (res.status == MetaStepResult::Status::rejected) {
            reject(res.reason);
            return;
        }
        goal = res.decision.goal;  // housekeeping fallback may have swapped it
        goal.adopted_at = to_seconds(clock_.now());
        ep.goal = goal;
        ep.decision = res.decision;
        ep.tree = std::move(res.tree);
        ep.plan_seed = res.plan_seed;
        ep.selected_node = res.selected_node;
    }

    ep.goal = goal;
    ep.prev_visited = self_.visited_pages();
    if (const TaskSpec* task = scenario_.find_task(goal.task_id)) {
        if (!task->skill.empty()) {
            const auto& skills = self_.skills();
            const auto it = skills.find(task->skill);
            ep.skill_rate_before[task->skill] = it == skills.end() ? 0.0 : it->second.success_rate();
        }
        env_state_ = env_.arm_task(env_state_, goal.id, goal.task_id, to_seconds(clock_.now()));
    }
    journal_goal(goal, ep.cached, "");
    episode_ = std::move(ep);
}

void Runner::maybe_adopt_goal() {
    if (episode_) return;
    if (!pending_directives_.empty()) {
        DirectivePayload payload = pending_directives_.front();
        pending_directives_.erase(pending_directives_.begin());
        const TaskSpec* task = scenario_.find_task(payload.task_id);
        if (!task)
            throw WiringError("harness: directive references unknown task '" + payload.task_id + "'");
        Goal goal;
        goal.text = payload.text.empty() ? task->description : payload.text;
        goal.origin = GoalOrigin::extrinsic;
        goal.creed_refs = check_creed(goal.text).refs;
        goal.difficulty = task->tier();
        goal.template_id = task->plan_template;
        goal.task_id = task->id;
        adopt(std::move(goal));
        return;
    }
    if (config_.no_intrinsic) return;
    GoalContext ctx{&scenario_, &user_, &self_, &memory_, clock_.now()};
    if (auto goal = sys3_.generate_goal(ctx)) adopt(std::move(*goal));
}

bool Runner::execute_command(const Command& command) {
    ActiveEpisode& ep = *episode_;
    System1::ActuationResult result = sys1_.actuate(env_state_, command, ep.goal.id);
    env_state_ = result.state;
    if (result.acted) {
        ep.actions.push_back(result.action);
        ep.commands.push_back(command);

        JournalEntry entry;
        entry.timestamp = clock_.now();
        entry.kind = JournalKind::action;
        entry.goal_id = ep.goal.id;
        entry.extra = {{"verb", to_string(command.verb)}, {"ok", result.obs.action_ok ? "1" : "0"}};
        entry.body = command.render() + " -> " +
                     (result.obs.action_ok ? result.obs.page_id : result.obs.action_error);
        journal_.append_entry(entry);
        day_entries_.push_back(entry);

        ep.observations.push_back(result.obs.action_ok
                                      ? result.obs.page_id + ": " + result.obs.page_title
                                      : "failure: " + result.obs.action_error);
        if (result.obs.action_ok && !result.obs.page_id.empty()) {
            if (std::find(ep.episode_pages.begin(), ep.episode_pages.end(), result.obs.page_id) ==
                ep.episode_pages.end())
                ep.episode_pages.push_back(result.obs.page_id);
            self_.mark_visited(result.obs.page_id);
        }
        sys1_.encode(result.obs);
    }
    if (result.report) broker_.publish(VerifierPayload{*result.report, ep.goal.id}, clock_.now());
    return result.obs.action_ok;
}

void Runner::finish_failed_episode(const std::string& why) {
    ActiveEpisode& ep = *episode_;
    env_state_ = env_.disarm(env_state_);
    VerifierReport report;
    report.task_id = ep.goal.task_id.empty() ? ep.goal.template_id : ep.goal.task_id;
    report.success = false;
    report.at = env_state_.now_seconds;
    report.message = "Task '" + report.task_id + "' failed: " + why + ".";
    broker_.publish(VerifierPayload{report, ep.goal.id}, clock_.now());
}

void Runner::step_episode() {
    if (!episode_ || episode_->resolving) return;
    if (env_state_.timer_pending()) return;  // blocked on a wait timer
    ActiveEpisode& ep = *episode_;

    if (ep.cached) {
        if (ep.cached_index < ep.cached_commands.size()) {
            const Command command = ep.cached_commands[ep.cached_index++];
            if (!execute_command(command)) {
                // Broken replay: abort reuse (the failure percept is already
                // on the bus) and fall back to fresh planning.
                ep.cached = false;
                ep.step_index = 1;
                ep.reuse_aborted = true;
            }
        } else {
            finish_failed_episode("cached plan exhausted without verification");
        }
        return;
    }

    if (static_cast<int>(ep.actions.size()) >= config_.max_episode_commands) {
        finish_failed_episode("aborted after " + std::to_string(ep.actions.size()) + " actions");
        return;
    }

    RetrievalResult memories =
        memory_.retrieve(ep.goal.text, config_.retrieval_k, config_.relevance_threshold);
    for (const auto& hit : memories.hits) task_cache_.put(ep.goal.id, hit.record);

    const std::string prompt = sys2_.assemble_prompt(ep.goal, ep.pad, window_, memories,
                                                     scenario_.creed, command_tags(ep), ep.plan_seed);
    GenerationRequest req;
    req.role = BackendRole::planner;
    req.prompt = prompt;
    req.seed = config_.seed;
    GenerationResponse generation;
    try {
        generation = backend_->generate(req);
    } catch (const BackendUnavailable&) {
        finish_failed_episode("cognition backend unavailable");
        return;
    }

    ParseOutcome parsed = sys2_.parse_command(generation.text, ep.pad);
    if (!parsed.ok()) {
        ++ep.consecutive_parse_errors;
        if (ep.consecutive_parse_errors >= 3) {
            broker_.publish(ReflectionDuePayload{ep.goal.id, "parse-errors"}, clock_.now());
            finish_failed_episode("3 consecutive parse errors, fell back to noop");
        }
        return;
    }
    ep.consecutive_parse_errors = 0;
    ++ep.step_index;
    if (parsed.command->verb == Verb::noop) {
        finish_failed_episode("plan exhausted after " + std::to_string(ep.actions.size()) +
                              " actions");
        return;
    }
    execute_command(*parsed.command);
}

void Runner::handle_feed(const FeedPayload& payload, Minutes at) {
    user_.update(payload.entry);
    sys3_.note_feed(user_);
    sys1_.encode_feed(payload.entry, to_seconds(at));
    env_state_ = env_.mark_feed_read(env_state_);
}

void Runner::handle_directive(const DirectivePayload& payload) {
    pending_directives_.push_back(payload);
}

void Runner::handle_verifier(const VerifierPayload& payload) {
    if (!episode_ || episode_->goal.id != payload.goal_id)
        throw WiringError("harness: verifier report for unknown goal '" + payload.goal_id + "'");
    ActiveEpisode& ep = *episode_;
    if (ep.resolving) return;  // one report per attempt
    ep.report = payload.report;
    ep.resolving = true;
    sys1_.encode_verifier(payload.report);
    const ExtrinsicReward reward = sys1_.extrinsic_outcome(ep.goal, payload.report, ep.actions);
    broker_.publish(RewardPayload{reward, ep.goal.id}, clock_.now());
}

void Runner::handle_reward(const RewardPayload& payload) {
    if (!episode_ || episode_->goal.id != payload.goal_id)
        throw WiringError("harness: reward for unknown goal '" + payload.goal_id + "'");
    ActiveEpisode& ep = *episode_;
    const Goal& goal = ep.goal;
    const TaskSpec* task = scenario_.find_task(goal.task_id);

    EpisodeLog log;
    log.goal = goal;
    log.episode_pages = ep.episode_pages;
    log.previously_visited = ep.prev_visited;
    if (task && !task->skill.empty()) {
        const double before = ep.skill_rate_before[task->skill];
        self_.record_attempt(task->skill, payload.reward.success);
        log.skill_rates[task->skill] = {before, self_.skills().at(task->skill).success_rate()};
    }
    if (!ep.tree.empty() && ep.selected_node >= 0) {
        for (int id : ep.tree.path_from_root(ep.selected_node)) {
            if (id == 0) continue;  // root is scaffolding, not a plan candidate
            const ThoughtNode& node = ep.tree.node(id);
            PlanNodeOutcome outcome;
            outcome.node_id = id;
            outcome.value_estimate = node.value_estimate.value_or(0.0);
            outcome.defect_free = !node.verdict || node.verdict->kind == VerdictKind::sound;
            log.plan_nodes.push_back(outcome);
        }
    }
    log.success = payload.reward.success;
    log.extrinsic = payload.reward;
    log.verifier_message = ep.report ? ep.report->message : "";

    const IntrinsicReward intrinsic = evaluate_intrinsic(log, memory_, self_, *backend_);
    const HybridReward hybrid =
        fuse_rewards(extrinsic_scalar(payload.reward), intrinsic, self_.beta(), log.verifier_message);

    const std::string attempt_key = goal.task_id.empty() ? goal.template_id : goal.task_id;
    const bool first_attempt = attempted_tasks_.insert(attempt_key).second;

    char fused[16];
    std::snprintf(fused, sizeof fused, "%.4f", hybrid.fused);
    char beta[16];
    std::snprintf(beta, sizeof beta, "%.4f", hybrid.beta);
    JournalEntry entry;
    entry.timestamp = clock_.now();
    entry.kind = JournalKind::reward;
    entry.goal_id = goal.id;
    entry.extra = {{"origin", to_string(goal.origin)},
                   {"template", goal.template_id},
                   {"tier", to_string(goal.difficulty)},
                   {"success", payload.reward.success ? "1" : "0"},
                   {"steps", std::to_string(ep.pad.steps)},
                   {"first_attempt", first_attempt ? "1" : "0"},
                   {"cost", std::to_string(payload.reward.cost)},
                   {"latency", std::to_string(payload.reward.latency)},
                   {"fused", fused},
                   {"beta", beta},
                   {"plan", ep.cached ? "cached" : "fresh"}};
    entry.body = hybrid.text;
    journal_.append_entry(entry);
    day_entries_.push_back(entry);

    record_task_metrics(goal, payload.reward.success, ep.pad.steps, clock_.now(), first_attempt);

    EpisodeCommit commit;
    commit.episode_id = goal.id;
    commit.timestamp = clock_.now();
    commit.goal = goal;
    commit.observations = ep.observations;
    for (const auto& action : ep.actions) commit.actions.push_back(action.command.render());
    commit.rewards = {hybrid.fused};
    commit.chain_of_thought = ep.pad.lines;
    commit.commands = ep.commands;
    commit.success = payload.reward.success;
    commit.fused_reward = hybrid.fused;
    commit.feed = ep.feed_at_adoption;
    for (const auto& page : ep.episode_pages) commit.markers.push_back("page:" + page);
    commit.markers.push_back("feed:" + to_string(ep.feed_at_adoption.emotion));
    memory_.commit(commit);
    task_cache_.evict(goal.id);

    if (payload.reward.success && task && !task->grants_capability.empty()) {
        if (self_.add_capability(task->grants_capability, task->skill,
                                 "earned by completing task " + task->id)) {
            JournalEntry cap;
            cap.timestamp = clock_.now();
            cap.kind = JournalKind::capability;
            cap.goal_id = goal.id;
            cap.extra = {{"name", task->grants_capability},
                         {"skill", task->skill},
                         {"note", "earned by completing task " + task->id}};
            cap.body = "Capability added: " + task->grants_capability;
            journal_.append_entry(cap);
            day_entries_.push_back(cap);
        }
    }

    ep.log = std::move(log);
    ep.hybrid = hybrid;
    broker_.publish(ReflectionDuePayload{goal.id, "episode-terminated"}, clock_.now());
}

void Runner::handle_reflection_due(const ReflectionDuePayload& payload) {
    if (payload.reason == "parse-errors") {
        JournalEntry entry;
        entry.timestamp = clock_.now();
        entry.kind = JournalKind::reflection;
        entry.goal_id = payload.goal_id;
        entry.extra = {{"reason", "parse-errors"}};
        entry.body = "Three consecutive parse errors; falling back to noop. [creed:3]";
        journal_.append_entry(entry);
        day_entries_.push_back(entry);
        return;
    }
    if (!episode_ || episode_->goal.id != payload.goal_id || !episode_->log || !episode_->hybrid)
        throw WiringError("harness: reflection due for unknown episode '" + payload.goal_id + "'");
    ActiveEpisode& ep = *episode_;

    ReflectionReport report =
        sys3_.reflect(*ep.log, ep.tree.empty() ? nullptr : &ep.tree, ep.hybrid->fused);

    JournalEntry entry;
    entry.timestamp = clock_.now();
    entry.kind = JournalKind::reflection;
    entry.goal_id = ep.goal.id;
    entry.extra = {{"patches", std::to_string(report.patched_nodes.size())},
                   {"heuristics", std::to_string(report.heuristics.size())}};
    std::string body = report.rationale;
    if (report.beta_directive) {
        const double old_beta = self_.beta();
        const double new_beta = adjust_beta(old_beta, *report.beta_directive);
        char ob[16], nb[16];
        std::snprintf(ob, sizeof ob, "%.4f", old_beta);
        std::snprintf(nb, sizeof nb, "%.4f", new_beta);
        entry.extra.emplace_back("beta_old", ob);
        entry.extra.emplace_back("beta_new", nb);
        self_.set_beta(new_beta);
    }
    entry.body = body;
    journal_.append_entry(entry);
    day_entries_.push_back(entry);

    if (!report.heuristics.empty()) {
        EpisodeCommit commit;
        commit.episode_id = ep.goal.id + "/reflection";
        commit.timestamp = clock_.now();
        commit.goal = ep.goal;
        commit.chain_of_thought = report.heuristics;
        commit.success = false;  // heuristics are records, not replayable traces
        commit.feed = ep.feed_at_adoption;
        commit.markers = {"reflection", "goal:" + ep.goal.id};
        commit.summary_override =
            "reflection on '" + ep.goal.template_id + "': " + report.heuristics.front();
        memory_.commit(commit);
    }

    if (config_.update_hook) {
        ReasoningTrace trace;
        trace.goal_id = ep.goal.id;
        trace.goal_text = ep.goal.text;
        trace.template_id = ep.goal.template_id;
        trace.chain_of_thought = ep.pad.lines;
        trace.commands = ep.commands;
        trace.success = ep.log->success;
        trace.fused_reward = ep.hybrid->fused;
        trace.signature = ep.signature;
        config_.update_hook->on_episode_terminated(trace, ep.hybrid->fused);
    }

    sys3_.on_episode_complete(ep.goal, clock_.now(), ep.log->success);
    ep.pad.clear();
    episode_.reset();
}

void Runner::handle(const EventEnvelope& ev) {
    if (ev.timestamp < last_event_timestamp_)
        throw WiringError("kernel: event timestamps regressed");
    last_event_timestamp_ = ev.timestamp;

    switch (ev.kind) {
        case EventKind::feed:
            handle_feed(std::get<FeedPayload>(ev.payload), ev.timestamp);
            break;
        case EventKind::directive:
            handle_directive(std::get<DirectivePayload>(ev.payload));
            break;
        case EventKind::percept:
            window_.push(std::get<PerceptPayload>(ev.payload).percept);
            break;
        case EventKind::verifier:
            handle_verifier(std::get<VerifierPayload>(ev.payload));
            break;
        case EventKind::reward:
            handle_reward(std::get<RewardPayload>(ev.payload));
            break;
        case EventKind::reflection_due:
            handle_reflection_due(std::get<ReflectionDuePayload>(ev.payload));
            break;
    }
}

void Runner::drain_events() {
    while (auto ev = broker_.next_event()) handle(*ev);
}

void Runner::record_task_metrics(const Goal& goal, bool success, int steps, Minutes at, bool first) {
    live_completions_.emplace_back(at, goal.origin);
    if (first) live_first_attempts_.push_back(FirstAttemptRecord{at, goal.difficulty, success});
    live_recurring_[goal.template_id].push_back(steps);
}

void Runner::tick() {
    const Minutes now = clock_.now();

    if (now > 0 && now % kMinutesPerDay == 0) {
        journal_.nightly_critique(day_entries_, *backend_, now);
        day_entries_.clear();
    }

    if (VirtualClock::feed_due(now)) {
        env_state_ = env_.feed_tick(env_state_, clock_);
        broker_.publish(FeedPayload{env_state_.feed_log.back()}, now);
    }

    Env::StepResult timed = env_.advance_time(env_state_, to_seconds(now));
    env_state_ = std::move(timed.state);
    if (timed.report) {
        if (!episode_) throw WiringError("sandbox-env: verifier fired with no active episode");
        broker_.publish(VerifierPayload{*timed.report, episode_->goal.id}, now);
    }

    for (const auto& task : scenario_.tasks) {
        if (task.trigger.kind == TaskTrigger::Kind::schedule && task.trigger.at == now)
            broker_.publish(DirectivePayload{task.id, task.description}, now);
    }

    drain_events();
    maybe_adopt_goal();
    step_episode();
    drain_events();
}

RunResult Runner::run() {
    while (clock_.now() < config_.duration) {
        tick();
        advance_clock(clock_, broker_);
    }
    if (clock_.now() % kMinutesPerDay == 0) {
        journal_.nightly_critique(day_entries_, *backend_, clock_.now());
        day_entries_.clear();
    }
    journal_.write_self_model(self_);

    if (memory_.lazy_law_violations() != 0)
        throw WiringError("memory: lazy-load law violated during the run");

    RunResult result;
    result.journal_dir = journal_.dir();
    result.metrics = build_metrics(layout_, live_completions_, live_first_attempts_, live_recurring_);
    const RunMetrics audited = compute_metrics(result.journal_dir, layout_);
    if (!(audited == result.metrics))
        throw WiringError("harness: live metrics diverge from the journal recomputation");
    return result;
}

RunResult run_scenario(const Scenario& scenario, const Backend& backend, const AssetStore& assets,
                       const RunnerConfig& config) {
    Runner runner(scenario, backend, assets, config);
    return runner.run();
}

}  // namespace triad
