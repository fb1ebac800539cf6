#include "triad/system3.hpp"

#include <algorithm>
#include <future>
#include <sstream>

namespace triad {

// ─── ThoughtTree ─────────────────────────────────────────────────────────────

int ThoughtTree::add_root(std::string plan, double value_estimate) {
    if (!nodes_.empty()) throw WiringError("system3: tree already has a root");
    ThoughtNode node;
    node.id = 0;
    node.parent = -1;
    node.plan = std::move(plan);
    node.value_estimate = value_estimate;
    nodes_.push_back(std::move(node));
    return 0;
}

int ThoughtTree::add_child(int parent, std::string plan, std::optional<double> value_estimate) {
    const ThoughtNode& p = node(parent);
    if (p.status == NodeStatus::pruned)
        throw WiringError("system3: pruned node " + std::to_string(parent) + " cannot grow children");
    ThoughtNode child;
    child.id = static_cast<int>(nodes_.size());
    child.parent = parent;
    child.plan = std::move(plan);
    child.value_estimate = value_estimate;
    nodes_.push_back(std::move(child));
    return nodes_.back().id;
}

ThoughtNode& ThoughtTree::node(int id) {
    if (id < 0 || id >= static_cast<int>(nodes_.size()))
        throw WiringError("system3: unknown node id " + std::to_string(id));
    return nodes_[static_cast<std::size_t>(id)];
}

const ThoughtNode& ThoughtTree::node(int id) const {
    if (id < 0 || id >= static_cast<int>(nodes_.size()))
        throw WiringError("system3: unknown node id " + std::to_string(id));
    return nodes_[static_cast<std::size_t>(id)];
}

bool ThoughtTree::is_leaf(int id) const {
    for (const auto& n : nodes_)
        if (n.parent == id) return false;
    return true;
}

std::vector<int> ThoughtTree::leaves() const {
    std::vector<int> out;
    for (const auto& n : nodes_)
        if (is_leaf(n.id)) out.push_back(n.id);
    return out;
}

std::vector<int> ThoughtTree::path_from_root(int id) const {
    std::vector<int> path;
    int cursor = id;
    while (cursor >= 0) {
        path.push_back(cursor);
        cursor = node(cursor).parent;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

// ─── Expansion ──────────────────────────────────────────────────────────────

namespace {

int best_open_node(const ThoughtTree& tree) {
    int best = -1;
    double best_value = -1.0;
    for (const auto& n : tree.nodes()) {
        if (n.expanded || n.status == NodeStatus::pruned) continue;
        const double v = n.value_estimate.value_or(0.0);
        if (v > best_value) {
            best = n.id;
            best_value = v;
        }
    }
    return best;
}

bool threshold_reached(const ThoughtTree& tree, double threshold) {
    for (const auto& n : tree.nodes()) {
        if (n.status == NodeStatus::pruned || !tree.is_leaf(n.id)) continue;
        if (n.value_estimate && *n.value_estimate > threshold) return true;
    }
    return false;
}

struct ChildProposal {
    std::string plan;
    std::optional<double> value;
};

std::optional<ChildProposal> parse_child(const GenerationResponse& res) {
    std::string text = res.text;
    if (const auto nl = text.find('\n'); nl != std::string::npos) text = text.substr(0, nl);
    if (text.rfind("plan: ", 0) != 0) return std::nullopt;
    text = text.substr(6);
    ChildProposal out;
    const std::string marker = " | value: ";
    if (const auto at = text.find(marker); at != std::string::npos) {
        try {
            out.value = std::stod(text.substr(at + marker.size()));
        } catch (const std::exception&) {
            out.value = std::nullopt;
        }
        out.plan = text.substr(0, at);
    } else {
        out.plan = text;
    }
    if (res.value) out.value = res.value;
    return out;
}

GenerationRequest child_request(const ThoughtTree& tree, int parent, int child_index) {
    GenerationRequest req;
    req.role = BackendRole::planner;
    std::vector<std::pair<std::string, std::string>> kv = {
        {"phase", "expand"},
        {"template", tree.goal.template_id},
        {"child", std::to_string(child_index)},
        {"node", std::to_string(parent)}};
    if (!tree.goal.subject.empty()) {
        kv.emplace_back("target", tree.goal.subject);
        kv.emplace_back("skill", tree.goal.subject);
    }
    req.prompt = render_tags(kv) + "\nPropose one child plan refining:\n" + tree.node(parent).plan +
                 "\nGoal: " + tree.goal.text + "\n";
    return req;
}

}  // namespace

int expand(ThoughtTree& tree, const Backend& backend, const SearchBudget& budget,
           const NodeHook& on_new_node, bool parallel) {
    if (tree.empty()) throw WiringError("system3: expand requires a rooted tree");
    int expansions = 0;
    while (expansions < budget.max_expansions) {
        if (threshold_reached(tree, budget.utility_threshold)) break;
        const int target = best_open_node(tree);
        if (target < 0) break;  // frontier exhausted

        std::vector<std::optional<ChildProposal>> proposals(
            static_cast<std::size_t>(budget.branching));
        bool any_ok = false;

        auto fetch = [&](int index) -> std::optional<ChildProposal> {
            return parse_child(backend.generate(child_request(tree, target, index)));
        };

        if (parallel && budget.branching > 1) {
            std::vector<std::future<std::optional<ChildProposal>>> futures;
            futures.reserve(static_cast<std::size_t>(budget.branching));
            for (int i = 0; i < budget.branching; ++i)
                futures.push_back(std::async(std::launch::async, fetch, i));
            for (int i = 0; i < budget.branching; ++i) {
                try {
                    proposals[static_cast<std::size_t>(i)] = futures[static_cast<std::size_t>(i)].get();
                } catch (const BackendUnavailable&) {
                    proposals[static_cast<std::size_t>(i)] = std::nullopt;
                }
            }
        } else {
            for (int i = 0; i < budget.branching; ++i) {
                try {
                    proposals[static_cast<std::size_t>(i)] = fetch(i);
                } catch (const BackendUnavailable&) {
                    proposals[static_cast<std::size_t>(i)] = std::nullopt;
                }
            }
        }

        // Merge in request order: worker scheduling never changes node ids.
        for (const auto& proposal : proposals) {
            if (!proposal) continue;
            const int id = tree.add_child(target, proposal->plan, proposal->value);
            any_ok = true;
            if (on_new_node) on_new_node(tree, id);
        }

        ThoughtNode& parent = tree.node(target);
        parent.expanded = true;
        if (!any_ok) {
            parent.status = NodeStatus::annotated;
            parent.verdict = GuardianVerdict{VerdictKind::minor_defect, "backend unavailable; re-verify"};
        }
        ++expansions;
    }
    return expansions;
}

// ─── Supervision ────────────────────────────────────────────────────────────

GuardianVerdict supervise(ThoughtTree& tree, int node_id, const Backend& guardian,
                          const std::string& checklist) {
    ThoughtNode& node = tree.node(node_id);
    GuardianVerdict verdict;

    GenerationRequest req;
    req.role = BackendRole::guardian;
    req.prompt = render_tags({{"phase", "supervise"}, {"node", std::to_string(node_id)}}) + "\n" +
                 checklist + "\nGoal: " + tree.goal.text + "\nPlan: " + node.plan + "\n";
    auto after_colon = [](const std::string& text, std::size_t prefix, const char* fallback) {
        std::string rest = text.substr(prefix);
        const auto start = rest.find_first_not_of(" \t");
        rest = start == std::string::npos ? "" : rest.substr(start);
        return rest.empty() ? std::string(fallback) : rest;
    };
    try {
        const std::string text = guardian.generate(req).text;
        if (text.rfind("sound", 0) == 0) {
            verdict = {VerdictKind::sound, ""};
        } else if (text.rfind("minor-defect:", 0) == 0) {
            verdict = {VerdictKind::minor_defect, after_colon(text, 13, "re-verify")};
        } else if (text.rfind("unsound:", 0) == 0) {
            verdict = {VerdictKind::unsound, after_colon(text, 8, "unspecified")};
        } else {
            // Unknown grammar is treated as a defect, never as sound.
            verdict = {VerdictKind::minor_defect, "re-verify"};
        }
    } catch (const BackendUnavailable&) {
        verdict = {VerdictKind::minor_defect, "re-verify"};
    }

    node.verdict = verdict;
    if (verdict.kind == VerdictKind::unsound) {
        node.status = NodeStatus::pruned;
    } else if (verdict.kind == VerdictKind::minor_defect) {
        node.status = NodeStatus::annotated;
    }
    return verdict;
}

// ─── Selection ──────────────────────────────────────────────────────────────

std::optional<Selection> select(ThoughtTree& tree) {
    int best = -1;
    double best_value = -1.0;
    for (const auto& n : tree.nodes()) {
        if (n.status == NodeStatus::pruned || !tree.is_leaf(n.id)) continue;
        if (!n.value_estimate)
            throw WiringError("system3: leaf " + std::to_string(n.id) + " has no value estimate");
        if (*n.value_estimate > best_value) {
            best = n.id;
            best_value = *n.value_estimate;
        }
    }
    if (best < 0) return std::nullopt;

    tree.node(best).status = NodeStatus::selected;
    Selection out;
    out.node_id = best;
    out.plan = tree.node(best).plan;
    out.decision.goal = tree.goal;
    out.decision.beta = tree.beta;
    out.decision.reward_spec.rationale =
        "Weigh curiosity, mastery and coherence equally in service of: " + tree.goal.text;
    return out;
}

void assert_selected_path_clean(const ThoughtTree& tree, int selected_id) {
    for (int id : tree.path_from_root(selected_id)) {
        const ThoughtNode& n = tree.node(id);
        if (n.status == NodeStatus::pruned)
            throw WiringError("system3: selected path passes through pruned node " + std::to_string(id));
        if (n.verdict && n.verdict->kind == VerdictKind::unsound)
            throw WiringError("system3: selected path passes through unsound node " + std::to_string(id));
    }
}

// ─── Reflection ─────────────────────────────────────────────────────────────

ReflectionReport System3::reflect(const EpisodeLog& log, ThoughtTree* tree,
                                  double realized_fused) const {
    ReflectionReport report;
    report.episode_id = log.goal.id;

    for (const auto& node : log.plan_nodes) {
        ReflectionReport::Delta d;
        d.node_id = node.node_id;
        d.predicted = node.value_estimate;
        d.realized = realized_fused;
        report.deltas.push_back(d);
        if (std::abs(d.predicted - d.realized) > kPatchTolerance) {
            report.patched_nodes.push_back(node.node_id);
            if (tree) tree->node(node.node_id).value_estimate = realized_fused;
        }
    }

    GenerationRequest req;
    req.role = BackendRole::reflector;
    req.prompt = render_tags({{"kind", "postmortem"},
                              {"template", log.goal.template_id},
                              {"success", log.success ? "1" : "0"}}) +
                 "\nPost-mortem for goal: " + log.goal.text + "\n";
    const std::string text = backend_->generate(req).text;
    report.rationale = text;
    if (!check_creed(text).ok())
        throw WiringError("system3: reflection rationale carries no creed reference");

    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("heuristic:", 0) == 0) {
            report.heuristics.push_back(line.substr(11));
        } else if (line.rfind("beta-delta:", 0) == 0) {
            BetaDirective d;
            d.delta = std::stod(line.substr(11));
            d.rationale = text;
            report.beta_directive = d;
        } else if (line.rfind("beta:", 0) == 0) {
            BetaDirective d;
            d.target = std::stod(line.substr(5));
            d.rationale = text;
            report.beta_directive = d;
        }
    }
    return report;
}

// ─── Goal generation ────────────────────────────────────────────────────────

namespace {

const TaskSpec* find_feed_rule_task(const Scenario& scn, const std::string& rule) {
    for (const auto& t : scn.tasks)
        if (t.trigger.kind == TaskTrigger::Kind::feed_rule && t.trigger.rule == rule) return &t;
    return nullptr;
}

const TaskSpec* find_skill_task(const Scenario& scn, const std::string& skill) {
    for (const auto& t : scn.tasks)
        if (t.trigger.kind == TaskTrigger::Kind::generated && t.skill == skill) return &t;
    return nullptr;
}

const TaskSpec* find_template_task(const Scenario& scn, const std::string& plan_template) {
    for (const auto& t : scn.tasks)
        if (t.trigger.kind == TaskTrigger::Kind::generated && t.plan_template == plan_template)
            return &t;
    return nullptr;
}

}  // namespace

Goal System3::build_intrinsic_goal(const std::string& template_id, const std::string& task_id,
                                   const std::string& subject, Difficulty difficulty) const {
    GenerationRequest req;
    req.role = BackendRole::goal_writer;
    std::vector<std::pair<std::string, std::string>> kv = {{"template", template_id}};
    if (!subject.empty()) {
        kv.emplace_back("target", subject);
        kv.emplace_back("skill", subject);
    }
    req.prompt = render_tags(kv) + "\nDraft the objective text for this goal.\n";
    Goal goal;
    goal.text = backend_->generate(req).text;
    goal.origin = GoalOrigin::intrinsic;
    goal.creed_refs = check_creed(goal.text).refs;
    if (goal.creed_refs.empty())
        throw WiringError("system3: generated goal text carries no creed reference");
    goal.difficulty = difficulty;
    goal.template_id = template_id;
    goal.task_id = task_id;
    goal.subject = subject;
    return goal;
}

std::optional<Goal> System3::generate_goal(const GoalContext& ctx) {
    if (!ctx.scenario || !ctx.user || !ctx.self)
        throw WiringError("system3: goal context is incomplete");
    const Scenario& scn = *ctx.scenario;

    // 1. Sustained user stress, one response per streak.
    if (ctx.user->affect().stress_streak > config_.stress_trigger_minutes && !stress_handled_) {
        if (const TaskSpec* task = find_feed_rule_task(scn, "stress_over_45")) {
            stress_handled_ = true;
            return build_intrinsic_goal("stress-care", task->id, "", task->tier());
        }
    }

    // 2. Capability gap -> remedial practice objective.
    if (const auto gap = detect_gap(*ctx.self)) {
        if (!gaps_in_progress_.count(gap->skill)) {
            if (const TaskSpec* task = find_skill_task(scn, gap->skill)) {
                gaps_in_progress_.insert(gap->skill);
                return build_intrinsic_goal("skill-upgrade", task->id, gap->skill, task->tier());
            }
        }
    }

    // 3. Fresh learning interest from the feed.
    if (ctx.user->inferred_goals().size() > docs_interest_consumed_) {
        if (const TaskSpec* task = find_feed_rule_task(scn, "reading_docs")) {
            docs_interest_consumed_ = ctx.user->inferred_goals().size();
            return build_intrinsic_goal("knowledge-push", task->id, "", task->tier());
        }
    }

    // 4./5. Paced exploration and housekeeping, only while the user is away.
    const auto& last = ctx.user->last_entry();
    const bool user_idle =
        last && (last->activity == Activity::idle || last->activity == Activity::away);
    const bool pacing_ok =
        last_paced_goal_done_ < 0 || ctx.now - last_paced_goal_done_ >= config_.intrinsic_cooldown;
    if (!user_idle || !pacing_ok) return std::nullopt;

    for (const auto& target : scn.curiosity_targets) {
        if (ctx.self->visited(target.page)) continue;
        const TaskSpec* task = scn.find_task(target.task_id);
        if (!task) continue;
        return build_intrinsic_goal("curiosity-explore", task->id, target.page, task->tier());
    }

    if (const TaskSpec* task = find_template_task(scn, "housekeeping")) {
        return build_intrinsic_goal("housekeeping", task->id, "", task->tier());
    }
    return std::nullopt;
}

void System3::note_feed(const UserModel& user) {
    if (user.affect().stress_streak == 0) stress_handled_ = false;
}

void System3::on_episode_complete(const Goal& goal, Minutes now, bool success) {
    (void)success;
    if (goal.template_id == "curiosity-explore" || goal.template_id == "housekeeping")
        last_paced_goal_done_ = now;
    if (goal.template_id == "skill-upgrade" && !goal.subject.empty())
        gaps_in_progress_.erase(goal.subject);
}

// ─── Meta step ──────────────────────────────────────────────────────────────

MetaStepResult System3::meta_step(const ExecutiveContext& ctx, const GoalContext& goal_ctx) {
    if (!ctx.active_goal) throw WiringError("system3: meta_step requires an adopted goal");

    MetaStepResult out;
    Goal goal = *ctx.active_goal;

    if (check_creed(goal.text).refs.empty()) {
        out.status = MetaStepResult::Status::rejected;
        out.reason = "goal carries no creed reference";
        return out;
    }

    const std::string checklist = assets_->get("guardian_v1.txt");
    auto hook = [&](ThoughtTree& tree, int node_id) {
        supervise(tree, node_id, *backend_, checklist);
    };

    auto search = [&](const Goal& g, const SearchBudget& budget)
        -> std::pair<std::optional<Selection>, std::pair<ThoughtTree, int>> {
        ThoughtTree tree;
        tree.goal = g;
        tree.beta = ctx.beta;
        tree.add_root("achieve: " + g.text);
        const int expansions = expand(tree, *backend_, budget, hook);
        auto selection = select(tree);
        return {std::move(selection), {std::move(tree), expansions}};
    };

    auto [selection, tree_info] = search(goal, config_.budget);
    out.expansions = tree_info.second;
    if (!selection) {
        // Empty frontier: one retry with a relaxed utility threshold.
        SearchBudget relaxed = config_.budget;
        relaxed.utility_threshold *= 0.75;
        auto [retry_selection, retry_info] = search(goal, relaxed);
        out.expansions += retry_info.second;
        if (retry_selection) {
            selection = std::move(retry_selection);
            tree_info.first = std::move(retry_info.first);
        } else if (goal_ctx.scenario) {
            // Last resort: a low-stakes housekeeping objective.
            if (const TaskSpec* task = find_template_task(*goal_ctx.scenario, "housekeeping")) {
                Goal fallback = build_intrinsic_goal("housekeeping", task->id, "", task->tier());
                fallback.id = goal.id;
                fallback.adopted_at = goal.adopted_at;
                fallback.parent_goal = goal.parent_goal;
                auto [fb_selection, fb_info] = search(fallback, config_.budget);
                out.expansions += fb_info.second;
                if (fb_selection) {
                    selection = std::move(fb_selection);
                    tree_info.first = std::move(fb_info.first);
                    out.housekeeping_fallback = true;
                    goal = fallback;
                }
            }
        }
    }
    if (!selection) {
        out.status = MetaStepResult::Status::rejected;
        out.reason = "all candidate plans pruned";
        return out;
    }

    assert_selected_path_clean(tree_info.first, selection->node_id);
    out.status = MetaStepResult::Status::ok;
    out.decision = selection->decision;
    out.decision.goal = goal;
    out.tree = std::move(tree_info.first);
    out.plan_seed = selection->plan;
    out.selected_node = selection->node_id;
    return out;
}

}  // namespace triad
