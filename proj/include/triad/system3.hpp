#pragma once

#include "triad/assets.hpp"
#include "triad/backend.hpp"
#include "triad/kernel.hpp"
#include "triad/memory.hpp"
#include "triad/models.hpp"
#include "triad/reward.hpp"
#include "triad/scenario.hpp"
#include "triad/types.hpp"

#include <functional>
#include <set>
#include <string>
#include <vector>

namespace triad {

// ─── Thought tree ───────────────────────────────────────────────────────────

enum class NodeStatus { open, pruned, annotated, selected };
enum class VerdictKind { sound, minor_defect, unsound };

struct GuardianVerdict {
    VerdictKind kind = VerdictKind::sound;
    std::string note;  // corrective directive or unsound reason
};

struct ThoughtNode {
    int id = 0;
    int parent = -1;  // -1 for the root
    std::string plan;
    std::optional<double> value_estimate;
    NodeStatus status = NodeStatus::open;
    std::optional<GuardianVerdict> verdict;
    bool expanded = false;
};

struct SearchBudget {
    int max_expansions = 32;
    int branching = 3;
    double utility_threshold = 0.8;  // halt once a leaf value clears this
};

struct IntrinsicSpec {
    double curiosity_weight = 1.0 / 3.0;
    double mastery_weight = 1.0 / 3.0;
    double coherence_weight = 1.0 / 3.0;
    std::string rationale;  // references >= 1 creed
};

struct MetaDecision {
    Goal goal;
    IntrinsicSpec reward_spec;
    double beta = 0.5;
};

class ThoughtTree {
public:
    Goal goal;
    double beta = 0.5;

    int add_root(std::string plan, double value_estimate = 0.0);
    // Throws WiringError when the parent is pruned: pruned nodes never grow.
    int add_child(int parent, std::string plan, std::optional<double> value_estimate);

    ThoughtNode& node(int id);
    const ThoughtNode& node(int id) const;
    const std::vector<ThoughtNode>& nodes() const { return nodes_; }
    bool empty() const { return nodes_.empty(); }

    bool is_leaf(int id) const;
    std::vector<int> leaves() const;
    std::vector<int> path_from_root(int id) const;

private:
    std::vector<ThoughtNode> nodes_;
};

// ─── Thought search operations ──────────────────────────────────────────────

using NodeHook = std::function<void(ThoughtTree&, int node_id)>;

// Beam-style expansion of the best open node (max value estimate, ties by
// lowest id), up to `branching` children per expansion. Each new node passes
// through `on_new_node` (process supervision). Halts when an unpruned leaf
// clears the utility threshold or the expansion budget is exhausted. A
// backend failure marks the node annotated and continues with the remaining
// frontier. Fan-out may run concurrently; children merge in request order so
// the tree is independent of worker scheduling.
int expand(ThoughtTree& tree, const Backend& backend, const SearchBudget& budget,
           const NodeHook& on_new_node = nullptr, bool parallel = false);

// Guardian checklist critique of one newly generated node: unsound nodes are
// pruned, minor defects become edge annotations. Guardian failure defaults to
// minor-defect ("re-verify"), never to sound.
GuardianVerdict supervise(ThoughtTree& tree, int node_id, const Backend& guardian,
                          const std::string& checklist);

struct Selection {
    MetaDecision decision;
    int node_id = -1;
    std::string plan;
};

// Argmax over unpruned leaves by value estimate, ties by smallest node id.
// Empty frontier (all leaves pruned) -> nullopt, triggering re-generation.
std::optional<Selection> select(ThoughtTree& tree);

// Throws WiringError if any node on the selected path is pruned or carries an
// unsound verdict.
void assert_selected_path_clean(const ThoughtTree& tree, int selected_id);

// ─── Reflection ─────────────────────────────────────────────────────────────

struct ReflectionReport {
    std::string episode_id;
    struct Delta {
        int node_id = 0;
        double predicted = 0.0;
        double realized = 0.0;
    };
    std::vector<Delta> deltas;
    std::vector<int> patched_nodes;  // |predicted - realized| > tolerance
    std::vector<std::string> heuristics;
    std::optional<BetaDirective> beta_directive;
    std::string rationale;  // full reflector output, references >= 1 creed
};

inline constexpr double kPatchTolerance = 0.3;

// ─── Executive monitor ──────────────────────────────────────────────────────

struct GoalContext {
    const Scenario* scenario = nullptr;
    const UserModel* user = nullptr;
    const SelfModel* self = nullptr;
    const EpisodicStore* memory = nullptr;
    Minutes now = 0;
};

struct MetaStepResult {
    enum class Status { ok, rejected };

    Status status = Status::ok;
    std::string reason;        // rejection reason
    MetaDecision decision;
    ThoughtTree tree;
    std::string plan_seed;     // selected leaf plan, seeds the reasoning prompt
    int selected_node = -1;
    int expansions = 0;
    bool housekeeping_fallback = false;
};

struct System3Config {
    SearchBudget budget;
    Minutes stress_trigger_minutes = 45;
    Minutes intrinsic_cooldown = 30;  // pacing for curiosity/housekeeping goals
};

// The always-on meta-policy: goal generation, thought search with process
// supervision, selection, and post-episode reflection.
class System3 {
public:
    System3(const Backend& backend, const AssetStore& assets, System3Config config)
        : backend_(&backend), assets_(&assets), config_(config) {}

    const System3Config& config() const { return config_; }

    // Intrinsic goal generation, in trigger priority order: sustained user
    // stress, detected capability gap, fresh learning interest, unvisited
    // curiosity target, housekeeping fallback. Returns nothing when no
    // trigger fires and pacing forbids housekeeping.
    std::optional<Goal> generate_goal(const GoalContext& ctx);

    // Full meta-policy step for an adopted goal: validate creed references,
    // expand/supervise, select; on an empty frontier retry once with a
    // relaxed threshold, then fall back to a housekeeping goal.
    MetaStepResult meta_step(const ExecutiveContext& ctx, const GoalContext& goal_ctx);

    // Post-mortem over the surviving path: compares predicted vs realized
    // reward, patches nodes beyond tolerance, distils heuristics and an
    // optional beta directive through the backend.
    ReflectionReport reflect(const EpisodeLog& log, ThoughtTree* tree, double realized_fused) const;

    // Feed bookkeeping: re-arms the stress rule once the streak resets.
    void note_feed(const UserModel& user);
    void on_episode_complete(const Goal& goal, Minutes now, bool success);

private:
    Goal build_intrinsic_goal(const std::string& template_id, const std::string& task_id,
                              const std::string& subject, Difficulty difficulty) const;

    const Backend* backend_;
    const AssetStore* assets_;
    System3Config config_;

    bool stress_handled_ = false;
    std::set<std::string> gaps_in_progress_;
    std::size_t docs_interest_consumed_ = 0;
    Minutes last_paced_goal_done_ = -1;  // completion time of the last paced intrinsic goal
};

}  // namespace triad
