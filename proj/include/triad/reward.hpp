#pragma once

#include "triad/backend.hpp"
#include "triad/types.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace triad {

class EpisodicStore;
class SelfModel;

// ─── Episode log ────────────────────────────────────────────────────────────

// Outcome snapshot of one plan node on the executed path.
struct PlanNodeOutcome {
    int node_id = 0;
    double value_estimate = 0.0;
    bool defect_free = true;  // guardian raised no defect on this node
};

// Everything the intrinsic evaluator and the reflector need about one
// terminated episode.
struct EpisodeLog {
    Goal goal;
    std::vector<std::string> episode_pages;       // pages visited during the episode
    std::set<std::string> previously_visited;     // exploration ledger before the episode
    std::map<std::string, std::pair<double, double>> skill_rates;  // skill -> (before, after)
    std::vector<PlanNodeOutcome> plan_nodes;      // surviving path
    bool success = false;
    ExtrinsicReward extrinsic;
    std::string verifier_message;
};

// ─── Reward types ───────────────────────────────────────────────────────────

struct IntrinsicReward {
    double curiosity = 0.0;  // fraction of episode pages never visited before
    double mastery = 0.0;    // proficiency delta on exercised skills, clamped
    double coherence = 0.0;  // fraction of plan nodes executed without defect
    double scalar = 0.0;     // mean of the three drives
    std::string rationale;   // natural language, references >= 1 creed
};

struct HybridReward {
    double extrinsic = 0.0;  // shaped success/latency/cost scalar in [0,1]
    double intrinsic = 0.0;
    double beta = 0.5;
    double fused = 0.0;  // beta*extrinsic + (1-beta)*intrinsic
    std::string text;    // intrinsic rationale + verifier message
    bool beta_clamped = false;
};

struct BetaDirective {
    std::optional<double> target;
    std::optional<double> delta;
    std::string rationale;
};

// ─── Operations ─────────────────────────────────────────────────────────────

// Scalarizes (success, latency, cost) into [0,1]:
//   success - 0.1*min(1, cost/20) - 0.1*min(1, latency/600s), clamped.
double extrinsic_scalar(const ExtrinsicReward& reward);

IntrinsicReward evaluate_intrinsic(const EpisodeLog& log, const EpisodicStore& memory,
                                   const SelfModel& self, const Backend& backend);

// Convex fusion: fused = beta*ext + (1-beta)*int. Out-of-range beta is
// clamped and flagged.
HybridReward fuse_rewards(double ext_scalar, const IntrinsicReward& intrinsic, double beta,
                          const std::string& verifier_message);

double adjust_beta(double current, const BetaDirective& directive);

}  // namespace triad
