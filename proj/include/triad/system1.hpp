#pragma once

#include "triad/kernel.hpp"
#include "triad/sandbox_env.hpp"
#include "triad/types.hpp"

#include <vector>

namespace triad {

// Reflex layer: deterministic observation encoding, command actuation, and
// extrinsic reward emission. Stateless apart from the append-only action log.
class System1 {
public:
    System1(const Env& env, EventBroker& broker) : env_(&env), broker_(&broker) {}

    // Deterministic tagging of an observation into typed percepts, published
    // to the kernel bus: feed entries -> feed percepts, page content -> page
    // percepts. Returns the published list.
    std::vector<PerceptEvent> encode(const Observation& obs);

    PerceptEvent encode_feed(const UserFeedEntry& entry, Seconds at);
    PerceptEvent encode_verifier(const VerifierReport& report);

    struct ActuationResult {
        EnvState state;
        Observation obs;
        std::optional<VerifierReport> report;
        ActionRecord action;
        bool acted = false;  // false for noop (empty expansion)
    };

    // Expands one command into primitive environment actions (arity per
    // expansion_arity) and executes them in order. Environment failures come
    // back as failure observations, never exceptions.
    ActuationResult actuate(const EnvState& state, const Command& command, const std::string& goal_id);

    // Builds the extrinsic reward for a settled goal: success copied from the
    // verifier, latency measured from goal adoption, cost counted from the
    // episode's action log.
    ExtrinsicReward extrinsic_outcome(const Goal& goal, const VerifierReport& report,
                                      const std::vector<ActionRecord>& episode_log) const;

    // Documented expansion arity per verb (noop expands to nothing).
    static int expansion_arity(Verb verb) { return verb == Verb::noop ? 0 : 1; }

    const std::vector<ActionRecord>& action_log() const { return log_; }

private:
    const Env* env_;
    EventBroker* broker_;
    std::vector<ActionRecord> log_;
};

}  // namespace triad
