#include "triad/reward.hpp"

#include "triad/memory.hpp"
#include "triad/models.hpp"

#include <algorithm>
#include <cmath>

namespace triad {

double extrinsic_scalar(const ExtrinsicReward& reward) {
    const double cost_penalty = 0.1 * std::min(1.0, reward.cost / 20.0);
    const double latency_penalty = 0.1 * std::min(1.0, static_cast<double>(reward.latency) / 600.0);
    const double raw = (reward.success ? 1.0 : 0.0) - cost_penalty - latency_penalty;
    return std::clamp(raw, 0.0, 1.0);
}

IntrinsicReward evaluate_intrinsic(const EpisodeLog& log, const EpisodicStore& memory,
                                   const SelfModel& self, const Backend& backend) {
    (void)memory;
    (void)self;
    IntrinsicReward out;

    if (!log.episode_pages.empty()) {
        std::size_t novel = 0;
        for (const auto& page : log.episode_pages)
            if (!log.previously_visited.count(page)) ++novel;
        out.curiosity = static_cast<double>(novel) / static_cast<double>(log.episode_pages.size());
    }

    double delta = 0.0;
    for (const auto& [skill, rates] : log.skill_rates) delta += rates.second - rates.first;
    out.mastery = std::clamp(delta, 0.0, 1.0);

    if (log.plan_nodes.empty()) {
        out.coherence = 1.0;  // vacuous plan
    } else {
        std::size_t clean = 0;
        for (const auto& node : log.plan_nodes)
            if (node.defect_free) ++clean;
        out.coherence = static_cast<double>(clean) / static_cast<double>(log.plan_nodes.size());
    }

    out.scalar = (out.curiosity + out.mastery + out.coherence) / 3.0;

    GenerationRequest req;
    req.role = BackendRole::reflector;
    req.prompt = render_tags({{"kind", "rationale"},
                              {"template", log.goal.template_id},
                              {"success", log.success ? "1" : "0"}}) +
                 "\nFormulate the intrinsic reward rationale for this episode.\nGoal: " +
                 log.goal.text + "\n";
    out.rationale = backend.generate(req).text;
    if (!check_creed(out.rationale).ok())
        throw WiringError("reward: intrinsic rationale carries no creed reference");
    return out;
}

HybridReward fuse_rewards(double ext_scalar, const IntrinsicReward& intrinsic, double beta,
                          const std::string& verifier_message) {
    HybridReward out;
    out.extrinsic = ext_scalar;
    out.intrinsic = intrinsic.scalar;
    if (beta < 0.0 || beta > 1.0) {
        out.beta_clamped = true;
        beta = std::clamp(beta, 0.0, 1.0);
    }
    out.beta = beta;
    out.fused = beta * ext_scalar + (1.0 - beta) * intrinsic.scalar;
    out.text = intrinsic.rationale + " | " + verifier_message;
    return out;
}

double adjust_beta(double current, const BetaDirective& directive) {
    double next = current;
    if (directive.target) {
        next = *directive.target;
    } else if (directive.delta) {
        next = current + *directive.delta;
    }
    return std::clamp(next, 0.0, 1.0);
}

}  // namespace triad
