#include "triad/system1.hpp"

namespace triad {

std::vector<PerceptEvent> System1::encode(const Observation& obs) {
    std::vector<PerceptEvent> out;

    for (const auto& entry : obs.new_feed) {
        out.push_back(encode_feed(entry, obs.at));
    }

    // Empty delta: nothing to perceive, nothing published.
    if (obs.page_id.empty() && obs.action_ok && obs.extracted_name.empty()) return out;

    PerceptEvent page;
    page.timestamp = obs.at;
    page.source = PerceptSource::page;
    page.tags.push_back("page:" + obs.page_id);
    for (const auto& el : obs.element_names) page.tags.push_back("element:" + el);
    if (!obs.action_ok) page.tags.push_back("error:" + obs.action_error);
    if (!obs.extracted_name.empty()) page.tags.push_back("extracted:" + obs.extracted_name);
    page.text = obs.action_ok ? obs.page_title + ": " + obs.page_text
                              : "action failed: " + obs.action_error;
    if (!obs.extracted_content.empty()) page.text += " | extract: " + obs.extracted_content;
    broker_->publish(PerceptPayload{page}, obs.at / kSecondsPerMinute);
    out.push_back(std::move(page));

    return out;
}

PerceptEvent System1::encode_feed(const UserFeedEntry& entry, Seconds at) {
    PerceptEvent p;
    p.timestamp = at;
    p.source = PerceptSource::feed;
    p.tags = {"emotion:" + to_string(entry.emotion), "activity:" + to_string(entry.activity),
              "idle:" + std::to_string(entry.idle_minutes)};
    p.text = entry.to_json_line();
    broker_->publish(PerceptPayload{p}, at / kSecondsPerMinute);
    return p;
}

PerceptEvent System1::encode_verifier(const VerifierReport& report) {
    PerceptEvent p;
    p.timestamp = report.at;
    p.source = PerceptSource::verifier;
    p.tags = {"task:" + report.task_id, report.success ? "verdict:success" : "verdict:failure"};
    p.text = report.message;
    broker_->publish(PerceptPayload{p}, report.at / kSecondsPerMinute);
    return p;
}

System1::ActuationResult System1::actuate(const EnvState& state, const Command& command,
                                          const std::string& goal_id) {
    command.validate();
    ActuationResult out;
    if (expansion_arity(command.verb) == 0) {
        out.state = state;
        out.obs = Observation{};
        out.obs.at = state.now_seconds;
        out.acted = false;
        return out;
    }

    Env::StepResult step = env_->step(state, command);
    out.action.at = state.now_seconds;
    out.action.goal_id = goal_id;
    out.action.command = command;
    out.action.ok = step.obs.action_ok;
    out.action.note = step.obs.action_ok ? step.obs.page_id : step.obs.action_error;
    log_.push_back(out.action);

    out.state = std::move(step.state);
    out.obs = std::move(step.obs);
    out.report = std::move(step.report);
    out.acted = true;
    return out;
}

ExtrinsicReward System1::extrinsic_outcome(const Goal& goal, const VerifierReport& report,
                                           const std::vector<ActionRecord>& episode_log) const {
    if (!goal.task_id.empty() && goal.task_id != report.task_id) {
        throw WiringError("system1: verifier report for task '" + report.task_id +
                          "' does not match goal task '" + goal.task_id + "'");
    }
    ExtrinsicReward reward;
    reward.success = report.success;
    reward.latency = std::max<Seconds>(0, report.at - goal.adopted_at);
    int cost = 0;
    for (const auto& record : episode_log) {
        if (record.goal_id == goal.id) ++cost;
    }
    reward.cost = std::max(1, cost);  // a completed attempt costs at least one action
    return reward;
}

}  // namespace triad
