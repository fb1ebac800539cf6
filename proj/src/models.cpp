#include "triad/models.hpp"

#include <algorithm>

namespace triad {

std::string to_string(KnowledgeLevel level) {
    switch (level) {
        case KnowledgeLevel::novice: return "novice";
        case KnowledgeLevel::intermediate: return "intermediate";
        case KnowledgeLevel::expert: return "expert";
    }
    return "?";
}

CreedCheck check_creed(const std::string& text) {
    CreedCheck out;
    const std::string marker = "[creed:";
    std::size_t pos = 0;
    while ((pos = text.find(marker, pos)) != std::string::npos) {
        const std::size_t digit = pos + marker.size();
        if (digit < text.size() && text[digit] >= '1' && text[digit] <= '5' &&
            digit + 1 < text.size() && text[digit + 1] == ']') {
            out.refs.insert(text[digit] - '0');
        }
        pos = digit;
    }
    return out;
}

SelfModel::SelfModel(std::array<std::string, 5> creed, double initial_beta)
    : creed_(std::move(creed)), beta_(initial_beta) {
    for (const auto& sentence : creed_) {
        if (sentence.empty()) throw WiringError("models: creed sentences must be non-empty");
    }
    if (beta_ < 0.0 || beta_ > 1.0) throw WiringError("models: initial beta outside [0,1]");
}

const std::string& SelfModel::creed_sentence(int id) const {
    if (id < 1 || id > 5) throw WiringError("models: creed id " + std::to_string(id) + " out of range");
    return creed_[static_cast<std::size_t>(id - 1)];
}

void SelfModel::set_beta(double beta) {
    beta_ = std::clamp(beta, 0.0, 1.0);
}

bool SelfModel::has_capability_for(const std::string& skill) const {
    for (const auto& cap : capabilities_)
        if (cap.skill == skill) return true;
    return false;
}

bool SelfModel::add_capability(const std::string& name, const std::string& skill,
                               const std::string& note) {
    for (const auto& cap : capabilities_) {
        if (cap.name == name) return false;  // idempotent
    }
    capabilities_.push_back(Capability{name, skill, note});
    return true;
}

void SelfModel::record_attempt(const std::string& skill, bool success) {
    if (skill.empty()) return;
    SkillStats& stats = skills_[skill];
    if (success)
        ++stats.successes;
    else
        ++stats.failures;
    stats.window.push_back(success);
    while (stats.window.size() > static_cast<std::size_t>(kGapWindow)) stats.window.pop_front();
}

std::optional<CapabilityGap> detect_gap(const SelfModel& model) {
    for (const auto& [skill, stats] : model.skills()) {
        if (model.has_capability_for(skill)) continue;
        const int failures =
            static_cast<int>(std::count(stats.window.begin(), stats.window.end(), false));
        if (failures >= kGapFailureThreshold) {
            return CapabilityGap{skill, failures, "master the " + skill + " workflow"};
        }
    }
    return std::nullopt;
}

void UserModel::update(const UserFeedEntry& entry) {
    if (last_entry_ && entry.timestamp <= last_entry_->timestamp) {
        throw WiringError("models: out-of-order feed entry at t=" + std::to_string(entry.timestamp));
    }
    const Minutes spacing =
        last_entry_ ? entry.timestamp - last_entry_->timestamp : kFeedCadenceMinutes;

    if (entry.emotion == Emotion::stressed) {
        affect_.stress_streak += spacing;
    } else {
        affect_.stress_streak = 0;
    }
    affect_.emotion = entry.emotion;

    if (entry.activity == Activity::reading_docs) {
        inferred_goals_.push_back("learning-interest: reading_docs at t=" +
                                  std::to_string(entry.timestamp));
    }
    last_entry_ = entry;
}

}  // namespace triad
