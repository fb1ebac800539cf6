#pragma once

#include "triad/types.hpp"

#include <array>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace triad {

// ─── Creed checking ─────────────────────────────────────────────────────────

// Result of evaluating a text against the terminal creed. Texts reference
// creeds through explicit "[creed:N]" markers (N in 1..5); an empty set is a
// violation and the monitor rejects the text.
struct CreedCheck {
    std::set<int> refs;
    bool ok() const { return !refs.empty(); }
};

CreedCheck check_creed(const std::string& text);

// ─── Self-model ─────────────────────────────────────────────────────────────

struct Capability {
    std::string name;   // e.g. "OCR API proficiency"
    std::string skill;  // machine key, e.g. "ocr-api"
    std::string note;
};

struct SkillStats {
    int successes = 0;
    int failures = 0;
    std::deque<bool> window;  // sliding window of the last attempts (true = success)

    double success_rate() const {
        const int total = successes + failures;
        return total == 0 ? 0.0 : static_cast<double>(successes) / total;
    }
};

struct CapabilityGap {
    std::string skill;
    int failures_in_window = 0;
    std::string learning_target;  // e.g. "master the ocr-api workflow"
};

struct DriveLevels {
    double curiosity = 0.5;
    double mastery = 0.5;
    double relatedness = 0.5;
};

// Inspectable record of the agent's own capabilities, terminal creed and
// intrinsic state. The five creed sentences never mutate after construction;
// the capability list is append-only within a run.
class SelfModel {
public:
    SelfModel(std::array<std::string, 5> creed, double initial_beta);

    const std::array<std::string, 5>& creed() const { return creed_; }
    const std::string& creed_sentence(int id) const;  // id in 1..5

    double beta() const { return beta_; }
    void set_beta(double beta);

    DriveLevels& drives() { return drives_; }
    const DriveLevels& drives() const { return drives_; }

    const std::vector<Capability>& capabilities() const { return capabilities_; }
    bool has_capability_for(const std::string& skill) const;

    // Appends a capability; duplicates are idempotent no-ops. Returns whether
    // the capability was actually added.
    bool add_capability(const std::string& name, const std::string& skill, const std::string& note);

    void record_attempt(const std::string& skill, bool success);
    const std::map<std::string, SkillStats>& skills() const { return skills_; }

    // Exploration ledger backing the curiosity drive.
    void mark_visited(const std::string& page) { visited_pages_.insert(page); }
    bool visited(const std::string& page) const { return visited_pages_.count(page) > 0; }
    const std::set<std::string>& visited_pages() const { return visited_pages_; }

private:
    std::array<std::string, 5> creed_;
    double beta_;
    DriveLevels drives_;
    std::vector<Capability> capabilities_;
    std::map<std::string, SkillStats> skills_;
    std::set<std::string> visited_pages_;
};

// A skill with >= `kGapFailureThreshold` failures within the last
// `kGapWindow` attempts is a capability gap and becomes a learning target.
inline constexpr int kGapWindow = 10;
inline constexpr int kGapFailureThreshold = 3;

std::optional<CapabilityGap> detect_gap(const SelfModel& model);

// ─── User model ─────────────────────────────────────────────────────────────

struct UserAffect {
    Emotion emotion = Emotion::neutral;
    Minutes stress_streak = 0;  // virtual-minutes of uninterrupted stress
};

enum class KnowledgeLevel { novice, intermediate, expert };

std::string to_string(KnowledgeLevel level);

// Belief state for the (single) observed user, updated only from feed
// percepts. Out-of-order entries are rejected.
class UserModel {
public:
    explicit UserModel(std::string user_id = "user-0") : user_id_(std::move(user_id)) {}

    const std::string& user_id() const { return user_id_; }
    const UserAffect& affect() const { return affect_; }
    const std::vector<std::string>& inferred_goals() const { return inferred_goals_; }
    KnowledgeLevel knowledge_level() const { return knowledge_level_; }
    const std::vector<std::string>& relationship_notes() const { return relationship_notes_; }
    const std::optional<UserFeedEntry>& last_entry() const { return last_entry_; }

    void update(const UserFeedEntry& entry);

    void add_relationship_note(std::string note) { relationship_notes_.push_back(std::move(note)); }

private:
    std::string user_id_;
    UserAffect affect_;
    std::vector<std::string> inferred_goals_;
    KnowledgeLevel knowledge_level_ = KnowledgeLevel::novice;
    std::vector<std::string> relationship_notes_;
    std::optional<UserFeedEntry> last_entry_;
};

}  // namespace triad
