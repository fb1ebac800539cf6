#pragma once

#include "triad/types.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace triad {

class Journal;  // persistence facade (journal.hpp)

inline constexpr std::size_t kEmbeddingDim = 256;
using Embedding = std::array<double, kEmbeddingDim>;

// Deterministic hashed bag-of-words embedding, L2-normalized unless all-zero.
// Stable across processes and platforms (FNV-1a, no std::hash).
Embedding embed_text(const std::string& text);

double cosine(const Embedding& a, const Embedding& b);

// ─── Trace signatures ───────────────────────────────────────────────────────

// Feed fields that matter for plan reuse.
struct SalientFeed {
    Emotion emotion = Emotion::neutral;
    Activity activity = Activity::idle;
    int idle_minutes = 0;
};

// Canonical reuse key: (goal template, emotion, activity, idle bucket).
// Idle minutes are bucketed at 15-minute granularity so "identical symptoms"
// is decidable.
std::string trace_signature(const Goal& goal, const SalientFeed& feed);

// ─── Episodic records & traces ──────────────────────────────────────────────

// Successful deliberation kept for in-context reuse.
struct ReasoningTrace {
    std::string goal_id;
    std::string goal_text;
    std::string template_id;
    std::string context_digest;  // the signature it was stored under
    std::vector<std::string> chain_of_thought;
    std::vector<Command> commands;
    bool success = false;
    double fused_reward = 0.0;
    std::string signature;
};

struct EpisodicRecord {
    std::uint64_t id = 0;
    Minutes timestamp = 0;
    std::vector<std::string> markers;  // situational tags: page/feed/goal
    std::string summary;               // always resident
    Embedding embedding{};             // deterministic function of the summary
};

struct RetrievalHit {
    EpisodicRecord record;
    double score = 0.0;
    bool raw_loaded = false;
    std::string raw;  // filled only when raw_loaded
};

struct RetrievalResult {
    std::vector<RetrievalHit> hits;  // sorted descending by score, ties by id
};

// Everything the store needs to remember about one terminated episode.
struct EpisodeCommit {
    std::string episode_id;  // goal id; commits are idempotent per id
    Minutes timestamp = 0;
    Goal goal;
    std::vector<std::string> observations;
    std::vector<std::string> actions;
    std::vector<double> rewards;
    std::vector<std::string> chain_of_thought;
    std::vector<Command> commands;
    bool success = false;
    double fused_reward = 0.0;
    SalientFeed feed;
    std::vector<std::string> markers;
    std::string summary_override;  // replaces the generated summary when set
};

// ─── Episodic store ─────────────────────────────────────────────────────────

// Long-term append-only store with summary-tier search. Raw traces stay in
// the cold tier and are materialized into results only when relevance clears
// the threshold. When a journal is attached, each record is also persisted as
// a front-matter record file under the Growth-Journal directory.
class EpisodicStore {
public:
    explicit EpisodicStore(Journal* journal = nullptr) : journal_(journal) {}

    // Appends one record (idempotent per episode id); successful episodes
    // additionally index their reasoning trace by signature.
    void commit(const EpisodeCommit& episode);

    // Top-k cosine retrieval over summaries. Raw loaded iff score >= threshold.
    RetrievalResult retrieve(const std::string& query, std::size_t k, double relevance_threshold) const;

    const ReasoningTrace* find_trace(const std::string& signature) const;

    std::size_t size() const { return records_.size(); }
    const std::vector<EpisodicRecord>& records() const { return records_; }

    // Lazy-load audit counters: raw loads must only ever happen at or above
    // the threshold, and every above-threshold hit must load.
    std::uint64_t raw_loads() const { return raw_loads_; }
    std::uint64_t lazy_law_violations() const { return lazy_law_violations_; }

private:
    Journal* journal_;
    std::vector<EpisodicRecord> records_;
    std::map<std::string, std::string> raw_by_id_;  // record id (as string) -> raw trace text
    std::map<std::string, std::uint64_t> committed_episodes_;
    std::map<std::string, ReasoningTrace> traces_;
    std::uint64_t next_id_ = 1;
    mutable std::uint64_t raw_loads_ = 0;
    mutable std::uint64_t lazy_law_violations_ = 0;
};

// ─── Task-scoped cache ──────────────────────────────────────────────────────

// Working-set cache keyed by active goal id; evicted wholesale at goal
// completion, bounded in the number of goals it tracks.
class TaskCache {
public:
    explicit TaskCache(std::size_t max_goals = 8) : max_goals_(max_goals) {}

    void put(const std::string& goal_id, EpisodicRecord record);
    const std::vector<EpisodicRecord>* get(const std::string& goal_id) const;
    void evict(const std::string& goal_id);
    std::size_t goal_count() const { return cache_.size(); }

private:
    std::size_t max_goals_;
    std::vector<std::pair<std::string, std::vector<EpisodicRecord>>> cache_;  // insertion order
};

}  // namespace triad
