#include "triad/memory.hpp"

#include "triad/journal.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace triad {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char raw : text) {
        const unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

}  // namespace

Embedding embed_text(const std::string& text) {
    Embedding v{};
    for (const auto& token : tokenize(text)) v[fnv1a(token) % kEmbeddingDim] += 1.0;
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
    }
    return v;
}

double cosine(const Embedding& a, const Embedding& b) {
    double dot = 0.0;
    for (std::size_t i = 0; i < kEmbeddingDim; ++i) dot += a[i] * b[i];
    return dot;
}

std::string trace_signature(const Goal& goal, const SalientFeed& feed) {
    const int bucket = feed.idle_minutes / 15;
    // Parameterized templates key on their subject too, so a trace for one
    // curiosity target never replays against another.
    const std::string template_key =
        goal.subject.empty() ? goal.template_id : goal.template_id + "(" + goal.subject + ")";
    return template_key + "|" + to_string(feed.emotion) + "|" + to_string(feed.activity) + "|b" +
           std::to_string(bucket);
}

void EpisodicStore::commit(const EpisodeCommit& episode) {
    if (committed_episodes_.count(episode.episode_id)) return;  // idempotent

    EpisodicRecord rec;
    rec.id = next_id_++;
    rec.timestamp = episode.timestamp;
    rec.markers = episode.markers;
    rec.markers.push_back("goal:" + episode.goal.id);

    if (episode.summary_override.empty()) {
        std::ostringstream summary;
        summary << "goal '" << episode.goal.template_id << "' "
                << (episode.success ? "succeeded" : "failed") << " after " << episode.actions.size()
                << " action(s): " << episode.goal.text;
        rec.summary = summary.str();
    } else {
        rec.summary = episode.summary_override;
    }
    rec.embedding = embed_text(rec.summary);

    std::ostringstream raw;
    raw << "goal: " << episode.goal.text << "\n";
    for (const auto& line : episode.chain_of_thought) raw << "thought: " << line << "\n";
    for (const auto& a : episode.actions) raw << "action: " << a << "\n";
    for (const auto& o : episode.observations) raw << "obs: " << o << "\n";
    raw << "outcome: " << (episode.success ? "success" : "failure")
        << " fused=" << episode.fused_reward << "\n";

    committed_episodes_.emplace(episode.episode_id, rec.id);
    raw_by_id_.emplace(std::to_string(rec.id), raw.str());
    if (journal_) journal_->write_memory_record(rec, raw.str());
    records_.push_back(std::move(rec));

    if (episode.success) {
        ReasoningTrace trace;
        trace.goal_id = episode.goal.id;
        trace.goal_text = episode.goal.text;
        trace.template_id = episode.goal.template_id;
        trace.chain_of_thought = episode.chain_of_thought;
        trace.commands = episode.commands;
        trace.success = true;
        trace.fused_reward = episode.fused_reward;
        trace.signature = trace_signature(episode.goal, episode.feed);
        trace.context_digest = trace.signature;
        traces_[trace.signature] = std::move(trace);
    }
}

RetrievalResult EpisodicStore::retrieve(const std::string& query, std::size_t k,
                                        double relevance_threshold) const {
    RetrievalResult out;
    if (records_.empty() || k == 0) return out;

    const Embedding q = embed_text(query);
    std::vector<std::pair<double, const EpisodicRecord*>> scored;
    scored.reserve(records_.size());
    for (const auto& rec : records_) scored.emplace_back(cosine(q, rec.embedding), &rec);
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second->id < b.second->id;
    });

    const std::size_t n = std::min(k, scored.size());
    for (std::size_t i = 0; i < n; ++i) {
        RetrievalHit hit;
        hit.record = *scored[i].second;
        hit.score = scored[i].first;
        hit.raw_loaded = hit.score >= relevance_threshold;
        if (hit.raw_loaded) {
            ++raw_loads_;
            auto it = raw_by_id_.find(std::to_string(hit.record.id));
            hit.raw = it == raw_by_id_.end() ? "" : it->second;
        }
        if (hit.raw_loaded != (hit.score >= relevance_threshold)) ++lazy_law_violations_;
        out.hits.push_back(std::move(hit));
    }
    return out;
}

const ReasoningTrace* EpisodicStore::find_trace(const std::string& signature) const {
    auto it = traces_.find(signature);
    return it == traces_.end() ? nullptr : &it->second;
}

void TaskCache::put(const std::string& goal_id, EpisodicRecord record) {
    for (auto& [id, records] : cache_) {
        if (id == goal_id) {
            records.push_back(std::move(record));
            return;
        }
    }
    cache_.emplace_back(goal_id, std::vector<EpisodicRecord>{std::move(record)});
    while (cache_.size() > max_goals_) cache_.erase(cache_.begin());
}

const std::vector<EpisodicRecord>* TaskCache::get(const std::string& goal_id) const {
    for (const auto& [id, records] : cache_) {
        if (id == goal_id) return &records;
    }
    return nullptr;
}

void TaskCache::evict(const std::string& goal_id) {
    std::erase_if(cache_, [&](const auto& entry) { return entry.first == goal_id; });
}

}  // namespace triad
