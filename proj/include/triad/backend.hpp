#pragma once

#include "triad/types.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace triad {

enum class BackendRole { planner, guardian, reflector, goal_writer };

std::string to_string(BackendRole role);

struct GenerationRequest {
    BackendRole role = BackendRole::planner;
    std::string prompt;
    int max_length = 2048;
    double temperature = 0.0;
    std::uint64_t seed = 0;
};

struct GenerationResponse {
    std::string text;
    std::optional<double> value;  // declared value score for planner nodes
};

struct HealthStatus {
    bool healthy = false;
    std::string reason;
    double round_trip_ms = 0.0;
};

// Pluggable cognition interface. generate() must be safe for concurrent
// callers (thought-search workers fan out).
class Backend {
public:
    virtual ~Backend() = default;
    virtual GenerationResponse generate(const GenerationRequest& request) const = 0;
    virtual HealthStatus healthcheck() const = 0;
};

// ─── Prompt tags ────────────────────────────────────────────────────────────

// Prompts carry a machine-readable `tags:` line (comma-separated tokens,
// key=value or bare). The scripted backend keys its rule table on them.
struct PromptTags {
    std::vector<std::string> tokens;
    std::map<std::string, std::string> values;

    bool has(const std::string& token) const;
    std::string get(const std::string& key, const std::string& fallback = "") const;

    static PromptTags extract(const std::string& prompt);
};

std::string render_tags(const std::vector<std::pair<std::string, std::string>>& kv,
                        const std::vector<std::string>& bare = {});

// ─── Scripted backend ───────────────────────────────────────────────────────

// Deterministic rule table keyed on (role, prompt tags, prompt substring).
// First matching rule wins; {{key}} placeholders in the response are filled
// from the prompt's key=value tags.
class ScriptedBackend : public Backend {
public:
    struct Rule {
        BackendRole role;
        std::vector<std::string> require_tags;
        std::string prompt_contains;  // empty = no content requirement
        std::string response;
        std::optional<double> value;
    };

    ScriptedBackend();

    GenerationResponse generate(const GenerationRequest& request) const override;
    HealthStatus healthcheck() const override;

    const std::vector<Rule>& rules() const { return rules_; }

private:
    std::vector<Rule> rules_;
};

// ─── Remote backend ─────────────────────────────────────────────────────────

// Minimal structured-text-over-HTTP exchange:
//   POST /generate  {"role","prompt","max_length","temperature"}
//                -> {"text", "value"?}
//   GET  /health   -> 200
// Endpoint and auth token come from TRIAD_BACKEND_URL / TRIAD_BACKEND_TOKEN
// unless given explicitly. One retry after timeout, then BackendUnavailable.
class RemoteBackend : public Backend {
public:
    struct Options {
        std::string url;
        std::string token;
        int timeout_seconds = 30;
    };

    explicit RemoteBackend(Options options);
    static RemoteBackend from_environment();

    GenerationResponse generate(const GenerationRequest& request) const override;
    HealthStatus healthcheck() const override;

private:
    Options options_;
};

}  // namespace triad
