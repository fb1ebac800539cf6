#pragma once

#include "triad/assets.hpp"
#include "triad/backend.hpp"
#include "triad/memory.hpp"
#include "triad/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace triad {

// ─── Scratch pad ────────────────────────────────────────────────────────────

// Goal-scoped short-term memory. One appended line is one reasoning step;
// cleared at goal completion.
struct ScratchPad {
    std::vector<std::string> lines;
    int steps = 0;

    void append(std::string line) {
        lines.push_back(std::move(line));
        ++steps;
    }
    void clear() {
        lines.clear();
        steps = 0;
    }
};

// ─── Parsing ────────────────────────────────────────────────────────────────

struct ParseOutcome {
    std::optional<Command> command;
    std::string error;               // set when no command was extracted
    int reasoning_lines_added = 0;

    bool ok() const { return command.has_value(); }
};

// ─── Plan reuse ─────────────────────────────────────────────────────────────

struct PlanDecision {
    enum class Source { cached, fresh };

    Source source = Source::fresh;
    std::vector<Command> cached_commands;
    std::string signature;
};

// Hook for downstream trainers that want to observe terminated episodes.
// The runtime itself performs no parameter updates (forward learning only),
// so nothing implements this in-process; it marks the seam where a
// reward-weighted policy update would attach.
class PolicyUpdateHook {
public:
    virtual ~PolicyUpdateHook() = default;
    virtual void on_episode_terminated(const ReasoningTrace& trace, double fused_reward) = 0;
};

// Deliberate reasoner: prompt assembly, generation parsing, and cached-trace
// reuse. Holds no mutable parameters; behaviour changes arise solely from
// memory contents.
class System2 {
public:
    explicit System2(const AssetStore& assets) : assets_(&assets) {}

    // Deterministic template fill of the versioned planner prompt.
    std::string assemble_prompt(const Goal& goal, const ScratchPad& pad, const PerceptWindow& percepts,
                                const RetrievalResult& memories,
                                const std::array<std::string, 5>& creed,
                                const std::string& tags_line,
                                const std::string& plan_seed = "") const;

    // Extracts exactly one command from the fenced action block; reasoning
    // lines outside the block are appended to the pad and counted as steps.
    // No action block -> error outcome with the pad untouched.
    ParseOutcome parse_command(const std::string& raw, ScratchPad& pad) const;

    // Replays a cached trace when its signature matches the current
    // situation, charging only the retrieval decision as reasoning steps;
    // otherwise the caller runs the full thought-search pipeline.
    PlanDecision plan_or_reuse(const Goal& goal, const SalientFeed& feed, const EpisodicStore& memory,
                               ScratchPad& pad) const;

    // Single command-line grammar: verb("argument"), wait(180s) or noop.
    static std::optional<Command> parse_command_line(const std::string& line);

private:
    const AssetStore* assets_;
};

}  // namespace triad
