#include "triad/system2.hpp"

#include <sstream>

namespace triad {

namespace {

void replace_all(std::string& text, const std::string& needle, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), value);
        pos += value.size();
    }
}

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::string System2::assemble_prompt(const Goal& goal, const ScratchPad& pad,
                                     const PerceptWindow& percepts, const RetrievalResult& memories,
                                     const std::array<std::string, 5>& creed,
                                     const std::string& tags_line,
                                     const std::string& plan_seed) const {
    std::string prompt = assets_->get("planner_v1.txt");

    std::string creed_ids;
    std::string creed_section;
    for (int id : goal.creed_refs) {
        if (!creed_ids.empty()) creed_ids += ", ";
        creed_ids += std::to_string(id);
        creed_section += std::to_string(id) + ". " + creed[static_cast<std::size_t>(id - 1)] + "\n";
    }
    if (creed_section.empty()) creed_section = "(none)\n";

    std::string pad_section;
    for (const auto& line : pad.lines) pad_section += "- " + line + "\n";
    if (pad_section.empty()) pad_section = "(empty)\n";

    std::string percept_section;
    for (const auto& p : percepts.items())
        percept_section += "- [" + to_string(p.source) + "] " + p.text + "\n";
    if (percept_section.empty()) percept_section = "(none)\n";

    std::string memory_section;
    std::string reuse_section;
    for (const auto& hit : memories.hits) {
        char score[16];
        std::snprintf(score, sizeof score, "%.2f", hit.score);
        memory_section += "- (" + std::string(score) + ") " + hit.record.summary + "\n";
        if (hit.raw_loaded && reuse_section.empty()) {
            reuse_section = "## Reuse prior plan\n" + hit.record.summary + "\n";
        }
    }
    if (memory_section.empty()) memory_section = "(none)\n";

    replace_all(prompt, "{{tags}}", tags_line);
    replace_all(prompt, "{{goal_text}}", goal.text);
    replace_all(prompt, "{{plan}}", plan_seed.empty() ? "(none)" : plan_seed);
    replace_all(prompt, "{{creed_ids}}", creed_ids.empty() ? "(none)" : creed_ids);
    replace_all(prompt, "{{creed_section}}", creed_section);
    replace_all(prompt, "{{pad}}", pad_section);
    replace_all(prompt, "{{percepts}}", percept_section);
    replace_all(prompt, "{{memories}}", memory_section);
    replace_all(prompt, "{{reuse_section}}", reuse_section);
    return prompt;
}

std::optional<Command> System2::parse_command_line(const std::string& raw) {
    const std::string line = strip(raw);
    if (line == "noop") return Command::noop();
    const auto open = line.find('(');
    const auto close = line.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open) return std::nullopt;
    const auto verb = parse_verb(line.substr(0, open));
    if (!verb) return std::nullopt;
    std::string arg = line.substr(open + 1, close - open - 1);
    if (*verb == Verb::wait) {
        if (!arg.empty() && arg.back() == 's') arg.pop_back();
        try {
            const Seconds seconds = std::stoll(arg);
            if (seconds <= 0) return std::nullopt;
            return Command::wait(seconds);
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }
    if (arg.size() >= 2 && arg.front() == '"' && arg.back() == '"') arg = arg.substr(1, arg.size() - 2);
    if (*verb == Verb::noop) return Command::noop();
    Command cmd{*verb, arg, 0};
    if (arg.empty()) return std::nullopt;
    return cmd;
}

ParseOutcome System2::parse_command(const std::string& raw, ScratchPad& pad) const {
    ParseOutcome out;
    std::vector<std::string> reasoning;
    std::optional<Command> command;

    std::istringstream in(raw);
    std::string line;
    bool in_block = false;
    bool saw_block = false;
    while (std::getline(in, line)) {
        const std::string stripped = strip(line);
        if (stripped == "```action") {
            if (saw_block) {
                out.error = "multiple action blocks in generation";
                return out;
            }
            in_block = true;
            saw_block = true;
            continue;
        }
        if (in_block) {
            if (stripped == "```") {
                in_block = false;
                continue;
            }
            if (command) {
                out.error = "action block holds more than one command";
                return out;
            }
            command = parse_command_line(stripped);
            if (!command) {
                out.error = "unparseable command '" + stripped + "'";
                return out;
            }
            continue;
        }
        if (stripped.empty()) continue;
        if (stripped.rfind("value:", 0) == 0) continue;  // declared score, not reasoning
        reasoning.push_back(stripped);
    }

    if (!saw_block || !command) {
        out.error = out.error.empty() ? "no action block in generation" : out.error;
        return out;
    }
    for (auto& line_text : reasoning) pad.append(std::move(line_text));
    out.reasoning_lines_added = static_cast<int>(reasoning.size());
    out.command = command;
    return out;
}

PlanDecision System2::plan_or_reuse(const Goal& goal, const SalientFeed& feed,
                                    const EpisodicStore& memory, ScratchPad& pad) const {
    PlanDecision out;
    out.signature = trace_signature(goal, feed);
    const ReasoningTrace* trace = memory.find_trace(out.signature);
    if (!trace) {
        out.source = PlanDecision::Source::fresh;
        return out;
    }
    pad.append("Recalled a prior success for this situation.");
    pad.append("Signature matched cached trace " + out.signature + ".");
    pad.append("Replaying the cached plan (" + std::to_string(trace->commands.size()) +
               " commands) without fresh deliberation.");
    out.source = PlanDecision::Source::cached;
    out.cached_commands = trace->commands;
    return out;
}

}  // namespace triad
