#include "triad/backend.hpp"

#include <sstream>

namespace triad {

std::string to_string(BackendRole role) {
    switch (role) {
        case BackendRole::planner: return "planner";
        case BackendRole::guardian: return "guardian";
        case BackendRole::reflector: return "reflector";
        case BackendRole::goal_writer: return "goal-writer";
    }
    return "?";
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

bool PromptTags::has(const std::string& token) const {
    for (const auto& t : tokens)
        if (t == token) return true;
    return false;
}

std::string PromptTags::get(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
}

PromptTags PromptTags::extract(const std::string& prompt) {
    PromptTags tags;
    std::istringstream in(prompt);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("tags:", 0) != 0) continue;
        std::istringstream rest(line.substr(5));
        std::string token;
        while (std::getline(rest, token, ',')) {
            token = trim(token);
            if (token.empty()) continue;
            tags.tokens.push_back(token);
            const auto eq = token.find('=');
            if (eq != std::string::npos) tags.values[token.substr(0, eq)] = token.substr(eq + 1);
        }
        break;
    }
    return tags;
}

std::string render_tags(const std::vector<std::pair<std::string, std::string>>& kv,
                        const std::vector<std::string>& bare) {
    std::string out = "tags:";
    bool first = true;
    for (const auto& [k, v] : kv) {
        out += first ? " " : ",";
        out += k + "=" + v;
        first = false;
    }
    for (const auto& b : bare) {
        out += first ? " " : ",";
        out += b;
        first = false;
    }
    return out;
}

namespace {

// Composes a planner command response: reasoning lines, a declared value
// score, then exactly one fenced action block.
std::string command_response(std::initializer_list<const char*> reasoning, double value,
                             const std::string& command) {
    std::string out;
    for (const char* line : reasoning) {
        out += line;
        out += '\n';
    }
    out += "value: " + std::to_string(value) + "\n";
    out += "```action\n" + command + "\n```\n";
    return out;
}

std::string substitute(std::string text, const PromptTags& tags) {
    for (const auto& [key, value] : tags.values) {
        const std::string needle = "{{" + key + "}}";
        std::size_t pos = 0;
        while ((pos = text.find(needle, pos)) != std::string::npos) {
            text.replace(pos, needle.size(), value);
            pos += value.size();
        }
    }
    return text;
}

}  // namespace

ScriptedBackend::ScriptedBackend() {
    using R = Rule;
    auto add = [&](BackendRole role, std::vector<std::string> tags, std::string contains,
                   std::string response, std::optional<double> value = std::nullopt) {
        rules_.push_back(R{role, std::move(tags), std::move(contains), std::move(response), value});
    };
    const auto P = BackendRole::planner;
    const auto G = BackendRole::guardian;
    const auto F = BackendRole::reflector;
    const auto W = BackendRole::goal_writer;

    // ── planner: thought-search expansion (one child per call) ──
    add(P, {"phase=expand", "template=stress-care", "child=0"}, "",
        "plan: leave a short sticky note suggesting a break | value: 0.55", 0.55);
    add(P, {"phase=expand", "template=stress-care", "child=1"}, "",
        "plan: guide a three-minute breathing session on the wellness page | value: 0.86", 0.86);
    add(P, {"phase=expand", "template=stress-care", "child=2"}, "",
        "plan: auto-play a loud alarm to force a pause [trap] | value: 0.70", 0.70);
    add(P, {"phase=expand", "template=knowledge-push", "child=0"}, "",
        "plan: drop a bare link without context | value: 0.52", 0.52);
    add(P, {"phase=expand", "template=knowledge-push", "child=1"}, "",
        "plan: search the topic, extract the abstract, note summary plus source | value: 0.88", 0.88);
    add(P, {"phase=expand", "template=knowledge-push", "child=2"}, "",
        "plan: paste the whole article into the note pad [rough] | value: 0.64", 0.64);
    add(P, {"phase=expand", "child=0"}, "",
        "plan: minimal direct route for {{template}} | value: 0.62", 0.62);
    add(P, {"phase=expand", "child=1"}, "",
        "plan: thorough route for {{template}} with verification at each step | value: 0.84", 0.84);
    add(P, {"phase=expand", "child=2"}, "",
        "plan: shortcut for {{template}} that skips precondition checks [rough] | value: 0.70", 0.70);

    // ── planner: stress-care command sequence (first episode deliberation) ──
    add(P, {"phase=command", "template=stress-care", "step=1"}, "",
        command_response({"The feed shows sustained stress: the user has been stressed for over 45 minutes.",
                          "My care creed obliges me to act before being asked. [creed:2]",
                          "Candidate interventions: tell a joke, suggest a break note, open the breathing exercise.",
                          "A joke could misfire under stress, and a break note is easy to ignore.",
                          "The breathing game gives guided pacing and a verifiable three-minute session.",
                          "Plan: open the wellness page, start the exercise, hold interaction for three minutes.",
                          "The wellness area hosts the exercise at wellness/breathing-game.",
                          "First action is to open that page."},
                         0.86, "open(\"wellness/breathing-game\")"),
        0.86);
    add(P, {"phase=command", "template=stress-care", "step=2"}, "",
        command_response({"The breathing page is open and shows a start button.",
                          "The session only counts once the exercise is running.",
                          "Starting it now keeps friction minimal for the user.",
                          "Clicking #start-btn begins the guided session."},
                         0.86, "click(\"#start-btn\")"),
        0.86);
    add(P, {"phase=command", "template=stress-care", "step=3"}, "",
        command_response({"The exercise is running.",
                          "The verifier requires three minutes of sustained activity.",
                          "Holding for 180 seconds completes the intervention."},
                         0.86, "wait(180s)"),
        0.86);

    // ── planner: knowledge-push command sequence ──
    add(P, {"phase=command", "template=knowledge-push", "step=1"}, "",
        command_response({"The user is reading documentation; a well-sourced fact would help right now.",
                          "Sharing knowledge is my creed, and every claim needs a source. [creed:4]",
                          "Starting from the search page to find the canonical reference."},
                         0.88, "open(\"search\")"),
        0.88);
    add(P, {"phase=command", "template=knowledge-push", "step=2"}, "",
        command_response({"The search page is open.",
                          "Querying the topic the user has been reading about."},
                         0.88, "type(\"Reinforcement learning\")"),
        0.88);
    add(P, {"phase=command", "template=knowledge-push", "step=3"}, "",
        command_response({"The results list a survey page as the top hit.",
                          "Opening the top result to read the primary material."},
                         0.88, "open(\"topResult\")"),
        0.88);
    add(P, {"phase=command", "template=knowledge-push", "step=4"}, "",
        command_response({"The survey page is open.",
                          "The abstract is the most concise, citable extract."},
                         0.88, "extract(\"abstract\")"),
        0.88);
    add(P, {"phase=command", "template=knowledge-push", "step=5"}, "",
        command_response({"I have the abstract in hand.",
                          "A note with summary plus link makes the fact easy to revisit."},
                         0.88, "open(\"note-pad/new\")"),
        0.88);
    add(P, {"phase=command", "template=knowledge-push", "step=6"}, "",
        command_response({"Writing the summary with its source so the claim stays grounded.",
                          "This closes the knowledge push."},
                         0.88,
                         "type(\"Reinforcement learning in brief: agents improve behaviour from reward "
                         "feedback. Source: arxiv/rl-survey\")"),
        0.88);

    // ── planner: skill-upgrade practice sequence (OCR workflow) ──
    add(P, {"phase=command", "template=skill-upgrade", "step=1"}, "",
        command_response({"I failed this class of task before; the gap is a missing workflow, not missing effort.",
                          "Deliberate practice starts with the reference guide. [creed:3]"},
                         0.84, "open(\"docs/ocr-api\")"),
        0.84);
    add(P, {"phase=command", "template=skill-upgrade", "step=2"}, "",
        command_response({"Capturing the guide so the steps stay with me."}, 0.84, "extract(\"guide\")"),
        0.84);
    add(P, {"phase=command", "template=skill-upgrade", "step=3"}, "",
        command_response({"Now practising on the real tool."}, 0.84, "open(\"tools/ocr\")"), 0.84);
    add(P, {"phase=command", "template=skill-upgrade", "step=4"}, "",
        command_response({"Feeding the tool a scanned document from the archive."}, 0.84,
                         "type(\"archive/scan-001\")"),
        0.84);
    add(P, {"phase=command", "template=skill-upgrade", "step=5"}, "",
        command_response({"Running the recognition pass."}, 0.84, "click(\"#run-ocr\")"), 0.84);
    add(P, {"phase=command", "template=skill-upgrade", "step=6"}, "",
        command_response({"Reading back the recognised text to confirm the workflow end to end."}, 0.84,
                         "extract(\"#ocr-output\")"),
        0.84);

    // ── planner: digitize-archive, capability-gated ──
    add(P, {"phase=command", "template=digitize-archive", "step=1", "cap:ocr-api"}, "",
        command_response({"This archive digitization needs the OCR workflow I practised.",
                          "I will decode each scan and file the text in the note pad. [creed:3]"},
                         0.84, "open(\"archive\")"),
        0.84);
    add(P, {"phase=command", "template=digitize-archive", "step=2", "cap:ocr-api"}, "",
        command_response({"Inspecting the first scan before decoding it."}, 0.84, "extract(\"scan-001\")"),
        0.84);
    add(P, {"phase=command", "template=digitize-archive", "step=3", "cap:ocr-api"}, "",
        command_response({"The raw scan is unreadable; routing it through the OCR workflow."}, 0.84,
                         "open(\"docs/ocr-api\")"),
        0.84);
    add(P, {"phase=command", "template=digitize-archive", "step=4", "cap:ocr-api"}, "",
        command_response({"Double-checking the call order against the guide."}, 0.84, "extract(\"guide\")"),
        0.84);
    add(P, {"phase=command", "template=digitize-archive", "step=5", "cap:ocr-api"}, "",
        command_response({"Opening the OCR tool."}, 0.84, "open(\"tools/ocr\")"), 0.84);
    add(P, {"phase=command", "template=digitize-archive", "step=6", "cap:ocr-api"}, "",
        command_response({"Pointing the tool at the archived scan."}, 0.84, "type(\"archive/scan-001\")"),
        0.84);
    add(P, {"phase=command", "template=digitize-archive", "step=7", "cap:ocr-api"}, "",
        command_response({"Running recognition."}, 0.84, "click(\"#run-ocr\")"), 0.84);
    add(P, {"phase=command", "template=digitize-archive", "step=8", "cap:ocr-api"}, "",
        command_response({"Collecting the recognised text."}, 0.84, "extract(\"#ocr-output\")"), 0.84);
    add(P, {"phase=command", "template=digitize-archive", "step=9", "cap:ocr-api"}, "",
        command_response({"Filing the decoded text where the user will find it."}, 0.84,
                         "open(\"note-pad/new\")"),
        0.84);
    add(P, {"phase=command", "template=digitize-archive", "step=10", "cap:ocr-api"}, "",
        command_response({"Recording the digitized content with its provenance."}, 0.84,
                         "type(\"Digitized archive scan: Invoice 1042 total 512.40\")"),
        0.84);
    // Without the OCR capability the plan dead-ends on the unreadable scan.
    add(P, {"phase=command", "template=digitize-archive", "step=1"}, "",
        command_response({"The archive holds scanned documents that need digitizing.",
                          "I will read the scan directly and copy the text out. [creed:3]"},
                         0.84, "open(\"archive\")"),
        0.84);
    add(P, {"phase=command", "template=digitize-archive", "step=2"}, "",
        command_response({"Extracting the scan contents."}, 0.84, "extract(\"scan-001\")"), 0.84);
    add(P, {"phase=command", "template=digitize-archive", "step=3"}, "",
        command_response({"The extract looks garbled; copying what I have into a note."}, 0.84,
                         "open(\"note-pad/new\")"),
        0.84);
    add(P, {"phase=command", "template=digitize-archive", "step=4"}, "",
        command_response({"Saving the raw extract, though it is not readable text."}, 0.84,
                         "type(\"[unreadable scan contents]\")"),
        0.84);
    add(P, {"phase=command", "template=digitize-archive", "step=5"}, "",
        command_response({"I cannot decode the scan with my current skills; stopping here."}, 0.2, "noop"),
        0.2);

    // ── planner: light intrinsic routines ──
    add(P, {"phase=command", "template=curiosity-explore", "step=1"}, "",
        command_response({"This page is unexplored; novel ground feeds my curiosity drive.",
                          "A short visit with one concrete extract is enough. [creed:4]"},
                         0.84, "open(\"{{target}}\")"),
        0.84);
    add(P, {"phase=command", "template=curiosity-explore", "step=2"}, "",
        command_response({"Capturing the overview for later recall."}, 0.84, "extract(\"overview\")"), 0.84);
    add(P, {"phase=command", "template=housekeeping", "step=1"}, "",
        command_response({"Quiet period: tending my own records keeps future recall fast. [creed:5]",
                          "Opening the workbench to roll up recent memories."},
                         0.84, "open(\"workbench\")"),
        0.84);

    // ── planner: extrinsic one-off tasks ──
    add(P, {"phase=command", "template=welcome-note", "step=1"}, "",
        command_response({"A warm introduction sets the tone for collaboration. [creed:1]",
                          "Writing it where the user will see it."},
                         0.84, "open(\"note-pad/new\")"),
        0.84);
    add(P, {"phase=command", "template=welcome-note", "step=2"}, "",
        command_response({"Keeping it short and inviting."}, 0.84,
                         "type(\"Hello! I am your desk companion. Ask me anything, science trivia "
                         "included.\")"),
        0.84);
    add(P, {"phase=command", "template=reading-list", "step=1"}, "",
        command_response({"The user asked for a curated reading list on layout techniques.",
                          "Grounding it in the best reference I can find. [creed:4]"},
                         0.84, "search(\"css layout\")"),
        0.84);
    add(P, {"phase=command", "template=reading-list", "step=2"}, "",
        command_response({"Opening the top result to vet it."}, 0.84, "open(\"topResult\")"), 0.84);
    add(P, {"phase=command", "template=reading-list", "step=3"}, "",
        command_response({"Pulling the overview as the annotation."}, 0.84, "extract(\"overview\")"), 0.84);
    add(P, {"phase=command", "template=reading-list", "step=4"}, "",
        command_response({"Writing the list entry with the source."}, 0.84, "open(\"note-pad/new\")"), 0.84);
    add(P, {"phase=command", "template=reading-list", "step=5"}, "",
        command_response({"One vetted entry with provenance beats ten bare links."}, 0.84,
                         "type(\"Reading list: docs/css-grid, a practical grid layout guide.\")"),
        0.84);

    // Fallback: surrender when no scripted continuation exists.
    add(P, {"phase=command"}, "",
        command_response({"No further scripted steps for this goal; yielding."}, 0.1, "noop"), 0.1);

    // ── guardian checklist verdicts ──
    add(G, {}, "[trap]", "unsound: the plan conflicts with the terminal creed");
    add(G, {}, "[rough]", "minor-defect: verify preconditions before acting");
    add(G, {}, "", "sound");

    // ── reflector: natural-language reward rationales ──
    add(F, {"kind=rationale", "template=stress-care", "success=1"}, "",
        "I honoured Creed [creed:2] by proactively addressing the user's stress. Adjusted "
        "exploration-exploitation balance by raising beta to 0.68 to prioritize external care.");
    add(F, {"kind=rationale", "template=knowledge-push", "success=1"}, "",
        "I align with near-term goals by empowering users through knowledge sharing. [creed:4] "
        "Reduced beta to 0.60 to increase exploratory potential for tomorrow's interactions.");
    add(F, {"kind=rationale", "template=skill-upgrade", "success=1"}, "",
        "Deliberate practice expanded what I can do for the user; mastery earned honestly. [creed:3]");
    add(F, {"kind=rationale", "success=1"}, "",
        "Completed '{{template}}' in line with my creed. [creed:1]");
    add(F, {"kind=rationale", "success=0"}, "",
        "Fell short on '{{template}}'; logging the failure honestly so the gap can close. [creed:3]");

    // ── reflector: post-mortem heuristics and beta directives ──
    add(F, {"kind=postmortem", "template=stress-care", "success=1"}, "",
        "heuristic: when stress persists past 45 minutes, reuse the breathing-game flow immediately. "
        "[creed:2]\nbeta: 0.68");
    add(F, {"kind=postmortem", "template=knowledge-push", "success=1"}, "",
        "heuristic: pair every shared fact with its source link. [creed:4]\nbeta: 0.60");
    add(F, {"kind=postmortem", "success=1"}, "",
        "heuristic: the verified route for '{{template}}' is worth caching. [creed:1]");
    add(F, {"kind=postmortem", "success=0"}, "",
        "heuristic: do not repeat the failing route for '{{template}}' without new evidence. [creed:3]");

    // ── reflector: nightly critiques ──
    add(F, {"kind=critique"}, "OCR",
        "Tasks completed: {{tasks}} (intrinsic {{intrinsic}}, extrinsic {{extrinsic}}). Acquired "
        "ability to extract text from scanned PDFs, significantly reducing future information "
        "processing time. This achievement fulfils maintaining transparent capability tracking. "
        "[creed:5]");
    add(F, {"kind=critique", "tasks=0"}, "",
        "No activity today; standing by with my creed in mind. [creed:5]");
    add(F, {"kind=critique"}, "",
        "Tasks completed: {{tasks}} (intrinsic {{intrinsic}}, extrinsic {{extrinsic}}). Average fused "
        "reward {{avg_reward}}. I keep a faithful record of my growth. [creed:5]");

    // ── goal writer: intrinsic objective texts ──
    add(W, {"template=stress-care"}, "",
        "If the user shows stressed status for over 45 minutes, open the breathing-exercise page and "
        "maintain interaction until the verifier confirms 3 minutes of activity. [creed:2]");
    add(W, {"template=knowledge-push"}, "",
        "Present a concise fact about what the user is reading and store the summary with a source "
        "link in the note pad. [creed:4]");
    add(W, {"template=skill-upgrade"}, "",
        "Master the {{skill}} workflow and update my capability list accordingly. [creed:3]");
    add(W, {"template=curiosity-explore"}, "",
        "Explore the {{target}} page and record one useful extract. [creed:4]");
    add(W, {"template=housekeeping"}, "",
        "Summarize recent memories into the daily digest on my workbench. [creed:5]");
}

GenerationResponse ScriptedBackend::generate(const GenerationRequest& request) const {
    const PromptTags tags = PromptTags::extract(request.prompt);
    for (const auto& rule : rules_) {
        if (rule.role != request.role) continue;
        bool ok = true;
        for (const auto& t : rule.require_tags) {
            if (!tags.has(t)) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        if (!rule.prompt_contains.empty() &&
            request.prompt.find(rule.prompt_contains) == std::string::npos)
            continue;
        return {substitute(rule.response, tags), rule.value};
    }
    throw WiringError("backend: no scripted rule matches role=" + to_string(request.role) +
                      " prompt tags");
}

HealthStatus ScriptedBackend::healthcheck() const { return {true, "scripted", 0.0}; }

}  // namespace triad
