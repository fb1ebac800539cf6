#include "triad/journal.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace triad {

namespace fs = std::filesystem;

std::string to_string(JournalKind k) {
    switch (k) {
        case JournalKind::goal: return "goal";
        case JournalKind::action: return "action";
        case JournalKind::reward: return "reward";
        case JournalKind::reflection: return "reflection";
        case JournalKind::critique: return "critique";
        case JournalKind::capability: return "capability";
    }
    return "?";
}

std::optional<JournalKind> parse_journal_kind(const std::string& s) {
    if (s == "goal") return JournalKind::goal;
    if (s == "action") return JournalKind::action;
    if (s == "reward") return JournalKind::reward;
    if (s == "reflection") return JournalKind::reflection;
    if (s == "critique") return JournalKind::critique;
    if (s == "capability") return JournalKind::capability;
    return std::nullopt;
}

namespace {

std::string canonical_body(const std::string& body) {
    std::string out = body;
    while (!out.empty() && (out.back() == '\n' || out.back() == ' ')) out.pop_back();
    return out;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

Journal::Journal(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_ / "records", ec);
    if (ec) throw JournalError("journal: cannot create directory " + dir_.string() + ": " + ec.message());
    // The journal is the sole persistence channel; refuse to start blind.
    const fs::path probe = dir_ / ".write-probe";
    std::ofstream test(probe);
    if (!test) throw JournalError("journal: directory " + dir_.string() + " is not writable");
    test.close();
    fs::remove(probe, ec);
}

fs::path Journal::day_file(Minutes timestamp) const {
    const long day = static_cast<long>(timestamp / kMinutesPerDay);
    char name[32];
    std::snprintf(name, sizeof name, "day-%03ld.md", day);
    return dir_ / name;
}

fs::path Journal::append_entry(const JournalEntry& entry) {
    if (entry.timestamp < last_timestamp_)
        throw WiringError("journal: timestamps must be non-decreasing (got " +
                          std::to_string(entry.timestamp) + " after " +
                          std::to_string(last_timestamp_) + ")");
    const std::string body = canonical_body(entry.body);
    std::istringstream check(body);
    std::string line;
    while (std::getline(check, line)) {
        if (line == "---")
            throw WiringError("journal: entry body must not contain a bare '---' line");
    }

    const fs::path path = day_file(entry.timestamp);
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw JournalError("journal: cannot open " + path.string() + " for append");
    out << "---\n";
    out << "timestamp: " << entry.timestamp << "\n";
    out << "kind: " << to_string(entry.kind) << "\n";
    out << "goal_id: " << (entry.goal_id.empty() ? "-" : entry.goal_id) << "\n";
    for (const auto& [key, value] : entry.extra) out << key << ": " << value << "\n";
    out << "---\n";
    if (!body.empty()) out << body << "\n";
    out << "\n";
    last_timestamp_ = entry.timestamp;
    return path;
}

fs::path Journal::write_memory_record(const EpisodicRecord& record, const std::string& raw) {
    char name[40];
    std::snprintf(name, sizeof name, "rec-%06llu.md", static_cast<unsigned long long>(record.id));
    const fs::path path = dir_ / "records" / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw JournalError("journal: cannot write record " + path.string());
    out << "---\n";
    out << "id: " << record.id << "\n";
    out << "timestamp: " << record.timestamp << "\n";
    std::string markers;
    for (const auto& m : record.markers) {
        if (!markers.empty()) markers += ", ";
        markers += m;
    }
    out << "markers: " << markers << "\n";
    out << "---\n";
    out << record.summary << "\n";
    out << "<!-- raw -->\n";
    out << raw;
    return path;
}

fs::path Journal::write_self_model(const SelfModel& model) {
    const fs::path path = dir_ / "self-model.md";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw JournalError("journal: cannot write " + path.string());
    out << "# self-model\n";
    out << "beta: " << format_double(model.beta()) << "\n";
    out << "drive.curiosity: " << format_double(model.drives().curiosity) << "\n";
    out << "drive.mastery: " << format_double(model.drives().mastery) << "\n";
    out << "drive.relatedness: " << format_double(model.drives().relatedness) << "\n";
    for (int i = 1; i <= 5; ++i) out << "creed." << i << ": " << model.creed_sentence(i) << "\n";
    for (const auto& cap : model.capabilities())
        out << "capability: " << cap.name << " | skill: " << cap.skill << " | note: " << cap.note << "\n";
    for (const auto& [skill, stats] : model.skills())
        out << "skill." << skill << ": successes=" << stats.successes
            << " failures=" << stats.failures << "\n";
    return path;
}

JournalEntry Journal::nightly_critique(const std::vector<JournalEntry>& day_entries,
                                       const Backend& backend, Minutes at) {
    int tasks = 0, intrinsic = 0, extrinsic = 0;
    double reward_sum = 0.0;
    std::vector<std::string> caps;
    for (const auto& e : day_entries) {
        if (e.kind == JournalKind::reward) {
            ++tasks;
            for (const auto& [k, v] : e.extra) {
                if (k == "origin") (v == "intrinsic" ? intrinsic : extrinsic)++;
                if (k == "fused") reward_sum += std::stod(v);
            }
        } else if (e.kind == JournalKind::capability) {
            for (const auto& [k, v] : e.extra)
                if (k == "name") caps.push_back(v);
        }
    }
    const double avg = tasks == 0 ? 0.0 : reward_sum / tasks;

    std::string caps_line;
    for (const auto& c : caps) {
        if (!caps_line.empty()) caps_line += ", ";
        caps_line += c;
    }

    GenerationRequest req;
    req.role = BackendRole::reflector;
    req.prompt = render_tags({{"kind", "critique"},
                              {"tasks", std::to_string(tasks)},
                              {"intrinsic", std::to_string(intrinsic)},
                              {"extrinsic", std::to_string(extrinsic)},
                              {"avg_reward", format_double(avg)}}) +
                 "\nWrite the nightly self-critique for this day.\nCapabilities added: " +
                 (caps_line.empty() ? "none" : caps_line) + "\n";
    const GenerationResponse res = backend.generate(req);
    if (!check_creed(res.text).ok())
        throw WiringError("journal: nightly critique carries no creed reference");

    JournalEntry entry;
    entry.timestamp = at;
    entry.kind = JournalKind::critique;
    entry.goal_id = "-";
    entry.extra = {{"tasks", std::to_string(tasks)},
                   {"intrinsic", std::to_string(intrinsic)},
                   {"extrinsic", std::to_string(extrinsic)}};
    entry.body = res.text;
    append_entry(entry);
    return entry;
}

std::vector<LoadedEntry> Journal::replay_load(const fs::path& dir) {
    std::vector<fs::path> files;
    if (!fs::exists(dir)) throw JournalError("journal: directory " + dir.string() + " does not exist");
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const std::string name = e.path().filename().string();
        if (name.rfind("day-", 0) == 0 && name.size() > 3 && name.substr(name.size() - 3) == ".md")
            files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());

    std::vector<LoadedEntry> out;
    for (const auto& file : files) {
        std::ifstream in(file, std::ios::binary);
        if (!in) throw JournalError("journal: cannot open " + file.string());
        std::vector<std::string> lines;
        std::string line;
        while (std::getline(in, line)) lines.push_back(line);

        std::size_t i = 0;
        auto fail = [&](std::size_t at, const std::string& what) -> void {
            throw JournalError("journal: " + file.filename().string() + ":" + std::to_string(at + 1) +
                               ": " + what);
        };
        while (i < lines.size()) {
            if (lines[i].empty()) {
                ++i;
                continue;
            }
            if (lines[i] != "---") fail(i, "expected '---' to open front-matter");
            LoadedEntry loaded;
            loaded.file = file.filename().string();
            loaded.line = static_cast<int>(i + 1);
            const std::size_t open = i;
            ++i;
            bool saw_timestamp = false, saw_kind = false;
            while (i < lines.size() && lines[i] != "---") {
                const auto colon = lines[i].find(": ");
                if (colon == std::string::npos) fail(i, "malformed front-matter line '" + lines[i] + "'");
                const std::string key = lines[i].substr(0, colon);
                const std::string value = lines[i].substr(colon + 2);
                if (key == "timestamp") {
                    try {
                        loaded.entry.timestamp = std::stoll(value);
                    } catch (const std::exception&) {
                        fail(i, "timestamp is not an integer");
                    }
                    saw_timestamp = true;
                } else if (key == "kind") {
                    const auto kind = parse_journal_kind(value);
                    if (!kind) fail(i, "unknown kind '" + value + "'");
                    loaded.entry.kind = *kind;
                    saw_kind = true;
                } else if (key == "goal_id") {
                    loaded.entry.goal_id = value;
                } else {
                    loaded.entry.extra.emplace_back(key, value);
                }
                ++i;
            }
            if (i >= lines.size()) fail(open, "front-matter never closed");
            if (!saw_timestamp || !saw_kind) fail(open, "front-matter missing timestamp or kind");
            ++i;  // past closing ---
            std::string body;
            while (i < lines.size() && lines[i] != "---") {
                body += lines[i];
                body += '\n';
                ++i;
            }
            loaded.entry.body = canonical_body(body);
            out.push_back(std::move(loaded));
        }
    }
    return out;
}

SelfModel restore_self_model(SelfModel initial, const std::vector<LoadedEntry>& entries) {
    for (const auto& loaded : entries) {
        if (loaded.entry.kind != JournalKind::capability) continue;
        std::string name, skill, note;
        for (const auto& [k, v] : loaded.entry.extra) {
            if (k == "name") name = v;
            if (k == "skill") skill = v;
            if (k == "note") note = v;
        }
        if (!name.empty()) initial.add_capability(name, skill, note);
    }
    return initial;
}

}  // namespace triad
