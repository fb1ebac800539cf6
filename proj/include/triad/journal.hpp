#pragma once

#include "triad/backend.hpp"
#include "triad/memory.hpp"
#include "triad/models.hpp"
#include "triad/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace triad {

enum class JournalKind { goal, action, reward, reflection, critique, capability };

std::string to_string(JournalKind k);
std::optional<JournalKind> parse_journal_kind(const std::string& s);

// One Growth-Journal entry: a Markdown body under a front-matter block
// delimited by `---` lines (keys timestamp/kind/goal_id plus free extras).
// UTF-8, LF line endings; bodies are canonicalized to carry no trailing
// blank lines and no bare `---` line.
struct JournalEntry {
    Minutes timestamp = 0;
    JournalKind kind = JournalKind::action;
    std::string goal_id = "-";
    std::vector<std::pair<std::string, std::string>> extra;
    std::string body;
};

struct LoadedEntry {
    JournalEntry entry;
    std::string file;
    int line = 0;  // 1-based line of the entry's opening delimiter
};

// The journal directory is the sole persistence channel: every module that
// needs a file goes through this facade. Day files are named day-NNN.md,
// memory records live under records/, and the self-model serializes to
// self-model.md as a property dictionary.
class Journal {
public:
    explicit Journal(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }

    // Appends to the current virtual-day file and returns its path.
    std::filesystem::path append_entry(const JournalEntry& entry);

    std::filesystem::path write_memory_record(const EpisodicRecord& record, const std::string& raw);

    std::filesystem::path write_self_model(const SelfModel& model);

    // Summarizes one virtual day (rewards, provenance, capability changes)
    // through the backend, appends the critique entry, and returns it.
    JournalEntry nightly_critique(const std::vector<JournalEntry>& day_entries, const Backend& backend,
                                  Minutes at);

    // Parses every day file in (file, position) order. Malformed entries
    // raise JournalError naming file and line.
    static std::vector<LoadedEntry> replay_load(const std::filesystem::path& dir);

private:
    std::filesystem::path day_file(Minutes timestamp) const;

    std::filesystem::path dir_;
    Minutes last_timestamp_ = -1;
};

// Replays capability entries onto a fresh self-model; resuming a run restores
// the capability list exactly.
SelfModel restore_self_model(SelfModel initial, const std::vector<LoadedEntry>& entries);

}  // namespace triad
