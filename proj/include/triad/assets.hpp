#pragma once

#include "triad/types.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace triad {

// Versioned text assets (prompt templates). Loaded once, cached by name.
class AssetStore {
public:
    explicit AssetStore(std::filesystem::path root) : root_(std::move(root)) {}

    const std::string& get(const std::string& name) const;

    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path root_;
    mutable std::map<std::string, std::string> cache_;
};

}  // namespace triad
