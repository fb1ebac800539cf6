#include "triad/assets.hpp"

#include <fstream>

namespace triad {

const std::string& AssetStore::get(const std::string& name) const {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;

    const std::filesystem::path path = root_ / name;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw WiringError("assets: cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return cache_.emplace(name, std::move(text)).first->second;
}

}  // namespace triad
