#include "cache.hpp"

#include <unistd.h>

#include "fgts/report.hpp"

namespace fgts::detail {

namespace fs = std::filesystem;

StageCache::StageCache(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

fs::path StageCache::path_for(std::string_view stage, std::string_view key, std::string_view ext) const {
    return dir_ / (std::string(stage) + "-" + std::string(key) + std::string(ext));
}

std::optional<std::string> StageCache::get(std::string_view stage, std::string_view key, std::string_view ext) const {
    const fs::path p = path_for(stage, key, ext);
    if (!fs::exists(p)) return std::nullopt;
    return read_text(p);
}

void StageCache::put(std::string_view stage, std::string_view key, std::string_view ext, std::string_view bytes) const {
    const fs::path target = path_for(stage, key, ext);
    fs::path tmp = target;
    tmp += ".tmp" + std::to_string(::getpid());
    write_text(tmp, bytes);
    fs::rename(tmp, target);
}

}  // namespace fgts::detail
