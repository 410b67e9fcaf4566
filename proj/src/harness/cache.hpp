#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace fgts::detail {

// Content-addressed artifact store: one file per (stage, key).
class StageCache {
public:
    explicit StageCache(std::filesystem::path dir);

    std::optional<std::string> get(std::string_view stage, std::string_view key, std::string_view ext) const;
    // Writes through a temporary file and renames, so readers never see partial artifacts.
    void put(std::string_view stage, std::string_view key, std::string_view ext, std::string_view bytes) const;

private:
    std::filesystem::path path_for(std::string_view stage, std::string_view key, std::string_view ext) const;

    std::filesystem::path dir_;
};

}  // namespace fgts::detail
