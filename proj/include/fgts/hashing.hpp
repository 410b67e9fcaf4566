#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace fgts {

// Incremental SHA-256. Used for content-addressed caching and report fingerprints.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    Sha256& update(std::span<const std::byte> bytes);
    Sha256& update(std::string_view text);
    // Length-prefixed so that field boundaries are part of the digest.
    Sha256& field(std::string_view text);

    std::string hex_digest();

private:
    void* ctx_;
};

std::string sha256_hex(std::string_view text);
std::string sha256_file(const std::filesystem::path& path);

// Stable 64-bit seed for a per-item RNG stream: hash(seed, id).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view id);

std::string base64_encode(std::span<const std::byte> bytes);
std::string base64_decode(std::string_view text);

}  // namespace fgts
