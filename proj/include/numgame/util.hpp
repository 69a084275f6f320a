#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>

namespace numgame {

using Rng = std::mt19937_64;

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// First 64 bits of the SHA-256 digest; stable across platforms and runs.
std::uint64_t stable_hash64(std::string_view data);

/// Writes content to a sibling temp file, then renames it over path.
void atomic_write(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

} // namespace numgame
