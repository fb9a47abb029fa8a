#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace foodsim {

// Shortest round-trip decimal form of a double ("34", "0.375", "4.39e-12").
// Used for every numeric value we write to CSV so output is byte-stable.
std::string format_double(double value);

// Strict full-string parse; empty or trailing garbage yields nullopt.
std::optional<double> parse_double(std::string_view text);

std::string read_file(const std::filesystem::path& path);            // throws IoError
void write_file(const std::filesystem::path& path, std::string_view content);

// FNV-1a, used to derive stable run identifiers from resolved configs.
std::uint64_t fnv1a64(std::string_view bytes);
std::string to_hex(std::uint64_t value);

std::string_view trim(std::string_view text);
std::string lower(std::string_view text);

}  // namespace foodsim
