#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "foodsim/table.hpp"

namespace foodsim {

// IBM System/360 hexadecimal floating point, the on-disk numeric format of
// the v5 transport file: value = (-1)^sign * 0.fraction_16 * 16^(exp - 64),
// sign in bit 0, 7-bit excess-64 exponent, 56-bit fraction. Returns nullopt
// for the missing markers '.', '._' and '.A'..'.Z' (first byte 0x2E, 0x5F
// or 0x41..0x5A followed by zeros).
std::optional<double> decode_ibm_double(std::span<const std::uint8_t, 8> bytes);

// Inverse of the decoder for finite IEEE doubles, hex-normalized so the
// leading fraction digit is nonzero. Used by round-trip checks and test
// fixtures; the pipeline itself never writes transport files.
std::array<std::uint8_t, 8> encode_ibm_double(double value);

// Parses a v5 transport library (any number of members). Enforces the
// 80-byte record grid, the library/member/namestr/obs header sentinels and
// the 140-byte NAMESTR layout; decodes observations row-major and drops
// the blank padding that fills out the final record of each member.
std::vector<XportTable> parse_library(std::span<const std::uint8_t> bytes);
std::vector<XportTable> parse_library_file(const std::filesystem::path& path);

}  // namespace foodsim
