#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qwalk {

// A bit assignment x_1..x_i stored one bit per byte, x_1 first.
using Bitstring = std::vector<std::uint8_t>;
using BitView = std::span<const std::uint8_t>;

// Parses "0110" style text. Throws InvalidArgument on any other character.
Bitstring parse_bits(std::string_view text);
std::string format_bits(BitView bits);

// Packs x_1..x_i into an integer with x_1 as the most significant bit, so
// integer order equals lexicographic order within a level.
std::uint64_t pack_bits(BitView bits);
Bitstring unpack_bits(std::uint64_t packed, int length);

}  // namespace qwalk
