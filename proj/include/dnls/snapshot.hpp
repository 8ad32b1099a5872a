#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dnls/grid.hpp"

namespace dnls {

/// Field snapshot layout ("LDSF"), all little-endian:
///   magic "LDSF" | u32 version | u32 d | u64 n_k (x d) | f64 extent_k (x d)
///   | payload: u1^(1..d), u2^(1..d), u3^(1..d), each prod(n_k) pairs (re, im) of f64.
constexpr std::uint32_t kFieldFormatVersion = 1;

std::vector<unsigned char> encode_field(const State& U);
/// Throws FormatError (bad magic or header), UnsupportedVersion, LengthMismatch.
State decode_field(const std::vector<unsigned char>& bytes);

void save_field(const State& U, const std::string& path);
State load_field(const std::string& path);

}  // namespace dnls
