#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace refeval::text {

std::string_view trim(std::string_view s);

/// Splits on '\n'; a trailing newline does not produce an empty final line.
std::vector<std::string_view> split_lines(std::string_view s);

/// Decodes UTF-8 into Unicode scalar values. Invalid bytes decode one byte
/// per scalar so counting never fails on malformed input.
std::vector<char32_t> decode_utf8(std::string_view s);

/// Number of Unicode scalar values in `s` (lenient, see decode_utf8).
std::size_t utf8_scalar_count(std::string_view s);

/// FNV-1a 64-bit over a byte sequence; `state` allows chaining.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t state = 14695981039346656037ULL);

/// 16-char lowercase hex rendering of a 64-bit hash.
std::string hex64(std::uint64_t value);

}  // namespace refeval::text
