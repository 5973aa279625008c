#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace neuroquery {

/// Original Porter (1980) suffix stripper. Expects a lowercase ASCII word;
/// anything else is returned unchanged.
std::string porter_stem(std::string_view word);

/// A stemmed token with the byte range of the source word it came from.
struct TokenSpan {
  std::string token;
  std::size_t begin;
  std::size_t end;
};

/// Lowercases, splits on non-alphanumeric ASCII, and stems each word.
/// Bytes >= 0x80 are treated as word characters so UTF-8 words stay whole.
std::vector<TokenSpan> tokenize_with_offsets(std::string_view text);
std::vector<std::string> tokenize_stem(std::string_view text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

/// Number of code points in a UTF-8 string.
std::size_t utf8_length(std::string_view text) noexcept;
/// Byte offset of code point `index` (clamped to the end).
std::size_t utf8_byte_offset(std::string_view text, std::size_t index) noexcept;
/// Code point index of byte offset `offset`.
std::size_t utf8_char_index(std::string_view text, std::size_t offset) noexcept;
/// Code points [start, end) of `text`.
std::string utf8_slice(std::string_view text, std::size_t start, std::size_t end);

}  // namespace neuroquery
