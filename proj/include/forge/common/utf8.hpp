#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace forge::utf8 {

// Decodes UTF-8 into Unicode scalar values. Invalid sequences decode to
// U+FFFD one byte at a time, so the function never fails.
std::vector<char32_t> decode(std::string_view text);

void append(std::string& out, char32_t cp);
std::string encode(const std::vector<char32_t>& cps);

// Number of scalar values in `text`.
std::size_t length(std::string_view text);

// CJK Unified Ideographs and extension blocks A through I. Compatibility
// ideographs and radicals are excluded.
bool is_cjk_ideograph(char32_t cp);

// ASCII punctuation/symbols plus the general, CJK and full-width
// punctuation blocks.
bool is_punctuation(char32_t cp);

bool is_space(char32_t cp);

// Splits `text` into (byte offset, byte length, code point) triples.
struct Unit {
  std::size_t offset;
  std::size_t size;
  char32_t cp;
};
std::vector<Unit> units(std::string_view text);

}  // namespace forge::utf8
