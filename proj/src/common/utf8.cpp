#include "forge/common/utf8.hpp"

namespace forge::utf8 {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

// Decodes one scalar value at `pos`; returns its byte length.
std::size_t decode_one(std::string_view s, std::size_t pos, char32_t* out) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    *out = b0;
    return 1;
  }
  std::size_t need;
  char32_t cp;
  char32_t min;
  if ((b0 & 0xE0) == 0xC0) {
    need = 1, cp = b0 & 0x1F, min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    need = 2, cp = b0 & 0x0F, min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    need = 3, cp = b0 & 0x07, min = 0x10000;
  } else {
    *out = kReplacement;
    return 1;
  }
  if (pos + need >= s.size()) {
    *out = kReplacement;
    return 1;
  }
  for (std::size_t i = 1; i <= need; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) {
      *out = kReplacement;
      return 1;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    *out = kReplacement;
    return 1;
  }
  *out = cp;
  return need + 1;
}

}  // namespace

std::vector<Unit> units(std::string_view text) {
  std::vector<Unit> out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp;
    const std::size_t n = decode_one(text, pos, &cp);
    out.push_back({pos, n, cp});
    pos += n;
  }
  return out;
}

std::vector<char32_t> decode(std::string_view text) {
  std::vector<char32_t> out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp;
    pos += decode_one(text, pos, &cp);
    out.push_back(cp);
  }
  return out;
}

void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode(const std::vector<char32_t>& cps) {
  std::string out;
  out.reserve(cps.size() * 3);
  for (char32_t cp : cps) append(out, cp);
  return out;
}

std::size_t length(std::string_view text) {
  std::size_t n = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp;
    pos += decode_one(text, pos, &cp);
    ++n;
  }
  return n;
}

bool is_cjk_ideograph(char32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) ||    // URO
         (cp >= 0x3400 && cp <= 0x4DBF) ||    // Ext A
         (cp >= 0x20000 && cp <= 0x2A6DF) ||  // Ext B
         (cp >= 0x2A700 && cp <= 0x2B73F) ||  // Ext C
         (cp >= 0x2B740 && cp <= 0x2B81F) ||  // Ext D
         (cp >= 0x2B820 && cp <= 0x2CEAF) ||  // Ext E
         (cp >= 0x2CEB0 && cp <= 0x2EBEF) ||  // Ext F
         (cp >= 0x2EBF0 && cp <= 0x2EE5F) ||  // Ext I
         (cp >= 0x30000 && cp <= 0x3134F) ||  // Ext G
         (cp >= 0x31350 && cp <= 0x323AF);    // Ext H
}

bool is_punctuation(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  return (cp >= 0x00A1 && cp <= 0x00BF) ||  // Latin-1 punctuation/symbols
         cp == 0x00D7 || cp == 0x00F7 ||
         (cp >= 0x2010 && cp <= 0x2027) ||  // General punctuation
         (cp >= 0x2030 && cp <= 0x205E) ||
         (cp >= 0x3001 && cp <= 0x3003) ||  // CJK symbols and punctuation
         (cp >= 0x3008 && cp <= 0x3011) ||
         (cp >= 0x3014 && cp <= 0x301F) ||
         (cp >= 0xFE30 && cp <= 0xFE4F) ||  // CJK compatibility forms
         (cp >= 0xFE50 && cp <= 0xFE6B) ||  // small form variants
         (cp >= 0xFF01 && cp <= 0xFF0F) ||  // full-width ASCII punctuation
         (cp >= 0xFF1A && cp <= 0xFF20) ||
         (cp >= 0xFF3B && cp <= 0xFF40) ||
         (cp >= 0xFF5B && cp <= 0xFF65);
}

bool is_space(char32_t cp) {
  return cp == ' ' || (cp >= 0x09 && cp <= 0x0D) || cp == 0x85 ||
         cp == 0xA0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) ||
         cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F ||
         cp == 0x3000;
}

}  // namespace forge::utf8
