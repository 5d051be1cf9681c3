#pragma once

#include <string>
#include <string_view>

namespace forge {

enum class Lang { kYue, kEn };

std::string_view to_string(Lang lang);
Lang parse_lang(std::string_view text);  // "yue" | "en"; throws ParseError

// Translation direction. Forward is Cantonese to English.
struct Direction {
  Lang src = Lang::kYue;
  Lang tgt = Lang::kEn;

  static Direction forward() { return {Lang::kYue, Lang::kEn}; }
  static Direction backward() { return {Lang::kEn, Lang::kYue}; }

  Direction reversed() const { return {tgt, src}; }
  bool is_forward() const { return src == Lang::kYue && tgt == Lang::kEn; }

  // Throws ValidationError when src == tgt.
  void validate() const;

  // "yue-en" / "en-yue".
  std::string str() const;
  static Direction parse(std::string_view text);

  friend bool operator==(const Direction&, const Direction&) = default;
};

}  // namespace forge
