#include "forge/common/lang.hpp"

#include "forge/common/error.hpp"

namespace forge {

std::string_view to_string(Lang lang) {
  return lang == Lang::kYue ? "yue" : "en";
}

Lang parse_lang(std::string_view text) {
  if (text == "yue") return Lang::kYue;
  if (text == "en" || text == "eng") return Lang::kEn;
  throw ParseError("unknown language '" + std::string(text) + "'");
}

void Direction::validate() const {
  if (src == tgt) {
    throw ValidationError("direction source and target are both " +
                          std::string(to_string(src)));
  }
}

std::string Direction::str() const {
  return std::string(to_string(src)) + "-" + std::string(to_string(tgt));
}

Direction Direction::parse(std::string_view text) {
  const auto dash = text.find('-');
  if (dash == std::string_view::npos) {
    throw ParseError("direction must look like yue-en, got '" +
                     std::string(text) + "'");
  }
  Direction d{parse_lang(text.substr(0, dash)), parse_lang(text.substr(dash + 1))};
  d.validate();
  return d;
}

}  // namespace forge
