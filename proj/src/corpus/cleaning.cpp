#include "forge/corpus/cleaning.hpp"

#include "forge/common/error.hpp"
#include "forge/common/text.hpp"
#include "forge/common/utf8.hpp"

namespace forge::corpus {

void CleaningRuleSet::validate() const {
  if (short_threshold < 1) {
    throw ValidationError("short_threshold must be >= 1, got " +
                          std::to_string(short_threshold));
  }
}

std::string strip_hashtag_tokens(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  const auto us = utf8::units(text);
  for (std::size_t i = 0; i < us.size(); ++i) {
    if (us[i].cp != '#') {
      out.append(text.substr(us[i].offset, us[i].size));
      continue;
    }
    while (i + 1 < us.size() && !utf8::is_space(us[i + 1].cp) &&
           !utf8::is_punctuation(us[i + 1].cp)) {
      ++i;
    }
  }
  return out;
}

std::string clean_text(std::string_view text, const CleaningRuleSet& rules) {
  std::string out = rules.strip_hashtags ? strip_hashtag_tokens(text)
                                         : std::string(text);
  if (rules.collapse_whitespace) out = collapse_whitespace(out);
  return out;
}

std::optional<SentencePair> clean_pair(const SentencePair& pair,
                                       const CleaningRuleSet& rules) {
  SentencePair out{clean_text(pair.src, rules), clean_text(pair.tgt, rules),
                   pair.origin};
  if (trim(out.src).empty() || trim(out.tgt).empty()) return std::nullopt;
  return out;
}

}  // namespace forge::corpus
