#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "forge/corpus/types.hpp"

namespace forge::corpus {

struct CleaningRuleSet {
  bool strip_hashtags = true;
  bool collapse_whitespace = true;
  // Parsers keep only the first of several alternative translations.
  bool take_first_translation = true;
  // Sources of at most this many code points are "short".
  int short_threshold = 10;

  void validate() const;  // short_threshold >= 1
};

// Removes every '#' together with the run of non-space, non-punctuation
// code points that follows it ("#money" -> "").
std::string strip_hashtag_tokens(std::string_view text);

std::string clean_text(std::string_view text, const CleaningRuleSet& rules);

// Cleaned copy of `pair`, or nullopt when either side ends up empty.
// Idempotent: clean_pair(*clean_pair(p)) == clean_pair(p).
std::optional<SentencePair> clean_pair(const SentencePair& pair,
                                       const CleaningRuleSet& rules);

}  // namespace forge::corpus
