#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "forge/common/diagnostics.hpp"
#include "forge/corpus/cleaning.hpp"
#include "forge/corpus/types.hpp"

namespace forge::corpus {

// One dictionary entry of the Words.hk CSV export.
struct WordsHkRecord {
  std::string id;
  std::string headword;
  std::string entry;
  std::size_t line = 0;  // source line, for diagnostics
};

// Reads the export CSV (`id,headword,entry[,...]`). Leading `#` comment
// lines and a header row are skipped. Rows with fewer than three fields,
// a non-numeric id or an unterminated quote are reported and dropped.
std::vector<WordsHkRecord> read_wordshk_csv(std::string_view content,
                                            Diagnostics& diag);

// Entry text grammar (one directive per line, leading space ignored):
//
//   (pos:...)(label:...)     metadata, ignored
//   <explanation>            starts a definition block (skipped)
//   <eg>                     starts an example block
//   ----                     sense separator; closes any block
//   yue:<text> [(jyutping)]  Cantonese side; a trailing romanisation in
//                            parentheses is dropped
//   eng:<text>               English side; repeated eng lines are
//                            alternative translations in document order
//   zho:/jpn:/...            other languages, ignored
//
// Every example block with both sides yields one pair per Cantonese line
// (the first English alternative when `take_first_translation`). Pairs are
// cleaned with `rules`; empties are dropped with a warning.
std::vector<SentencePair> parse_wordshk(const std::vector<WordsHkRecord>& records,
                                        const CleaningRuleSet& rules,
                                        Diagnostics& diag);

enum class WenlinMode {
  kStructural,  // walk the parsed XML tree
  kPattern,     // scan raw text for <WL>...</WL> without a full parse
};

// Extracts pairs from WL elements. Inside a WL element the Cantonese side
// is a child element named yue/can/hz/zh and the English side eng/en/
// english (repeats are alternatives). A WL element without such children
// is split by script: everything up to the last CJK ideograph or CJK
// punctuation is Cantonese, the remainder English.
std::vector<SentencePair> parse_wenlin(std::string_view xml_document,
                                       const CleaningRuleSet& rules,
                                       Diagnostics& diag,
                                       WenlinMode mode = WenlinMode::kStructural);

// Line i of each input forms pair i (origin opus). Unequal line counts
// throw ValidationError naming both counts.
std::vector<SentencePair> parse_aligned(std::string_view src_content,
                                        std::string_view tgt_content);
std::vector<SentencePair> parse_aligned(const std::filesystem::path& src_file,
                                        const std::filesystem::path& tgt_file);

}  // namespace forge::corpus
