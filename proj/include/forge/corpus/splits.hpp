#pragma once

#include <cstdint>
#include <vector>

#include "forge/corpus/types.hpp"

namespace forge::corpus {

struct ShortLong {
  std::vector<SentencePair> short_pairs;
  std::vector<SentencePair> long_pairs;
};

// A pair is short iff its source has at most `threshold` code points.
// Order within each side follows the input.
ShortLong split_short_long(const std::vector<SentencePair>& corpus,
                           int threshold = 10);

enum class SplitPool {
  kLong,  // dev/test drawn only from pairs longer than the threshold
  kAll,
};

struct SplitOptions {
  std::size_t dev_n = 3000;
  std::size_t test_n = 3000;
  std::uint64_t seed = 0;
  SplitPool pool = SplitPool::kLong;
  int short_threshold = 10;
};

struct SplitResult {
  Corpus train;
  Corpus dev;
  Corpus test;
  std::size_t duplicates_dropped = 0;
};

// Exact duplicates (same id) are dropped first so the splits are disjoint
// by id. Dev then test are sampled from the pool; train keeps every other
// pair in input order. Too small a pool throws ValidationError stating
// required and available counts.
SplitResult make_splits(const Corpus& corpus, const SplitOptions& options);

// Concatenates train/unsplit corpora, dropping pairs whose id was already
// seen. Any dev or test input throws ContaminationError.
Corpus merge_corpora(const std::vector<Corpus>& corpora, std::string name);

// Throws ContaminationError if any id occurs in more than one corpus.
void check_disjoint(const std::vector<const Corpus*>& corpora);

}  // namespace forge::corpus
