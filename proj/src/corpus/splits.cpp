#include "forge/corpus/splits.hpp"

#include <unordered_map>
#include <unordered_set>

#include "forge/common/error.hpp"
#include "forge/common/hash.hpp"
#include "forge/common/rng.hpp"
#include "forge/common/utf8.hpp"

namespace forge::corpus {

ShortLong split_short_long(const std::vector<SentencePair>& corpus,
                           int threshold) {
  if (threshold < 1) {
    throw ValidationError("short/long threshold must be >= 1, got " +
                          std::to_string(threshold));
  }
  ShortLong out;
  for (const auto& p : corpus) {
    if (utf8::length(p.src) <= static_cast<std::size_t>(threshold)) {
      out.short_pairs.push_back(p);
    } else {
      out.long_pairs.push_back(p);
    }
  }
  return out;
}

SplitResult make_splits(const Corpus& corpus, const SplitOptions& options) {
  SplitResult result;
  std::vector<SentencePair> unique;
  unique.reserve(corpus.pairs.size());
  std::unordered_set<std::uint64_t> seen;
  for (const auto& p : corpus.pairs) {
    if (seen.insert(p.id()).second) {
      unique.push_back(p);
    } else {
      ++result.duplicates_dropped;
    }
  }

  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < unique.size(); ++i) {
    if (options.pool == SplitPool::kAll ||
        utf8::length(unique[i].src) > static_cast<std::size_t>(options.short_threshold)) {
      pool.push_back(i);
    }
  }
  const std::size_t required = options.dev_n + options.test_n;
  if (pool.size() < required || unique.size() <= required) {
    throw ValidationError(
        "corpus too small for dev=" + std::to_string(options.dev_n) +
        " test=" + std::to_string(options.test_n) + ": requires more than " +
        std::to_string(required) + " pairs with " + std::to_string(required) +
        (options.pool == SplitPool::kLong ? " long" : "") + " candidates, available " +
        std::to_string(unique.size()) + " pairs / " + std::to_string(pool.size()) +
        " candidates");
  }

  const auto picks = sample_indices(pool.size(), required, options.seed);
  std::vector<int> role(unique.size(), 0);  // 0 train, 1 dev, 2 test
  std::vector<SentencePair> dev;
  std::vector<SentencePair> test;
  for (std::size_t k = 0; k < picks.size(); ++k) {
    const std::size_t idx = pool[picks[k]];
    if (k < options.dev_n) {
      role[idx] = 1;
      dev.push_back(unique[idx]);
    } else {
      role[idx] = 2;
      test.push_back(unique[idx]);
    }
  }
  std::vector<SentencePair> train;
  train.reserve(unique.size() - required);
  for (std::size_t i = 0; i < unique.size(); ++i) {
    if (role[i] == 0) train.push_back(unique[i]);
  }

  const auto& base = corpus.manifest;
  const auto dir = base.direction;
  result.train = make_corpus(base.name + ".train", std::move(train), Split::kTrain, options.seed, dir);
  result.dev = make_corpus(base.name + ".dev", std::move(dev), Split::kDev, options.seed, dir);
  result.test = make_corpus(base.name + ".test", std::move(test), Split::kTest, options.seed, dir);
  for (Corpus* c : {&result.train, &result.dev, &result.test}) {
    c->manifest.attributes = {
        {"parent", base.checksum},
        {"pool", options.pool == SplitPool::kLong ? "long" : "all"},
        {"short_threshold", options.short_threshold},
        {"dev_n", options.dev_n},
        {"test_n", options.test_n},
        {"duplicates_dropped", result.duplicates_dropped},
    };
  }
  return result;
}

Corpus merge_corpora(const std::vector<Corpus>& corpora, std::string name) {
  std::vector<SentencePair> merged;
  std::unordered_set<std::uint64_t> seen;
  Direction dir = corpora.empty() ? Direction::forward() : corpora.front().manifest.direction;
  nlohmann::json inputs = nlohmann::json::array();
  Split split = Split::kUnsplit;
  for (const auto& c : corpora) {
    if (c.manifest.split == Split::kDev || c.manifest.split == Split::kTest) {
      throw ContaminationError("refusing to merge " + std::string(to_string(c.manifest.split)) +
                               " corpus '" + c.manifest.name + "' into training data");
    }
    if (c.manifest.direction != dir) {
      throw ValidationError("cannot merge corpora of different directions (" +
                            dir.str() + " vs " + c.manifest.direction.str() + ")");
    }
    if (c.manifest.split == Split::kTrain) split = Split::kTrain;
    inputs.push_back({{"name", c.manifest.name}, {"checksum", c.manifest.checksum},
                      {"count", c.manifest.count}});
    for (const auto& p : c.pairs) {
      if (seen.insert(p.id()).second) merged.push_back(p);
    }
  }
  Corpus out = make_corpus(std::move(name), std::move(merged), split, 0, dir);
  out.manifest.attributes["merged_from"] = inputs;
  return out;
}

void check_disjoint(const std::vector<const Corpus*>& corpora) {
  std::unordered_map<std::uint64_t, std::size_t> owner;
  for (std::size_t k = 0; k < corpora.size(); ++k) {
    for (const auto& p : corpora[k]->pairs) {
      auto [it, fresh] = owner.emplace(p.id(), k);
      if (!fresh && it->second != k) {
        throw ContaminationError("pair " + to_hex(p.id()) + " occurs in both '" +
                                 corpora[it->second]->manifest.name + "' and '" +
                                 corpora[k]->manifest.name + "'");
      }
    }
  }
}

}  // namespace forge::corpus
