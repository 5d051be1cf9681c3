#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "forge/common/lang.hpp"

namespace forge::corpus {

enum class Origin { kWordsHk, kWenlin, kOpus, kSynthetic };

std::string_view to_string(Origin origin);
Origin parse_origin(std::string_view text);

// One aligned sentence pair. `src`/`tgt` follow the direction of the corpus
// holding the pair; gold corpora are Cantonese to English.
struct SentencePair {
  std::string src;
  std::string tgt;
  Origin origin = Origin::kWordsHk;

  bool is_gold() const { return origin != Origin::kSynthetic; }

  // Stable hash of (origin, src, tgt).
  std::uint64_t id() const;

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

enum class Split { kTrain, kDev, kTest, kUnsplit };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

// Identity and audit data for a corpus on disk. `count` always equals the
// sum of `source_counts`; `checksum` is a function of the content only.
struct CorpusManifest {
  std::string name;
  std::size_t count = 0;
  Split split = Split::kUnsplit;
  std::map<std::string, std::size_t> source_counts;
  std::string checksum;
  std::uint64_t seed = 0;
  Direction direction = Direction::forward();
  // Per-line source labels, run-length encoded in line order.
  std::vector<std::pair<std::string, std::size_t>> source_runs;
  // Free-form provenance (mix composition, sampling parameters, ...).
  nlohmann::json attributes = nlohmann::json::object();

  nlohmann::json to_json() const;
  static CorpusManifest from_json(const nlohmann::json& j);
};

// A parallel corpus held in memory together with its manifest.
struct Corpus {
  CorpusManifest manifest;
  std::vector<SentencePair> pairs;

  std::size_t size() const { return pairs.size(); }
};

// Builds a corpus and fills every derived manifest field (count,
// source_counts, source_runs, checksum).
Corpus make_corpus(std::string name, std::vector<SentencePair> pairs,
                   Split split = Split::kUnsplit, std::uint64_t seed = 0,
                   Direction direction = Direction::forward());

// Recomputes derived manifest fields after `pairs` changed.
void refresh_manifest(Corpus& corpus);

std::string content_checksum(const std::vector<SentencePair>& pairs);

// Swaps src/tgt of every pair and the manifest direction.
Corpus reversed(const Corpus& corpus, std::string name);

}  // namespace forge::corpus
