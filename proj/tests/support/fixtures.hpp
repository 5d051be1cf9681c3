#pragma once

// Synthetic corpora for tests. Sentences are built from small CJK and Latin
// vocabularies with a seeded generator, so fixtures of full corpus sizes can
// be produced in milliseconds.

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "forge/corpus/types.hpp"

namespace forge::fixtures {

inline const std::vector<std::string>& cjk_vocab() {
  static const std::vector<std::string> v = {
      "我", "你", "佢", "食", "飯", "貓", "狗", "好", "正", "去", "街", "睇",
      "書", "錢", "舖", "投", "資", "百", "萬", "裝", "修", "間", "喺", "度",
      "咗", "唔", "係", "嘅", "人", "天", "氣", "熱", "凍", "水", "茶", "飲"};
  return v;
}

inline const std::vector<std::string>& en_vocab() {
  static const std::vector<std::string> v = {
      "i", "you", "he", "eat", "rice", "cat", "dog", "good", "great", "go",
      "street", "read", "book", "money", "shop", "invest", "million", "the",
      "a", "in", "at", "not", "is", "of", "people", "weather", "hot", "cold",
      "water", "tea", "drink", "today"};
  return v;
}

// `n` distinct pairs; every third pair has a short (<= 10 code point) source.
inline std::vector<corpus::SentencePair> make_pairs(corpus::Origin origin,
                                                    std::size_t n,
                                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<corpus::SentencePair> out;
  out.reserve(n);
  const auto& cv = cjk_vocab();
  const auto& ev = en_vocab();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = (i % 3 == 0) ? 3 + rng() % 6 : 12 + rng() % 20;
    std::string src;
    for (std::size_t k = 0; k < len; ++k) src += cv[rng() % cv.size()];
    std::string tgt;
    const std::size_t elen = 2 + rng() % 10;
    for (std::size_t k = 0; k < elen; ++k) {
      if (k) tgt += ' ';
      tgt += ev[rng() % ev.size()];
    }
    // Unique suffix keeps every pair distinct regardless of the draw.
    tgt += " n" + std::to_string(i);
    out.push_back({std::move(src), std::move(tgt), origin});
  }
  return out;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("forge_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace forge::fixtures
