#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "forge/common/diagnostics.hpp"
#include "forge/common/lang.hpp"

namespace forge::mono {

enum class MonoSource { kLihkgCsv, kWmtNews };

std::string_view to_string(MonoSource source);
MonoSource parse_source(std::string_view text);

struct MonoSentence {
  std::string text;
  Lang lang = Lang::kYue;
  MonoSource source = MonoSource::kLihkgCsv;

  std::uint64_t id() const;
};

enum class Segmentation {
  kNewline,      // one sentence per line of a text cell
  kPunctuation,  // additionally break after 。！？
};

struct ForumCsvOptions {
  std::string text_column = "text";
  Segmentation segmentation = Segmentation::kNewline;
};

// One sentence per non-blank segment of each text cell. Every other column is
// discarded. Throws SchemaError when the header has no text column; rows that
// cannot be parsed are skipped with a warning.
std::vector<MonoSentence> parse_forum_csv(std::string_view content,
                                          const ForumCsvOptions& options,
                                          Diagnostics& diag);

// One sentence per non-blank line.
std::vector<MonoSentence> parse_plain(std::string_view content, Lang lang,
                                      MonoSource source);

// Removes `scheme://...` URLs and bare `www.` hosts. A URL runs over RFC 3986
// characters and never ends in . , ; : ! ? or an unmatched ')'. A `www.`
// host must not follow a letter, digit or one of . _ @ / - +. When anything
// was removed, whitespace of the result is collapsed.
std::string strip_links(std::string_view text);
bool contains_link(std::string_view text);

// Code points in the CJK Unified Ideographs blocks (base and extensions).
std::size_t cjk_count(std::string_view text);

std::vector<MonoSentence> filter_short(std::vector<MonoSentence> sentences,
                                       int min_cjk = 10);

struct MonoManifest {
  std::string name;
  Lang lang = Lang::kYue;
  MonoSource source = MonoSource::kLihkgCsv;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::string checksum;
  // Sentence counts after each pipeline stage, e.g. raw, linkless, filtered.
  std::map<std::string, std::size_t> stage_counts;
  nlohmann::json attributes = nlohmann::json::object();

  nlohmann::json to_json() const;
  static MonoManifest from_json(const nlohmann::json& j);
};

struct MonoCorpus {
  MonoManifest manifest;
  std::vector<std::string> sentences;
};

std::string mono_checksum(const std::vector<std::string>& sentences);

// Drops exact duplicates (first occurrence wins) and applies the seeded
// permutation. All sentences must share one language and source.
MonoCorpus dedup_shuffle(const std::vector<MonoSentence>& sentences,
                         std::uint64_t seed, std::string name);

void write_mono(const std::filesystem::path& path, const MonoCorpus& corpus);
// Reads a sentence file and its sidecar; throws ParseError when they
// disagree. Without a sidecar the manifest is derived from the lines.
MonoCorpus read_mono(const std::filesystem::path& path, Lang fallback = Lang::kEn);

enum class MonoFormat { kForumCsv, kPlain };

struct PipelineOptions {
  MonoFormat format = MonoFormat::kForumCsv;
  Lang lang = Lang::kYue;
  int min_cjk = 10;
  std::uint64_t seed = 0;
  ForumCsvOptions csv;
  std::string name = "mono";
  // Worker threads for the per-sentence cleaning map; 0 picks the hardware
  // concurrency.
  unsigned threads = 0;
};

// parse -> strip_links -> filter_short (Cantonese only) -> dedup_shuffle.
// Stage counts land in the manifest.
MonoCorpus run_pipeline(std::string_view content, const PipelineOptions& options,
                        Diagnostics& diag);

}  // namespace forge::mono
