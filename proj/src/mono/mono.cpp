#include "forge/mono/mono.hpp"

#include <algorithm>
#include <thread>
#include <unordered_set>

#include "forge/common/csv.hpp"
#include "forge/common/error.hpp"
#include "forge/common/hash.hpp"
#include "forge/common/rng.hpp"
#include "forge/common/text.hpp"
#include "forge/common/utf8.hpp"
#include "forge/corpus/io.hpp"

namespace forge::mono {

std::string_view to_string(MonoSource source) {
  return source == MonoSource::kLihkgCsv ? "lihkg_csv" : "wmt_news";
}

MonoSource parse_source(std::string_view text) {
  if (text == "lihkg_csv") return MonoSource::kLihkgCsv;
  if (text == "wmt_news") return MonoSource::kWmtNews;
  throw ParseError("unknown monolingual source '" + std::string(text) + "'");
}

std::uint64_t MonoSentence::id() const { return fnv1a64(text); }

namespace {

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

void push_segments(std::string_view cell, Segmentation mode, std::vector<std::string>& out) {
  for (const auto& line : split_lines(cell)) {
    if (mode == Segmentation::kNewline) {
      const auto t = trim(line);
      if (!t.empty()) out.emplace_back(t);
      continue;
    }
    std::size_t start = 0;
    for (const auto& u : utf8::units(line)) {
      if (u.cp == U'。' || u.cp == U'！' || u.cp == U'？') {
        const auto t = trim(std::string_view(line).substr(start, u.offset + u.size - start));
        if (!t.empty()) out.emplace_back(t);
        start = u.offset + u.size;
      }
    }
    const auto t = trim(std::string_view(line).substr(start));
    if (!t.empty()) out.emplace_back(t);
  }
}

}  // namespace

std::vector<MonoSentence> parse_forum_csv(std::string_view content,
                                          const ForumCsvOptions& options,
                                          Diagnostics& diag) {
  if (starts_with(content, "\xEF\xBB\xBF")) content.remove_prefix(3);
  csv::Reader reader(content);
  const auto header = reader.next();
  if (!header) throw SchemaError("forum CSV is empty; expected a header row");
  const std::string wanted = lower_ascii(options.text_column);
  std::size_t column = header->size();
  for (std::size_t i = 0; i < header->size(); ++i) {
    if (lower_ascii(trim((*header)[i])) == wanted) {
      column = i;
      break;
    }
  }
  if (column == header->size()) {
    std::string names;
    for (const auto& h : *header) names += (names.empty() ? "" : ", ") + h;
    throw SchemaError("forum CSV has no '" + options.text_column + "' column (header: " +
                      names + ")");
  }
  std::vector<MonoSentence> out;
  std::vector<std::string> segments;
  while (auto row = reader.next()) {
    if (reader.malformed()) {
      diag.warn("forum CSV line " + std::to_string(reader.line()) +
                ": unterminated quoted field, skipped");
      continue;
    }
    if (row->size() == 1 && trim((*row)[0]).empty()) continue;
    if (row->size() != header->size()) {
      diag.warn("forum CSV line " + std::to_string(reader.line()) + ": expected " +
                std::to_string(header->size()) + " fields, got " +
                std::to_string(row->size()) + ", skipped");
      continue;
    }
    segments.clear();
    push_segments((*row)[column], options.segmentation, segments);
    for (auto& s : segments) {
      out.push_back({std::move(s), Lang::kYue, MonoSource::kLihkgCsv});
    }
  }
  return out;
}

std::vector<MonoSentence> parse_plain(std::string_view content, Lang lang,
                                      MonoSource source) {
  std::vector<MonoSentence> out;
  for (const auto& line : split_lines(content)) {
    const auto t = trim(line);
    if (!t.empty()) out.push_back({std::string(t), lang, source});
  }
  return out;
}

namespace {

bool is_alpha(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }
bool is_alnum(char c) { return is_alpha(c) || (c >= '0' && c <= '9'); }
bool is_scheme_char(char c) { return is_alnum(c) || c == '+' || c == '.' || c == '-'; }

bool is_url_char(char c) {
  if (is_alnum(c)) return true;
  static constexpr std::string_view kOther = "-._~:/?#[]@!$&'()*+,;=%";
  return kOther.find(c) != std::string_view::npos;
}

// End of the URL body starting at `pos`, after trailing punctuation is given
// back to the sentence.
std::size_t url_body_end(std::string_view s, std::size_t pos) {
  std::size_t end = pos;
  while (end < s.size() && is_url_char(s[end])) ++end;
  while (end > pos) {
    const char c = s[end - 1];
    if (std::string_view(".,;:!?").find(c) != std::string_view::npos) {
      --end;
      continue;
    }
    if (c == ')') {
      const auto body = s.substr(pos, end - pos);
      if (std::count(body.begin(), body.end(), '(') < std::count(body.begin(), body.end(), ')')) {
        --end;
        continue;
      }
    }
    break;
  }
  return end;
}

struct Span {
  std::size_t begin;
  std::size_t end;
};

std::vector<Span> find_links(std::string_view s) {
  std::vector<Span> spans;
  std::size_t i = 0;
  while (i < s.size()) {
    // scheme://
    if (s.compare(i, 3, "://") == 0) {
      std::size_t b = i;
      const std::size_t floor = spans.empty() ? 0 : spans.back().end;
      while (b > floor && is_scheme_char(s[b - 1])) --b;
      while (b < i && !is_alpha(s[b])) ++b;
      if (b < i) {
        const std::size_t e = url_body_end(s, i + 3);
        if (e > i + 3) {
          spans.push_back({b, e});
          i = e;
          continue;
        }
      }
      i += 3;
      continue;
    }
    // bare www. host
    if (i + 4 <= s.size() && lower_ascii(s.substr(i, 4)) == "www.") {
      const bool boundary =
          i == 0 || !(is_alnum(s[i - 1]) || std::string_view("._@/-+").find(s[i - 1]) !=
                                               std::string_view::npos);
      if (boundary) {
        const std::size_t e = url_body_end(s, i + 4);
        if (e > i + 4) {
          spans.push_back({i, e});
          i = e;
          continue;
        }
      }
    }
    ++i;
  }
  return spans;
}

}  // namespace

bool contains_link(std::string_view text) { return !find_links(text).empty(); }

std::string strip_links(std::string_view text) {
  const auto spans = find_links(text);
  if (spans.empty()) return std::string(text);
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  for (const auto& sp : spans) {
    out.append(text.substr(pos, sp.begin - pos));
    out.push_back(' ');
    pos = sp.end;
  }
  out.append(text.substr(pos));
  return collapse_whitespace(out);
}

std::size_t cjk_count(std::string_view text) {
  std::size_t n = 0;
  for (const auto& u : utf8::units(text)) {
    if (utf8::is_cjk_ideograph(u.cp)) ++n;
  }
  return n;
}

std::vector<MonoSentence> filter_short(std::vector<MonoSentence> sentences, int min_cjk) {
  if (min_cjk < 0) {
    throw ValidationError("min_cjk must be >= 0, got " + std::to_string(min_cjk));
  }
  if (min_cjk == 0) return sentences;
  const auto limit = static_cast<std::size_t>(min_cjk);
  std::erase_if(sentences, [&](const MonoSentence& s) { return cjk_count(s.text) < limit; });
  return sentences;
}

nlohmann::json MonoManifest::to_json() const {
  return {{"name", name},         {"lang", to_string(lang)},
          {"source", to_string(source)}, {"count", count},
          {"seed", seed},         {"checksum", checksum},
          {"stage_counts", stage_counts}, {"attributes", attributes}};
}

MonoManifest MonoManifest::from_json(const nlohmann::json& j) {
  try {
    MonoManifest m;
    m.name = j.at("name").get<std::string>();
    m.lang = parse_lang(j.at("lang").get<std::string>());
    m.source = parse_source(j.at("source").get<std::string>());
    m.count = j.at("count").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.checksum = j.at("checksum").get<std::string>();
    m.stage_counts = j.value("stage_counts", std::map<std::string, std::size_t>{});
    m.attributes = j.value("attributes", nlohmann::json::object());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad monolingual manifest: ") + e.what());
  }
}

std::string mono_checksum(const std::vector<std::string>& sentences) {
  Fnv1a64 h;
  for (const auto& s : sentences) {
    h.update(s);
    h.update_byte('\n');
  }
  return to_hex(h.digest());
}

MonoCorpus dedup_shuffle(const std::vector<MonoSentence>& sentences, std::uint64_t seed,
                         std::string name) {
  MonoCorpus out;
  out.manifest.name = std::move(name);
  out.manifest.seed = seed;
  if (!sentences.empty()) {
    out.manifest.lang = sentences.front().lang;
    out.manifest.source = sentences.front().source;
  }
  std::vector<std::string> unique;
  std::unordered_set<std::string_view> seen;
  seen.reserve(sentences.size());
  for (const auto& s : sentences) {
    if (s.lang != out.manifest.lang || s.source != out.manifest.source) {
      throw ValidationError("dedup_shuffle: mixed languages or sources in one stream");
    }
    if (seen.insert(s.text).second) unique.push_back(s.text);
  }
  const auto order = permutation(unique.size(), seed);
  out.sentences.reserve(unique.size());
  for (std::size_t k : order) out.sentences.push_back(std::move(unique[k]));
  out.manifest.count = out.sentences.size();
  out.manifest.checksum = mono_checksum(out.sentences);
  out.manifest.stage_counts["distinct"] = out.manifest.count;
  return out;
}

void write_mono(const std::filesystem::path& path, const MonoCorpus& corpus) {
  for (const auto& s : corpus.sentences) {
    if (s.find('\n') != std::string::npos || s.find('\r') != std::string::npos) {
      throw ValidationError("monolingual sentence contains a line break");
    }
  }
  write_lines(path, corpus.sentences);
  write_file_atomic(corpus::manifest_path(path), corpus.manifest.to_json().dump(2) + "\n");
}

MonoCorpus read_mono(const std::filesystem::path& path, Lang fallback) {
  MonoCorpus out;
  out.sentences = read_lines(path);
  const auto side = corpus::manifest_path(path);
  if (std::filesystem::exists(side)) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(side));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(side.string() + ": " + e.what());
    }
    out.manifest = MonoManifest::from_json(j);
    if (out.manifest.count != out.sentences.size() ||
        out.manifest.checksum != mono_checksum(out.sentences)) {
      throw ParseError(path.string() + " does not match its manifest (count " +
                       std::to_string(out.sentences.size()) + " vs " +
                       std::to_string(out.manifest.count) + ")");
    }
  } else {
    out.manifest.name = path.stem().string();
    out.manifest.lang = fallback;
    out.manifest.source = fallback == Lang::kYue ? MonoSource::kLihkgCsv : MonoSource::kWmtNews;
    out.manifest.count = out.sentences.size();
    out.manifest.checksum = mono_checksum(out.sentences);
  }
  return out;
}

MonoCorpus run_pipeline(std::string_view content, const PipelineOptions& options,
                        Diagnostics& diag) {
  std::vector<MonoSentence> raw =
      options.format == MonoFormat::kForumCsv
          ? parse_forum_csv(content, options.csv, diag)
          : parse_plain(content, options.lang,
                        options.lang == Lang::kYue ? MonoSource::kLihkgCsv : MonoSource::kWmtNews);
  if (options.format == MonoFormat::kForumCsv && options.lang != Lang::kYue) {
    for (auto& s : raw) s.lang = options.lang;
  }
  const std::size_t raw_count = raw.size();

  // Per-sentence map, sharded over threads; output order is input order.
  unsigned workers = options.threads ? options.threads : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(raw.size() / 4096 + 1)));
  const std::size_t chunk = (raw.size() + workers - 1) / std::max(1u, workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(raw.size(), lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&raw, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) {
        raw[i].text = collapse_whitespace(strip_links(raw[i].text));
      }
    });
  }
  for (auto& t : pool) t.join();
  std::erase_if(raw, [](const MonoSentence& s) { return s.text.empty(); });
  const std::size_t linkless = raw.size();

  if (options.lang == Lang::kYue) raw = filter_short(std::move(raw), options.min_cjk);
  const std::size_t filtered = raw.size();

  MonoCorpus out = dedup_shuffle(raw, options.seed, options.name);
  out.manifest.lang = options.lang;
  out.manifest.stage_counts["raw"] = raw_count;
  out.manifest.stage_counts["linkless"] = linkless;
  out.manifest.stage_counts["filtered"] = filtered;
  return out;
}

}  // namespace forge::mono
