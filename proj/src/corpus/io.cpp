#include "forge/corpus/io.hpp"

#include "forge/common/error.hpp"
#include "forge/common/text.hpp"

namespace forge::corpus {

namespace {

void append_field(std::string& out, std::string_view s) {
  for (char c : s) {
    out.push_back(c == '\t' || c == '\n' || c == '\r' ? ' ' : c);
  }
}

}  // namespace

std::filesystem::path manifest_path(const std::filesystem::path& tsv) {
  std::filesystem::path p = tsv;
  p.replace_extension(".manifest.json");
  return p;
}

std::string to_tsv(const std::vector<SentencePair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    append_field(out, p.src);
    out.push_back('\t');
    append_field(out, p.tgt);
    out.push_back('\n');
  }
  return out;
}

void write_corpus(const std::filesystem::path& tsv, const Corpus& corpus) {
  write_file_atomic(tsv, to_tsv(corpus.pairs));
  write_file_atomic(manifest_path(tsv), corpus.manifest.to_json().dump(2) + "\n");
}

CorpusManifest read_manifest(const std::filesystem::path& tsv) {
  const auto path = manifest_path(tsv);
  try {
    return CorpusManifest::from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

Corpus read_corpus(const std::filesystem::path& tsv, Origin fallback) {
  const auto lines = read_lines(tsv);
  std::vector<SentencePair> pairs;
  pairs.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto tab = lines[i].find('\t');
    if (tab == std::string::npos) {
      throw ParseError(tsv.string() + ":" + std::to_string(i + 1) +
                       ": expected src<TAB>tgt");
    }
    pairs.push_back({lines[i].substr(0, tab), lines[i].substr(tab + 1), fallback});
  }

  if (!std::filesystem::exists(manifest_path(tsv))) {
    return make_corpus(tsv.stem().string(), std::move(pairs));
  }

  CorpusManifest m = read_manifest(tsv);
  if (m.count != pairs.size()) {
    throw ParseError(tsv.string() + ": manifest count " +
                     std::to_string(m.count) + " but file has " +
                     std::to_string(pairs.size()) + " pairs");
  }
  std::size_t line = 0;
  for (const auto& [label, n] : m.source_runs) {
    const Origin origin = parse_origin(label);
    for (std::size_t k = 0; k < n && line < pairs.size(); ++k) {
      pairs[line++].origin = origin;
    }
  }
  if (line != pairs.size()) {
    throw ParseError(tsv.string() + ": source runs cover " +
                     std::to_string(line) + " of " +
                     std::to_string(pairs.size()) + " lines");
  }
  Corpus c{std::move(m), std::move(pairs)};
  const std::string expected = c.manifest.checksum;
  refresh_manifest(c);
  if (c.manifest.checksum != expected) {
    throw ParseError(tsv.string() + ": checksum mismatch (manifest " +
                     expected + ", data " + c.manifest.checksum + ")");
  }
  return c;
}

}  // namespace forge::corpus
