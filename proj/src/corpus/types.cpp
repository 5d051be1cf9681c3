#include "forge/corpus/types.hpp"

#include "forge/common/error.hpp"
#include "forge/common/hash.hpp"

namespace forge::corpus {

std::string_view to_string(Origin origin) {
  switch (origin) {
    case Origin::kWordsHk: return "wordshk";
    case Origin::kWenlin: return "wenlin";
    case Origin::kOpus: return "opus";
    case Origin::kSynthetic: return "synthetic";
  }
  return "unknown";
}

Origin parse_origin(std::string_view text) {
  if (text == "wordshk") return Origin::kWordsHk;
  if (text == "wenlin") return Origin::kWenlin;
  if (text == "opus") return Origin::kOpus;
  if (text == "synthetic") return Origin::kSynthetic;
  throw ParseError("unknown corpus origin '" + std::string(text) + "'");
}

std::uint64_t SentencePair::id() const {
  Fnv1a64 h;
  h.update(to_string(origin));
  h.update_byte(0);
  h.update(src);
  h.update_byte(0);
  h.update(tgt);
  return h.digest();
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
    case Split::kUnsplit: return "unsplit";
  }
  return "unsplit";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "dev") return Split::kDev;
  if (text == "test") return Split::kTest;
  if (text == "unsplit") return Split::kUnsplit;
  throw ParseError("unknown split '" + std::string(text) + "'");
}

nlohmann::json CorpusManifest::to_json() const {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& [label, n] : source_runs) runs.push_back({label, n});
  return {
      {"name", name},
      {"count", count},
      {"split", to_string(split)},
      {"source_counts", source_counts},
      {"checksum", checksum},
      {"seed", seed},
      {"direction", direction.str()},
      {"source_runs", runs},
      {"attributes", attributes},
  };
}

CorpusManifest CorpusManifest::from_json(const nlohmann::json& j) {
  try {
    CorpusManifest m;
    m.name = j.at("name").get<std::string>();
    m.count = j.at("count").get<std::size_t>();
    m.split = parse_split(j.at("split").get<std::string>());
    m.source_counts =
        j.at("source_counts").get<std::map<std::string, std::size_t>>();
    m.checksum = j.at("checksum").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.direction = Direction::parse(j.value("direction", "yue-en"));
    for (const auto& run : j.value("source_runs", nlohmann::json::array())) {
      m.source_runs.emplace_back(run.at(0).get<std::string>(),
                                 run.at(1).get<std::size_t>());
    }
    m.attributes = j.value("attributes", nlohmann::json::object());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad corpus manifest: ") + e.what());
  }
}

std::string content_checksum(const std::vector<SentencePair>& pairs) {
  Fnv1a64 h;
  for (const auto& p : pairs) {
    h.update(to_string(p.origin));
    h.update_byte('\t');
    h.update(p.src);
    h.update_byte('\t');
    h.update(p.tgt);
    h.update_byte('\n');
  }
  return to_hex(h.digest());
}

void refresh_manifest(Corpus& corpus) {
  auto& m = corpus.manifest;
  m.count = corpus.pairs.size();
  m.source_counts.clear();
  m.source_runs.clear();
  for (const auto& p : corpus.pairs) {
    const std::string label(to_string(p.origin));
    ++m.source_counts[label];
    if (!m.source_runs.empty() && m.source_runs.back().first == label) {
      ++m.source_runs.back().second;
    } else {
      m.source_runs.emplace_back(label, 1);
    }
  }
  m.checksum = content_checksum(corpus.pairs);
}

Corpus make_corpus(std::string name, std::vector<SentencePair> pairs,
                   Split split, std::uint64_t seed, Direction direction) {
  direction.validate();
  Corpus c;
  c.manifest.name = std::move(name);
  c.manifest.split = split;
  c.manifest.seed = seed;
  c.manifest.direction = direction;
  c.pairs = std::move(pairs);
  for (auto& p : c.pairs) {
    for (std::string* side : {&p.src, &p.tgt}) {
      for (char& ch : *side) {
        if (ch == '\t' || ch == '\n' || ch == '\r') ch = ' ';
      }
    }
  }
  refresh_manifest(c);
  return c;
}

Corpus reversed(const Corpus& corpus, std::string name) {
  std::vector<SentencePair> pairs;
  pairs.reserve(corpus.pairs.size());
  for (const auto& p : corpus.pairs) pairs.push_back({p.tgt, p.src, p.origin});
  Corpus out = make_corpus(std::move(name), std::move(pairs),
                           corpus.manifest.split, corpus.manifest.seed,
                           corpus.manifest.direction.reversed());
  out.manifest.attributes = corpus.manifest.attributes;
  out.manifest.attributes["reversed_from"] = corpus.manifest.checksum;
  return out;
}

}  // namespace forge::corpus
