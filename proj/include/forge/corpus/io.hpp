#pragma once

#include <filesystem>

#include "forge/corpus/types.hpp"

namespace forge::corpus {

// `data/train.tsv` -> `data/train.manifest.json`.
std::filesystem::path manifest_path(const std::filesystem::path& tsv);

// Canonical form: UTF-8, one `src<TAB>tgt` pair per line, no header, plus
// the JSON manifest sidecar. Tabs and newlines inside a side are written as
// spaces.
std::string to_tsv(const std::vector<SentencePair>& pairs);
void write_corpus(const std::filesystem::path& tsv, const Corpus& corpus);

// Reads a TSV and its sidecar. Without a sidecar every pair is labelled
// `fallback` and a fresh manifest is derived. A sidecar whose checksum or
// count disagrees with the data throws ParseError.
Corpus read_corpus(const std::filesystem::path& tsv,
                   Origin fallback = Origin::kWordsHk);

CorpusManifest read_manifest(const std::filesystem::path& tsv);

}  // namespace forge::corpus
