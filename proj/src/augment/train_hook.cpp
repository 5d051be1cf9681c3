#include <map>

#include "forge/augment/orchestrator.hpp"
#include "forge/backends/translator.hpp"
#include "forge/common/error.hpp"
#include "forge/common/subprocess.hpp"
#include "forge/common/text.hpp"
#include "forge/corpus/io.hpp"

namespace forge::augment {

nlohmann::json TrainRequest::to_json() const {
  return {{"model_id", model_id},
          {"family", family},
          {"direction", direction.str()},
          {"train_corpus", train_corpus.string()},
          {"dev_corpus", dev_corpus.string()},
          {"epochs", epochs},
          {"learning_rate", learning_rate},
          {"seed", seed},
          {"out_dir", out_dir.string()}};
}

backends::BackendSpec CommandTrainHook::train(const TrainRequest& request) {
  const auto result = run_command(command_, request.to_json().dump() + "\n", timeout_);
  if (result.exit_code != 0) {
    throw BackendError("train hook for '" + request.model_id + "' exited with status " +
                       std::to_string(result.exit_code));
  }
  try {
    return backends::BackendSpec::from_json(nlohmann::json::parse(result.out));
  } catch (const nlohmann::json::exception& e) {
    throw BackendError("train hook for '" + request.model_id +
                       "' did not print a backend spec: " + e.what());
  } catch (const ParseError& e) {
    throw BackendError("train hook for '" + request.model_id + "': " + e.what());
  }
}

backends::Lexicon learn_lexicon(const std::vector<corpus::SentencePair>& pairs,
                                Direction direction) {
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  for (const auto& p : pairs) {
    const auto s = backends::toy_tokenize(p.src, direction.src);
    const auto t = backends::toy_tokenize(p.tgt, direction.tgt);
    if (s.size() != t.size()) continue;
    for (std::size_t i = 0; i < s.size(); ++i) ++counts[s[i].text][t[i].text];
  }
  backends::Lexicon lex;
  for (const auto& [src, targets] : counts) {
    const std::string* best = nullptr;
    std::size_t best_n = 0;
    for (const auto& [tgt, n] : targets) {
      if (n > best_n) {
        best = &tgt;
        best_n = n;
      }
    }
    lex[src] = *best;
  }
  return lex;
}

backends::BackendSpec ToyTrainHook::train(const TrainRequest& request) {
  const corpus::Corpus train = corpus::read_corpus(request.train_corpus);
  if (train.manifest.direction != request.direction) {
    throw ValidationError("training corpus " + request.train_corpus.string() + " is " +
                          train.manifest.direction.str() + ", request is " +
                          request.direction.str());
  }
  const auto lex = learn_lexicon(train.pairs, request.direction);
  const std::string file = request.model_id + ".lexicon.tsv";
  std::filesystem::create_directories(request.out_dir);
  write_file_atomic(request.out_dir / file, backends::format_lexicon(lex));
  backends::BackendSpec spec;
  spec.kind = backends::BackendKind::kToyDictionary;
  spec.direction = request.direction;
  spec.model_id = request.model_id;
  spec.params = {{"lexicon", file}, {"model_type", request.family}};
  return spec;
}

}  // namespace forge::augment
