#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "forge/backends/spec.hpp"
#include "forge/common/subprocess.hpp"

namespace forge::backends {

// Anything that turns a batch of sentences into the same number of
// translations, in order. Implementations serialize their own calls.
class Translator {
 public:
  virtual ~Translator() = default;
  virtual std::vector<std::string> translate(const std::vector<std::string>& batch) = 0;
  virtual const BackendSpec& spec() const = 0;
};

using Lexicon = std::unordered_map<std::string, std::string>;

// Token boundaries for the toy backend: whitespace for English; for
// Cantonese each CJK ideograph is a token and other non-space runs stay
// whole.
struct ToyToken {
  std::string text;
  std::string gap_before;  // whitespace preceding the token
};
std::vector<ToyToken> toy_tokenize(std::string_view sentence, Lang lang);

// Token-wise lookup with pass-through for unknown tokens. Original gaps are
// kept; adjacent tokens get a single space when the target is English.
std::string toy_translate(std::string_view sentence, const Lexicon& lexicon,
                          Direction direction);

Lexicon read_lexicon(const std::filesystem::path& path);
std::string format_lexicon(const Lexicon& lexicon);  // sorted TSV
Lexicon invert(const Lexicon& lexicon);

class ToyTranslator : public Translator {
 public:
  ToyTranslator(BackendSpec spec, Lexicon lexicon)
      : spec_(std::move(spec)), lexicon_(std::move(lexicon)) {}
  std::vector<std::string> translate(const std::vector<std::string>& batch) override;
  const BackendSpec& spec() const override { return spec_; }

 private:
  BackendSpec spec_;
  Lexicon lexicon_;
};

// Line protocol over a child process: N lines in, exactly N lines out.
// `oneshot` mode spawns the command per call and closes stdin; `persistent`
// keeps one process alive across calls. Nonzero exit is a failure.
class ExternalCommandTranslator : public Translator {
 public:
  explicit ExternalCommandTranslator(BackendSpec spec);
  std::vector<std::string> translate(const std::vector<std::string>& batch) override;
  const BackendSpec& spec() const override { return spec_; }

 private:
  BackendSpec spec_;
  bool persistent_ = false;
  std::chrono::milliseconds timeout_;
  std::mutex mu_;
  std::unique_ptr<Subprocess> process_;
};

// Posts batches to another translate server's /translate_batch endpoint.
class HttpRemoteTranslator : public Translator {
 public:
  explicit HttpRemoteTranslator(BackendSpec spec);
  std::vector<std::string> translate(const std::vector<std::string>& batch) override;
  const BackendSpec& spec() const override { return spec_; }

 private:
  BackendSpec spec_;
  std::mutex mu_;
};

// "Loads" a model: reads the lexicon, or spawns the persistent process.
// Throws BackendError when that fails.
std::unique_ptr<Translator> load_backend(const BackendSpec& spec);

}  // namespace forge::backends
