#include "forge/backends/translator.hpp"

#include <algorithm>

#include "forge/common/error.hpp"
#include "forge/common/text.hpp"
#include "forge/common/utf8.hpp"

namespace forge::backends {

std::vector<ToyToken> toy_tokenize(std::string_view sentence, Lang lang) {
  std::vector<ToyToken> tokens;
  std::string gap;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    tokens.push_back({std::move(word), std::move(gap)});
    word.clear();
    gap.clear();
  };
  for (const auto& u : utf8::units(sentence)) {
    const std::string_view bytes = sentence.substr(u.offset, u.size);
    if (utf8::is_space(u.cp)) {
      flush();
      gap.append(bytes);
    } else if (lang == Lang::kYue && utf8::is_cjk_ideograph(u.cp)) {
      flush();
      tokens.push_back({std::string(bytes), std::move(gap)});
      gap.clear();
    } else {
      word.append(bytes);
    }
  }
  flush();
  return tokens;
}

std::string toy_translate(std::string_view sentence, const Lexicon& lexicon, Direction direction) {
  const auto tokens = toy_tokenize(sentence, direction.src);
  std::string out;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (k > 0) {
      const auto& gap = tokens[k].gap_before;
      out += gap.empty() && direction.tgt == Lang::kEn ? " " : gap;
    }
    const auto it = lexicon.find(tokens[k].text);
    out += it == lexicon.end() ? tokens[k].text : it->second;
  }
  return out;
}

Lexicon read_lexicon(const std::filesystem::path& path) {
  Lexicon lex;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(lines[i], '\t');
    if (fields.size() != 2 || trim(fields[0]).empty()) {
      throw ParseError(path.string() + " line " + std::to_string(i + 1) +
                       ": expected 'source<TAB>target'");
    }
    lex[std::string(trim(fields[0]))] = std::string(trim(fields[1]));
  }
  return lex;
}

std::string format_lexicon(const Lexicon& lexicon) {
  std::vector<std::pair<std::string, std::string>> entries(lexicon.begin(), lexicon.end());
  std::sort(entries.begin(), entries.end());
  std::string out;
  for (const auto& [k, v] : entries) out += k + "\t" + v + "\n";
  return out;
}

Lexicon invert(const Lexicon& lexicon) {
  Lexicon out;
  for (const auto& [k, v] : lexicon) out[v] = k;
  return out;
}

std::vector<std::string> ToyTranslator::translate(const std::vector<std::string>& batch) {
  std::vector<std::string> out;
  out.reserve(batch.size());
  for (const auto& s : batch) out.push_back(toy_translate(s, lexicon_, spec_.direction));
  return out;
}

namespace {

std::chrono::milliseconds timeout_of(const BackendSpec& spec) {
  const std::string t = spec.param("timeout_ms", "600000");
  try {
    return std::chrono::milliseconds(std::stoll(t));
  } catch (const std::exception&) {
    throw ValidationError("backend '" + spec.model_id + "': bad timeout_ms '" + t + "'");
  }
}

std::string protocol_input(const std::vector<std::string>& batch) {
  std::string input;
  for (const auto& s : batch) {
    input += single_line(s);
    input += '\n';
  }
  return input;
}

}  // namespace

ExternalCommandTranslator::ExternalCommandTranslator(BackendSpec spec)
    : spec_(std::move(spec)), timeout_(timeout_of(spec_)) {
  const std::string mode = spec_.param("mode", "oneshot");
  if (mode != "oneshot" && mode != "persistent") {
    throw ValidationError("backend '" + spec_.model_id + "': mode must be oneshot or persistent");
  }
  persistent_ = mode == "persistent";
  if (persistent_) process_ = std::make_unique<Subprocess>(spec_.param("command"));
}

std::vector<std::string> ExternalCommandTranslator::translate(const std::vector<std::string>& batch) {
  if (batch.empty()) return {};
  std::lock_guard<std::mutex> lock(mu_);
  const std::string input = protocol_input(batch);
  if (persistent_) {
    if (!process_) process_ = std::make_unique<Subprocess>(spec_.param("command"));
    try {
      return process_->exchange(input, batch.size(), timeout_);
    } catch (const Error&) {
      process_.reset();  // a desynchronized process is useless
      throw;
    }
  }
  CommandResult r;
  try {
    r = run_command(spec_.param("command"), input, timeout_);
  } catch (const IoError& e) {
    throw BackendError("backend '" + spec_.model_id + "': " + e.what());
  }
  if (r.exit_code != 0) {
    throw BackendError("backend '" + spec_.model_id + "' exited with status " +
                       std::to_string(r.exit_code));
  }
  auto lines = split_lines(r.out);
  if (lines.size() != batch.size()) {
    throw ProtocolError("backend '" + spec_.model_id + "' returned " +
                        std::to_string(lines.size()) + " lines for " +
                        std::to_string(batch.size()) + " inputs");
  }
  return lines;
}

std::unique_ptr<Translator> load_backend(const BackendSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case BackendKind::kToyDictionary:
      try {
        return std::make_unique<ToyTranslator>(spec, read_lexicon(spec.path_param("lexicon")));
      } catch (const Error& e) {
        throw BackendError("cannot load '" + spec.model_id + "': " + e.what());
      }
    case BackendKind::kExternalCommand:
      return std::make_unique<ExternalCommandTranslator>(spec);
    case BackendKind::kHttpRemote:
      return std::make_unique<HttpRemoteTranslator>(spec);
  }
  throw ValidationError("unknown backend kind");
}

}  // namespace forge::backends
