#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "forge/common/lang.hpp"

namespace forge::backends {

enum class BackendKind { kToyDictionary, kExternalCommand, kHttpRemote };

std::string_view to_string(BackendKind kind);
BackendKind parse_kind(std::string_view text);

// How to obtain a translator. Required params by kind:
//   toy_dictionary    lexicon   TSV of `source<TAB>target` token pairs
//   external_command  command   shell command speaking the line protocol
//   http_remote       endpoint  base URL of a translate server
// Relative paths in params resolve against `base_dir` when it is set.
struct BackendSpec {
  BackendKind kind = BackendKind::kToyDictionary;
  Direction direction = Direction::forward();
  std::string model_id;
  std::map<std::string, std::string> params;

  void validate() const;
  std::string param(const std::string& key, const std::string& fallback = "") const;
  std::filesystem::path path_param(const std::string& key) const;

  // Family ("nllb") and training variant ("syn-1:1-mbart") taken from params
  // when present, otherwise from `<family>-<forward|backward>-<variant>`.
  std::string model_type() const;
  std::string training_variant() const;

  nlohmann::json to_json() const;
  static BackendSpec from_json(const nlohmann::json& j);

  friend bool operator==(const BackendSpec&, const BackendSpec&) = default;
};

struct ModelDescriptor {
  std::string model_id;
  std::string model_type;
  std::string training_variant;
  Lang src_lang = Lang::kYue;
  Lang tgt_lang = Lang::kEn;
  BackendKind kind = BackendKind::kToyDictionary;

  nlohmann::json to_json() const;
};

ModelDescriptor describe(const BackendSpec& spec);

class BackendRegistry {
 public:
  // Throws ValidationError on an invalid spec or a model_id already present.
  void add(BackendSpec spec);
  bool contains(const std::string& model_id) const;
  // Throws NotFoundError.
  const BackendSpec& get(const std::string& model_id) const;
  std::optional<BackendSpec> find(const std::string& model_id) const;
  // Resolves (model_type, training_variant, direction) to a model.
  std::optional<BackendSpec> resolve(const std::string& model_type,
                                     const std::string& training_variant,
                                     Direction direction) const;
  // Empty filters match everything; ordered by model_id.
  std::vector<ModelDescriptor> list_models(const std::string& model_type = "",
                                           std::optional<Lang> src = std::nullopt) const;
  bool has_model_type(const std::string& model_type) const;
  std::size_t size() const { return specs_.size(); }
  std::vector<BackendSpec> all() const;

  // Every *.json file in `dir` (sorted by name). A file holds one spec, an
  // array of specs, or a run manifest with a "backend" member. Relative
  // paths inside resolve against `dir`.
  static BackendRegistry load_dir(const std::filesystem::path& dir);

 private:
  std::map<std::string, BackendSpec> specs_;
};

}  // namespace forge::backends
