#include "forge/backends/spec.hpp"

#include <algorithm>

#include "forge/common/error.hpp"
#include "forge/common/text.hpp"

namespace forge::backends {

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::kToyDictionary: return "toy_dictionary";
    case BackendKind::kExternalCommand: return "external_command";
    case BackendKind::kHttpRemote: return "http_remote";
  }
  return "?";
}

BackendKind parse_kind(std::string_view text) {
  if (text == "toy_dictionary") return BackendKind::kToyDictionary;
  if (text == "external_command") return BackendKind::kExternalCommand;
  if (text == "http_remote") return BackendKind::kHttpRemote;
  throw ParseError("unknown backend kind '" + std::string(text) + "'");
}

namespace {

bool valid_id_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '-' || c == '_' || c == '.' || c == ':';
}

const char* required_param(BackendKind kind) {
  switch (kind) {
    case BackendKind::kToyDictionary: return "lexicon";
    case BackendKind::kExternalCommand: return "command";
    case BackendKind::kHttpRemote: return "endpoint";
  }
  return "";
}

}  // namespace

void BackendSpec::validate() const {
  if (model_id.empty()) throw ValidationError("backend spec has an empty model_id");
  if (!std::all_of(model_id.begin(), model_id.end(), valid_id_char)) {
    throw ValidationError("model_id '" + model_id + "' may only use letters, digits and - _ . :");
  }
  direction.validate();
  const std::string key = required_param(kind);
  const auto it = params.find(key);
  if (it == params.end() || trim(it->second).empty()) {
    throw ValidationError("backend '" + model_id + "' of kind " + std::string(to_string(kind)) +
                          " needs a '" + key + "' param");
  }
}

std::string BackendSpec::param(const std::string& key, const std::string& fallback) const {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

std::filesystem::path BackendSpec::path_param(const std::string& key) const {
  std::filesystem::path p = param(key);
  const std::string base = param("base_dir");
  if (p.is_relative() && !base.empty()) p = std::filesystem::path(base) / p;
  return p;
}

std::string BackendSpec::model_type() const {
  const std::string explicit_type = param("model_type");
  if (!explicit_type.empty()) return explicit_type;
  return model_id.substr(0, model_id.find('-'));
}

std::string BackendSpec::training_variant() const {
  const std::string explicit_variant = param("training_variant");
  if (!explicit_variant.empty()) return explicit_variant;
  const std::size_t dash = model_id.find('-');
  if (dash == std::string::npos) return "";
  std::string rest = model_id.substr(dash + 1);
  for (const char* role : {"forward-", "backward-"}) {
    if (starts_with(rest, role)) return rest.substr(std::string_view(role).size());
  }
  return rest;
}

nlohmann::json BackendSpec::to_json() const {
  return {{"kind", to_string(kind)},
          {"direction", direction.str()},
          {"model_id", model_id},
          {"params", params}};
}

BackendSpec BackendSpec::from_json(const nlohmann::json& j) {
  try {
    BackendSpec s;
    s.kind = parse_kind(j.at("kind").get<std::string>());
    s.direction = Direction::parse(j.at("direction").get<std::string>());
    s.model_id = j.at("model_id").get<std::string>();
    s.params = j.value("params", std::map<std::string, std::string>{});
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad backend spec: ") + e.what());
  }
}

nlohmann::json ModelDescriptor::to_json() const {
  return {{"model_id", model_id},         {"model_type", model_type},
          {"training_variant", training_variant}, {"src_lang", to_string(src_lang)},
          {"tgt_lang", to_string(tgt_lang)},  {"kind", to_string(kind)}};
}

ModelDescriptor describe(const BackendSpec& spec) {
  return {spec.model_id, spec.model_type(), spec.training_variant(), spec.direction.src,
          spec.direction.tgt, spec.kind};
}

void BackendRegistry::add(BackendSpec spec) {
  spec.validate();
  if (specs_.count(spec.model_id)) {
    throw ValidationError("model_id '" + spec.model_id + "' is already registered");
  }
  const std::string id = spec.model_id;
  specs_.emplace(id, std::move(spec));
}

bool BackendRegistry::contains(const std::string& model_id) const {
  return specs_.count(model_id) > 0;
}

const BackendSpec& BackendRegistry::get(const std::string& model_id) const {
  const auto it = specs_.find(model_id);
  if (it == specs_.end()) throw NotFoundError("no model '" + model_id + "' is registered");
  return it->second;
}

std::optional<BackendSpec> BackendRegistry::find(const std::string& model_id) const {
  const auto it = specs_.find(model_id);
  if (it == specs_.end()) return std::nullopt;
  return it->second;
}

std::optional<BackendSpec> BackendRegistry::resolve(const std::string& model_type,
                                                    const std::string& training_variant,
                                                    Direction direction) const {
  for (const auto& [_, spec] : specs_) {
    if (spec.direction == direction && spec.model_type() == model_type &&
        spec.training_variant() == training_variant) {
      return spec;
    }
  }
  return std::nullopt;
}

std::vector<ModelDescriptor> BackendRegistry::list_models(const std::string& model_type,
                                                          std::optional<Lang> src) const {
  std::vector<ModelDescriptor> out;
  for (const auto& [_, spec] : specs_) {
    if (!model_type.empty() && spec.model_type() != model_type) continue;
    if (src && spec.direction.src != *src) continue;
    out.push_back(describe(spec));
  }
  return out;
}

bool BackendRegistry::has_model_type(const std::string& model_type) const {
  return std::any_of(specs_.begin(), specs_.end(),
                     [&](const auto& kv) { return kv.second.model_type() == model_type; });
}

std::vector<BackendSpec> BackendRegistry::all() const {
  std::vector<BackendSpec> out;
  for (const auto& [_, spec] : specs_) out.push_back(spec);
  return out;
}

BackendRegistry BackendRegistry::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("registry directory '" + dir.string() + "' does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  BackendRegistry reg;
  const std::string base = std::filesystem::absolute(dir).lexically_normal().string();
  for (const auto& file : files) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(file));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(file.string() + ": " + e.what());
    }
    std::vector<nlohmann::json> items;
    if (j.is_array()) {
      items.assign(j.begin(), j.end());
    } else if (j.is_object() && j.contains("backend")) {
      items.push_back(j.at("backend"));
    } else {
      items.push_back(j);
    }
    for (const auto& item : items) {
      try {
        BackendSpec spec = BackendSpec::from_json(item);
        if (!spec.params.count("base_dir")) spec.params["base_dir"] = base;
        reg.add(std::move(spec));
      } catch (const Error& e) {
        throw ParseError(file.string() + ": " + e.what());
      }
    }
  }
  return reg;
}

}  // namespace forge::backends
