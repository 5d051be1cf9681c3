#include "forge/server/service.hpp"

#include <chrono>
#include <mutex>

#include "forge/common/error.hpp"
#include "forge/common/text.hpp"

namespace forge::server {

namespace fs = std::filesystem;

namespace {

std::string field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw ValidationError(std::string("missing string field '") + key + "'");
  }
  return j.at(key).get<std::string>();
}

std::string registry_stamp(const fs::path& dir) {
  std::string stamp;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    stamp += f.filename().string() + ":" +
             std::to_string(fs::last_write_time(f).time_since_epoch().count()) + ":" +
             std::to_string(fs::file_size(f)) + ";";
  }
  return stamp;
}

}  // namespace

TranslateRequest TranslateRequest::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("request body must be a JSON object");
  TranslateRequest r;
  r.model_type = field(j, "model_type");
  r.training_variant = field(j, "training_variant");
  try {
    r.src_lang = parse_lang(field(j, "src_lang"));
    r.tgt_lang = parse_lang(field(j, "tgt_lang"));
  } catch (const ParseError& e) {
    throw ValidationError(e.what());
  }
  r.text = field(j, "text");
  if (r.src_lang == r.tgt_lang) throw ValidationError("src_lang and tgt_lang must differ");
  if (trim(r.text).empty()) throw ValidationError("text is empty");
  return r;
}

nlohmann::json TranslateResponse::to_json() const {
  return {{"translation", translation}, {"model_id", model_id}, {"latency_ms", latency_ms}};
}

TranslateService::TranslateService(backends::BackendRegistry registry, std::size_t capacity,
                                   Loader loader)
    : registry_(std::move(registry)), manager_(capacity, std::move(loader)) {}

TranslateService::TranslateService(const fs::path& registry_dir, std::size_t capacity, Loader loader)
    : registry_dir_(registry_dir), manager_(capacity, std::move(loader)) {
  if (!fs::is_directory(registry_dir)) {
    throw IoError("registry directory " + registry_dir.string() + " does not exist");
  }
  registry_stamp_ = registry_stamp(registry_dir);
  registry_ = backends::BackendRegistry::load_dir(registry_dir);
}

void TranslateService::refresh() {
  if (!registry_dir_) return;
  const std::string stamp = registry_stamp(*registry_dir_);
  {
    std::shared_lock lock(registry_mu_);
    if (stamp == registry_stamp_) return;
  }
  auto fresh = backends::BackendRegistry::load_dir(*registry_dir_);
  std::unique_lock lock(registry_mu_);
  registry_ = std::move(fresh);
  registry_stamp_ = stamp;
}

ModelList TranslateService::list_models(const std::string& model_type, std::optional<Lang> src,
                                        std::optional<Lang> tgt) {
  refresh();
  std::shared_lock lock(registry_mu_);
  ModelList out;
  for (auto& d : registry_.list_models(model_type, src)) {
    if (!tgt || d.tgt_lang == *tgt) out.models.push_back(std::move(d));
  }
  out.unknown_type = !model_type.empty() && !registry_.has_model_type(model_type);
  return out;
}

backends::BackendSpec TranslateService::resolve(const TranslateRequest& req) {
  refresh();
  std::shared_lock lock(registry_mu_);
  auto spec = registry_.resolve(req.model_type, req.training_variant, {req.src_lang, req.tgt_lang});
  if (!spec) {
    throw NotFoundError("no model of type '" + req.model_type + "' variant '" +
                        req.training_variant + "' for " +
                        Direction{req.src_lang, req.tgt_lang}.str());
  }
  return *spec;
}

TranslateResponse TranslateService::translate(const TranslateRequest& req) {
  const auto started = std::chrono::steady_clock::now();
  const auto spec = resolve(req);
  std::vector<std::string> out;
  try {
    out = manager_.translate(spec, {req.text});
  } catch (const BackendError&) {
    throw;
  } catch (const Error& e) {
    throw BackendError("model '" + spec.model_id + "' failed: " + e.what());
  }
  if (out.size() != 1) throw BackendError("model '" + spec.model_id + "' returned no translation");
  const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - started;
  return {out.front(), spec.model_id, elapsed.count()};
}

std::vector<std::string> TranslateService::translate_batch(const std::string& model_id,
                                                           Direction direction,
                                                           const std::vector<std::string>& sentences) {
  refresh();
  backends::BackendSpec spec;
  {
    std::shared_lock lock(registry_mu_);
    spec = registry_.get(model_id);
  }
  if (spec.direction != direction) {
    throw ValidationError("model '" + model_id + "' translates " + spec.direction.str() + ", not " +
                          direction.str());
  }
  try {
    return manager_.translate(spec, sentences);
  } catch (const BackendError&) {
    throw;
  } catch (const Error& e) {
    throw BackendError("model '" + model_id + "' failed: " + e.what());
  }
}

}  // namespace forge::server
