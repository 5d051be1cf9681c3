#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "forge/backends/spec.hpp"
#include "forge/server/model_manager.hpp"

namespace httplib {
class Server;
}

namespace forge::server {

struct TranslateRequest {
  std::string model_type;
  std::string training_variant;
  Lang src_lang = Lang::kYue;
  Lang tgt_lang = Lang::kEn;
  std::string text;

  // Throws ValidationError on missing fields, src == tgt or blank text.
  static TranslateRequest from_json(const nlohmann::json& j);
};

struct TranslateResponse {
  std::string translation;
  std::string model_id;
  double latency_ms = 0.0;

  nlohmann::json to_json() const;
};

struct ModelList {
  std::vector<backends::ModelDescriptor> models;
  bool unknown_type = false;
};

// Request handling independent of the transport.
class TranslateService {
 public:
  // With a registry directory, the registry is rescanned whenever the set of
  // files or their modification times change.
  TranslateService(backends::BackendRegistry registry, std::size_t capacity = kDefaultCapacity,
                   Loader loader = {});
  TranslateService(const std::filesystem::path& registry_dir, std::size_t capacity = kDefaultCapacity,
                   Loader loader = {});

  ModelList list_models(const std::string& model_type, std::optional<Lang> src,
                        std::optional<Lang> tgt = std::nullopt);
  // NotFoundError for an unknown model; BackendError for backend failures.
  TranslateResponse translate(const TranslateRequest& req);
  std::vector<std::string> translate_batch(const std::string& model_id, Direction direction,
                                           const std::vector<std::string>& sentences);

  ModelManager& models() { return manager_; }

 private:
  void refresh();
  backends::BackendSpec resolve(const TranslateRequest& req);

  std::optional<std::filesystem::path> registry_dir_;
  std::string registry_stamp_;
  std::shared_mutex registry_mu_;
  backends::BackendRegistry registry_;
  ModelManager manager_;
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  std::string cors_origin = "*";
  int threads = 16;
};

// HTTP transport: GET /models, POST /translate, POST /translate_batch,
// GET /health. Errors are JSON {code, message}.
class HttpServer {
 public:
  HttpServer(TranslateService& service, ServerOptions options = {});
  ~HttpServer();

  // Binds and serves on a background thread; returns the bound port.
  int start();
  // Binds and serves on the calling thread until stop().
  void run();
  void stop();
  int port() const { return port_; }

 private:
  void bind();

  TranslateService& service_;
  ServerOptions options_;
  std::unique_ptr<httplib::Server> http_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace forge::server
