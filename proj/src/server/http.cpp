#include <httplib.h>

#include "forge/common/error.hpp"
#include "forge/server/service.hpp"

namespace forge::server {

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message, const std::string& model_id = "") {
  nlohmann::json body = {{"code", code}, {"message", message}};
  if (!model_id.empty()) body["model_id"] = model_id;
  send_json(res, status, body);
}

nlohmann::json parse_body(const httplib::Request& req) {
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("request body is not valid JSON");
  }
}

// Maps library errors onto HTTP statuses.
template <typename F>
void guarded(httplib::Response& res, const std::string& model_id, F&& f) {
  try {
    f();
  } catch (const NotFoundError& e) {
    send_error(res, 404, "not_found", e.what());
  } catch (const ValidationError& e) {
    send_error(res, 400, "bad_request", e.what());
  } catch (const ParseError& e) {
    send_error(res, 400, "bad_request", e.what());
  } catch (const std::exception& e) {
    send_error(res, 502, "backend_error", e.what(), model_id);
  }
}

std::optional<Lang> lang_param(const httplib::Request& req, const char* key) {
  if (!req.has_param(key) || req.get_param_value(key).empty()) return std::nullopt;
  try {
    return parse_lang(req.get_param_value(key));
  } catch (const ParseError& e) {
    throw ValidationError(std::string(key) + ": " + e.what());
  }
}

}  // namespace

HttpServer::HttpServer(TranslateService& service, ServerOptions options)
    : service_(service), options_(std::move(options)), http_(std::make_unique<httplib::Server>()) {
  auto& s = *http_;
  const int threads = std::max(1, options_.threads);
  s.new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };
  s.set_default_headers({{"Access-Control-Allow-Origin", options_.cors_origin},
                         {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                         {"Access-Control-Allow-Headers", "Content-Type"}});
  s.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  s.Get("/models", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, "", [&] {
      const std::string type = req.has_param("type") ? req.get_param_value("type") : "";
      const auto list = service_.list_models(type, lang_param(req, "src"), lang_param(req, "tgt"));
      nlohmann::json body = nlohmann::json::array();
      for (const auto& d : list.models) body.push_back(d.to_json());
      if (list.unknown_type) res.set_header("X-Forge-Unknown-Type", type);
      send_json(res, 200, body);
    });
  });

  s.Post("/translate", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, "", [&] {
      const auto request = TranslateRequest::from_json(parse_body(req));
      send_json(res, 200, service_.translate(request).to_json());
    });
  });

  s.Post("/translate_batch", [this](const httplib::Request& req, httplib::Response& res) {
    std::string model_id;
    guarded(res, model_id, [&] {
      const auto body = parse_body(req);
      if (!body.is_object() || !body.contains("model_id") || !body.contains("direction") ||
          !body.contains("sentences") || !body.at("sentences").is_array()) {
        throw ValidationError("expected {model_id, direction, sentences[]}");
      }
      model_id = body.at("model_id").get<std::string>();
      std::vector<std::string> sentences;
      try {
        sentences = body.at("sentences").get<std::vector<std::string>>();
      } catch (const nlohmann::json::exception&) {
        throw ValidationError("sentences must be strings");
      }
      const auto out = service_.translate_batch(
          model_id, Direction::parse(body.at("direction").get<std::string>()), sentences);
      send_json(res, 200, {{"translations", out}, {"model_id", model_id}});
    });
  });

  s.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"},
                         {"capacity", service_.models().capacity()},
                         {"resident", service_.models().resident()}});
  });

  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      send_error(res, res.status, res.status == 404 ? "not_found" : "error",
                 "HTTP " + std::to_string(res.status));
    }
  });
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::bind() {
  if (options_.port == 0) {
    port_ = http_->bind_to_any_port(options_.host);
  } else {
    port_ = http_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
  }
  if (port_ < 0) {
    throw IoError("cannot bind " + options_.host + ":" + std::to_string(options_.port));
  }
}

int HttpServer::start() {
  bind();
  thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  return port_;
}

void HttpServer::run() {
  bind();
  http_->listen_after_bind();
}

void HttpServer::stop() {
  if (http_) http_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace forge::server
