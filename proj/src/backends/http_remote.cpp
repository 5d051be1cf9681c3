#include <httplib.h>

#include "forge/backends/translator.hpp"
#include "forge/common/error.hpp"

namespace forge::backends {

HttpRemoteTranslator::HttpRemoteTranslator(BackendSpec spec) : spec_(std::move(spec)) {}

std::vector<std::string> HttpRemoteTranslator::translate(const std::vector<std::string>& batch) {
  if (batch.empty()) return {};
  std::lock_guard<std::mutex> lock(mu_);
  const std::string endpoint = spec_.param("endpoint");
  httplib::Client client(endpoint);
  if (!client.is_valid()) {
    throw BackendError("backend '" + spec_.model_id + "': bad endpoint '" + endpoint + "'");
  }
  const auto timeout = std::chrono::milliseconds(std::stoll(spec_.param("timeout_ms", "600000")));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(), 0);
  const nlohmann::json body = {{"model_id", spec_.param("remote_model_id", spec_.model_id)},
                               {"direction", spec_.direction.str()},
                               {"sentences", batch}};
  const auto res = client.Post("/translate_batch", body.dump(), "application/json");
  if (!res) {
    throw BackendError("backend '" + spec_.model_id + "': " + httplib::to_string(res.error()));
  }
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception&) {
    throw ProtocolError("backend '" + spec_.model_id + "': response is not JSON");
  }
  if (res->status != 200) {
    throw BackendError("backend '" + spec_.model_id + "': HTTP " + std::to_string(res->status) +
                       ": " + reply.value("message", res->body));
  }
  if (!reply.contains("translations") || !reply["translations"].is_array()) {
    throw ProtocolError("backend '" + spec_.model_id + "': response lacks translations[]");
  }
  auto out = reply["translations"].get<std::vector<std::string>>();
  if (out.size() != batch.size()) {
    throw ProtocolError("backend '" + spec_.model_id + "' returned " + std::to_string(out.size()) +
                        " translations for " + std::to_string(batch.size()) + " inputs");
  }
  return out;
}

}  // namespace forge::backends
