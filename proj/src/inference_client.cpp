#include "argmine/inference_client.hpp"

#include <algorithm>
#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "argmine/http_util.hpp"

namespace argmine {

using nlohmann::json;

std::string_view to_string(ApiFlavor api) {
  return api == ApiFlavor::kOllama ? "ollama" : "openai";
}

ApiFlavor parse_api_flavor(std::string_view text) {
  if (text == "ollama") return ApiFlavor::kOllama;
  if (text == "openai") return ApiFlavor::kOpenAI;
  throw std::invalid_argument("unknown API flavor '" + std::string(text) + "'");
}

void ModelConfig::validate() const {
  if (model.empty()) throw ConfigError("model name must not be empty");
  if (temperature < 0) throw ConfigError("temperature must be >= 0");
  if (max_output_tokens <= 0) throw ConfigError("max_output_tokens must be positive");
  split_url(endpoint);
}

void apply_environment(ModelConfig& config) {
  if (const char* endpoint = std::getenv("ARGMINE_ENDPOINT"); endpoint && *endpoint) {
    config.endpoint = endpoint;
  }
  if (const char* key = std::getenv("ARGMINE_API_KEY"); key && *key) config.api_key = key;
}

std::string_view to_string(TransportErrorKind kind) {
  switch (kind) {
    case TransportErrorKind::kConnection: return "connection";
    case TransportErrorKind::kTimeout: return "timeout";
    case TransportErrorKind::kStatus: return "status";
    case TransportErrorKind::kProtocol: return "protocol";
  }
  return "?";
}

std::string_view to_string(OutcomeStatus status) {
  switch (status) {
    case OutcomeStatus::kValid: return "valid";
    case OutcomeStatus::kDiscarded: return "discarded";
    case OutcomeStatus::kTransportFailed: return "transport_failed";
  }
  return "?";
}

void OutcomeLog::record(OutcomeStatus status, std::size_t attempts) {
  std::lock_guard lock(mutex_);
  completions_ += attempts;
  switch (status) {
    case OutcomeStatus::kValid: ++valid_; break;
    case OutcomeStatus::kDiscarded: ++discarded_; break;
    case OutcomeStatus::kTransportFailed: ++transport_failed_; break;
  }
}

std::size_t OutcomeLog::valid() const {
  std::lock_guard lock(mutex_);
  return valid_;
}

std::size_t OutcomeLog::discarded() const {
  std::lock_guard lock(mutex_);
  return discarded_;
}

std::size_t OutcomeLog::transport_failed() const {
  std::lock_guard lock(mutex_);
  return transport_failed_;
}

std::size_t OutcomeLog::completions() const {
  std::lock_guard lock(mutex_);
  return completions_;
}

namespace {

httplib::Client make_client(const ModelConfig& config, const UrlParts& url) {
  httplib::Client client(url.origin);
  const auto ms = config.timeout.count();
  client.set_connection_timeout(ms / 1000, (ms % 1000) * 1000);
  client.set_read_timeout(ms / 1000, (ms % 1000) * 1000);
  client.set_write_timeout(ms / 1000, (ms % 1000) * 1000);
  if (!config.api_key.empty()) client.set_bearer_token_auth(config.api_key);
  return client;
}

TransportError from_httplib(httplib::Error error, const std::string& where) {
  const auto kind = (error == httplib::Error::Read || error == httplib::Error::Write ||
                     error == httplib::Error::ConnectionTimeout)
                        ? TransportErrorKind::kTimeout
                        : TransportErrorKind::kConnection;
  return TransportError(kind, where + ": " + httplib::to_string(error));
}

}  // namespace

HttpCompleter::HttpCompleter(std::size_t max_in_flight)
    : slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(max_in_flight, 1, 1024))) {}

std::string HttpCompleter::complete(const Prompt& prompt, const ModelConfig& config) {
  const UrlParts url = split_url(config.endpoint);
  json request;
  std::string path;
  if (config.api == ApiFlavor::kOllama) {
    path = url.path + "/api/generate";
    json options = {{"temperature", config.temperature}, {"num_predict", config.max_output_tokens}};
    if (config.seed) options["seed"] = *config.seed;
    request = {{"model", config.model}, {"prompt", prompt.body}, {"stream", false},
               {"options", std::move(options)}};
  } else {
    path = url.path + "/v1/chat/completions";
    request = {{"model", config.model},
               {"messages", json::array({{{"role", "user"}, {"content", prompt.body}}})},
               {"temperature", config.temperature},
               {"max_tokens", config.max_output_tokens},
               {"stream", false}};
    if (config.seed) request["seed"] = *config.seed;
  }

  slots_.acquire();
  httplib::Result result = [&] {
    auto client = make_client(config, url);
    return client.Post(path, request.dump(), "application/json");
  }();
  slots_.release();

  const std::string where = config.endpoint + path;
  if (!result) throw from_httplib(result.error(), where);
  if (result->status < 200 || result->status >= 300) {
    throw TransportError(TransportErrorKind::kStatus,
                         where + ": HTTP " + std::to_string(result->status) + " " + result->body);
  }
  const json reply = json::parse(result->body, nullptr, false);
  if (reply.is_discarded()) throw TransportError(TransportErrorKind::kProtocol, where + ": reply is not JSON");
  try {
    if (config.api == ApiFlavor::kOllama) return reply.at("response").get<std::string>();
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(TransportErrorKind::kProtocol, where + ": unexpected reply shape (" +
                                                            e.what() + ")");
  }
}

bool probe_server(const ModelConfig& config) {
  try {
    const UrlParts url = split_url(config.endpoint);
    ModelConfig quick = config;
    quick.timeout = std::chrono::milliseconds(2000);
    auto client = make_client(quick, url);
    const std::string path =
        url.path + (config.api == ApiFlavor::kOllama ? "/api/tags" : "/v1/models");
    return static_cast<bool>(client.Get(path));
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace argmine
