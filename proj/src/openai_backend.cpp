#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "quotemix/openai_backend.hpp"

#include <cstdlib>

#include <json.hpp>

namespace quotemix {

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return (v && *v) ? std::string(v) : std::move(fallback);
}

}  // namespace

EndpointConfig EndpointConfig::from_env() {
  EndpointConfig c;
  c.base_url = env_or(kEnvBaseUrl, kDefaultBaseUrl);
  c.api_key = env_or(kEnvApiKey, "");
  c.organization = env_or(kEnvOrgId, "");
  if (c.api_key.empty()) {
    throw GatewayError(GatewayErrorKind::auth,
                       std::string("no API key; set the ") + kEnvApiKey + " environment variable");
  }
  return c;
}

OpenAiBackend::OpenAiBackend(EndpointConfig config) : config_(std::move(config)) {
  auto scheme_end = config_.base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw InvalidArgument("endpoint base URL needs a scheme: " + config_.base_url);
  }
  auto path_start = config_.base_url.find('/', scheme_end + 3);
  scheme_host_port_ = config_.base_url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : config_.base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::string OpenAiBackend::request_body(const ChatRequest& req) {
  nlohmann::json messages = nlohmann::json::array();
  if (!req.system_text.empty()) messages.push_back({{"role", "system"}, {"content", req.system_text}});
  messages.push_back({{"role", "user"}, {"content", req.user_text}});
  nlohmann::json body = {{"model", req.model_id},
                         {"messages", messages},
                         {"temperature", req.temperature},
                         {"max_tokens", req.max_output_tokens}};
  if (req.seed) body["seed"] = *req.seed;
  return body.dump();
}

BackendReply OpenAiBackend::parse_response(const std::string& body) {
  try {
    auto j = nlohmann::json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw GatewayError(GatewayErrorKind::malformed_response, "content is not text");
    BackendReply reply;
    reply.text = content.get<std::string>();
    if (j.contains("usage") && j["usage"].is_object()) {
      reply.usage.input_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
      reply.usage.output_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
    }
    return reply;
  } catch (const nlohmann::json::exception& e) {
    throw GatewayError(GatewayErrorKind::malformed_response, e.what());
  }
}

BackendReply OpenAiBackend::send(const ChatRequest& req) {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_write_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers{{"Authorization", "Bearer " + config_.api_key}};
  if (!config_.organization.empty()) headers.emplace("OpenAI-Organization", config_.organization);

  auto res = client.Post(path_prefix_ + "/chat/completions", headers, request_body(req), "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::Write ||
        err == httplib::Error::ConnectionTimeout) {
      throw GatewayError(GatewayErrorKind::timeout, httplib::to_string(err));
    }
    throw GatewayError(GatewayErrorKind::transient, httplib::to_string(err));
  }
  const int status = res->status;
  if (status == 401 || status == 403) {
    throw GatewayError(GatewayErrorKind::auth, "HTTP " + std::to_string(status) + " from endpoint");
  }
  if (status == 429) throw GatewayError(GatewayErrorKind::rate_limited, "HTTP 429");
  if (status == 408 || status == 504) {
    throw GatewayError(GatewayErrorKind::timeout, "HTTP " + std::to_string(status));
  }
  if (status >= 500) throw GatewayError(GatewayErrorKind::transient, "HTTP " + std::to_string(status));
  if (status != 200) {
    throw GatewayError(GatewayErrorKind::request_rejected,
                       "HTTP " + std::to_string(status) + ": " + res->body.substr(0, 200));
  }
  return parse_response(res->body);
}

}  // namespace quotemix
