#pragma once

#include <string>

#include "quotemix/gateway.hpp"

namespace quotemix {

inline constexpr const char* kEnvBaseUrl = "QUOTEMIX_BASE_URL";
inline constexpr const char* kEnvApiKey = "QUOTEMIX_API_KEY";
inline constexpr const char* kEnvOrgId = "QUOTEMIX_ORG_ID";
inline constexpr const char* kDefaultBaseUrl = "https://api.openai.com/v1";

struct EndpointConfig {
  std::string base_url = kDefaultBaseUrl;  // scheme://host[:port][/path-prefix]
  std::string api_key;
  std::string organization;
  int timeout_seconds = 60;

  // Reads the three environment variables. Throws GatewayError(auth) naming
  // QUOTEMIX_API_KEY when no key is set.
  static EndpointConfig from_env();
};

// OpenAI-compatible `POST {base}/chat/completions` client.
class OpenAiBackend final : public ChatBackend {
 public:
  explicit OpenAiBackend(EndpointConfig config);

  BackendReply send(const ChatRequest& req) override;

  // Exposed for tests: request body and response parsing.
  static std::string request_body(const ChatRequest& req);
  static BackendReply parse_response(const std::string& body);

 private:
  EndpointConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

}  // namespace quotemix
