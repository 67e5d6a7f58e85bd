#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "quotemix/gateway.hpp"

namespace quotemix {

struct MockRule {
  enum class Match { substring, regex };
  Match match = Match::substring;
  std::string pattern;
  // One response is chosen per request; `{{k}}` is replaced with regex capture
  // group k (k = 0 is the whole match).
  std::vector<std::string> responses;
};

enum class MockSelection {
  hash,   // FNV-1a of the user text: independent of call order
  cycle,  // k-th distinct user text seen by a rule gets response k mod size
};

struct MockScript {
  std::vector<MockRule> rules;
  std::optional<std::string> default_response;
  MockSelection selection = MockSelection::hash;
};

// Deterministic offline backend. Rules are tried in order against the user
// text; the first hit answers. With no hit, the default response is returned
// if configured, otherwise GatewayError(unmatched_prompt).
class MockBackend final : public ChatBackend {
 public:
  explicit MockBackend(MockScript script);

  BackendReply send(const ChatRequest& req) override;

  std::int64_t calls() const { return calls_.load(); }

 private:
  struct CompiledRule {
    MockRule rule;
    std::optional<std::regex> re;
    std::map<std::string, std::size_t> first_seen;
  };

  std::string pick(CompiledRule& rule, const std::string& user_text);

  std::vector<CompiledRule> rules_;
  std::optional<std::string> default_response_;
  MockSelection selection_;
  std::mutex mu_;
  std::atomic<std::int64_t> calls_{0};
};

// Throws InvalidArgument on an empty script or two identical matchers.
std::shared_ptr<MockBackend> mock_script(MockScript script);

// Fixture file (JSON):
//   {
//     "selection": "hash" | "cycle",
//     "default": "optional fallback text",
//     "rules": [
//       {"substring": "Quote Matching", "responses": ["...", "..."]},
//       {"regex": "Brand: (.+)", "response": "..."},
//       {"substring": "Answer", "response_files": ["a.txt"]}
//     ]
//   }
// response_file(s) paths are relative to the fixture file.
MockScript load_mock_script(const std::filesystem::path& path);

}  // namespace quotemix
