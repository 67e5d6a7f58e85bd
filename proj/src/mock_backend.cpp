#include "quotemix/mock_backend.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "quotemix/hash.hpp"

namespace quotemix {

namespace {

std::int64_t rough_tokens(const std::string& text) {
  return static_cast<std::int64_t>(normalize_words(text).size());
}

std::string expand_captures(const std::string& response, const std::smatch& m) {
  std::string out;
  out.reserve(response.size());
  std::size_t i = 0;
  while (i < response.size()) {
    if (response.compare(i, 2, "{{") == 0) {
      auto close = response.find("}}", i + 2);
      if (close != std::string::npos) {
        auto inner = response.substr(i + 2, close - i - 2);
        if (!inner.empty() && inner.find_first_not_of("0123456789") == std::string::npos) {
          auto group = static_cast<std::size_t>(std::stoul(inner));
          if (group < m.size()) out += m[group].str();
          i = close + 2;
          continue;
        }
      }
    }
    out += response[i++];
  }
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read mock response file " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

MockBackend::MockBackend(MockScript script)
    : default_response_(std::move(script.default_response)), selection_(script.selection) {
  if (script.rules.empty() && !default_response_) {
    throw InvalidArgument("mock script has no rules");
  }
  std::set<std::pair<int, std::string>> seen;
  for (auto& rule : script.rules) {
    if (rule.responses.empty()) {
      throw InvalidArgument("mock rule '" + rule.pattern + "' has no responses");
    }
    if (!seen.emplace(static_cast<int>(rule.match), rule.pattern).second) {
      throw InvalidArgument("duplicate mock matcher '" + rule.pattern + "'");
    }
    CompiledRule compiled{std::move(rule), std::nullopt, {}};
    if (compiled.rule.match == MockRule::Match::regex) {
      try {
        compiled.re.emplace(compiled.rule.pattern, std::regex::ECMAScript);
      } catch (const std::regex_error& e) {
        throw InvalidArgument("bad mock regex '" + compiled.rule.pattern + "': " + e.what());
      }
    }
    rules_.push_back(std::move(compiled));
  }
}

std::string MockBackend::pick(CompiledRule& rule, const std::string& user_text) {
  const auto& responses = rule.rule.responses;
  if (responses.size() == 1) return responses.front();
  if (selection_ == MockSelection::hash) {
    return responses[fnv1a64(user_text) % responses.size()];
  }
  std::lock_guard lock(mu_);
  auto [it, _] = rule.first_seen.emplace(user_text, rule.first_seen.size());
  return responses[it->second % responses.size()];
}

BackendReply MockBackend::send(const ChatRequest& req) {
  ++calls_;
  for (auto& rule : rules_) {
    std::smatch m;
    std::string chosen;
    if (rule.re) {
      if (!std::regex_search(req.user_text, m, *rule.re)) continue;
      chosen = expand_captures(pick(rule, req.user_text), m);
    } else {
      if (req.user_text.find(rule.rule.pattern) == std::string::npos) continue;
      chosen = pick(rule, req.user_text);
    }
    return BackendReply{chosen, {rough_tokens(req.system_text + " " + req.user_text), rough_tokens(chosen)}};
  }
  if (default_response_) {
    return BackendReply{*default_response_, {rough_tokens(req.user_text), rough_tokens(*default_response_)}};
  }
  auto head = req.user_text.substr(0, 80);
  throw GatewayError(GatewayErrorKind::unmatched_prompt, "no mock rule matches prompt '" + head + "...'");
}

std::shared_ptr<MockBackend> mock_script(MockScript script) {
  return std::make_shared<MockBackend>(std::move(script));
}

MockScript load_mock_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open mock fixture " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("malformed mock fixture " + path.string() + ": " + e.what());
  }
  const auto base = path.parent_path();
  MockScript script;
  auto sel = j.value("selection", std::string("hash"));
  if (sel == "hash") {
    script.selection = MockSelection::hash;
  } else if (sel == "cycle") {
    script.selection = MockSelection::cycle;
  } else {
    throw InvalidArgument("mock selection must be 'hash' or 'cycle'");
  }
  if (j.contains("default")) script.default_response = j.at("default").get<std::string>();
  for (const auto& r : j.value("rules", nlohmann::json::array())) {
    MockRule rule;
    if (r.contains("substring")) {
      rule.match = MockRule::Match::substring;
      rule.pattern = r.at("substring").get<std::string>();
    } else if (r.contains("regex")) {
      rule.match = MockRule::Match::regex;
      rule.pattern = r.at("regex").get<std::string>();
    } else {
      throw InvalidArgument("mock rule needs 'substring' or 'regex'");
    }
    if (r.contains("response")) rule.responses.push_back(r.at("response").get<std::string>());
    for (const auto& text : r.value("responses", nlohmann::json::array())) {
      rule.responses.push_back(text.get<std::string>());
    }
    if (r.contains("response_file")) {
      rule.responses.push_back(read_file(base / r.at("response_file").get<std::string>()));
    }
    for (const auto& f : r.value("response_files", nlohmann::json::array())) {
      rule.responses.push_back(read_file(base / f.get<std::string>()));
    }
    script.rules.push_back(std::move(rule));
  }
  return script;
}

}  // namespace quotemix
