#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "quotemix/gateway.hpp"

namespace quotemix {

namespace {
constexpr int kCacheSchemaVersion = 1;
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error("cannot create cache directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path ResponseCache::path_for(const CacheKey& key) const {
  return dir_ / (key.digest + ".json");
}

std::optional<ChatResponse> ResponseCache::load(const CacheKey& key) const {
  std::ifstream in(path_for(key));
  if (!in) return std::nullopt;
  try {
    auto j = nlohmann::json::parse(in);
    if (j.value("schema_version", 0) != kCacheSchemaVersion || j.value("key", "") != key.digest) {
      return std::nullopt;
    }
    const auto& r = j.at("response");
    ChatResponse resp;
    resp.text = r.at("text").get<std::string>();
    resp.usage.input_tokens = r.at("usage").at("input_tokens").get<std::int64_t>();
    resp.usage.output_tokens = r.at("usage").at("output_tokens").get<std::int64_t>();
    return resp;
  } catch (const nlohmann::json::exception&) {
    // A corrupt entry is treated as a miss and overwritten on the next store.
    return std::nullopt;
  }
}

void ResponseCache::store(const CacheKey& key, const ChatRequest& req, const ChatResponse& resp) const {
  nlohmann::json request = {{"model_id", req.model_id},
                            {"system_text", req.system_text},
                            {"user_text", req.user_text},
                            {"temperature", req.temperature},
                            {"max_output_tokens", req.max_output_tokens},
                            {"seed", req.seed ? nlohmann::json(*req.seed) : nlohmann::json(nullptr)}};
  nlohmann::json body = {
      {"schema_version", kCacheSchemaVersion},
      {"key", key.digest},
      {"request", request},
      {"response",
       {{"text", resp.text},
        {"usage", {{"input_tokens", resp.usage.input_tokens}, {"output_tokens", resp.usage.output_tokens}}}}}};

  static std::atomic<std::uint64_t> counter{0};
  std::ostringstream tmp_name;
  tmp_name << key.digest << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id()) << "."
           << counter++;
  const auto tmp = dir_ / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write cache entry " + tmp.string());
    out << body.dump(2) << '\n';
    if (!out) throw Error("failed writing cache entry " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path_for(key), ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot publish cache entry " + path_for(key).string());
  }
}

}  // namespace quotemix
