#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "quotemix/clock.hpp"
#include "quotemix/domain.hpp"

namespace quotemix {

struct ChatRequest {
  std::string system_text;
  std::string user_text;
  double temperature = 0.0;
  int max_output_tokens = 512;
  std::string model_id;
  std::optional<std::int64_t> seed;

  // Throws InvalidArgument when user_text is empty, temperature is outside
  // [0, 2], or max_output_tokens is not positive.
  void validate() const;
};

struct TokenUsage {
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
};

struct ChatResponse {
  std::string text;
  TokenUsage usage;
  std::int64_t latency_ms = 0;
  bool from_cache = false;
  int attempts = 0;
  std::string cache_key;
};

// SHA-256 over a canonical serialization of model, system text, user text,
// temperature and seed. max_output_tokens is not part of the key.
struct CacheKey {
  std::string digest;

  static CacheKey of(const ChatRequest& req);
  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

enum class GatewayErrorKind {
  auth,
  rate_limited,
  timeout,
  transient,
  malformed_response,
  request_rejected,
  unmatched_prompt,
  attempts_exhausted,
};

std::string_view to_string(GatewayErrorKind kind);
bool is_retryable(GatewayErrorKind kind);

class GatewayError : public Error {
 public:
  GatewayError(GatewayErrorKind kind, const std::string& message, int attempts = 0,
               std::optional<GatewayErrorKind> last = std::nullopt);

  GatewayErrorKind kind() const { return kind_; }
  int attempts() const { return attempts_; }
  // For attempts_exhausted: the kind of the final underlying failure.
  std::optional<GatewayErrorKind> last_kind() const { return last_; }
  // True for auth failures directly or as the cause of exhaustion.
  bool is_auth() const;

 private:
  GatewayErrorKind kind_;
  int attempts_;
  std::optional<GatewayErrorKind> last_;
};

struct BackendReply {
  std::string text;
  TokenUsage usage;
};

// One network (or simulated) round trip. Implementations throw GatewayError.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual BackendReply send(const ChatRequest& req) = 0;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::int64_t base_delay_ms = 500;
  std::int64_t max_delay_ms = 8000;
  double multiplier = 2.0;
  double jitter = 0.2;  // delay scaled by a factor drawn from [1 - jitter, 1 + jitter]
  std::uint64_t jitter_seed = 0;

  // Nominal delay before attempt `attempt + 1` (attempt is 1-based), before jitter.
  std::int64_t nominal_delay_ms(int attempt) const;
};

// Paced token bucket with capacity one: dispatches are spaced at least
// 1/k seconds apart, so any half-open one-second window sees at most k.
class RateLimiter {
 public:
  RateLimiter(double per_second, Clock& clock);

  // Blocks until a dispatch slot is available and returns the slot time.
  Clock::time_point acquire();
  bool unlimited() const { return interval_.count() == 0; }

 private:
  Clock& clock_;
  Clock::duration interval_{};
  std::mutex mu_;
  std::optional<Clock::time_point> last_;
};

class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<ChatResponse> load(const CacheKey& key) const;
  // Atomic: writes a temporary file then renames it into place.
  void store(const CacheKey& key, const ChatRequest& req, const ChatResponse& resp) const;
  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path_for(const CacheKey& key) const;

 private:
  std::filesystem::path dir_;
};

struct GatewayOptions {
  RetryPolicy retry;
  double rate_limit_per_second = 0.0;  // 0 disables limiting
  std::optional<std::filesystem::path> cache_dir;
};

struct GatewayStats {
  std::int64_t requests = 0;
  std::int64_t backend_calls = 0;  // every send(), including failed attempts
  std::int64_t cache_hits = 0;
};

// Thread-safe front door for all model calls: validation, cache, rate limit,
// retries with exponential backoff and jitter.
class Gateway {
 public:
  Gateway(std::shared_ptr<ChatBackend> backend, GatewayOptions options,
          std::shared_ptr<Clock> clock = nullptr);

  ChatResponse complete(const ChatRequest& req);

  GatewayStats stats() const;
  const GatewayOptions& options() const { return options_; }

 private:
  std::int64_t jittered_delay_ms(int attempt);

  std::shared_ptr<ChatBackend> backend_;
  GatewayOptions options_;
  std::shared_ptr<Clock> clock_;
  RateLimiter limiter_;
  std::optional<ResponseCache> cache_;
  std::mutex rng_mu_;
  std::mt19937_64 rng_;
  std::atomic<std::int64_t> requests_{0};
  std::atomic<std::int64_t> backend_calls_{0};
  std::atomic<std::int64_t> cache_hits_{0};
};

}  // namespace quotemix
