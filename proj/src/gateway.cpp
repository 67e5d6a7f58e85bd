#include "quotemix/gateway.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "quotemix/hash.hpp"

namespace quotemix {

void ChatRequest::validate() const {
  if (user_text.empty()) throw InvalidArgument("chat request user text is empty");
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw InvalidArgument("temperature must lie in [0, 2]");
  }
  if (max_output_tokens <= 0) throw InvalidArgument("max_output_tokens must be positive");
}

CacheKey CacheKey::of(const ChatRequest& req) {
  // Array form keeps field order fixed; dump() of doubles is round-trip exact.
  nlohmann::json canonical = nlohmann::json::array(
      {"quotemix-cache-v1", req.model_id, req.system_text, req.user_text, req.temperature,
       req.seed ? nlohmann::json(*req.seed) : nlohmann::json(nullptr)});
  return CacheKey{sha256_hex(canonical.dump())};
}

std::string_view to_string(GatewayErrorKind kind) {
  switch (kind) {
    case GatewayErrorKind::auth: return "auth";
    case GatewayErrorKind::rate_limited: return "rate_limited";
    case GatewayErrorKind::timeout: return "timeout";
    case GatewayErrorKind::transient: return "transient";
    case GatewayErrorKind::malformed_response: return "malformed_response";
    case GatewayErrorKind::request_rejected: return "request_rejected";
    case GatewayErrorKind::unmatched_prompt: return "unmatched_prompt";
    case GatewayErrorKind::attempts_exhausted: return "attempts_exhausted";
  }
  return "unknown";
}

bool is_retryable(GatewayErrorKind kind) {
  return kind == GatewayErrorKind::rate_limited || kind == GatewayErrorKind::timeout ||
         kind == GatewayErrorKind::transient;
}

GatewayError::GatewayError(GatewayErrorKind kind, const std::string& message, int attempts,
                           std::optional<GatewayErrorKind> last)
    : Error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      attempts_(attempts),
      last_(last) {}

bool GatewayError::is_auth() const {
  return kind_ == GatewayErrorKind::auth || last_ == GatewayErrorKind::auth;
}

std::int64_t RetryPolicy::nominal_delay_ms(int attempt) const {
  const double raw = static_cast<double>(base_delay_ms) * std::pow(multiplier, attempt - 1);
  return static_cast<std::int64_t>(std::min(raw, static_cast<double>(max_delay_ms)));
}

RateLimiter::RateLimiter(double per_second, Clock& clock) : clock_(clock) {
  if (per_second < 0.0) throw InvalidArgument("rate limit must be non-negative");
  if (per_second > 0.0) {
    interval_ = Clock::duration(static_cast<Clock::duration::rep>(std::ceil(1e9 / per_second)));
  }
}

Clock::time_point RateLimiter::acquire() {
  if (unlimited()) return clock_.now();
  Clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    slot = clock_.now();
    if (last_ && *last_ + interval_ > slot) slot = *last_ + interval_;
    last_ = slot;
  }
  clock_.sleep_until(slot);
  return slot;
}

Gateway::Gateway(std::shared_ptr<ChatBackend> backend, GatewayOptions options,
                 std::shared_ptr<Clock> clock)
    : backend_(std::move(backend)),
      options_(std::move(options)),
      clock_(clock ? std::move(clock) : std::make_shared<SystemClock>()),
      limiter_(options_.rate_limit_per_second, *clock_),
      rng_(options_.retry.jitter_seed) {
  if (!backend_) throw InvalidArgument("gateway needs a backend");
  if (options_.retry.max_attempts < 1) throw InvalidArgument("max_attempts must be >= 1");
  if (options_.cache_dir) cache_.emplace(*options_.cache_dir);
}

std::int64_t Gateway::jittered_delay_ms(int attempt) {
  const auto nominal = static_cast<double>(options_.retry.nominal_delay_ms(attempt));
  double factor = 1.0;
  if (options_.retry.jitter > 0.0) {
    std::lock_guard lock(rng_mu_);
    std::uniform_real_distribution<double> dist(1.0 - options_.retry.jitter,
                                                1.0 + options_.retry.jitter);
    factor = dist(rng_);
  }
  return static_cast<std::int64_t>(std::llround(nominal * factor));
}

ChatResponse Gateway::complete(const ChatRequest& req) {
  req.validate();
  ++requests_;
  const auto key = CacheKey::of(req);
  if (cache_) {
    if (auto hit = cache_->load(key)) {
      ++cache_hits_;
      hit->from_cache = true;
      hit->cache_key = key.digest;
      return *hit;
    }
  }

  std::optional<GatewayErrorKind> last_kind;
  std::string last_message;
  const int cap = options_.retry.max_attempts;
  for (int attempt = 1; attempt <= cap; ++attempt) {
    limiter_.acquire();
    const auto start = clock_->now();
    try {
      ++backend_calls_;
      BackendReply reply = backend_->send(req);
      ChatResponse resp;
      resp.text = std::move(reply.text);
      resp.usage = reply.usage;
      resp.latency_ms =
          std::chrono::duration_cast<std::chrono::milliseconds>(clock_->now() - start).count();
      resp.attempts = attempt;
      resp.cache_key = key.digest;
      if (cache_) cache_->store(key, req, resp);
      return resp;
    } catch (const GatewayError& e) {
      if (!is_retryable(e.kind())) throw;
      last_kind = e.kind();
      last_message = e.what();
    }
    if (attempt < cap) clock_->sleep_for(std::chrono::milliseconds(jittered_delay_ms(attempt)));
  }
  throw GatewayError(GatewayErrorKind::attempts_exhausted,
                     "gave up after " + std::to_string(cap) + " attempts; last error: " + last_message,
                     cap, last_kind);
}

GatewayStats Gateway::stats() const {
  return GatewayStats{requests_.load(), backend_calls_.load(), cache_hits_.load()};
}

}  // namespace quotemix
