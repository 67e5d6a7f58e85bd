#pragma once

#include <chrono>
#include <mutex>
#include <vector>

namespace quotemix {

// Time source used by retry backoff and rate limiting, so both can run
// against a simulated clock in tests.
class Clock {
 public:
  using duration = std::chrono::nanoseconds;
  using time_point = std::chrono::time_point<std::chrono::steady_clock, duration>;

  virtual ~Clock() = default;
  virtual time_point now() const = 0;
  virtual void sleep_until(time_point t) = 0;
  void sleep_for(duration d) { sleep_until(now() + d); }
};

class SystemClock final : public Clock {
 public:
  time_point now() const override;
  void sleep_until(time_point t) override;
};

// Manual clock: sleeping advances simulated time instantly. Thread-safe;
// sleeps are recorded for inspection.
class SimulatedClock final : public Clock {
 public:
  time_point now() const override;
  void sleep_until(time_point t) override;
  void advance(duration d);
  std::vector<duration> sleeps() const;

 private:
  mutable std::mutex mu_;
  time_point now_{};
  std::vector<duration> sleeps_;
};

}  // namespace quotemix
