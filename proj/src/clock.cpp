#include "quotemix/clock.hpp"

#include <thread>

namespace quotemix {

Clock::time_point SystemClock::now() const {
  return std::chrono::time_point_cast<duration>(std::chrono::steady_clock::now());
}

void SystemClock::sleep_until(time_point t) { std::this_thread::sleep_until(t); }

Clock::time_point SimulatedClock::now() const {
  std::lock_guard lock(mu_);
  return now_;
}

void SimulatedClock::sleep_until(time_point t) {
  std::lock_guard lock(mu_);
  if (t > now_) {
    sleeps_.push_back(t - now_);
    now_ = t;
  } else {
    sleeps_.push_back(duration::zero());
  }
}

void SimulatedClock::advance(duration d) {
  std::lock_guard lock(mu_);
  now_ += d;
}

std::vector<Clock::duration> SimulatedClock::sleeps() const {
  std::lock_guard lock(mu_);
  return sleeps_;
}

}  // namespace quotemix
