#include "wmw/clock.hpp"

#include <chrono>
#include <thread>

namespace wmw {

double SystemClock::now() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

void SystemClock::sleep(double seconds) {
  if (seconds > 0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

double RateLimiter::acquire() {
  // Holding the lock while sleeping serializes waiters, which is what a
  // shared per-endpoint budget wants.
  std::lock_guard lock(mu_);
  if (rpm_ <= 0) return clock_.now();
  for (;;) {
    const double t = clock_.now();
    while (!stamps_.empty() && stamps_.front() <= t - 60.0) stamps_.pop_front();
    if (static_cast<int>(stamps_.size()) < rpm_) {
      stamps_.push_back(t);
      return t;
    }
    clock_.sleep(stamps_.front() + 60.0 - t);
  }
}

}  // namespace wmw
