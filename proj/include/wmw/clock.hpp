#pragma once

#include <deque>
#include <mutex>

namespace wmw {

class Clock {
 public:
  virtual ~Clock() = default;
  /// Seconds since an arbitrary epoch.
  virtual double now() = 0;
  virtual void sleep(double seconds) = 0;
};

class SystemClock : public Clock {
 public:
  double now() override;
  void sleep(double seconds) override;
};

/// Time moves only when someone sleeps. Lets throttle and backoff tests run
/// instantly while still checking wall-clock arithmetic.
class ManualClock : public Clock {
 public:
  explicit ManualClock(double start = 0.0) : now_(start) {}
  double now() override {
    std::lock_guard lock(mu_);
    return now_;
  }
  void sleep(double seconds) override {
    std::lock_guard lock(mu_);
    if (seconds > 0) now_ += seconds;
    slept_ += seconds > 0 ? seconds : 0;
  }
  double total_slept() const {
    std::lock_guard lock(mu_);
    return slept_;
  }

 private:
  mutable std::mutex mu_;
  double now_;
  double slept_ = 0.0;
};

/// Sliding 60-second window: at most `rpm` acquisitions in any window.
class RateLimiter {
 public:
  RateLimiter(int rpm, Clock& clock) : rpm_(rpm), clock_(clock) {}

  /// Blocks (through the clock) until a slot is free, then records the
  /// request time and returns it.
  double acquire();

 private:
  int rpm_;
  Clock& clock_;
  std::mutex mu_;
  std::deque<double> stamps_;
};

}  // namespace wmw
