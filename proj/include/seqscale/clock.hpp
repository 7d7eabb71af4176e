#pragma once

// ============================================================================
// Injectable clock abstraction.
//
// All time-dependent protocol logic (retry backoff, rate-limit gaps, request
// timestamps) goes through a Clock handle so tests can drive it with a
// VirtualClock: protocol conformance is asserted on virtual timestamps
// without real waiting, and replay runs produce byte-identical timestamps.
// ============================================================================

#include <chrono>
#include <memory>
#include <mutex>

namespace seqscale {

/** Seconds as a double; the single time unit used across the project. */
using Seconds = std::chrono::duration<double>;

class Clock {
 public:
  virtual ~Clock() = default;

  /** Monotonic time since the clock's epoch. */
  virtual Seconds now() const = 0;

  /** Block until now() ≥ t (no-op if already past). */
  virtual void sleep_until(Seconds t) = 0;

  void sleep_for(Seconds d) { sleep_until(now() + d); }
};

/** Wall clock backed by std::chrono::steady_clock; epoch = construction. */
class SystemClock final : public Clock {
 public:
  SystemClock() : epoch_(std::chrono::steady_clock::now()) {}

  Seconds now() const override {
    return std::chrono::duration_cast<Seconds>(
        std::chrono::steady_clock::now() - epoch_);
  }

  void sleep_until(Seconds t) override;

 private:
  std::chrono::steady_clock::time_point epoch_;
};

/**
 * Deterministic clock for tests and replay runs.  sleep_until() simply
 * advances the current time, so "waiting" is free and timestamps recorded
 * through the clock are exactly reproducible.  Thread-safe: concurrent
 * sleepers advance the shared time monotonically.
 */
class VirtualClock final : public Clock {
 public:
  explicit VirtualClock(Seconds start = Seconds{0.0}) : now_(start) {}

  Seconds now() const override {
    std::lock_guard<std::mutex> lock(mu_);
    return now_;
  }

  void sleep_until(Seconds t) override {
    std::lock_guard<std::mutex> lock(mu_);
    if (t > now_) now_ = t;
  }

 private:
  mutable std::mutex mu_;
  Seconds now_;
};

using ClockPtr = std::shared_ptr<Clock>;

inline ClockPtr make_system_clock() { return std::make_shared<SystemClock>(); }
inline ClockPtr make_virtual_clock(double start_seconds = 0.0) {
  return std::make_shared<VirtualClock>(Seconds{start_seconds});
}

}  // namespace seqscale
