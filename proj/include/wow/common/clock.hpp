#pragma once

#include <atomic>
#include <cstdint>

namespace wow {

/// Server time source. Everything that stamps or schedules reads time
/// through this so in-process runs can use virtual time.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_us() const = 0;
  std::int64_t now_ms() const { return now_us() / 1000; }
};

class SystemClock final : public Clock {
 public:
  std::int64_t now_us() const override;
};

class ManualClock final : public Clock {
 public:
  explicit ManualClock(std::int64_t start_us = 1'700'000'000'000'000) : now_(start_us) {}

  std::int64_t now_us() const override { return now_.load(); }
  void advance_us(std::int64_t delta) { now_ += delta; }
  void advance_ms(std::int64_t delta) { now_ += delta * 1000; }
  void set_us(std::int64_t t) { now_ = t; }

 private:
  std::atomic<std::int64_t> now_;
};

}  // namespace wow
