#pragma once

#include <cstdint>
#include <random>

namespace wow::sim {

/// Seeded generator with platform-independent helpers (the standard
/// distributions are not portable across library implementations).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }
  int between(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1))); }
  /// Uniform in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }

  template <class Container>
  const auto& pick(const Container& c) {
    return c[below(c.size())];
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace wow::sim
