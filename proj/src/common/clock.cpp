#include "wow/common/clock.hpp"

#include <chrono>

namespace wow {

std::int64_t SystemClock::now_us() const {
  using namespace std::chrono;
  return duration_cast<microseconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace wow
