#include "seqscale/clock.hpp"

#include <thread>

namespace seqscale {

void SystemClock::sleep_until(Seconds t) {
  const Seconds current = now();
  if (t <= current) return;
  std::this_thread::sleep_for(
      std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          t - current));
}

}  // namespace seqscale
