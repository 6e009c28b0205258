#pragma once

#include <cstdint>

#include "fk/common.hpp"

namespace fk {

struct ContentionResult {
  std::uint64_t final_value = 0;
  std::uint64_t commits = 0;
  /// Commits refused because the holder had been displaced.
  std::uint64_t lost = 0;
  /// Acquire attempts refused because the lock was live.
  std::uint64_t refused = 0;
  /// Holds that outlived max_hold.
  std::uint64_t stale_holds = 0;
};

/// Sessions increment one shared counter node by read-modify-write under the
/// timed lock. Some holders stall past max_hold and get displaced. With mutual
/// exclusion intact the final value equals the number of commits.
ContentionResult run_lock_contention(std::size_t sessions, std::size_t ops_per_session, std::uint64_t seed,
                                     SimTime max_hold = 20);

}  // namespace fk
