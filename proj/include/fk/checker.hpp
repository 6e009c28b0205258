// Copyright 2026 The fksim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fk/trace.hpp"

namespace fk {

/// Verdict of one check over a trace.
struct CheckOutcome {
  std::string name;
  bool passed = true;
  /// Event indices of the first violation found.
  std::vector<std::size_t> counterexample;
  std::string detail;
};

struct CheckReport {
  std::vector<CheckOutcome> checks;

  bool passed() const;
  const CheckOutcome* find(std::string_view name) const;
  /// One line per check: name, PASS or FAIL, first counterexample indices.
  std::string format() const;
};

// Check names as they appear in reports.
namespace checks {
inline constexpr std::string_view kAtomicity = "atomicity";
inline constexpr std::string_view kLinearizedWrites = "linearized-writes";
inline constexpr std::string_view kSingleSystemImage = "single-system-image";
inline constexpr std::string_view kOrderedNotifications = "ordered-notifications";
inline constexpr std::string_view kEpochBalance = "epoch-balance";
inline constexpr std::string_view kLiveness = "liveness";
}  // namespace checks

/// Accepted writes are fully visible at quiescence, rejected writes left no
/// trace, each request committed at most once, and no transaction is left
/// pending on any node.
CheckOutcome check_atomicity(const Trace& trace);

/// Per session, accepted writes carry strictly increasing txids in
/// submission order.
CheckOutcome check_linearized_writes(const Trace& trace);

/// Every observed value is a committed state, no client sees a node go back
/// in time, and no read is older than what its session already knew.
CheckOutcome check_single_system_image(const Trace& trace);

/// Notifications reach the application in trigger order, before any newer
/// data, and every sent notification is received exactly once.
CheckOutcome check_ordered_notifications(const Trace& trace);

/// Every regional epoch counter is empty at quiescence.
CheckOutcome check_epoch_balance(const Trace& trace);

/// Every submitted operation got a result, every invocation ended, and no
/// lock is left behind.
CheckOutcome check_liveness(const Trace& trace);

/// Runs every check above.
CheckReport check_all(const Trace& trace);

}  // namespace fk
