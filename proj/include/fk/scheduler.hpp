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

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "fk/common.hpp"

namespace fk {

class NonTermination : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Discrete-event loop owning simulated time.
///
/// Events fire in (time, insertion order) order, so simultaneous events run
/// FIFO and a run is fully determined by the sequence of schedule() calls.
class Scheduler {
 public:
  using EventId = std::uint64_t;
  using Action = std::function<void()>;

  explicit Scheduler(std::size_t max_events = 1'000'000) : max_events_(max_events) {}

  Scheduler(const Scheduler&) = delete;
  Scheduler& operator=(const Scheduler&) = delete;

  /// Fires `action` at now() + delay. Throws std::logic_error once finalized.
  EventId schedule(Action action, SimTime delay = 0);

  SimTime now() const { return now_; }
  bool idle() const { return heap_.empty(); }
  std::size_t dispatched() const { return dispatched_; }

  /// Runs one event. Returns false when nothing is pending.
  bool step();
  /// Runs until no events remain. Throws NonTermination past the event bound.
  std::size_t run();

  void finalize() { finalized_ = true; }
  bool finalized() const { return finalized_; }

 private:
  struct Entry {
    SimTime time;
    EventId id;
    Action action;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      return a.time != b.time ? a.time > b.time : a.id > b.id;
    }
  };

  std::vector<Entry> heap_;
  SimTime now_ = 0;
  EventId next_id_ = 0;
  std::size_t dispatched_ = 0;
  std::size_t max_events_;
  bool finalized_ = false;
};

}  // namespace fk
