#include "fk/scheduler.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace fk {

Scheduler::EventId Scheduler::schedule(Action action, SimTime delay) {
  if (finalized_) throw std::logic_error("schedule() on a finalized simulator");
  const EventId id = next_id_++;
  heap_.push_back(Entry{now_ + delay, id, std::move(action)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
  return id;
}

bool Scheduler::step() {
  if (heap_.empty()) return false;
  std::pop_heap(heap_.begin(), heap_.end(), Later{});
  Entry entry = std::move(heap_.back());
  heap_.pop_back();
  now_ = entry.time;
  ++dispatched_;
  entry.action();
  return true;
}

std::size_t Scheduler::run() {
  const std::size_t start = dispatched_;
  while (!heap_.empty()) {
    if (dispatched_ - start >= max_events_) {
      throw NonTermination("event bound of " + std::to_string(max_events_) + " exceeded at t=" +
                           std::to_string(now_) + " with " + std::to_string(heap_.size()) + " events pending");
    }
    step();
  }
  return dispatched_ - start;
}

}  // namespace fk
