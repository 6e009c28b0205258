#include "fk/contention.hpp"

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fk/scheduler.hpp"
#include "fk/sync.hpp"

namespace fk {

namespace {
constexpr std::string_view kPath = "/counter";
}  // namespace

ContentionResult run_lock_contention(std::size_t sessions, std::size_t ops_per_session, std::uint64_t seed,
                                     SimTime max_hold) {
  KeyValueStore store({std::string(tables::kNodes)});
  Scheduler scheduler;
  std::mt19937_64 rng(seed);
  auto pick = [&](SimTime lo, SimTime hi) { return std::uniform_int_distribution<SimTime>(lo, hi)(rng); };
  ContentionResult out;
  std::uint64_t next_token = 0;
  Txid next_txid = 0;
  std::vector<std::size_t> done(sessions, 0);

  std::function<void(std::size_t)> attempt = [&](std::size_t s) {
    const LockHolder holder{scheduler.now(), ++next_token};
    const auto lock = lock_acquire(store, kPath, holder, max_hold);
    if (!lock.acquired) {
      ++out.refused;
      scheduler.schedule([&, s] { attempt(s); }, pick(1, 3));
      return;
    }
    const auto& old = lock.old_record;
    const std::uint64_t value = old && !old->data.empty() ? std::stoull(old->data) : 0;
    const bool stall = pick(0, 9) == 0;
    if (stall) ++out.stale_holds;
    const SimTime hold = stall ? pick(max_hold + 1, max_hold + 10) : pick(1, max_hold / 4 + 1);
    scheduler.schedule(
        [&, s, holder, value] {
          NodeVersion v;
          v.data = std::to_string(value + 1);
          if (commit_unlock(store, kPath, holder, v, ++next_txid) == CommitOutcome::kCommitted) {
            ++out.commits;
          } else {
            ++out.lost;
          }
          if (++done[s] < ops_per_session) scheduler.schedule([&, s] { attempt(s); }, pick(0, 2));
        },
        hold);
  };
  for (std::size_t s = 0; s < sessions; ++s) {
    if (ops_per_session > 0) scheduler.schedule([&, s] { attempt(s); }, pick(0, 3));
  }
  scheduler.run();
  const auto item = store.read(tables::kNodes, kPath);
  const auto rec = SystemNodeRecord::from_item(std::string(kPath), item ? &*item : nullptr);
  out.final_value = rec.data.empty() ? 0 : std::stoull(rec.data);
  return out;
}

}  // namespace fk
