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

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fk/storage.hpp"

// Timed locks, atomic counters and atomic lists, each a single conditional
// update on the system store.

namespace fk {

/// Identity of a lock holder. The timestamp drives expiry; the token keeps
/// two holders that locked in the same tick apart.
struct LockHolder {
  SimTime ts = 0;
  std::uint64_t token = 0;

  bool operator==(const LockHolder&) const = default;
};

struct LockResult {
  bool acquired = false;
  /// Node state before the acquire attempt (absent for a never-seen node).
  std::optional<SystemNodeRecord> old_record;
};

/// Acquires when no lock is stored or the stored one is older than max_hold
/// (strictly: now - lock_ts > max_hold). Throws std::invalid_argument when
/// max_hold is zero.
LockResult lock_acquire(KeyValueStore& store, std::string_view path, const LockHolder& holder, SimTime max_hold);

enum class LockOutcome { kReleased, kLost };
LockOutcome lock_release(KeyValueStore& store, std::string_view path, const LockHolder& holder);

/// Conditions that hold iff `holder` still owns the lock on the item.
std::vector<Condition> lock_held_by(const LockHolder& holder);

/// Node contents written by a commit.
struct NodeVersion {
  bool exists = true;
  std::string data;
  StrList children;
  Txid ctxid = 0;
  std::optional<SessionId> ephemeral_owner;
  std::uint64_t sequential_counter = 0;

  bool operator==(const NodeVersion&) const = default;
};

/// Mutations that install `version` with mtxid := txid and append txid to the
/// pending transaction list.
std::vector<Mutation> commit_mutations(const NodeVersion& version, Txid txid);

enum class CommitOutcome { kCommitted, kLost };

/// One atomic update conditioned on the lock: install the version, record the
/// txid as pending, drop the lock. Throws ProtocolViolation when txid does not
/// exceed every pending transaction.
CommitOutcome commit_unlock(KeyValueStore& store, std::string_view path, const LockHolder& holder,
                            const NodeVersion& version, Txid txid);

/// Atomic add on counters[name].value; absent counters start at zero.
std::uint64_t counter_add(KeyValueStore& store, std::string_view name, std::int64_t delta);
std::uint64_t counter_value(const KeyValueStore& store, std::string_view name);

struct ListAppendOp {
  std::vector<Value> items;
};
struct ListPopFrontOp {};
struct ListRemoveOp {
  Value item;
};
using ListOp = std::variant<ListAppendOp, ListPopFrontOp, ListRemoveOp>;

/// Atomic structural update of a list field; returns the new list. Popping
/// an empty list throws ProtocolViolation.
Value list_update(KeyValueStore& store, std::string_view table, std::string_view key, std::string_view field,
                  const ListOp& op);

}  // namespace fk
