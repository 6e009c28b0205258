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
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "fk/common.hpp"

namespace fk {

class StorageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a mutation is structurally impossible, e.g. popping an empty
/// list. In this system that always means a protocol bug.
class ProtocolViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

using U64List = std::vector<std::uint64_t>;
using StrList = std::vector<std::string>;
using Value = std::variant<std::uint64_t, std::string, U64List, StrList>;
using Item = std::map<std::string, Value, std::less<>>;

// ---- condition language -------------------------------------------------

enum class Cmp { kLess, kLessEqual, kEqual, kGreater, kGreaterEqual };

struct Condition;

struct FieldAbsent {
  std::string field;
};
struct FieldEquals {
  std::string field;
  Value value;
};
/// False when the field is absent or not numeric.
struct NumericCompare {
  std::string field;
  Cmp cmp;
  std::uint64_t rhs;
};
/// False on an absent or empty list.
struct ListHeadEquals {
  std::string field;
  Value element;
};
struct AnyOf {
  std::vector<Condition> alternatives;
};

struct Condition {
  std::variant<FieldAbsent, FieldEquals, NumericCompare, ListHeadEquals, AnyOf> expr;
};

Condition field_absent(std::string field);
Condition field_equals(std::string field, Value value);
Condition numeric_compare(std::string field, Cmp cmp, std::uint64_t rhs);
Condition list_head_equals(std::string field, Value element);
Condition any_of(std::vector<Condition> alternatives);

bool evaluate(const Condition& c, const Item* item);

// ---- mutation language --------------------------------------------------

struct SetField {
  std::string field;
  Value value;
};
struct RemoveField {
  std::string field;
};
/// Absent counters start at zero. Going below zero is a ProtocolViolation.
struct CounterAdd {
  std::string field;
  std::int64_t delta;
};
struct ListAppend {
  std::string field;
  Value element;
};
struct ListPopFront {
  std::string field;
};
/// Removes the first occurrence; no-op when the element is absent.
struct ListRemoveValue {
  std::string field;
  Value element;
};
struct DeleteItem {};

using Mutation = std::variant<SetField, RemoveField, CounterAdd, ListAppend, ListPopFront, ListRemoveValue, DeleteItem>;

struct UpdateResult {
  bool applied = false;
  /// Record after the update when applied; the untouched record when rejected.
  std::optional<Item> current;
};

struct WriteOp {
  std::string table;
  std::string key;
  std::vector<Condition> conditions;
  std::vector<Mutation> mutations;
};

struct TransactResult {
  bool applied = false;
  /// Index of the first WriteOp whose conditions failed.
  std::optional<std::size_t> failed_op;
};

/// Strongly consistent key-value store with single-item conditional updates
/// and all-or-nothing multi-item transactions. Every call is one indivisible
/// step of the simulation.
class KeyValueStore {
 public:
  explicit KeyValueStore(const std::vector<std::string>& tables);

  std::optional<Item> read(std::string_view table, std::string_view key) const;
  /// Conditions are conjunctive.
  UpdateResult conditional_update(std::string_view table, std::string_view key,
                                  const std::vector<Condition>& conditions, const std::vector<Mutation>& mutations);
  TransactResult transact(const std::vector<WriteOp>& ops);
  /// All items of a table in key order.
  std::vector<std::pair<std::string, Item>> scan(std::string_view table) const;
  std::vector<std::string> tables() const;

  std::string dump() const;

 private:
  using Table = std::map<std::string, Item, std::less<>>;
  Table& table(std::string_view name);
  const Table& table(std::string_view name) const;

  std::map<std::string, Table, std::less<>> tables_;
};

void apply_mutation(Item& item, bool& deleted, const Mutation& m);

// ---- user data store ----------------------------------------------------

/// Per-region replica of a node. Replaced wholesale on every update.
struct DataNodeObject {
  std::string path;
  std::string data;
  StrList children;
  Txid ctxid = 0;
  Txid mtxid = 0;
  /// Watch ids in the region's epoch counter when this version was written.
  std::vector<WatchId> epoch_snapshot;

  bool operator==(const DataNodeObject&) const = default;
};

class UserStore {
 public:
  explicit UserStore(std::vector<RegionName> regions);

  void put(std::string_view region, DataNodeObject object);
  std::optional<DataNodeObject> get(std::string_view region, std::string_view path) const;
  void remove(std::string_view region, std::string_view path);

  const std::vector<RegionName>& regions() const { return region_names_; }
  bool has_region(std::string_view region) const;
  std::vector<DataNodeObject> objects(std::string_view region) const;

  std::string dump() const;

 private:
  using Replica = std::map<std::string, DataNodeObject, std::less<>>;
  Replica& replica(std::string_view region);
  const Replica& replica(std::string_view region) const;

  std::vector<RegionName> region_names_;
  std::map<std::string, Replica, std::less<>> replicas_;
};

// ---- system store schema ------------------------------------------------

namespace tables {
inline constexpr std::string_view kNodes = "nodes";
inline constexpr std::string_view kSessions = "sessions";
inline constexpr std::string_view kCounters = "counters";
inline constexpr std::string_view kWatches = "watches";
}  // namespace tables

namespace fields {
inline constexpr std::string_view kExists = "exists";
inline constexpr std::string_view kData = "data";
inline constexpr std::string_view kChildren = "children";
inline constexpr std::string_view kCtxid = "ctxid";
inline constexpr std::string_view kMtxid = "mtxid";
inline constexpr std::string_view kLockTs = "lock_ts";
inline constexpr std::string_view kLockHolder = "lock_holder";
inline constexpr std::string_view kPending = "pending";
inline constexpr std::string_view kEphemeralOwner = "ephemeral_owner";
inline constexpr std::string_view kSeqCounter = "seq_counter";

inline constexpr std::string_view kStatus = "status";
inline constexpr std::string_view kRegion = "region";
inline constexpr std::string_view kEphemerals = "ephemerals";
inline constexpr std::string_view kWatchIds = "watches";
inline constexpr std::string_view kLastHeartbeat = "last_heartbeat";
inline constexpr std::string_view kDecidedThrough = "decided_through";
inline constexpr std::string_view kFailures = "failures";
inline constexpr std::string_view kLastPushSeq = "last_push_seq";
inline constexpr std::string_view kLastHolder = "last_holder";
inline constexpr std::string_view kLastLocked = "last_locked";

inline constexpr std::string_view kValue = "value";
inline constexpr std::string_view kEntries = "entries";

inline constexpr std::string_view kPath = "path";
inline constexpr std::string_view kKind = "kind";
inline constexpr std::string_view kSubscribers = "subscribers";
inline constexpr std::string_view kFiredTxid = "fired_txid";
}  // namespace fields

namespace counters {
inline constexpr std::string_view kState = "state";
/// Highest txid the distributor has finished (popped or rejected).
inline constexpr std::string_view kDistributed = "distributed";
inline constexpr std::string_view kWatchIds = "watch_ids";
std::string epoch_key(std::string_view region);
}  // namespace counters

/// Authoritative node state. Deleted nodes keep their record (exists = false)
/// so that their pending transaction list survives the delete.
struct SystemNodeRecord {
  std::string path;
  bool exists = false;
  std::string data;
  StrList children;
  Txid ctxid = 0;
  Txid mtxid = 0;
  std::optional<SimTime> lock_ts;
  std::optional<std::uint64_t> lock_holder;
  std::vector<Txid> pending_transactions;
  std::optional<SessionId> ephemeral_owner;
  std::uint64_t sequential_counter = 0;

  static SystemNodeRecord from_item(std::string path, const Item* item);
};

enum class SessionStatus { kActive, kEvicting, kClosed };
std::string_view to_string(SessionStatus s);
std::optional<SessionStatus> parse_session_status(std::string_view s);

struct SessionRecord {
  SessionId id;
  SessionStatus status = SessionStatus::kActive;
  RegionName region;
  StrList owned_ephemeral_paths;
  std::vector<WatchId> registered_watches;
  SimTime last_heartbeat = 0;
  /// Writer-queue seqno of the last request whose outcome is decided.
  std::uint64_t decided_through = 0;
  /// Decided requests that failed validation, as "seqno:reason".
  StrList failures;
  std::uint64_t last_push_seq = 0;
  std::uint64_t last_holder = 0;
  StrList last_locked;

  static SessionRecord from_item(SessionId id, const Item& item);
  std::optional<FailureReason> failure_for(std::uint64_t seqno) const;
};

/// One in-flight watch delivery inside an epoch counter. The token makes
/// every addition removable exactly once.
struct EpochEntry {
  WatchId watch = 0;
  std::uint64_t token = 0;

  std::string encode() const;
  static EpochEntry decode(std::string_view s);
  bool operator==(const EpochEntry&) const = default;
};

std::vector<EpochEntry> read_epoch(const KeyValueStore& store, std::string_view region);
/// Distinct watch ids of the epoch, sorted.
std::vector<WatchId> epoch_watch_ids(const std::vector<EpochEntry>& entries);

struct WatchRecord {
  WatchId id = 0;
  std::string path;
  WatchKind kind = WatchKind::kData;
  StrList subscribers;
  std::optional<Txid> fired_txid;

  static WatchRecord from_item(WatchId id, const Item& item);
};

std::string watch_key(WatchId id);

std::uint64_t get_u64(const Item& item, std::string_view field, std::uint64_t fallback = 0);
std::string get_str(const Item& item, std::string_view field, std::string fallback = {});
U64List get_u64_list(const Item& item, std::string_view field);
StrList get_str_list(const Item& item, std::string_view field);

}  // namespace fk
