#include "fk/sync.hpp"

#include <stdexcept>

namespace fk {

namespace {
const std::string kLockTs{fields::kLockTs};
const std::string kLockHolder{fields::kLockHolder};
}  // namespace

LockResult lock_acquire(KeyValueStore& store, std::string_view path, const LockHolder& holder, SimTime max_hold) {
  if (max_hold == 0) throw std::invalid_argument("lock max_hold must be positive");
  LockResult result;
  const auto before = store.read(tables::kNodes, path);
  if (before) result.old_record = SystemNodeRecord::from_item(std::string(path), &*before);

  std::vector<Condition> free_or_expired{field_absent(kLockTs)};
  if (holder.ts > max_hold) free_or_expired.push_back(numeric_compare(kLockTs, Cmp::kLess, holder.ts - max_hold));
  const auto update = store.conditional_update(tables::kNodes, path, {any_of(std::move(free_or_expired))},
                                               {SetField{kLockTs, holder.ts}, SetField{kLockHolder, holder.token}});
  result.acquired = update.applied;
  return result;
}

std::vector<Condition> lock_held_by(const LockHolder& holder) {
  return {field_equals(kLockTs, holder.ts), field_equals(kLockHolder, holder.token)};
}

LockOutcome lock_release(KeyValueStore& store, std::string_view path, const LockHolder& holder) {
  if (!store.read(tables::kNodes, path)) return LockOutcome::kLost;
  const auto update =
      store.conditional_update(tables::kNodes, path, lock_held_by(holder), {RemoveField{kLockTs}, RemoveField{kLockHolder}});
  return update.applied ? LockOutcome::kReleased : LockOutcome::kLost;
}

std::vector<Mutation> commit_mutations(const NodeVersion& version, Txid txid) {
  std::vector<Mutation> m{
      SetField{std::string(fields::kExists), std::uint64_t{version.exists ? 1u : 0u}},
      SetField{std::string(fields::kData), version.data},
      SetField{std::string(fields::kChildren), version.children},
      SetField{std::string(fields::kCtxid), version.ctxid},
      SetField{std::string(fields::kMtxid), txid},
      SetField{std::string(fields::kSeqCounter), version.sequential_counter},
      ListAppend{std::string(fields::kPending), txid},
  };
  if (version.ephemeral_owner) {
    m.push_back(SetField{std::string(fields::kEphemeralOwner), *version.ephemeral_owner});
  } else {
    m.push_back(RemoveField{std::string(fields::kEphemeralOwner)});
  }
  return m;
}

CommitOutcome commit_unlock(KeyValueStore& store, std::string_view path, const LockHolder& holder,
                            const NodeVersion& version, Txid txid) {
  if (const auto before = store.read(tables::kNodes, path)) {
    for (const auto pending : get_u64_list(*before, fields::kPending)) {
      if (pending >= txid) throw ProtocolViolation("commit txid does not exceed pending transactions");
    }
  }
  auto mutations = commit_mutations(version, txid);
  mutations.push_back(RemoveField{kLockTs});
  mutations.push_back(RemoveField{kLockHolder});
  const auto update = store.conditional_update(tables::kNodes, path, lock_held_by(holder), mutations);
  return update.applied ? CommitOutcome::kCommitted : CommitOutcome::kLost;
}

std::uint64_t counter_add(KeyValueStore& store, std::string_view name, std::int64_t delta) {
  const auto update =
      store.conditional_update(tables::kCounters, name, {}, {CounterAdd{std::string(fields::kValue), delta}});
  return get_u64(*update.current, fields::kValue);
}

std::uint64_t counter_value(const KeyValueStore& store, std::string_view name) {
  const auto item = store.read(tables::kCounters, name);
  return item ? get_u64(*item, fields::kValue) : 0;
}

Value list_update(KeyValueStore& store, std::string_view table, std::string_view key, std::string_view field,
                  const ListOp& op) {
  const std::string f{field};
  std::vector<Mutation> mutations;
  if (const auto* append = std::get_if<ListAppendOp>(&op)) {
    for (const auto& item : append->items) mutations.push_back(ListAppend{f, item});
  } else if (std::holds_alternative<ListPopFrontOp>(op)) {
    mutations.push_back(ListPopFront{f});
  } else {
    mutations.push_back(ListRemoveValue{f, std::get<ListRemoveOp>(op).item});
  }
  const auto update = store.conditional_update(table, key, {}, mutations);
  if (update.current) {
    if (const auto it = update.current->find(field); it != update.current->end()) return it->second;
  }
  if (const auto* append = std::get_if<ListAppendOp>(&op); append && !append->items.empty() &&
                                                             std::holds_alternative<std::string>(append->items.front())) {
    return StrList{};
  }
  return U64List{};
}

}  // namespace fk
