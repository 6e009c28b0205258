#include "fk/storage.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace fk {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const Value* find_field(const Item* item, std::string_view field) {
  if (item == nullptr) return nullptr;
  const auto it = item->find(field);
  return it == item->end() ? nullptr : &it->second;
}

bool compare(std::uint64_t lhs, Cmp cmp, std::uint64_t rhs) {
  switch (cmp) {
    case Cmp::kLess:
      return lhs < rhs;
    case Cmp::kLessEqual:
      return lhs <= rhs;
    case Cmp::kEqual:
      return lhs == rhs;
    case Cmp::kGreater:
      return lhs > rhs;
    case Cmp::kGreaterEqual:
      return lhs >= rhs;
  }
  return false;
}

void append_element(Value& list, const Value& element, std::string_view field) {
  if (const auto* u = std::get_if<std::uint64_t>(&element)) {
    if (auto* l = std::get_if<U64List>(&list)) {
      l->push_back(*u);
      return;
    }
  } else if (const auto* s = std::get_if<std::string>(&element)) {
    if (auto* l = std::get_if<StrList>(&list)) {
      l->push_back(*s);
      return;
    }
  }
  throw ProtocolViolation("list type mismatch on field '" + std::string(field) + "'");
}

Value empty_list_like(const Value& element) {
  if (std::holds_alternative<std::uint64_t>(element)) return U64List{};
  return StrList{};
}

std::string value_to_string(const Value& v) {
  return std::visit(Overloaded{
                        [](std::uint64_t u) { return std::to_string(u); },
                        [](const std::string& s) { return "\"" + s + "\""; },
                        [](const U64List& l) {
                          std::string out = "[";
                          for (std::size_t i = 0; i < l.size(); ++i) out += (i ? "," : "") + std::to_string(l[i]);
                          return out + "]";
                        },
                        [](const StrList& l) {
                          std::string out = "[";
                          for (std::size_t i = 0; i < l.size(); ++i) out += (i ? ",\"" : "\"") + l[i] + "\"";
                          return out + "]";
                        },
                    },
                    v);
}

}  // namespace

Condition field_absent(std::string field) { return Condition{FieldAbsent{std::move(field)}}; }
Condition field_equals(std::string field, Value value) { return Condition{FieldEquals{std::move(field), std::move(value)}}; }
Condition numeric_compare(std::string field, Cmp cmp, std::uint64_t rhs) {
  return Condition{NumericCompare{std::move(field), cmp, rhs}};
}
Condition list_head_equals(std::string field, Value element) {
  return Condition{ListHeadEquals{std::move(field), std::move(element)}};
}
Condition any_of(std::vector<Condition> alternatives) { return Condition{AnyOf{std::move(alternatives)}}; }

bool evaluate(const Condition& c, const Item* item) {
  return std::visit(Overloaded{
                        [&](const FieldAbsent& f) { return find_field(item, f.field) == nullptr; },
                        [&](const FieldEquals& f) {
                          const auto* v = find_field(item, f.field);
                          return v != nullptr && *v == f.value;
                        },
                        [&](const NumericCompare& f) {
                          const auto* v = find_field(item, f.field);
                          const auto* u = v ? std::get_if<std::uint64_t>(v) : nullptr;
                          return u != nullptr && compare(*u, f.cmp, f.rhs);
                        },
                        [&](const ListHeadEquals& f) {
                          const auto* v = find_field(item, f.field);
                          if (v == nullptr) return false;
                          if (const auto* l = std::get_if<U64List>(v)) {
                            const auto* e = std::get_if<std::uint64_t>(&f.element);
                            return e != nullptr && !l->empty() && l->front() == *e;
                          }
                          if (const auto* l = std::get_if<StrList>(v)) {
                            const auto* e = std::get_if<std::string>(&f.element);
                            return e != nullptr && !l->empty() && l->front() == *e;
                          }
                          return false;
                        },
                        [&](const AnyOf& f) {
                          return std::any_of(f.alternatives.begin(), f.alternatives.end(),
                                             [&](const Condition& alt) { return evaluate(alt, item); });
                        },
                    },
                    c.expr);
}

void apply_mutation(Item& item, bool& deleted, const Mutation& m) {
  std::visit(Overloaded{
                 [&](const SetField& f) { item.insert_or_assign(f.field, f.value); },
                 [&](const RemoveField& f) {
                   if (const auto it = item.find(f.field); it != item.end()) item.erase(it);
                 },
                 [&](const CounterAdd& f) {
                   std::uint64_t current = 0;
                   if (const auto it = item.find(f.field); it != item.end()) {
                     const auto* u = std::get_if<std::uint64_t>(&it->second);
                     if (u == nullptr) throw ProtocolViolation("counter '" + f.field + "' is not numeric");
                     current = *u;
                   }
                   if (f.delta < 0 && current < static_cast<std::uint64_t>(-f.delta)) {
                     throw ProtocolViolation("counter '" + f.field + "' would go negative");
                   }
                   item.insert_or_assign(f.field, static_cast<std::uint64_t>(static_cast<std::int64_t>(current) + f.delta));
                 },
                 [&](const ListAppend& f) {
                   auto it = item.find(f.field);
                   if (it == item.end()) it = item.emplace(f.field, empty_list_like(f.element)).first;
                   append_element(it->second, f.element, f.field);
                 },
                 [&](const ListPopFront& f) {
                   const auto it = item.find(f.field);
                   if (it == item.end()) throw ProtocolViolation("pop_front on absent list '" + f.field + "'");
                   std::visit(Overloaded{
                                  [&](U64List& l) {
                                    if (l.empty()) throw ProtocolViolation("pop_front on empty list '" + f.field + "'");
                                    l.erase(l.begin());
                                  },
                                  [&](StrList& l) {
                                    if (l.empty()) throw ProtocolViolation("pop_front on empty list '" + f.field + "'");
                                    l.erase(l.begin());
                                  },
                                  [&](auto&) { throw ProtocolViolation("pop_front on non-list '" + f.field + "'"); },
                              },
                              it->second);
                 },
                 [&](const ListRemoveValue& f) {
                   const auto it = item.find(f.field);
                   if (it == item.end()) return;
                   if (auto* l = std::get_if<U64List>(&it->second)) {
                     if (const auto* e = std::get_if<std::uint64_t>(&f.element)) {
                       if (auto pos = std::find(l->begin(), l->end(), *e); pos != l->end()) l->erase(pos);
                     }
                   } else if (auto* l = std::get_if<StrList>(&it->second)) {
                     if (const auto* e = std::get_if<std::string>(&f.element)) {
                       if (auto pos = std::find(l->begin(), l->end(), *e); pos != l->end()) l->erase(pos);
                     }
                   }
                 },
                 [&](const DeleteItem&) {
                   item.clear();
                   deleted = true;
                 },
             },
             m);
}

KeyValueStore::KeyValueStore(const std::vector<std::string>& tables) {
  for (const auto& t : tables) tables_.emplace(t, Table{});
}

KeyValueStore::Table& KeyValueStore::table(std::string_view name) {
  const auto it = tables_.find(name);
  if (it == tables_.end()) throw StorageError("unknown table '" + std::string(name) + "'");
  return it->second;
}

const KeyValueStore::Table& KeyValueStore::table(std::string_view name) const {
  const auto it = tables_.find(name);
  if (it == tables_.end()) throw StorageError("unknown table '" + std::string(name) + "'");
  return it->second;
}

std::optional<Item> KeyValueStore::read(std::string_view table_name, std::string_view key) const {
  const auto& t = table(table_name);
  const auto it = t.find(key);
  if (it == t.end()) return std::nullopt;
  return it->second;
}

UpdateResult KeyValueStore::conditional_update(std::string_view table_name, std::string_view key,
                                               const std::vector<Condition>& conditions,
                                               const std::vector<Mutation>& mutations) {
  auto& t = table(table_name);
  const auto it = t.find(key);
  const Item* current = it == t.end() ? nullptr : &it->second;
  for (const auto& c : conditions) {
    if (!evaluate(c, current)) {
      return UpdateResult{false, current ? std::optional<Item>(*current) : std::nullopt};
    }
  }
  Item next = current ? *current : Item{};
  bool deleted = false;
  for (const auto& m : mutations) apply_mutation(next, deleted, m);
  if (deleted && next.empty()) {
    if (it != t.end()) t.erase(it);
    return UpdateResult{true, std::nullopt};
  }
  auto& slot = t[std::string(key)];
  slot = std::move(next);
  return UpdateResult{true, slot};
}

TransactResult KeyValueStore::transact(const std::vector<WriteOp>& ops) {
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const auto& t = table(ops[i].table);
    const auto it = t.find(ops[i].key);
    const Item* current = it == t.end() ? nullptr : &it->second;
    for (const auto& c : ops[i].conditions) {
      if (!evaluate(c, current)) return TransactResult{false, i};
    }
  }
  // Stage everything before touching the tables so a ProtocolViolation
  // thrown midway leaves the store unchanged.
  std::vector<std::pair<bool, Item>> staged;
  staged.reserve(ops.size());
  std::map<std::pair<std::string, std::string>, std::size_t> latest;
  for (const auto& op : ops) {
    const auto key = std::make_pair(op.table, op.key);
    Item next;
    if (const auto prev = latest.find(key); prev != latest.end()) {
      next = staged[prev->second].second;
    } else if (auto existing = read(op.table, op.key)) {
      next = std::move(*existing);
    }
    bool deleted = false;
    for (const auto& m : op.mutations) apply_mutation(next, deleted, m);
    latest[key] = staged.size();
    staged.emplace_back(deleted && next.empty(), std::move(next));
  }
  for (std::size_t i = 0; i < ops.size(); ++i) {
    auto& t = table(ops[i].table);
    if (staged[i].first) {
      t.erase(ops[i].key);
    } else {
      t.insert_or_assign(ops[i].key, std::move(staged[i].second));
    }
  }
  return TransactResult{true, std::nullopt};
}

std::vector<std::pair<std::string, Item>> KeyValueStore::scan(std::string_view table_name) const {
  const auto& t = table(table_name);
  return {t.begin(), t.end()};
}

std::vector<std::string> KeyValueStore::tables() const {
  std::vector<std::string> names;
  for (const auto& [name, _] : tables_) names.push_back(name);
  return names;
}

std::string KeyValueStore::dump() const {
  std::ostringstream out;
  for (const auto& [name, t] : tables_) {
    for (const auto& [key, item] : t) {
      out << name << ' ' << key;
      for (const auto& [field, value] : item) out << ' ' << field << '=' << value_to_string(value);
      out << '\n';
    }
  }
  return out.str();
}

UserStore::UserStore(std::vector<RegionName> regions) : region_names_(std::move(regions)) {
  for (const auto& r : region_names_) replicas_.emplace(r, Replica{});
}

UserStore::Replica& UserStore::replica(std::string_view region) {
  const auto it = replicas_.find(region);
  if (it == replicas_.end()) throw StorageError("unknown region '" + std::string(region) + "'");
  return it->second;
}

const UserStore::Replica& UserStore::replica(std::string_view region) const {
  const auto it = replicas_.find(region);
  if (it == replicas_.end()) throw StorageError("unknown region '" + std::string(region) + "'");
  return it->second;
}

bool UserStore::has_region(std::string_view region) const { return replicas_.find(region) != replicas_.end(); }

void UserStore::put(std::string_view region, DataNodeObject object) {
  auto& r = replica(region);
  auto key = object.path;
  r.insert_or_assign(std::move(key), std::move(object));
}

std::optional<DataNodeObject> UserStore::get(std::string_view region, std::string_view path) const {
  const auto& r = replica(region);
  const auto it = r.find(path);
  if (it == r.end()) return std::nullopt;
  return it->second;
}

void UserStore::remove(std::string_view region, std::string_view path) {
  auto& r = replica(region);
  if (const auto it = r.find(path); it != r.end()) r.erase(it);
}

std::vector<DataNodeObject> UserStore::objects(std::string_view region) const {
  std::vector<DataNodeObject> out;
  for (const auto& [_, obj] : replica(region)) out.push_back(obj);
  return out;
}

std::string UserStore::dump() const {
  std::ostringstream out;
  for (const auto& [region, r] : replicas_) {
    for (const auto& [path, obj] : r) {
      out << region << ' ' << path << " data=\"" << obj.data << "\" children=" << value_to_string(obj.children)
          << " ctxid=" << obj.ctxid << " mtxid=" << obj.mtxid << " epoch=" << value_to_string(U64List(obj.epoch_snapshot))
          << '\n';
    }
  }
  return out.str();
}

// ---- typed views --------------------------------------------------------

std::uint64_t get_u64(const Item& item, std::string_view field, std::uint64_t fallback) {
  const auto it = item.find(field);
  if (it == item.end()) return fallback;
  const auto* u = std::get_if<std::uint64_t>(&it->second);
  return u ? *u : fallback;
}

std::string get_str(const Item& item, std::string_view field, std::string fallback) {
  const auto it = item.find(field);
  if (it == item.end()) return fallback;
  const auto* s = std::get_if<std::string>(&it->second);
  return s ? *s : fallback;
}

U64List get_u64_list(const Item& item, std::string_view field) {
  const auto it = item.find(field);
  if (it == item.end()) return {};
  const auto* l = std::get_if<U64List>(&it->second);
  return l ? *l : U64List{};
}

StrList get_str_list(const Item& item, std::string_view field) {
  const auto it = item.find(field);
  if (it == item.end()) return {};
  const auto* l = std::get_if<StrList>(&it->second);
  return l ? *l : StrList{};
}

std::string counters::epoch_key(std::string_view region) { return "epoch:" + std::string(region); }

SystemNodeRecord SystemNodeRecord::from_item(std::string path, const Item* item) {
  SystemNodeRecord r;
  r.path = std::move(path);
  if (item == nullptr) return r;
  r.exists = get_u64(*item, fields::kExists) != 0;
  r.data = get_str(*item, fields::kData);
  r.children = get_str_list(*item, fields::kChildren);
  r.ctxid = get_u64(*item, fields::kCtxid);
  r.mtxid = get_u64(*item, fields::kMtxid);
  if (item->contains(fields::kLockTs)) r.lock_ts = get_u64(*item, fields::kLockTs);
  if (item->contains(fields::kLockHolder)) r.lock_holder = get_u64(*item, fields::kLockHolder);
  r.pending_transactions = get_u64_list(*item, fields::kPending);
  if (item->contains(fields::kEphemeralOwner)) r.ephemeral_owner = get_str(*item, fields::kEphemeralOwner);
  r.sequential_counter = get_u64(*item, fields::kSeqCounter);
  return r;
}

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::kActive:
      return "active";
    case SessionStatus::kEvicting:
      return "evicting";
    case SessionStatus::kClosed:
      return "closed";
  }
  return "?";
}

std::optional<SessionStatus> parse_session_status(std::string_view s) {
  if (s == "active") return SessionStatus::kActive;
  if (s == "evicting") return SessionStatus::kEvicting;
  if (s == "closed") return SessionStatus::kClosed;
  return std::nullopt;
}

SessionRecord SessionRecord::from_item(SessionId id, const Item& item) {
  SessionRecord r;
  r.id = std::move(id);
  r.status = parse_session_status(get_str(item, fields::kStatus, "active")).value_or(SessionStatus::kActive);
  r.region = get_str(item, fields::kRegion);
  r.owned_ephemeral_paths = get_str_list(item, fields::kEphemerals);
  r.registered_watches = get_u64_list(item, fields::kWatchIds);
  r.last_heartbeat = get_u64(item, fields::kLastHeartbeat);
  r.decided_through = get_u64(item, fields::kDecidedThrough);
  r.failures = get_str_list(item, fields::kFailures);
  r.last_push_seq = get_u64(item, fields::kLastPushSeq);
  r.last_holder = get_u64(item, fields::kLastHolder);
  r.last_locked = get_str_list(item, fields::kLastLocked);
  return r;
}

std::optional<FailureReason> SessionRecord::failure_for(std::uint64_t seqno) const {
  const auto prefix = std::to_string(seqno) + ":";
  for (const auto& f : failures) {
    if (f.starts_with(prefix)) return parse_failure_reason(std::string_view(f).substr(prefix.size()));
  }
  return std::nullopt;
}

std::string EpochEntry::encode() const { return std::to_string(watch) + "#" + std::to_string(token); }

EpochEntry EpochEntry::decode(std::string_view s) {
  const auto hash = s.find('#');
  if (hash == std::string_view::npos) throw StorageError("malformed epoch entry '" + std::string(s) + "'");
  EpochEntry e;
  const auto a = std::from_chars(s.data(), s.data() + hash, e.watch);
  const auto b = std::from_chars(s.data() + hash + 1, s.data() + s.size(), e.token);
  if (a.ec != std::errc{} || b.ec != std::errc{}) throw StorageError("malformed epoch entry '" + std::string(s) + "'");
  return e;
}

std::vector<EpochEntry> read_epoch(const KeyValueStore& store, std::string_view region) {
  std::vector<EpochEntry> out;
  if (const auto item = store.read(tables::kCounters, counters::epoch_key(region))) {
    for (const auto& s : get_str_list(*item, fields::kEntries)) out.push_back(EpochEntry::decode(s));
  }
  return out;
}

std::vector<WatchId> epoch_watch_ids(const std::vector<EpochEntry>& entries) {
  std::vector<WatchId> ids;
  for (const auto& e : entries) ids.push_back(e.watch);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

WatchRecord WatchRecord::from_item(WatchId id, const Item& item) {
  WatchRecord w;
  w.id = id;
  w.path = get_str(item, fields::kPath);
  w.kind = parse_watch_kind(get_str(item, fields::kKind)).value_or(WatchKind::kData);
  w.subscribers = get_str_list(item, fields::kSubscribers);
  if (item.contains(fields::kFiredTxid)) w.fired_txid = get_u64(item, fields::kFiredTxid);
  return w;
}

std::string watch_key(WatchId id) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%012llu", static_cast<unsigned long long>(id));
  return buf;
}

}  // namespace fk
