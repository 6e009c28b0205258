#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fk/common.hpp"
#include "fk/sync.hpp"

// Messages exchanged between clients, queues and the protocol functions.

namespace fk {

/// A request on a session's writer queue.
struct WriteRequest {
  SessionId session;
  /// Client-side ticket; 0 for requests the system issues (eviction).
  std::uint64_t ticket = 0;
  Opcode op = Opcode::kSetData;
  std::string path;
  std::string data;
  std::optional<Txid> version;
  bool ephemeral = false;
  bool sequential = false;

  bool operator==(const WriteRequest&) const = default;
};

/// New state of one node touched by a transaction.
struct NodeImage {
  std::string path;
  NodeChange change = NodeChange::kDataChanged;
  NodeVersion version;
  /// mtxid the writer validated against; the distributor only commits on the
  /// writer's behalf while the node still carries it.
  Txid base_mtxid = 0;

  bool operator==(const NodeImage&) const = default;
};

enum class SessionEffectKind { kAddEphemeral, kRemoveEphemeral, kClose };

/// Change to a session record that commits together with the node images.
struct SessionEffect {
  SessionId session;
  SessionEffectKind kind = SessionEffectKind::kAddEphemeral;
  std::string path;

  bool operator==(const SessionEffect&) const = default;
};

struct DistributorUpdate {
  SessionId session;
  /// Writer-queue seqno of the originating request.
  std::uint64_t request_seq = 0;
  std::uint64_t ticket = 0;
  Opcode op = Opcode::kSetData;
  LockHolder holder;
  std::vector<NodeImage> nodes;
  std::vector<SessionEffect> effects;
  Txid txid = 0;
  std::string writer_id;
  /// Path reported back to the client (differs from the request for sequential nodes).
  std::string result_path;

  bool operator==(const DistributorUpdate&) const = default;
};

/// One watch fired by one transaction, delivered in one region.
struct WatchDelivery {
  WatchId watch = 0;
  Txid txid = 0;
  std::string path;
  WatchEvent event = WatchEvent::kDataChanged;
  RegionName region;
  std::vector<SessionId> subscribers;
  /// Identifies the matching epoch entry.
  std::uint64_t token = 0;

  bool operator==(const WatchDelivery&) const = default;
};

/// Response for a write request on a session's response channel.
struct WriteResponse {
  std::uint64_t request_seq = 0;
  std::uint64_t ticket = 0;
  Opcode op = Opcode::kSetData;
  bool success = false;
  std::optional<FailureReason> reason;
  std::optional<Txid> txid;
  std::string path;
  /// Watches in flight in the session's home region when the result was sent.
  std::vector<WatchId> epoch_snapshot;
};

struct Notification {
  WatchId watch = 0;
  Txid txid = 0;
  std::string path;
  WatchEvent event = WatchEvent::kDataChanged;
};

/// Stamps the update with its txid; created nodes take it as their ctxid.
inline void assign_txid(DistributorUpdate& u, Txid txid) {
  u.txid = txid;
  for (auto& n : u.nodes) {
    if (n.change == NodeChange::kCreated) n.version.ctxid = txid;
  }
}

nlohmann::json to_json(const WriteRequest& r);
nlohmann::json to_json(const NodeImage& n);
nlohmann::json to_json(const DistributorUpdate& u);
nlohmann::json to_json(const WatchDelivery& d);

std::string_view to_string(SessionEffectKind k);

}  // namespace fk
