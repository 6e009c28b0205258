#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fk {

/// Abstract simulated time. One tick is the default latency of every service call.
using SimTime = std::uint64_t;
/// Global transaction id, the analogue of ZooKeeper's zxid.
using Txid = std::uint64_t;
using WatchId = std::uint64_t;
using SessionId = std::string;
using RegionName = std::string;

enum class Opcode { kCreate, kSetData, kDelete, kGetData, kGetChildren, kExists, kDeregister };

std::string_view to_string(Opcode op);
std::optional<Opcode> parse_opcode(std::string_view s);
bool is_write(Opcode op);

enum class FailureReason {
  kNodeExists,
  kNoNode,
  kBadVersion,
  kNotEmpty,
  kNoParent,
  kNoChildrenForEphemerals,
  kSessionClosed,
  kCommitRejected,
  kStalled,
};

std::string_view to_string(FailureReason r);
std::optional<FailureReason> parse_failure_reason(std::string_view s);

/// Kind of a registered watch. A data watch is set by get_data (or exists on a
/// present node), an exists watch by exists on an absent node, a children
/// watch by get_children.
enum class WatchKind { kData, kExists, kChildren };

/// Event type carried by a delivered notification.
enum class WatchEvent { kNodeCreated, kNodeDeleted, kDataChanged, kChildrenChanged };

std::string_view to_string(WatchKind k);
std::optional<WatchKind> parse_watch_kind(std::string_view s);
std::string_view to_string(WatchEvent e);
std::optional<WatchEvent> parse_watch_event(std::string_view s);

/// What a committed transaction did to one node.
enum class NodeChange { kCreated, kDataChanged, kDeleted, kChildrenChanged };

std::string_view to_string(NodeChange c);
std::optional<NodeChange> parse_node_change(std::string_view s);

class InvalidPath : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Paths are absolute, "/"-separated, with no trailing slash except the root.
bool is_valid_path(std::string_view path);
void require_valid_path(std::string_view path);
/// Parent of a non-root path; "/" for top-level nodes.
std::string parent_path(std::string_view path);
/// Last path component.
std::string base_name(std::string_view path);
std::string join_path(std::string_view parent, std::string_view child);

std::string base64_encode(std::string_view bytes);
/// Throws std::invalid_argument on malformed input.
std::string base64_decode(std::string_view text);

}  // namespace fk
