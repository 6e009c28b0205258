#include "fk/common.hpp"

#include <array>
#include <utility>

namespace fk {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E e) {
  for (const auto& [value, name] : table) {
    if (value == e) return name;
  }
  return "?";
}

constexpr std::array<std::pair<Opcode, std::string_view>, 7> kOpcodes{{
    {Opcode::kCreate, "create"},
    {Opcode::kSetData, "set_data"},
    {Opcode::kDelete, "delete"},
    {Opcode::kGetData, "get_data"},
    {Opcode::kGetChildren, "get_children"},
    {Opcode::kExists, "exists"},
    {Opcode::kDeregister, "deregister"},
}};

constexpr std::array<std::pair<FailureReason, std::string_view>, 9> kReasons{{
    {FailureReason::kNodeExists, "node-exists"},
    {FailureReason::kNoNode, "no-node"},
    {FailureReason::kBadVersion, "bad-version"},
    {FailureReason::kNotEmpty, "not-empty"},
    {FailureReason::kNoParent, "no-parent"},
    {FailureReason::kNoChildrenForEphemerals, "no-children-for-ephemerals"},
    {FailureReason::kSessionClosed, "session-closed"},
    {FailureReason::kCommitRejected, "commit-rejected"},
    {FailureReason::kStalled, "stalled"},
}};

constexpr std::array<std::pair<WatchKind, std::string_view>, 3> kWatchKinds{{
    {WatchKind::kData, "data"},
    {WatchKind::kExists, "exists"},
    {WatchKind::kChildren, "children"},
}};

constexpr std::array<std::pair<WatchEvent, std::string_view>, 4> kWatchEvents{{
    {WatchEvent::kNodeCreated, "node-created"},
    {WatchEvent::kNodeDeleted, "node-deleted"},
    {WatchEvent::kDataChanged, "data-changed"},
    {WatchEvent::kChildrenChanged, "children-changed"},
}};

constexpr std::array<std::pair<NodeChange, std::string_view>, 4> kChanges{{
    {NodeChange::kCreated, "created"},
    {NodeChange::kDataChanged, "data-changed"},
    {NodeChange::kDeleted, "deleted"},
    {NodeChange::kChildrenChanged, "children-changed"},
}};

constexpr std::string_view kBase64Alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

}  // namespace

std::string_view to_string(Opcode op) { return name_of(kOpcodes, op); }
std::optional<Opcode> parse_opcode(std::string_view s) { return lookup(kOpcodes, s); }

bool is_write(Opcode op) {
  return op == Opcode::kCreate || op == Opcode::kSetData || op == Opcode::kDelete || op == Opcode::kDeregister;
}

std::string_view to_string(FailureReason r) { return name_of(kReasons, r); }
std::optional<FailureReason> parse_failure_reason(std::string_view s) { return lookup(kReasons, s); }
std::string_view to_string(WatchKind k) { return name_of(kWatchKinds, k); }
std::optional<WatchKind> parse_watch_kind(std::string_view s) { return lookup(kWatchKinds, s); }
std::string_view to_string(WatchEvent e) { return name_of(kWatchEvents, e); }
std::optional<WatchEvent> parse_watch_event(std::string_view s) { return lookup(kWatchEvents, s); }
std::string_view to_string(NodeChange c) { return name_of(kChanges, c); }
std::optional<NodeChange> parse_node_change(std::string_view s) { return lookup(kChanges, s); }

bool is_valid_path(std::string_view path) {
  if (path.empty() || path.front() != '/') return false;
  if (path == "/") return true;
  if (path.back() == '/') return false;
  return path.find("//") == std::string_view::npos;
}

void require_valid_path(std::string_view path) {
  if (!is_valid_path(path)) throw InvalidPath("invalid node path '" + std::string(path) + "'");
}

std::string parent_path(std::string_view path) {
  require_valid_path(path);
  if (path == "/") throw InvalidPath("root has no parent");
  const auto pos = path.rfind('/');
  return pos == 0 ? std::string("/") : std::string(path.substr(0, pos));
}

std::string base_name(std::string_view path) {
  require_valid_path(path);
  return std::string(path.substr(path.rfind('/') + 1));
}

std::string join_path(std::string_view parent, std::string_view child) {
  if (parent == "/") return "/" + std::string(child);
  return std::string(parent) + "/" + std::string(child);
}

std::string base64_encode(std::string_view bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const auto n = (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i])) << 16) |
                   (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i + 1])) << 8) |
                   static_cast<unsigned char>(bytes[i + 2]);
    out += kBase64Alphabet[(n >> 18) & 63];
    out += kBase64Alphabet[(n >> 12) & 63];
    out += kBase64Alphabet[(n >> 6) & 63];
    out += kBase64Alphabet[n & 63];
  }
  const auto rest = bytes.size() - i;
  if (rest > 0) {
    std::uint32_t n = static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i])) << 16;
    if (rest == 2) n |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i + 1])) << 8;
    out += kBase64Alphabet[(n >> 18) & 63];
    out += kBase64Alphabet[(n >> 12) & 63];
    out += rest == 2 ? kBase64Alphabet[(n >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw std::invalid_argument("base64 length must be a multiple of 4");
  std::string out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::uint32_t n = 0;
    int pad = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      const char c = text[i + j];
      std::uint32_t v = 0;
      if (c == '=') {
        if (i + 4 != text.size() || j < 2) throw std::invalid_argument("misplaced base64 padding");
        ++pad;
      } else {
        if (pad > 0) throw std::invalid_argument("misplaced base64 padding");
        const auto pos = kBase64Alphabet.find(c);
        if (pos == std::string_view::npos) throw std::invalid_argument("invalid base64 character");
        v = static_cast<std::uint32_t>(pos);
      }
      n = (n << 6) | v;
    }
    out += static_cast<char>((n >> 16) & 0xFF);
    if (pad < 2) out += static_cast<char>((n >> 8) & 0xFF);
    if (pad < 1) out += static_cast<char>(n & 0xFF);
  }
  return out;
}

}  // namespace fk
