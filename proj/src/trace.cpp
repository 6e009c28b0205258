#include "fk/trace.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

namespace fk {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 16> kKinds{{
    {EventKind::kEnqueue, "enqueue"},
    {EventKind::kInvokeStart, "invoke-start"},
    {EventKind::kInvokeCrash, "invoke-crash"},
    {EventKind::kInvokeComplete, "invoke-complete"},
    {EventKind::kStorageRead, "storage-read"},
    {EventKind::kStorageWrite, "storage-write"},
    {EventKind::kCommit, "commit"},
    {EventKind::kNotifySent, "notify-sent"},
    {EventKind::kNotifyReceived, "notify-received"},
    {EventKind::kClientReadObserve, "client-read-observe"},
    {EventKind::kClientResult, "client-result"},
    {EventKind::kSessionEvicted, "session-evicted"},
    {EventKind::kSessionOpen, "session-open"},
    {EventKind::kSessionClosed, "session-closed"},
    {EventKind::kDeadLetter, "dead-letter"},
    {EventKind::kFinalState, "final-state"},
}};

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (fields.size() < 6) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) break;
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  fields.push_back(line.substr(start));
  return fields;
}

std::uint64_t parse_u64(std::string_view s, std::size_t line_no) {
  if (s.empty()) throw std::runtime_error("trace line " + std::to_string(line_no) + ": empty number");
  std::uint64_t v = 0;
  for (const char c : s) {
    if (c < '0' || c > '9') throw std::runtime_error("trace line " + std::to_string(line_no) + ": bad number");
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

}  // namespace

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kKinds) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (const auto& [k, name] : kKinds) {
    if (name == s) return k;
  }
  return std::nullopt;
}

const TraceEvent& Trace::record(SimTime time, EventKind kind, std::optional<SessionId> session,
                                std::optional<Txid> txid, std::optional<std::string> path, nlohmann::json payload) {
  TraceEvent e;
  e.time = time;
  e.kind = kind;
  e.session = std::move(session);
  e.txid = txid;
  e.path = std::move(path);
  e.payload = std::move(payload);
  return append(std::move(e));
}

const TraceEvent& Trace::append(TraceEvent event) {
  event.index = events_.size();
  events_.push_back(std::move(event));
  return events_.back();
}

std::string serialize_event(const TraceEvent& e) {
  std::string line = std::to_string(e.index);
  line += '\t';
  line += std::to_string(e.time);
  line += '\t';
  line += to_string(e.kind);
  line += '\t';
  line += e.session ? *e.session : "-";
  line += '\t';
  line += e.txid ? std::to_string(*e.txid) : "-";
  line += '\t';
  line += e.path ? *e.path : "-";
  line += '\t';
  line += e.payload.dump();
  return line;
}

std::string Trace::serialize() const {
  std::ostringstream out;
  write(out);
  return out.str();
}

void Trace::write(std::ostream& out) const {
  for (const auto& e : events_) out << serialize_event(e) << '\n';
}

Trace Trace::parse(std::istream& in) {
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    if (f.size() != 7) throw std::runtime_error("trace line " + std::to_string(line_no) + ": expected 7 fields");
    TraceEvent e;
    e.time = parse_u64(f[1], line_no);
    const auto kind = parse_event_kind(f[2]);
    if (!kind) throw std::runtime_error("trace line " + std::to_string(line_no) + ": unknown kind");
    e.kind = *kind;
    if (f[3] != "-") e.session = std::string(f[3]);
    if (f[4] != "-") e.txid = parse_u64(f[4], line_no);
    if (f[5] != "-") e.path = std::string(f[5]);
    try {
      e.payload = nlohmann::json::parse(f[6]);
    } catch (const nlohmann::json::exception& ex) {
      throw std::runtime_error("trace line " + std::to_string(line_no) + ": bad payload: " + ex.what());
    }
    trace.append(std::move(e));
  }
  return trace;
}

Trace Trace::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse(in);
}

}  // namespace fk
