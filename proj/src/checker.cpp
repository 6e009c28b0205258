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

#include "fk/checker.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace fk {

using nlohmann::json;

namespace {

struct Image {
  bool exists = false;
  std::string data;  // base64, as in the trace
  std::vector<std::string> children;
};

struct Commit {
  std::size_t index = 0;
  Txid txid = 0;
  SessionId session;
  std::uint64_t req = 0;
  std::uint64_t ticket = 0;
  std::map<std::string, Image> images;
};

Image image_from(const json& j) {
  Image im;
  im.exists = j.value("exists", false);
  im.data = j.value("data", std::string());
  im.children = j.value("children", std::vector<std::string>{});
  return im;
}

bool is_write_op(const json& payload) {
  const auto op = parse_opcode(payload.value("op", std::string()));
  return op && is_write(*op);
}

std::vector<Commit> commits_of(const Trace& trace) {
  std::vector<Commit> out;
  for (const auto& e : trace.events()) {
    if (e.kind != EventKind::kCommit) continue;
    Commit c;
    c.index = e.index;
    c.txid = e.txid.value_or(0);
    c.session = e.session.value_or("");
    c.req = e.payload.value("req", std::uint64_t{0});
    c.ticket = e.payload.value("ticket", std::uint64_t{0});
    for (const auto& im : e.payload.value("images", json::array())) c.images[im.at("path").get<std::string>()] = image_from(im);
    out.push_back(std::move(c));
  }
  return out;
}

const json* store_of(const TraceEvent& e, std::string_view store) {
  if (e.kind != EventKind::kFinalState) return nullptr;
  const auto it = e.payload.find("store");
  if (it == e.payload.end() || *it != store) return nullptr;
  return &e.payload;
}

/// Builds a failed outcome on the first call, ignores later ones.
class Verdict {
 public:
  explicit Verdict(std::string_view name) { out_.name = std::string(name); }

  void fail(std::vector<std::size_t> indices, std::string detail) {
    if (!out_.passed) return;
    out_.passed = false;
    out_.counterexample = std::move(indices);
    out_.detail = std::move(detail);
  }
  bool failed() const { return !out_.passed; }
  CheckOutcome take() { return std::move(out_); }

 private:
  CheckOutcome out_;
};

std::string str(const std::optional<std::string>& s) { return s.value_or("-"); }

}  // namespace

bool CheckReport::passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

const CheckOutcome* CheckReport::find(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string CheckReport::format() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    out << c.name << ' ' << (c.passed ? "PASS" : "FAIL");
    if (!c.passed) {
      out << " events=";
      for (std::size_t i = 0; i < c.counterexample.size(); ++i) out << (i ? "," : "") << c.counterexample[i];
      if (c.counterexample.empty()) out << '-';
      out << ' ' << c.detail;
    }
    out << '\n';
  }
  return out.str();
}

CheckOutcome check_atomicity(const Trace& trace) {
  Verdict v(checks::kAtomicity);
  const auto commits = commits_of(trace);

  std::map<std::pair<SessionId, std::uint64_t>, const Commit*> by_request;
  std::multimap<std::pair<SessionId, std::uint64_t>, const Commit*> by_ticket;
  for (const auto& c : commits) {
    const auto [it, fresh] = by_request.try_emplace({c.session, c.req}, &c);
    if (!fresh) {
      v.fail({it->second->index, c.index},
             "request " + c.session + "#" + std::to_string(c.req) + " committed twice (txids " +
                 std::to_string(it->second->txid) + ", " + std::to_string(c.txid) + ")");
    }
    if (c.ticket != 0) by_ticket.emplace(std::pair{c.session, c.ticket}, &c);
  }

  for (const auto& e : trace.events()) {
    if (e.kind != EventKind::kClientResult || !is_write_op(e.payload)) continue;
    const auto key = std::pair{e.session.value_or(""), e.payload.value("ticket", std::uint64_t{0})};
    const auto [lo, hi] = by_ticket.equal_range(key);
    const auto n = std::distance(lo, hi);
    const bool success = e.payload.value("success", false);
    if (!success && n > 0) {
      v.fail({lo->second->index, e.index}, "rejected write " + key.first + "/" + std::to_string(key.second) +
                                              " has a commit");
    } else if (success && e.txid) {
      if (n != 1) {
        v.fail({e.index}, "accepted write " + key.first + "/" + std::to_string(key.second) + " has " +
                              std::to_string(n) + " commits");
      } else if (lo->second->txid != *e.txid) {
        v.fail({lo->second->index, e.index}, "accepted write reports txid " + std::to_string(*e.txid) +
                                                 " but committed as " + std::to_string(lo->second->txid));
      }
    }
  }

  // The final state must equal each path's last committed image.
  std::map<std::string, const Commit*> last;
  for (const auto& c : commits) {
    for (const auto& [path, _] : c.images) {
      auto& slot = last[path];
      if (!slot || slot->txid < c.txid) slot = &c;
    }
  }
  auto expected = [&](const std::string& path) -> std::pair<Image, Txid> {
    const auto it = last.find(path);
    if (it != last.end()) return {it->second->images.at(path), it->second->txid};
    Image root;
    root.exists = path == "/";
    return {root, 0};
  };

  std::set<std::string> system_seen;
  std::map<std::string, std::set<std::string>> region_seen;
  std::set<std::string> regions;
  for (const auto& e : trace.events()) {
    if (const auto* p = store_of(e, "system")) {
      const auto path = e.path.value_or("");
      system_seen.insert(path);
      const auto [want, txid] = expected(path);
      const auto got = image_from(*p);
      if (got.exists != want.exists || (want.exists && (got.data != want.data || got.children != want.children))) {
        std::vector<std::size_t> idx{e.index};
        if (last.contains(path)) idx.insert(idx.begin(), last[path]->index);
        v.fail(idx, "system node " + path + " differs from its last committed image");
      } else if (want.exists && e.txid.value_or(0) != txid) {
        v.fail({e.index}, "system node " + path + " has mtxid " + std::to_string(e.txid.value_or(0)) +
                              ", expected " + std::to_string(txid));
      }
      if (!p->value("pending", json::array()).empty()) {
        v.fail({e.index}, "node " + path + " keeps an undistributed transaction");
      }
    } else if (const auto* r = store_of(e, "region")) {
      const auto path = e.path.value_or("");
      const auto region = r->value("region", std::string());
      region_seen[region].insert(path);
      const auto [want, txid] = expected(path);
      const auto got = image_from(*r);
      if (!want.exists || got.data != want.data || got.children != want.children || e.txid.value_or(0) != txid) {
        std::vector<std::size_t> idx{e.index};
        if (last.contains(path)) idx.insert(idx.begin(), last[path]->index);
        v.fail(idx, "replica " + region + ":" + path + " differs from its last committed image");
      }
    } else if (const auto* ep = store_of(e, "epoch")) {
      regions.insert(ep->value("region", std::string()));
    }
  }
  std::set<std::string> paths;
  for (const auto& [p, _] : last) paths.insert(p);
  paths.insert("/");
  for (const auto& path : paths) {
    if (!expected(path).first.exists) continue;
    const auto idx = last.contains(path) ? std::vector<std::size_t>{last[path]->index} : std::vector<std::size_t>{};
    if (!system_seen.contains(path)) v.fail(idx, "committed node " + path + " missing from the system store");
    for (const auto& region : regions) {
      if (!region_seen[region].contains(path)) v.fail(idx, "committed node " + path + " missing from " + region);
    }
  }
  return v.take();
}

CheckOutcome check_linearized_writes(const Trace& trace) {
  Verdict v(checks::kLinearizedWrites);
  std::map<SessionId, std::pair<Txid, std::size_t>> last_result;
  std::map<SessionId, std::tuple<std::uint64_t, Txid, std::size_t>> last_commit;
  for (const auto& e : trace.events()) {
    const auto session = e.session.value_or("");
    if (e.kind == EventKind::kClientResult && e.payload.value("success", false) && e.txid && is_write_op(e.payload)) {
      const auto it = last_result.find(session);
      if (it != last_result.end() && it->second.first >= *e.txid) {
        v.fail({it->second.second, e.index}, "session " + session + " accepted txid " + std::to_string(*e.txid) +
                                                 " after " + std::to_string(it->second.first));
      }
      last_result[session] = {*e.txid, e.index};
    } else if (e.kind == EventKind::kCommit) {
      const auto req = e.payload.value("req", std::uint64_t{0});
      const auto txid = e.txid.value_or(0);
      const auto it = last_commit.find(session);
      if (it != last_commit.end()) {
        const auto [preq, ptx, pidx] = it->second;
        if ((req > preq && txid <= ptx) || (req < preq && txid >= ptx)) {
          v.fail({pidx, e.index}, "session " + session + " requests " + std::to_string(preq) + " and " +
                                      std::to_string(req) + " committed out of order");
        }
      }
      last_commit[session] = {req, txid, e.index};
    }
  }
  return v.take();
}

CheckOutcome check_single_system_image(const Trace& trace) {
  Verdict v(checks::kSingleSystemImage);
  const auto commits = commits_of(trace);
  // path -> txid -> (image, commit index)
  std::map<std::string, std::map<Txid, std::pair<Image, std::size_t>>> history;
  for (const auto& c : commits) {
    for (const auto& [path, im] : c.images) history[path][c.txid] = {im, c.index};
  }

  std::map<SessionId, Txid> known;  // MRD reported with the latest result
  std::map<std::pair<SessionId, std::string>, std::pair<Txid, std::size_t>> seen;
  for (const auto& e : trace.events()) {
    const auto session = e.session.value_or("");
    if (e.kind == EventKind::kClientResult) {
      known[session] = std::max(known[session], e.payload.value("mrd", Txid{0}));
      continue;
    }
    if (e.kind != EventKind::kClientReadObserve) continue;
    const auto path = e.path.value_or("");
    const bool exists = e.payload.value("exists", false);
    const auto& hist = history[path];

    if (exists) {
      const auto version = e.txid.value_or(0);
      const auto it = hist.find(version);
      const auto got = image_from(e.payload);
      if (it == hist.end()) {
        if (!(version == 0 && path == "/" && got.data.empty())) {
          v.fail({e.index}, session + " read " + path + "@" + std::to_string(version) + " which was never committed");
        }
      } else if (!it->second.first.exists || it->second.first.data != got.data ||
                 it->second.first.children != got.children) {
        v.fail({it->second.second, e.index}, session + " read a value of " + path + "@" + std::to_string(version) +
                                                 " that differs from the commit");
      }
      const auto key = std::pair{session, path};
      const auto prev = seen.find(key);
      if (prev != seen.end() && prev->second.first > version) {
        v.fail({prev->second.second, e.index}, session + " read " + path + " at " + std::to_string(version) +
                                                   " after " + std::to_string(prev->second.first));
      }
      seen[key] = {version, e.index};
    }

    // Nothing the session already knew about may be missing from the read.
    const auto bound = known[session];
    const auto up = hist.upper_bound(bound);
    if (up == hist.begin()) continue;
    const auto& [txid, entry] = *std::prev(up);
    // An absent read is fresh enough if some state at or after txid lacks the node.
    const bool stale = exists ? e.txid.value_or(0) < txid
                              : entry.first.exists && std::none_of(up, hist.end(), [](const auto& h) {
                                  return !h.second.first.exists;
                                });
    if (stale) {
      v.fail({entry.second, e.index}, session + " read " + path + " older than txid " + std::to_string(txid) +
                                          " although its MRD was " + std::to_string(bound));
    }
  }
  return v.take();
}

CheckOutcome check_ordered_notifications(const Trace& trace) {
  Verdict v(checks::kOrderedNotifications);
  std::map<SessionId, std::pair<Txid, std::size_t>> last_notified;
  std::map<SessionId, std::pair<Txid, std::size_t>> newest_read;
  using Key = std::tuple<SessionId, WatchId, Txid>;
  std::map<Key, std::size_t> sent;
  std::map<Key, std::vector<std::size_t>> received;
  for (const auto& e : trace.events()) {
    const auto session = e.session.value_or("");
    if (e.kind == EventKind::kClientReadObserve && e.txid) {
      auto& slot = newest_read[session];
      if (*e.txid >= slot.first) slot = {*e.txid, e.index};
    } else if (e.kind == EventKind::kNotifySent) {
      sent.try_emplace(Key{session, e.payload.value("watch", WatchId{0}), e.txid.value_or(0)}, e.index);
    } else if (e.kind == EventKind::kNotifyReceived) {
      if (e.payload.value("duplicate", false)) continue;
      const auto txid = e.txid.value_or(0);
      received[Key{session, e.payload.value("watch", WatchId{0}), txid}].push_back(e.index);
      const auto it = last_notified.find(session);
      if (it != last_notified.end() && it->second.first > txid) {
        v.fail({it->second.second, e.index}, session + " received notification " + std::to_string(txid) + " after " +
                                                 std::to_string(it->second.first));
      }
      last_notified[session] = {txid, e.index};
      const auto r = newest_read.find(session);
      if (r != newest_read.end() && r->second.first > txid) {
        v.fail({r->second.second, e.index}, session + " observed data at " + std::to_string(r->second.first) +
                                                " before the notification for " + std::to_string(txid));
      }
    }
  }
  for (const auto& [key, idx] : sent) {
    const auto it = received.find(key);
    if (it == received.end()) {
      v.fail({idx}, "notification for watch " + std::to_string(std::get<1>(key)) + " never reached " +
                        std::get<0>(key));
    } else if (it->second.size() != 1) {
      v.fail(it->second, std::get<0>(key) + " accepted a notification more than once");
    }
  }
  for (const auto& [key, idx] : received) {
    if (!sent.contains(key)) v.fail(idx, std::get<0>(key) + " received a notification that was never sent");
  }
  return v.take();
}

CheckOutcome check_epoch_balance(const Trace& trace) {
  Verdict v(checks::kEpochBalance);
  bool any = false;
  for (const auto& e : trace.events()) {
    const auto* p = store_of(e, "epoch");
    if (!p) continue;
    any = true;
    const auto entries = p->value("entries", json::array());
    if (!entries.empty()) {
      v.fail({e.index}, "region " + p->value("region", std::string()) + " ends with epoch entries " + entries.dump());
    }
  }
  if (!any) v.fail({}, "trace has no final epoch state");
  return v.take();
}

CheckOutcome check_liveness(const Trace& trace) {
  Verdict v(checks::kLiveness);
  std::map<std::pair<SessionId, std::uint64_t>, std::size_t> submitted;
  std::map<std::uint64_t, std::size_t> running;
  for (const auto& e : trace.events()) {
    const auto session = e.session.value_or("");
    switch (e.kind) {
      case EventKind::kEnqueue: {
        const auto queue = e.payload.value("queue", std::string());
        if (queue.starts_with("client:")) submitted[{session, e.payload.value("ticket", std::uint64_t{0})}] = e.index;
        break;
      }
      case EventKind::kClientResult:
        submitted.erase({session, e.payload.value("ticket", std::uint64_t{0})});
        break;
      case EventKind::kInvokeStart:
        running[e.payload.value("invocation", std::uint64_t{0})] = e.index;
        break;
      case EventKind::kInvokeCrash:
      case EventKind::kInvokeComplete:
        running.erase(e.payload.value("invocation", std::uint64_t{0}));
        break;
      case EventKind::kFinalState:
        if (const auto* p = store_of(e, "system"); p && p->value("locked", false)) {
          v.fail({e.index}, "node " + str(e.path) + " is still locked");
        }
        break;
      default:
        break;
    }
  }
  if (!submitted.empty()) {
    const auto& [key, idx] = *submitted.begin();
    v.fail({idx}, key.first + " operation " + std::to_string(key.second) + " never got a result");
  }
  if (!running.empty()) v.fail({running.begin()->second}, "invocation never ended");
  return v.take();
}

CheckReport check_all(const Trace& trace) {
  CheckReport r;
  r.checks.push_back(check_atomicity(trace));
  r.checks.push_back(check_linearized_writes(trace));
  r.checks.push_back(check_single_system_image(trace));
  r.checks.push_back(check_ordered_notifications(trace));
  r.checks.push_back(check_epoch_balance(trace));
  r.checks.push_back(check_liveness(trace));
  return r;
}

}  // namespace fk
