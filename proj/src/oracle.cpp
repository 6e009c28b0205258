#include "fk/oracle.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "fk/functions.hpp"

namespace fk {

Oracle::Oracle() { tree_["/"] = TreeNode{}; }

void Oracle::remove_node(const std::string& path) {
  const auto node = tree_.find(path);
  if (node->second.ephemeral_owner) ephemerals_[*node->second.ephemeral_owner].erase(path);
  tree_.erase(node);
  auto& parent = tree_.at(parent_path(path));
  std::erase(parent.children, base_name(path));
  parent.mtxid = txid_;
}

OpResult Oracle::apply(const WorkloadOp& op) {
  OpResult r;
  r.op = op.op;
  r.path = op.path;
  r.result_path = op.path;
  if (closed_.contains(op.session)) {
    r.reason = FailureReason::kSessionClosed;
    r.local = true;
    return r;
  }
  const auto found = tree_.find(op.path);
  const bool exists = found != tree_.end();
  auto fail = [&](FailureReason reason) {
    r.reason = reason;
    return r;
  };

  switch (op.op) {
    case Opcode::kGetData:
    case Opcode::kGetChildren:
    case Opcode::kExists:
      r.exists = exists;
      if (exists) {
        r.data = found->second.data;
        r.children = found->second.children;
        r.version = found->second.mtxid;
      }
      r.success = exists || op.op == Opcode::kExists;
      if (!r.success) r.reason = FailureReason::kNoNode;
      return r;

    case Opcode::kCreate: {
      const auto parent_name = parent_path(op.path);
      const auto target = op.sequential ? sequential_name(op.path, seq_counters_[parent_name]) : op.path;
      r.result_path = target;
      const auto parent = tree_.find(parent_name);
      if (parent == tree_.end()) return fail(FailureReason::kNoParent);
      if (parent->second.ephemeral_owner) return fail(FailureReason::kNoChildrenForEphemerals);
      if (tree_.contains(target)) return fail(FailureReason::kNodeExists);
      ++txid_;
      TreeNode node;
      node.data = op.data;
      node.ctxid = node.mtxid = txid_;
      if (op.ephemeral) {
        node.ephemeral_owner = op.session;
        ephemerals_[op.session].insert(target);
      }
      tree_[target] = node;
      auto& kids = parent->second.children;
      kids.insert(std::lower_bound(kids.begin(), kids.end(), base_name(target)), base_name(target));
      parent->second.mtxid = txid_;
      if (op.sequential) ++seq_counters_[parent_name];
      break;
    }

    case Opcode::kSetData:
      if (!exists) return fail(FailureReason::kNoNode);
      if (op.version && *op.version != found->second.mtxid) return fail(FailureReason::kBadVersion);
      ++txid_;
      found->second.data = op.data;
      found->second.mtxid = txid_;
      break;

    case Opcode::kDelete:
      if (!exists) return fail(FailureReason::kNoNode);
      if (op.version && *op.version != found->second.mtxid) return fail(FailureReason::kBadVersion);
      if (!found->second.children.empty()) return fail(FailureReason::kNotEmpty);
      ++txid_;
      remove_node(op.path);
      break;

    case Opcode::kDeregister: {
      closed_.insert(op.session);
      r.success = true;
      const auto owned = ephemerals_[op.session];
      if (owned.empty()) return r;
      ++txid_;
      for (const auto& p : owned) remove_node(p);
      break;
    }
  }
  r.success = true;
  r.txid = txid_;
  return r;
}

std::string Oracle::fingerprint() const {
  std::ostringstream out;
  out << txid_ << '|';
  for (const auto& [p, n] : tree_) {
    out << p << ':' << n.data.size() << ':' << n.data << ':' << n.ctxid << ':' << n.mtxid << ':'
        << n.ephemeral_owner.value_or("") << ':';
    for (const auto& c : n.children) out << c << ',';
    out << ';';
  }
  out << '|';
  for (const auto& [p, c] : seq_counters_) out << p << '=' << c << ';';
  out << '|';
  for (const auto& s : closed_) out << s << ';';
  return out.str();
}

OracleRun oracle_replay(const std::vector<WorkloadOp>& workload, bool close_sessions) {
  Oracle oracle;
  OracleRun run;
  std::map<SessionId, std::size_t> remaining;
  for (const auto& op : workload) ++remaining[op.session];
  auto record = [&](const WorkloadOp& op) {
    auto& list = run.results[op.session];
    auto r = oracle.apply(op);
    r.ticket = list.size() + 1;
    list.push_back(std::move(r));
  };
  for (const auto& op : workload) {
    record(op);
    if (close_sessions && --remaining[op.session] == 0) {
      WorkloadOp close;
      close.session = op.session;
      close.op = Opcode::kDeregister;
      close.path = "/";
      record(close);
    }
  }
  run.tree = oracle.tree();
  return run;
}

std::map<SessionId, std::vector<WorkloadOp>> session_programs(const ScenarioConfig& config) {
  std::map<SessionId, std::vector<WorkloadOp>> out;
  for (const auto& s : config.sessions) {
    auto& prog = out[s.id];
    for (const auto& op : config.workload) {
      if (op.session == s.id) prog.push_back(op);
    }
    WorkloadOp close;
    close.session = s.id;
    close.op = Opcode::kDeregister;
    close.path = "/";
    prog.push_back(close);
  }
  return out;
}

namespace {

struct Matcher {
  std::vector<const std::vector<WorkloadOp>*> programs;
  std::vector<const std::vector<OpResult>*> observed;
  const Tree* final_tree = nullptr;
  std::unordered_set<std::string> dead;

  bool search(std::vector<std::size_t>& pos, const Oracle& state) {
    bool done = true;
    for (std::size_t i = 0; i < pos.size(); ++i) done = done && pos[i] == programs[i]->size();
    if (done) return state.tree() == *final_tree;

    std::string key = state.fingerprint();
    for (const auto p : pos) key += "#" + std::to_string(p);
    if (dead.contains(key)) return false;

    for (std::size_t i = 0; i < pos.size(); ++i) {
      if (pos[i] == programs[i]->size()) continue;
      Oracle next = state;
      auto r = next.apply((*programs[i])[pos[i]]);
      const auto& want = (*observed[i])[pos[i]];
      r.ticket = want.ticket;
      if (r != want) continue;
      ++pos[i];
      const bool ok = search(pos, next);
      --pos[i];
      if (ok) return true;
    }
    dead.insert(std::move(key));
    return false;
  }
};

}  // namespace

bool matches_some_interleaving(const std::map<SessionId, std::vector<WorkloadOp>>& programs,
                               const std::map<SessionId, std::vector<OpResult>>& observed, const Tree& final_tree) {
  Matcher m;
  m.final_tree = &final_tree;
  static const std::vector<OpResult> kNone;
  for (const auto& [id, prog] : programs) {
    const auto it = observed.find(id);
    const auto& results = it == observed.end() ? kNone : it->second;
    if (results.size() != prog.size()) return false;
    m.programs.push_back(&prog);
    m.observed.push_back(&results);
  }
  std::vector<std::size_t> pos(m.programs.size(), 0);
  return m.search(pos, Oracle{});
}

}  // namespace fk
