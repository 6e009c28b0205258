#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "fk/client.hpp"
#include "fk/scenario.hpp"
#include "fk/simulator.hpp"

namespace fk {

/// Single-threaded in-memory model of the coordination service. Every
/// successful state change takes the next txid; a node's version is the txid
/// that last modified it, including changes to its child list.
class Oracle {
 public:
  Oracle();

  /// Applies one operation and returns what the client would see. Ticket is
  /// left at zero.
  OpResult apply(const WorkloadOp& op);

  const Tree& tree() const { return tree_; }
  Txid last_txid() const { return txid_; }
  /// Canonical encoding of the whole state, for memoization.
  std::string fingerprint() const;

 private:
  void remove_node(const std::string& path);

  Tree tree_;
  std::map<std::string, std::uint64_t> seq_counters_;
  std::map<SessionId, std::set<std::string>> ephemerals_;
  std::set<SessionId> closed_;
  Txid txid_ = 0;
};

struct OracleRun {
  Tree tree;
  std::map<SessionId, std::vector<OpResult>> results;
};

/// Executes the workload in list order. With close_sessions, each session
/// that appears in the workload is closed after its last operation, the way
/// the simulated client does.
OracleRun oracle_replay(const std::vector<WorkloadOp>& workload, bool close_sessions = false);

/// Per-session operation lists with the closing deregistration appended.
std::map<SessionId, std::vector<WorkloadOp>> session_programs(const ScenarioConfig& config);

/// True when some interleaving of the per-session programs, run on the
/// oracle, yields exactly the observed per-session results and final tree.
bool matches_some_interleaving(const std::map<SessionId, std::vector<WorkloadOp>>& programs,
                               const std::map<SessionId, std::vector<OpResult>>& observed, const Tree& final_tree);

}  // namespace fk
