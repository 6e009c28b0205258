#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fk/checker.hpp"
#include "fk/scenario.hpp"

namespace fk {

/// One row of the crash matrix: a step label to crash at, or a client that
/// stops answering.
struct FaultPoint {
  std::optional<StepLabel> step;
  bool unresponsive_client = false;

  std::string name() const;
  bool operator==(const FaultPoint&) const = default;
};

/// The rows exercised by the fault-matrix acceptance run.
std::vector<FaultPoint> fault_matrix();
std::optional<FaultPoint> parse_fault_point(std::string_view name);

struct FuzzOptions {
  std::uint64_t first_seed = 1;
  std::uint64_t seeds = 100;
  std::size_t max_sessions = 4;
  std::size_t max_ops = 50;
  QueueMode queue_mode = QueueMode::kAtomicPush;
  /// Faults to draw from; empty means fault-free. Seed i uses row i mod size.
  std::vector<FaultPoint> faults;
  std::size_t regions = 2;
  SimTime jitter = 2;
  /// Also redeliver some completed batches.
  bool duplicate_delivery = true;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Builds the scenario for one seed. The same arguments always give the
/// same scenario.
ScenarioConfig generate_scenario(std::uint64_t seed, const FuzzOptions& options, std::optional<FaultPoint> fault);

struct FuzzCase {
  std::uint64_t seed = 0;
  bool passed = false;
  CheckReport report;
  /// Set when the run itself aborted.
  std::string error;
  std::size_t faults_fired = 0;
};

/// Runs and checks one generated scenario.
FuzzCase run_case(const ScenarioConfig& scenario);

struct FuzzSummary {
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::size_t faults_fired = 0;
  /// Lowest failing seed and its case.
  std::optional<FuzzCase> first_failure;
};

/// Runs the seeds in parallel worker threads.
FuzzSummary fuzz(const FuzzOptions& options);

}  // namespace fk
