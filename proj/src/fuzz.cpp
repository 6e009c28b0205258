#include "fk/fuzz.hpp"

#include <algorithm>
#include <atomic>
#include <random>
#include <thread>

#include "fk/simulator.hpp"

namespace fk {

std::string FaultPoint::name() const {
  if (unresponsive_client) return "client-unresponsive";
  if (step) return std::string(to_string(*step));
  return "none";
}

std::vector<FaultPoint> fault_matrix() {
  std::vector<FaultPoint> out;
  for (const auto l : {StepLabel::kBeforeLock, StepLabel::kAfterLock, StepLabel::kBeforePush,
                       StepLabel::kAfterCommitBeforeUnlock, StepLabel::kBeforeTryCommit, StepLabel::kAfterTryCommit,
                       StepLabel::kAfterDataUpdate, StepLabel::kAfterInvokeWatch, StepLabel::kBeforePopTransaction,
                       StepLabel::kBeforeDeliver, StepLabel::kAfterDeliver}) {
    out.push_back(FaultPoint{l, false});
  }
  out.push_back(FaultPoint{std::nullopt, true});
  return out;
}

std::optional<FaultPoint> parse_fault_point(std::string_view name) {
  if (name == "client-unresponsive") return FaultPoint{std::nullopt, true};
  if (const auto l = parse_step_label(name)) return FaultPoint{*l, false};
  return std::nullopt;
}

ScenarioConfig generate_scenario(std::uint64_t seed, const FuzzOptions& options, std::optional<FaultPoint> fault) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::uint64_t lo, std::uint64_t hi) { return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng); };
  auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };

  ScenarioConfig c;
  c.seed = seed;
  c.queue_mode = options.queue_mode;
  c.jitter_ticks = options.jitter;
  c.duplicate_delivery = options.duplicate_delivery && chance(0.25);
  c.regions.clear();
  for (std::size_t r = 0; r < std::max<std::size_t>(1, options.regions); ++r) c.regions.push_back("r" + std::to_string(r + 1));

  const auto n_sessions = pick(std::min<std::size_t>(2, options.max_sessions), std::max<std::size_t>(1, options.max_sessions));
  for (std::size_t s = 0; s < n_sessions; ++s) {
    c.sessions.push_back(SessionSpec{"s" + std::to_string(s + 1), c.regions[pick(0, c.regions.size() - 1)]});
  }

  static const std::vector<std::string> kPaths{"/a", "/b", "/a/x", "/b/y"};
  const auto n_ops = pick(1, std::max<std::size_t>(1, options.max_ops));
  for (std::size_t i = 0; i < n_ops; ++i) {
    WorkloadOp op;
    op.session = c.sessions[pick(0, c.sessions.size() - 1)].id;
    op.path = kPaths[pick(0, kPaths.size() - 1)];
    const auto roll = pick(0, 99);
    if (roll < 30) {
      op.op = Opcode::kCreate;
      op.data = "c" + std::to_string(i);
      op.ephemeral = chance(0.25);
      op.sequential = chance(0.15);
    } else if (roll < 50) {
      op.op = Opcode::kSetData;
      op.data = "d" + std::to_string(i);
      if (chance(0.2)) op.version = pick(0, 6);
    } else if (roll < 65) {
      op.op = Opcode::kDelete;
      if (chance(0.1)) op.version = pick(0, 6);
    } else {
      static const Opcode kReads[] = {Opcode::kGetData, Opcode::kGetChildren, Opcode::kExists};
      op.op = kReads[pick(0, 2)];
      op.watch = chance(0.5);
    }
    c.workload.push_back(std::move(op));
  }

  if (fault && fault->unresponsive_client) {
    // The silent session owns an ephemeral node so eviction has work to do.
    const auto& victim = c.sessions[pick(0, c.sessions.size() - 1)].id;
    WorkloadOp own;
    own.session = victim;
    own.op = Opcode::kCreate;
    own.path = "/e" + victim;
    own.ephemeral = true;
    c.workload.insert(c.workload.begin(), own);
    std::size_t victim_ops = 0;
    for (const auto& op : c.workload) victim_ops += op.session == victim;
    c.unresponsive.push_back(UnresponsiveSpec{victim, pick(1, victim_ops)});
  } else if (fault && fault->step) {
    FaultSpec f;
    f.point = *fault->step;
    f.target = owner_of(f.point);
    f.occurrence = pick(1, 3);
    f.mode = chance(0.5) ? FaultMode::kCrashBefore : FaultMode::kCrashAfter;
    c.faults.push_back(f);
  }
  return c;
}

FuzzCase run_case(const ScenarioConfig& scenario) {
  FuzzCase out;
  out.seed = scenario.seed;
  try {
    const auto run = run_to_quiescence(scenario);
    out.report = check_all(run.trace);
    out.faults_fired = run.faults_fired;
    out.passed = out.report.passed();
  } catch (const std::exception& e) {
    out.error = e.what();
    out.passed = false;
  }
  return out;
}

FuzzSummary fuzz(const FuzzOptions& options) {
  std::vector<FuzzCase> cases(options.seeds);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (auto i = next++; i < options.seeds; i = next++) {
      const auto seed = options.first_seed + i;
      std::optional<FaultPoint> fault;
      if (!options.faults.empty()) fault = options.faults[i % options.faults.size()];
      cases[i] = run_case(generate_scenario(seed, options, fault));
    }
  };
  const unsigned n = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < std::min<std::uint64_t>(n, std::max<std::uint64_t>(1, options.seeds)); ++t) {
      pool.emplace_back(worker);
    }
  }
  FuzzSummary s;
  s.runs = cases.size();
  for (auto& c : cases) {
    s.faults_fired += c.faults_fired;
    if (c.passed) continue;
    ++s.failures;
    if (!s.first_failure) s.first_failure = std::move(c);
  }
  return s;
}

}  // namespace fk
