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

// Command-line front end: run, check, fuzz and cost.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fk/checker.hpp"
#include "fk/cost_model.hpp"
#include "fk/fuzz.hpp"
#include "fk/simulator.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

int cmd_run(const std::string& scenario_path, const std::string& trace_path, const std::string& dump_path) {
  fk::ScenarioConfig config;
  try {
    config = fk::parse_scenario_text(slurp(scenario_path));
    fk::validate(config);
  } catch (const fk::ScenarioError& e) {
    std::cerr << "invalid scenario: " << e.what() << '\n';
    return 2;
  }
  const auto run = fk::run_to_quiescence(config);
  if (!trace_path.empty()) write_file(trace_path, run.trace.serialize());
  if (!dump_path.empty()) write_file(dump_path, run.store_dump);
  const auto report = fk::check_all(run.trace);
  std::cout << "events " << run.events << ", end time " << run.end_time << ", faults fired " << run.faults_fired
            << '\n'
            << report.format();
  return report.passed() ? 0 : 1;
}

int cmd_check(const std::string& trace_path) {
  std::ifstream in(trace_path);
  if (!in) throw std::runtime_error("cannot open " + trace_path);
  const auto report = fk::check_all(fk::Trace::parse(in));
  std::cout << report.format();
  return report.passed() ? 0 : 1;
}

struct FuzzArgs {
  std::uint64_t seeds = 100;
  std::uint64_t first_seed = 1;
  std::size_t sessions = 4;
  std::size_t ops = 50;
  std::string faults = "matrix";
  std::string queue_mode = "atomic-push";
  unsigned threads = 0;
  std::string save;
};

int cmd_fuzz(const FuzzArgs& a) {
  fk::FuzzOptions o;
  o.seeds = a.seeds;
  o.first_seed = a.first_seed;
  o.max_sessions = a.sessions;
  o.max_ops = a.ops;
  o.threads = a.threads;
  o.queue_mode = *fk::parse_queue_mode(a.queue_mode);
  if (a.faults == "matrix") {
    o.faults = fk::fault_matrix();
  } else if (a.faults != "none") {
    std::istringstream names(a.faults);
    for (std::string name; std::getline(names, name, ',');) {
      const auto p = fk::parse_fault_point(name);
      if (!p) {
        std::cerr << "unknown fault point: " << name << '\n';
        return 2;
      }
      o.faults.push_back(*p);
    }
  }
  const auto s = fk::fuzz(o);
  std::cout << "runs " << s.runs << ", failures " << s.failures << ", faults fired " << s.faults_fired << '\n';
  if (!s.first_failure) return 0;
  const auto& f = *s.first_failure;
  std::cout << "counterexample seed " << f.seed << '\n';
  if (!f.error.empty()) std::cout << "error: " << f.error << '\n';
  std::cout << f.report.format();
  if (!a.save.empty()) {
    std::optional<fk::FaultPoint> fault;
    if (!o.faults.empty()) fault = o.faults[(f.seed - o.first_seed) % o.faults.size()];
    write_file(a.save, fk::to_json(fk::generate_scenario(f.seed, o, fault)).dump(2) + "\n");
    std::cout << "scenario written to " << a.save << '\n';
  }
  return 1;
}

struct CostArgs {
  double size = 1;
  std::vector<double> read_fractions{0.5, 0.9, 0.95, 0.99, 1.0};
  std::vector<std::string> presets;
  std::string params;
  bool csv = false;
};

int cmd_cost(const CostArgs& a) {
  fk::CostParams p;
  if (!a.params.empty()) p = fk::parse_cost_params(nlohmann::json::parse(slurp(a.params)));
  std::vector<fk::ZkPreset> presets;
  for (const auto& name : a.presets) {
    const auto preset = fk::find_zk_preset(name);
    if (!preset) {
      std::cerr << "unknown preset: " << name << '\n';
      return 2;
    }
    presets.push_back(*preset);
  }
  if (presets.empty()) presets = fk::zk_presets();

  const double read = fk::cost_read(p, a.size);
  const double write = fk::cost_write(p, a.size);
  if (a.csv) {
    std::cout << "preset,daily_cost,size_kb,read_fraction,break_even_requests_per_day\n";
    for (const auto& z : presets) {
      for (const double r : a.read_fractions) {
        std::printf("%s,%.6f,%g,%g,%.0f\n", z.name.c_str(), z.daily_cost, a.size, r,
                    fk::break_even(p, r, z.daily_cost, a.size));
      }
    }
    return 0;
  }
  std::printf("size %g kB: read $%.3g, write $%.4g\n", a.size, read, write);
  std::printf("100,000 reads $%.4f, 100,000 writes $%.4f\n\n", 1e5 * read, 1e5 * write);
  std::printf("%-26s %10s", "preset", "$/day");
  for (const double r : a.read_fractions) std::printf(" %11s", ("r=" + std::to_string(r).substr(0, 4)).c_str());
  std::printf("\n");
  for (const auto& z : presets) {
    std::printf("%-26s %10.3f", z.name.c_str(), z.daily_cost);
    for (const double r : a.read_fractions) std::printf(" %11.0f", fk::break_even(p, r, z.daily_cost, a.size));
    std::printf("\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serverless coordination service simulator"};
  app.require_subcommand(1);

  std::string scenario, trace_out, dump_out;
  auto* run = app.add_subcommand("run", "Run a scenario to quiescence and check its trace");
  run->add_option("scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("--trace", trace_out, "Write the trace here");
  run->add_option("--dump-store", dump_out, "Write the final storage contents here");

  std::string trace_in;
  auto* check = app.add_subcommand("check", "Run every checker pass over a trace file");
  check->add_option("trace", trace_in, "Trace file")->required()->check(CLI::ExistingFile);

  FuzzArgs fa;
  auto* fuzz = app.add_subcommand("fuzz", "Generate, run and check random scenarios");
  fuzz->add_option("--seeds", fa.seeds, "Number of scenarios")->capture_default_str();
  fuzz->add_option("--first-seed", fa.first_seed, "Seed of the first scenario")->capture_default_str();
  fuzz->add_option("--sessions", fa.sessions, "Maximum sessions per scenario")->capture_default_str();
  fuzz->add_option("--ops", fa.ops, "Maximum operations per scenario")->capture_default_str();
  fuzz->add_option("--faults", fa.faults, "matrix, none, or comma-separated fault points")->capture_default_str();
  fuzz->add_option("--queue-mode", fa.queue_mode, "atomic-push or sequence-number")
      ->check(CLI::IsMember({"atomic-push", "sequence-number"}))
      ->capture_default_str();
  fuzz->add_option("--threads", fa.threads, "Worker threads (0: all cores)");
  fuzz->add_option("--save", fa.save, "Write the first failing scenario here");

  CostArgs ca;
  auto* cost = app.add_subcommand("cost", "Per-operation costs and break-even against ZooKeeper");
  cost->add_option("--size", ca.size, "Payload size in kB")->capture_default_str();
  cost->add_option("--read-fraction", ca.read_fractions, "Read fractions to tabulate");
  cost->add_option("--preset", ca.presets, "ZooKeeper presets (default: all)");
  cost->add_option("--params", ca.params, "JSON file overriding cost parameters")->check(CLI::ExistingFile);
  cost->add_flag("--csv", ca.csv, "Emit CSV");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(scenario, trace_out, dump_out);
    if (*check) return cmd_check(trace_in);
    if (*fuzz) return cmd_fuzz(fa);
    if (*cost) return cmd_cost(ca);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
