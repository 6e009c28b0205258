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

#include "fk/scenario.hpp"

#include <gtest/gtest.h>

namespace fk {
namespace {

std::string field_of(std::string_view text) {
  try {
    validate(parse_scenario_text(text));
  } catch (const ScenarioError& e) {
    return e.field();
  }
  return "";
}

TEST(Scenario, ParsesWorkloadAndFaults) {
  const auto c = parse_scenario_text(R"({
    "seed": 9, "regions": ["r1"], "sessions": [{"id": "s1", "region": "r1"}],
    "queue_mode": "sequence-number",
    "faults": [{"target": "writer", "point": "after-lock", "occurrence": 2, "mode": "crash-after"}],
    "workload": [{"session": "s1", "op": "create", "path": "/a", "data": "eA==", "flags": ["ephemeral"]}]
  })");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.queue_mode, QueueMode::kSequenceNumber);
  ASSERT_EQ(c.faults.size(), 1u);
  EXPECT_EQ(c.faults[0].point, StepLabel::kAfterLock);
  EXPECT_EQ(c.faults[0].occurrence, 2u);
  EXPECT_EQ(c.faults[0].mode, FaultMode::kCrashAfter);
  ASSERT_EQ(c.workload.size(), 1u);
  EXPECT_EQ(c.workload[0].data, "x");
  EXPECT_TRUE(c.workload[0].ephemeral);
}

TEST(Scenario, JsonRoundTrip) {
  const auto c = parse_scenario_text(R"({"sessions": [{"id": "s1", "region": "region-a"}],
    "workload": [{"session": "s1", "op": "set_data", "path": "/a", "data": "", "version": 3}]})");
  const auto again = parse_scenario(to_json(c));
  EXPECT_EQ(to_json(again), to_json(c));
}

TEST(Scenario, FaultPointMustBelongToTarget) {
  EXPECT_EQ(field_of(R"({"sessions": [{"id": "s1", "region": "region-a"}],
    "faults": [{"target": "distributor", "point": "before-lock"}]})"),
            "$.faults[0].point");
}

TEST(Scenario, WorkloadMustReferenceDeclaredSessions) {
  EXPECT_EQ(field_of(R"({"sessions": [{"id": "s1", "region": "region-a"}],
    "workload": [{"session": "s9", "op": "exists", "path": "/a"}]})"),
            "$.workload[0].session");
}

TEST(Scenario, ErrorsCarryTheFieldPath) {
  EXPECT_EQ(field_of(R"({"sessions": [{"id": 4}]})"), "$.sessions[0].id");
  EXPECT_EQ(field_of(R"({"sessions": [{"id": "s1", "region": "region-a"}],
    "workload": [{"session": "s1", "op": "frob", "path": "/a"}]})"),
            "$.workload[0].op");
  EXPECT_EQ(field_of("[]"), "$");
}

TEST(Scenario, StepLabelsBelongToOneFunction) {
  for (const auto kind : {FunctionKind::kWriter, FunctionKind::kDistributor, FunctionKind::kWatch,
                          FunctionKind::kHeartbeat}) {
    for (const auto label : step_labels(kind)) EXPECT_EQ(owner_of(label), kind);
  }
}

}  // namespace
}  // namespace fk
