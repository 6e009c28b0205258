#include "fk/fuzz.hpp"

#include <gtest/gtest.h>

namespace fk {
namespace {

TEST(Fuzz, GenerationIsDeterministic) {
  FuzzOptions o;
  const auto fault = fault_matrix()[3];
  EXPECT_EQ(to_json(generate_scenario(7, o, fault)).dump(), to_json(generate_scenario(7, o, fault)).dump());
  EXPECT_NE(to_json(generate_scenario(7, o, fault)).dump(), to_json(generate_scenario(8, o, fault)).dump());
}

TEST(Fuzz, GeneratedScenariosAreValid) {
  FuzzOptions o;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    for (const auto& f : fault_matrix()) EXPECT_NO_THROW(validate(generate_scenario(seed, o, f)));
  }
}

TEST(Fuzz, FaultNamesRoundTrip) {
  const auto rows = fault_matrix();
  EXPECT_EQ(rows.size(), 12u);
  for (const auto& f : rows) EXPECT_EQ(parse_fault_point(f.name()), f) << f.name();
  EXPECT_FALSE(parse_fault_point("nowhere"));
}

TEST(Fuzz, SmallMatrixRunPasses) {
  FuzzOptions o;
  o.seeds = 48;
  o.max_ops = 20;
  o.faults = fault_matrix();
  const auto s = fuzz(o);
  EXPECT_EQ(s.runs, 48u);
  EXPECT_EQ(s.failures, 0u) << (s.first_failure ? s.first_failure->report.format() : "");
  EXPECT_GT(s.faults_fired, 0u);
}

TEST(Fuzz, SequenceNumberModeIsCaught) {
  FuzzOptions o;
  o.seeds = 50;
  o.queue_mode = QueueMode::kSequenceNumber;
  o.faults = {*parse_fault_point("between-push-and-commit")};
  const auto s = fuzz(o);
  ASSERT_TRUE(s.first_failure);
  EXPECT_FALSE(s.first_failure->report.passed());
}

}  // namespace
}  // namespace fk
