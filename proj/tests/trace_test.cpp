#include "fk/trace.hpp"

#include <gtest/gtest.h>

namespace fk {
namespace {

Trace sample() {
  Trace t;
  t.record(0, EventKind::kSessionOpen, "s1", std::nullopt, std::nullopt, {{"region", "r1"}});
  t.record(3, EventKind::kCommit, "s1", 4, "/a", {{"by", "writer"}, {"images", nlohmann::json::array()}});
  t.record(9, EventKind::kClientResult, std::nullopt, std::nullopt, "/a/b c", {{"z", 1}, {"a", "x\ty"}});
  return t;
}

TEST(Trace, SerializeParseRoundTrip) {
  const auto t = sample();
  const auto text = t.serialize();
  const auto back = Trace::parse(text);
  ASSERT_EQ(back.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(back[i], t[i]);
  EXPECT_EQ(back.serialize(), text);
}

TEST(Trace, EventsAreNumberedInOrder) {
  const auto t = sample();
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(t[i].index, i);
}

TEST(Trace, AbsentFieldsPrintAsDash) {
  const auto line = serialize_event(sample()[0]);
  EXPECT_EQ(line, "0\t0\tsession-open\ts1\t-\t-\t{\"region\":\"r1\"}");
}

TEST(Trace, PayloadKeysAreSorted) {
  const auto line = serialize_event(sample()[2]);
  EXPECT_LT(line.find("\"a\""), line.find("\"z\""));
}

TEST(Trace, MalformedLineIsRejected) {
  EXPECT_THROW(Trace::parse("0\t0\tnot-a-kind\t-\t-\t-\t{}\n"), std::runtime_error);
  EXPECT_THROW(Trace::parse("0\t0\tcommit\n"), std::runtime_error);
}

TEST(Trace, EventKindNamesRoundTrip) {
  for (int k = 0; k <= static_cast<int>(EventKind::kFinalState); ++k) {
    const auto kind = static_cast<EventKind>(k);
    EXPECT_EQ(parse_event_kind(to_string(kind)), kind);
  }
}

}  // namespace
}  // namespace fk
