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

#include "fk/scheduler.hpp"

#include <gtest/gtest.h>

#include <string>

namespace fk {
namespace {

TEST(Scheduler, SimultaneousEventsFireInInsertionOrder) {
  Scheduler s;
  std::string order;
  s.schedule([&] { order += 'a'; }, 0);
  s.schedule([&] { order += 'b'; }, 0);
  s.schedule([&] { order += 'c'; }, 0);
  s.run();
  EXPECT_EQ(order, "abc");
}

TEST(Scheduler, DelayIsRelativeToCurrentTime) {
  Scheduler s;
  SimTime fired = 0;
  s.schedule([&] { s.schedule([&] { fired = s.now(); }, 5); }, 2);
  s.run();
  EXPECT_EQ(fired, 7u);
}

TEST(Scheduler, EarlierTimeWinsOverInsertionOrder) {
  Scheduler s;
  std::string order;
  s.schedule([&] { order += 'l'; }, 3);
  s.schedule([&] { order += 'e'; }, 1);
  s.run();
  EXPECT_EQ(order.front(), 'e');
}

TEST(Scheduler, TimeNeverDecreases) {
  Scheduler s;
  SimTime last = 0;
  bool monotone = true;
  for (int i = 0; i < 50; ++i) {
    s.schedule(
        [&] {
          monotone = monotone && s.now() >= last;
          last = s.now();
        },
        static_cast<SimTime>((i * 7) % 11));
  }
  s.run();
  EXPECT_TRUE(monotone);
}

TEST(Scheduler, EventBoundAbortsRunaway) {
  Scheduler s(100);
  std::function<void()> loop = [&] { s.schedule(loop, 1); };
  s.schedule(loop);
  EXPECT_THROW(s.run(), NonTermination);
}

TEST(Scheduler, FinalizedSchedulerRejectsNewEvents) {
  Scheduler s;
  s.run();
  s.finalize();
  EXPECT_THROW(s.schedule([] {}), std::logic_error);
}

}  // namespace
}  // namespace fk
