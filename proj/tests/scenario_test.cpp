/* Copyright 2026 The lockharden Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lockharden/catalog_scenarios.hpp"
#include "lockharden/explore.hpp"
#include "lockharden/replay.hpp"

using namespace lockharden;
using namespace lockharden::scenario;

namespace {

Scenario make(Algorithm a, Variant v, std::vector<std::vector<std::string>> progs, std::string schedule = "") {
  Scenario s;
  s.algorithm = a;
  s.variant = v;
  for (const auto& p : progs) {
    std::vector<ProgramOp> ops;
    for (const auto& o : p) ops.push_back(parse_op(o));
    s.threads.push_back(std::move(ops));
  }
  s.schedule = split_schedule(schedule);
  return s;
}

}  // namespace

// ---- JSON and validation ---------------------------------------------------

TEST(ScenarioJson, RoundTrip) {
  const auto j = json::parse(R"({"name":"x","lock":"ticket","variant":"hardened","params":{"groups":3},
    "threads":[["acquire","cs:4","release"],["misuse_fresh"]],"schedule":"0:op 1:2","bounds":{"max_steps":50,"max_states":99}})");
  const Scenario s = scenario_from_json(j);
  EXPECT_EQ(s.algorithm, Algorithm::Ticket);
  EXPECT_EQ(s.variant, Variant::Hardened);
  EXPECT_EQ(s.params.groups, 3u);
  ASSERT_EQ(s.threads.size(), 2u);
  EXPECT_EQ(s.threads[0][1], (ProgramOp{OpCode::Cs, 4}));
  EXPECT_EQ(s.schedule, (std::vector<std::string>{"0:op", "1:2"}));
  ASSERT_TRUE(s.bounds);
  EXPECT_EQ(s.bounds->max_steps, 50u);
  const Scenario back = scenario_from_json(json::parse(scenario_to_json(s).dump()));
  EXPECT_EQ(scenario_to_json(back).dump(), scenario_to_json(s).dump());
}

TEST(ScenarioJson, RejectsBadInput) {
  EXPECT_THROW(scenario_from_json(json::parse(R"({"lock":"nope","threads":[["acquire"]]})")), ScenarioError);
  EXPECT_THROW(scenario_from_json(json::parse(R"({"lock":"tas","threads":[["jump"]]})")), ScenarioError);
  EXPECT_THROW(scenario_from_json(json::parse(R"({"lock":"tas","variant":"sideways","threads":[["acquire"]]})")),
               ScenarioError);
  EXPECT_THROW(scenario_from_json(json::parse(R"({"lock":"tas"})")), ScenarioError);
  EXPECT_THROW(parse_op("cs:1001"), ScenarioError);
  EXPECT_THROW(parse_op("cs:x"), ScenarioError);
}

TEST(ScenarioValidate, LockSpecificLimits) {
  EXPECT_THROW(make(Algorithm::Peterson, Variant::Original, {{"acquire"}, {"acquire"}, {"acquire"}}).validate(),
               ThreadLimitExceeded);
  EXPECT_THROW(make(Algorithm::McsK42, Variant::Hardened, {{"acquire"}}).validate(), UnsupportedVariant);
  EXPECT_THROW(make(Algorithm::Mcs, Variant::Original, {{"rlock"}}).validate(), ScenarioError);
  EXPECT_NO_THROW(make(Algorithm::CohortRw, Variant::Original, {{"rlock", "runlock"}}).validate());
}

// ---- directives and replay -------------------------------------------------

TEST(Directive, Parse) {
  EXPECT_EQ(parse_directive("2:5").kind, Directive::Steps);
  EXPECT_EQ(parse_directive("2:5").steps, 5u);
  EXPECT_EQ(parse_directive("1:op").kind, Directive::Op);
  const auto d = parse_directive("0:@mcs.release.grant");
  EXPECT_EQ(d.kind, Directive::Label);
  EXPECT_EQ(d.label, "mcs.release.grant");
  for (const char* bad : {"", "3", ":op", "1:", "x:op", "1:5x", "1:-2"}) EXPECT_THROW(parse_directive(bad), InvalidSchedule) << bad;
}

TEST(Directive, GrantsCompressRoundTrip) {
  const std::vector<std::uint32_t> g{0, 0, 1, 2, 2, 2, 0};
  const auto sched = grants_to_schedule(g);
  EXPECT_EQ(sched, (std::vector<std::string>{"0:2", "1:1", "2:3", "0:1"}));
  // Replaying a run's own compressed grants reproduces it exactly.
  const auto s = make(Algorithm::Mcs, Variant::Original, {{"acquire", "release"}, {"acquire", "release"}, {"misuse"}});
  const auto a = replay(s, {}, kReplaySteps, true, 99);
  const auto b = replay(s, grants_to_schedule(a.grants));
  EXPECT_EQ(a.trace_hash, b.trace_hash);
  EXPECT_EQ(a.grants, b.grants);
}

TEST(Replay, SingleThreadCleanExit) {
  const auto r = replay(make(Algorithm::Tas, Variant::Original, {{"acquire", "cs:3", "release"}}));
  EXPECT_EQ(r.verdict.max_occupancy, 1u);
  EXPECT_TRUE(r.verdict.starved.empty());
  EXPECT_FALSE(r.verdict.bound_hit);
  ASSERT_EQ(r.threads.size(), 1u);
  EXPECT_EQ(r.threads[0].status, ThreadStatus::Done);
}

TEST(Replay, Deterministic) {
  for (const auto& n : named_scenarios()) {
    if (n.mode != Mode::Replay) continue;
    const auto a = replay(n.scenario);
    const auto b = replay(n.scenario);
    EXPECT_EQ(a.trace_hash, b.trace_hash) << n.scenario.name;
    EXPECT_EQ(replay_to_json(n.scenario, a).dump(), replay_to_json(n.scenario, b).dump()) << n.scenario.name;
  }
}

TEST(Replay, SeededContinuationIsReproducibleAndSeedSensitive) {
  const auto s = make(Algorithm::Ticket, Variant::Original, {{"acquire", "release"}, {"acquire", "release"}, {"misuse"}});
  std::set<std::uint64_t> hashes;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = replay(s, {}, kReplaySteps, true, seed);
    EXPECT_EQ(a.trace_hash, replay(s, {}, kReplaySteps, true, seed).trace_hash);
    hashes.insert(a.trace_hash);
  }
  EXPECT_GT(hashes.size(), 1u);
}

TEST(Replay, InvalidScheduleErrors) {
  const auto s = make(Algorithm::Tas, Variant::Original, {{"acquire", "release"}, {"acquire", "release"}});
  EXPECT_THROW(replay(s, {"5:op"}), InvalidSchedule);
  EXPECT_THROW(replay(s, {"0:100"}), InvalidSchedule);   // grant to a finished thread
  // T1 spins while T0 holds; a strict grant to a blocked thread is rejected.
  EXPECT_THROW(replay(s, {"0:op", "1:op", "1:1"}), InvalidSchedule);
  EXPECT_THROW(replay(s, {"0:op", "1:op", "1:@tas.release.store"}), InvalidSchedule);
}

TEST(Replay, LabelDirectiveStopsBeforeLabelledStep) {
  const auto s = make(Algorithm::Ticket, Variant::Original, {{"acquire", "release"}, {"misuse"}});
  const auto r = replay(s, {"1:@ticket.release.store", "0:op", "0:op", "1:op"});
  // T1 reads nowServing==0, then T0 runs a full round; both stores write 1.
  int writes_of_one = 0;
  for (const auto& st : r.trace)
    if (st.op == OpKind::Store && st.new_value == 1 && st.label == "ticket.release.store") ++writes_of_one;
  EXPECT_EQ(writes_of_one, 2);
}

TEST(Replay, TicketStarvationAtBound) {
  // The stale counter store strands every later ticket.
  const auto& n = find_named("ticket_nowserving_regress");
  const auto r = replay(n.scenario);
  EXPECT_TRUE(r.verdict.starves_others);
  EXPECT_EQ(r.verdict.starved, (std::vector<std::uint32_t>{3}));
}

TEST(Replay, TraceJsonLines) {
  const auto r = replay(make(Algorithm::Tas, Variant::Original, {{"acquire", "release"}}));
  std::ostringstream os;
  sim::write_trace_jsonl(os, r.trace);
  std::istringstream is(os.str());
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    const auto j = json::parse(line);
    EXPECT_TRUE(j.contains("thread"));
    EXPECT_TRUE(j.contains("op"));
    ++n;
  }
  EXPECT_EQ(n, r.trace.size());
}

// ---- exploration -----------------------------------------------------------

TEST(Explore, GtNeverViolatesMutex) {
  const auto e = explore(make(Algorithm::Gt, Variant::Original, {{"acquire", "release"}, {"acquire", "release"}, {"misuse"}}));
  EXPECT_FALSE(e.bounds_exceeded);
  EXPECT_EQ(e.max_occupancy, 1u);
}

TEST(Explore, TasViolationExistsAndWitnessReplays) {
  const auto s = make(Algorithm::Tas, Variant::Original, {{"acquire", "release"}, {"acquire", "release"}, {"misuse"}});
  const auto e = explore(s);
  EXPECT_EQ(e.max_occupancy, 2u);
  ASSERT_TRUE(e.violation_witness);
  const auto r = replay(s, grants_to_schedule(*e.violation_witness));
  EXPECT_EQ(r.verdict.max_occupancy, 2u);
}

TEST(Explore, HardenedMcsIsCleanOverAllSchedules) {
  for (const char* m : {"misuse", "misuse_fresh"}) {
    const auto e = explore(make(Algorithm::Mcs, Variant::Hardened, {{"acquire", "release"}, {"acquire", "release"}, {m}}));
    EXPECT_EQ(e.max_occupancy, 1u) << m;
    EXPECT_FALSE(e.starves_misbehaving) << m;
    EXPECT_FALSE(e.starves_others) << m;
    EXPECT_GE(e.max_misuse_detected, 1u) << m;
  }
}

TEST(Explore, BudgetExceededIsReportedWithPartialSummary) {
  const auto s = make(Algorithm::Mcs, Variant::Original, {{"acquire", "release"}, {"acquire", "release"}, {"misuse"}});
  const auto e = explore(s, Bounds{200, 50});
  EXPECT_TRUE(e.bounds_exceeded);
  EXPECT_LE(e.states, 50u);
}

TEST(Explore, DeterministicJson) {
  const auto s = make(Algorithm::Clh, Variant::Original, {{"acquire", "release"}, {"acquire", "release"}, {"misuse"}});
  EXPECT_EQ(explore_to_json(s, explore(s)).dump(), explore_to_json(s, explore(s)).dump());
}

// Property: exhaustive exploration bounds every sampled schedule, and every
// reported pathology comes with a schedule that reproduces it.
class ExploreSound : public ::testing::TestWithParam<Algorithm> {};

TEST_P(ExploreSound, RandomSchedulesStayWithinExploredBounds) {
  const auto s = make(GetParam(), Variant::Original, {{"acquire", "release"}, {"acquire", "release"}, {"misuse"}});
  const auto e = explore(s);
  ASSERT_FALSE(e.bounds_exceeded);
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto r = replay(s, {}, kExploreSteps, false, seed);
    EXPECT_LE(r.verdict.max_occupancy, e.max_occupancy) << "seed " << seed;
    if (!r.verdict.bound_hit) {
      if (r.verdict.starves_others) {
        EXPECT_TRUE(e.starves_others) << "seed " << seed;
      }
      if (r.verdict.starves_misbehaving) {
        EXPECT_TRUE(e.starves_misbehaving) << "seed " << seed;
      }
    }
  }
  if (e.starves_others_witness) {
    EXPECT_TRUE(replay(s, grants_to_schedule(*e.starves_others_witness), kExploreSteps).verdict.starves_others);
  }
  if (e.starves_misbehaving_witness) {
    EXPECT_TRUE(replay(s, grants_to_schedule(*e.starves_misbehaving_witness), kExploreSteps).verdict.starves_misbehaving);
  }
}

INSTANTIATE_TEST_SUITE_P(Locks, ExploreSound,
                         ::testing::Values(Algorithm::Tas, Algorithm::Ticket, Algorithm::Abql, Algorithm::Gt,
                                           Algorithm::Mcs, Algorithm::Clh, Algorithm::McsK42, Algorithm::Hemlock,
                                           Algorithm::Hbo, Algorithm::Fisher, Algorithm::Bakery),
                         [](const auto& p) { return std::string(lockharden::info(p.param).name); });

// The number of simultaneous holders reachable with N stray releases of a
// ticket lock is N+1 (given enough waiters), computed here by formula.
TEST(Explore, TicketStrayReleasesBoundOccupancy) {
  const std::uint64_t n = 1;
  std::vector<std::vector<std::string>> progs(3, {"acquire", "release"});
  progs.push_back(std::vector<std::string>(n, "misuse"));
  const auto e = explore(make(Algorithm::Ticket, Variant::Original, progs));
  EXPECT_FALSE(e.bounds_exceeded);
  EXPECT_EQ(e.max_occupancy, n + 1);
}
