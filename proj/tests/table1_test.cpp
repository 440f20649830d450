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

#include <map>
#include <string>

#include "lockharden/table1.hpp"

using namespace lockharden;
using namespace lockharden::scenario;

namespace {

std::string test_name(const std::string& label) {
  std::string out;
  for (char c : label) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

// Cells where exhaustive exploration disagrees with the reference matrix
// (column index, measured value). README explains each one.
const std::map<std::string, std::pair<std::size_t, Mark>> kMeasuredDiffers = {
    {"HMCS", {2, Mark::Yes}},
    {"Lamport 1", {2, Mark::No}},
    {"Lamport 2", {2, Mark::No}},
};

}  // namespace

namespace lockharden::scenario {
void PrintTo(const Table1Row& r, std::ostream* os) { *os << r.label; }
}  // namespace lockharden::scenario

class MatrixRow : public ::testing::TestWithParam<Table1Row> {};

TEST_P(MatrixRow, OriginalMatchesReference) {
  const auto& row = GetParam();
  const auto r = evaluate_row(row, Variant::Original);
  if (!row.algorithm) {
    EXPECT_FALSE(r.applicable);
    EXPECT_TRUE(r.outcomes.empty());
    return;
  }
  Marks want = row.expected;
  if (auto it = kMeasuredDiffers.find(row.label); it != kMeasuredDiffers.end()) {
    want[it->second.first] = it->second.second;
    EXPECT_FALSE(r.pass);
  } else {
    EXPECT_TRUE(r.pass);
  }
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(r.measured[i], want[i]) << "column " << i;
  for (const auto& o : r.outcomes) {
    EXPECT_FALSE(o.bounds_exceeded) << o.scenario;
    EXPECT_EQ(o.misuse_detected, 0u) << o.scenario;
  }
}

TEST_P(MatrixRow, HardenedIsClean) {
  const auto& row = GetParam();
  if (!row.algorithm || !info(*row.algorithm).has_hardened) GTEST_SKIP() << "no remedy";
  const auto r = evaluate_row(row, Variant::Hardened);
  EXPECT_TRUE(r.pass);
  for (const auto& o : r.outcomes) {
    EXPECT_FALSE(o.violates) << o.scenario;
    EXPECT_FALSE(o.starves_tm) << o.scenario;
    EXPECT_FALSE(o.starves_others) << o.scenario;
    EXPECT_GE(o.misuse_detected, 1u) << o.scenario;
  }
}

INSTANTIATE_TEST_SUITE_P(Rows, MatrixRow, ::testing::ValuesIn(table1_rows()),
                         [](const auto& p) { return test_name(p.param.label); });

TEST(Matrix, EveryImplementedLockHasARow) {
  for (const auto& i : kAlgorithms) EXPECT_NO_THROW(find_row(i.id)) << i.name;
}

TEST(Matrix, EveryProbeIsRegistered) {
  for (const auto& row : table1_rows()) {
    for (const auto& p : row.probes) EXPECT_NO_THROW(find_named(p)) << p;
    for (const auto& p : row.original_only) EXPECT_NO_THROW(find_named(p)) << p;
  }
}

TEST(Matrix, RowWithoutProbesIsMissingScenario) {
  Table1Row row{"X", Algorithm::Tas, {Mark::No, Mark::No, Mark::No}, {}, {}, ""};
  EXPECT_THROW(evaluate_row(row, Variant::Original), MissingScenario);
  EXPECT_THROW(find_named("no_such_scenario"), MissingScenario);
}

TEST(Matrix, NaColumnsAreIgnoredWhenMatching) {
  EXPECT_TRUE(marks_match({Mark::Yes, Mark::No, Mark::NA}, {Mark::Yes, Mark::No, Mark::Yes}));
  EXPECT_FALSE(marks_match({Mark::Yes, Mark::No, Mark::NA}, {Mark::No, Mark::No, Mark::NA}));
}

// ---- named pathology scenarios --------------------------------------------

namespace {

Outcome run(const char* name, Variant v) { return evaluate(find_named(name), v); }

}  // namespace

TEST(Pathology, ClhReenqueueAdmitsTwo) {
  const auto o = run("clh_fig6_reenqueue", Variant::Original);
  const auto h = run("clh_fig6_reenqueue", Variant::Hardened);
  const auto r = replay(find_named("clh_fig6_reenqueue").scenario);
  EXPECT_EQ(r.verdict.max_occupancy, 2u);
  EXPECT_TRUE(o.violates);
  EXPECT_FALSE(h.violates);
  EXPECT_GE(h.misuse_detected, 1u);
}

TEST(Pathology, TicketRegressStarvesOnlyOriginal) {
  EXPECT_TRUE(run("ticket_nowserving_regress", Variant::Original).starves_others);
  const auto h = run("ticket_nowserving_regress", Variant::Hardened);
  EXPECT_FALSE(h.starves_others);
  EXPECT_EQ(h.misuse_detected, 1u);
}

TEST(Pathology, GtToggleRevertStarvesSuccessor) {
  const auto o = run("gt_toggle_revert", Variant::Original);
  EXPECT_TRUE(o.starves_others);
  EXPECT_FALSE(o.violates);
  EXPECT_FALSE(run("gt_toggle_revert", Variant::Hardened).starves_others);
}

TEST(Pathology, McsFreshNodeSpinsForever) {
  const auto o = run("mcs_loop_forever", Variant::Original);
  EXPECT_TRUE(o.starves_tm);
  EXPECT_FALSE(o.starves_others);
  const auto h = run("mcs_loop_forever", Variant::Hardened);
  EXPECT_FALSE(h.starves_tm);
  EXPECT_EQ(h.misuse_detected, 1u);
}

TEST(Pathology, K42WritesIntoReclaimedNode) {
  EXPECT_GT(run("mcsk42_stack_write", Variant::Original).reclaimed_writes, 0u);
}

TEST(Pathology, RwReadMisuseLetsWriterBesideReaderThenStarvesWriters) {
  for (auto v : {Variant::Original, Variant::Hardened}) {   // the read side has no remedy
    Scenario s = find_named("rw_read_misuse").scenario;
    s.variant = v;
    const auto r = replay(s);
    EXPECT_TRUE(r.verdict.reader_writer_overlap) << to_string(v);
    ASSERT_TRUE(r.verdict.counter_divergence);
    EXPECT_EQ(*r.verdict.counter_divergence, 1);
    EXPECT_TRUE(r.verdict.starves_others);
    EXPECT_EQ(r.verdict.starved, (std::vector<std::uint32_t>{3}));
  }
}

TEST(Pathology, RwHardenedWriteMisuseDetectedAndCohortIntact) {
  const auto h = run("rw_write_misuse", Variant::Hardened);
  EXPECT_FALSE(h.violates);
  EXPECT_FALSE(h.starves_others);
  EXPECT_GE(h.misuse_detected, 1u);
  ASSERT_TRUE(h.counter_divergence);
  EXPECT_EQ(*h.counter_divergence, 0);
}

TEST(Pathology, HmcsSharedGroupNodeWitnessReplays) {
  // The misbehaving thread shares its group's root qnode with a holder of
  // the same group; its root release detaches that node under the holder.
  const auto& n = find_named("hmcs_loop_forever");
  const auto e = explore(n.scenario);
  ASSERT_TRUE(e.starves_others_witness);
  const auto r = replay(n.scenario, grants_to_schedule(*e.starves_others_witness), kExploreSteps);
  EXPECT_TRUE(r.verdict.starves_others);
}

TEST(Matrix, JsonAndTextReports) {
  std::vector<RowResult> rows{evaluate_row(find_row(Algorithm::Ticket), Variant::Original),
                              evaluate_row(table1_rows()[11], Variant::Original)};
  const auto j = table1_to_json(rows);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(j["rows"][0]["expected"], (ordered_json{"yes", "no", "yes"}));
  EXPECT_FALSE(j["rows"][1]["applicable"].get<bool>());
  const auto text = table1_text(rows);
  EXPECT_NE(text.find("Ticket"), std::string::npos);
  EXPECT_NE(text.find("not applicable"), std::string::npos);
}
