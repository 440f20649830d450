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

#include <cmath>
#include <sstream>

#include "lockharden/bench.hpp"

using namespace lockharden;
using namespace lockharden::bench;

TEST(Bench, OverheadSignConvention) {
  EXPECT_DOUBLE_EQ(overhead_pct(100.0, 90.0), 10.0);    // hardened slower
  EXPECT_DOUBLE_EQ(overhead_pct(100.0, 110.0), -10.0);  // hardened faster
  EXPECT_DOUBLE_EQ(overhead_pct(4.0, 4.0), 0.0);
}

TEST(Bench, DefaultSweepEndsAtHardwareThreads) {
  const auto s = default_sweep();
  ASSERT_FALSE(s.empty());
  EXPECT_EQ(s.front(), 1u);
  EXPECT_EQ(s.back(), hardware_threads());
  for (std::size_t i = 1; i + 1 < s.size(); ++i) EXPECT_EQ(s[i], 2 * s[i - 1]);
}

TEST(Bench, ShortRunRecordsAreConsistent) {
  BenchConfig c;
  c.locks = {Algorithm::Mcs, Algorithm::Ticket};
  c.threads = {1, 2};
  c.duration_seconds = 0.05;
  c.warmup_seconds = 0.01;
  c.repetitions = 2;
  const auto recs = run_bench(c);
  ASSERT_EQ(recs.size(), 2u * 2u * 2u);
  for (std::size_t i = 0; i < recs.size(); i += 2) {
    const auto& o = recs[i];
    const auto& h = recs[i + 1];
    EXPECT_EQ(o.variant, Variant::Original);
    EXPECT_EQ(h.variant, Variant::Hardened);
    EXPECT_EQ(o.lock, h.lock);
    EXPECT_EQ(o.threads, h.threads);
    EXPECT_FALSE(o.overhead_pct);
    ASSERT_TRUE(h.overhead_pct);
    EXPECT_NEAR(*h.overhead_pct, overhead_pct(o.mops, h.mops), 1e-9);
    for (const auto* r : {&o, &h}) {
      EXPECT_GT(r->pairs, 0u);
      // Conserved work: throughput is exactly the counted pairs over the window.
      EXPECT_NEAR(r->mops, static_cast<double>(r->pairs) / r->seconds / 1e6, 1e-9 * r->mops);
      EXPECT_GE(r->seconds, 0.05);
    }
  }
}

TEST(Bench, RejectsBadConfigs) {
  BenchConfig c;
  EXPECT_THROW(run_bench(c), std::invalid_argument);
  c.locks = {Algorithm::McsK42};
  EXPECT_THROW(run_bench(c), UnsupportedVariant);
  c.locks = {Algorithm::Fisher};
  EXPECT_THROW(run_bench(c), std::invalid_argument);
  c.locks = {Algorithm::Mcs};
  c.repetitions = 0;
  EXPECT_THROW(run_bench(c), std::invalid_argument);
}

namespace {

std::vector<BenchRecord> sample() {
  BenchRecord o{"mcs", Variant::Original, 4, 10.0, std::nullopt, 100, 10.0, false, false};
  BenchRecord h{"mcs", Variant::Hardened, 4, 9.5, overhead_pct(10.0, 9.5), 95, 10.0, false, false};
  BenchRecord t{"tas", Variant::Hardened, 1, 20.0, 12.5, 200, 10.0, false, false};
  return {o, h, t};
}

}  // namespace

TEST(Report, CsvSchema) {
  const auto csv = report(sample(), "csv");
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "lock,variant,threads,mops,overhead_pct");
  std::getline(is, line);
  EXPECT_EQ(line, "mcs,original,4,10.0000,");
  std::getline(is, line);
  EXPECT_EQ(line, "mcs,hardened,4,9.5000,5.00");
}

TEST(Report, TableHasRowPerLockAndColumnPerThreadCount) {
  const auto t = report(sample(), "table");
  EXPECT_NE(t.find("1T"), std::string::npos);
  EXPECT_NE(t.find("4T"), std::string::npos);
  EXPECT_NE(t.find("mcs"), std::string::npos);
  EXPECT_NE(t.find("5.00"), std::string::npos);
  EXPECT_NE(t.find("12.50"), std::string::npos);
}

TEST(Report, JsonRoundTrip) {
  const auto js = report(sample(), "json");
  const auto back = records_from_json(nlohmann::json::parse(js));
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(report(back, "csv"), report(sample(), "csv"));
}

TEST(Report, Errors) {
  EXPECT_THROW(report({}, "csv"), UnknownData);
  EXPECT_THROW(report(sample(), "xml"), UnknownFormat);
  EXPECT_THROW(records_from_json(nlohmann::json::object()), UnknownData);
}
