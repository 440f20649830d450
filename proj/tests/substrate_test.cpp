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

#include <algorithm>
#include <thread>
#include <vector>

#include "lockharden/substrate.hpp"

using lockharden::NativeCell;

TEST(NativeCell, OpsReturnPreviousValue) {
  NativeCell c(5);
  EXPECT_EQ(c.load(), 5u);
  EXPECT_EQ(c.swap(9), 5u);
  EXPECT_EQ(c.fetch_add(3), 9u);
  EXPECT_EQ(c.load(), 12u);
  EXPECT_EQ(c.fetch_xor(1), 12u);
  EXPECT_EQ(c.load(), 13u);
  EXPECT_FALSE(c.cas(12, 0));
  EXPECT_EQ(c.load(), 13u);
  EXPECT_TRUE(c.cas(13, 0));
  EXPECT_EQ(c.load(), 0u);
  c.store(7);
  EXPECT_EQ(c.load(), 7u);
}

TEST(NativeCell, FetchAddWrapsModulo64Bits) {
  NativeCell c(~0ull);
  EXPECT_EQ(c.fetch_add(2), ~0ull);
  EXPECT_EQ(c.load(), 1u);
}

TEST(NativeCell, OccupiesOneCacheLine) {
  NativeCell cells[2];
  auto a = reinterpret_cast<std::uintptr_t>(&cells[0]);
  auto b = reinterpret_cast<std::uintptr_t>(&cells[1]);
  EXPECT_EQ(a % lockharden::kCacheLine, 0u);
  EXPECT_EQ(b - a, lockharden::kCacheLine);
}

// Concurrent fetch_add results must be a permutation of 0..n-1: every
// increment observes a distinct predecessor.
TEST(NativeCell, ConcurrentFetchAddIsLinearizable) {
  constexpr int kThreads = 4;
  constexpr int kPer = 20000;
  NativeCell c;
  std::vector<std::vector<std::uint64_t>> seen(kThreads);
  std::vector<std::thread> ts;
  for (int t = 0; t < kThreads; ++t)
    ts.emplace_back([&, t] {
      seen[t].reserve(kPer);
      for (int i = 0; i < kPer; ++i) seen[t].push_back(c.fetch_add(1));
    });
  for (auto& t : ts) t.join();
  std::vector<std::uint64_t> all;
  for (auto& v : seen) {
    EXPECT_TRUE(std::is_sorted(v.begin(), v.end()));
    all.insert(all.end(), v.begin(), v.end());
  }
  std::sort(all.begin(), all.end());
  ASSERT_EQ(all.size(), std::size_t{kThreads * kPer});
  for (std::size_t i = 0; i < all.size(); ++i) ASSERT_EQ(all[i], i);
  EXPECT_EQ(c.load(), std::uint64_t{kThreads * kPer});
}

TEST(NativeCell, ConcurrentCasIncrementLosesNothing) {
  constexpr int kThreads = 4;
  constexpr int kPer = 10000;
  NativeCell c;
  std::vector<std::thread> ts;
  for (int t = 0; t < kThreads; ++t)
    ts.emplace_back([&] {
      for (int i = 0; i < kPer; ++i) {
        std::uint64_t v = c.load();
        while (!c.cas(v, v + 1)) v = c.load();
      }
    });
  for (auto& t : ts) t.join();
  EXPECT_EQ(c.load(), std::uint64_t{kThreads * kPer});
}

TEST(NativeBackend, SpinUntilReturnsOncePredicateHolds) {
  NativeCell flag;
  std::thread setter([&] { flag.store(1); });
  lockharden::NativeBackend::spin_until([&] { return flag.load() == 1; });
  setter.join();
  EXPECT_EQ(flag.load(), 1u);
}

TEST(NativeBackend, AbortFlagStopsSpinner) {
  auto& abort = lockharden::NativeBackend::abort_flag();
  abort.store(true);
  NativeCell never;
  EXPECT_THROW(lockharden::NativeBackend::spin_until([&] { return never.load() == 1; }), lockharden::SpinAborted);
  abort.store(false);
}
