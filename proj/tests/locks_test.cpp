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

#include <atomic>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "lockharden/catalog.hpp"
#include "lockharden/sim.hpp"

using namespace lockharden;

namespace {

struct LockCase {
  Algorithm algo;
  Variant variant;
};

void PrintTo(const LockCase& c, std::ostream* os) { *os << info(c.algo).name << "/" << to_string(c.variant); }

std::vector<LockCase> all_cases() {
  std::vector<LockCase> out;
  for (const auto& i : kAlgorithms) {
    out.push_back({i.id, Variant::Original});
    if (i.has_hardened) out.push_back({i.id, Variant::Hardened});
  }
  return out;
}

std::string case_name(const testing::TestParamInfo<LockCase>& p) {
  return std::string(info(p.param.algo).name) + "_" + to_string(p.param.variant);
}

std::uint32_t threads_for(Algorithm a, std::uint32_t want) {
  const auto cap = info(a).thread_cap;
  return cap != 0 && cap < want ? cap : want;
}

bool timing_based(Algorithm a) { return a == Algorithm::Fisher || a == Algorithm::Lamport1; }

class EveryLock : public testing::TestWithParam<LockCase> {};

}  // namespace

TEST_P(EveryLock, SingleThreadCycles) {
  auto m = make_mutex<NativeBackend>(GetParam().algo, GetParam().variant);
  auto ctx = m->make_context(ThreadId(1));
  for (int i = 0; i < 5; ++i) {
    m->acquire(ctx);
    EXPECT_EQ(m->release(ctx), ReleaseStatus::Released);
  }
  EXPECT_EQ(m->misuse_count(), 0u);
}

TEST_P(EveryLock, NativeThreadsNeverShareTheCriticalSection) {
  if (timing_based(GetParam().algo)) GTEST_SKIP() << "timing-based: simulator only";
  const std::uint32_t n = threads_for(GetParam().algo, 4);
  LockOptions o;
  o.max_procs = 8;
  auto m = make_mutex<NativeBackend>(GetParam().algo, GetParam().variant, o);
  std::atomic<int> inside{0};
  std::atomic<int> overlaps{0};
  std::uint64_t counter = 0;  // protected by the lock
  constexpr int kIters = 2000;
  std::vector<std::thread> ts;
  for (std::uint32_t t = 0; t < n; ++t)
    ts.emplace_back([&, t] {
      auto ctx = m->make_context(ThreadId(t + 1));
      for (int i = 0; i < kIters; ++i) {
        m->acquire(ctx);
        if (inside.fetch_add(1) != 0) overlaps.fetch_add(1);
        ++counter;
        inside.fetch_sub(1);
        EXPECT_EQ(m->release(ctx), ReleaseStatus::Released);
      }
    });
  for (auto& t : ts) t.join();
  EXPECT_EQ(overlaps.load(), 0);
  EXPECT_EQ(counter, std::uint64_t{n} * kIters);
}

// Random interleavings on the simulator: well-behaved threads always
// finish and never overlap.
TEST_P(EveryLock, SimulatedRandomSchedulesAreSafeAndLive) {
  const std::uint32_t n = threads_for(GetParam().algo, 3);
  std::mt19937_64 rng(12345);
  for (int run = 0; run < 150; ++run) {
    sim::World w;
    sim::World::Scope scope(w);
    LockOptions o;
    o.max_procs = n;
    auto m = make_mutex<sim::SimBackend>(GetParam().algo, GetParam().variant, o);
    int inside = 0, max_inside = 0;
    for (std::uint32_t t = 0; t < n; ++t)
      w.add_thread([&, t] {
        auto ctx = m->make_context(ThreadId(t + 1));
        for (int r = 0; r < 2; ++r) {
          m->acquire(ctx);
          max_inside = std::max(max_inside, ++inside);
          sim::World::require().nop();
          --inside;
          if (m->release(ctx) != ReleaseStatus::Released) throw std::runtime_error("spurious misuse");
        }
      });
    w.start();
    int steps = 0;
    while (!w.all_finished() && steps < 20000) {
      auto en = w.enabled_threads();
      ASSERT_FALSE(en.empty()) << "stuck in run " << run;
      w.grant(en[rng() % en.size()]);
      ++steps;
    }
    ASSERT_TRUE(w.all_finished()) << "run " << run;
    for (std::uint32_t t = 0; t < n; ++t) ASSERT_FALSE(w.failed(t));
    ASSERT_EQ(max_inside, 1) << "run " << run;
    w.kill();
  }
}

INSTANTIATE_TEST_SUITE_P(Locks, EveryLock, testing::ValuesIn(all_cases()), case_name);

namespace {

class HardenedLock : public testing::TestWithParam<Algorithm> {};

std::vector<Algorithm> hardened_algorithms() {
  std::vector<Algorithm> out;
  for (const auto& i : kAlgorithms)
    if (i.has_hardened) out.push_back(i.id);
  return out;
}

}  // namespace

TEST_P(HardenedLock, NonHolderReleaseIsDetectedAndHarmless) {
  LockOptions o;
  o.max_procs = 4;
  o.checks = true;
  auto m = make_mutex<NativeBackend>(GetParam(), Variant::Hardened, o);
  auto holder = m->make_context(ThreadId(1));
  auto other = m->make_context(ThreadId(2));
  // Never acquired.
  EXPECT_EQ(m->release(other), ReleaseStatus::MisuseDetected);
  m->acquire(holder);
  // Lock held by someone else.
  EXPECT_EQ(m->release(other), ReleaseStatus::MisuseDetected);
  EXPECT_EQ(m->release(holder), ReleaseStatus::Released);
  // Stale: released already.
  EXPECT_EQ(m->release(holder), ReleaseStatus::MisuseDetected);
  EXPECT_EQ(m->misuse_count(), 3u);
  // The lock still works for everybody.
  m->acquire(other);
  EXPECT_EQ(m->release(other), ReleaseStatus::Released);
  m->acquire(holder);
  EXPECT_EQ(m->release(holder), ReleaseStatus::Released);
}

TEST_P(HardenedLock, FreshContextReleaseIsDetected) {
  LockOptions o;
  o.max_procs = 4;
  o.checks = true;
  auto m = make_mutex<NativeBackend>(GetParam(), Variant::Hardened, o);
  auto holder = m->make_context(ThreadId(1));
  m->acquire(holder);
  auto fresh = m->make_context(ThreadId(2));
  EXPECT_EQ(m->release(fresh), ReleaseStatus::MisuseDetected);
  EXPECT_EQ(m->release(holder), ReleaseStatus::Released);
}

TEST_P(HardenedLock, ChecksOffNeverReportsMisuse) {
  LockOptions o;
  o.checks = false;
  auto m = make_mutex<NativeBackend>(GetParam(), Variant::Hardened, o);
  EXPECT_FALSE(m->checks_enabled());
  auto ctx = m->make_context(ThreadId(1));
  for (int i = 0; i < 3; ++i) {
    m->acquire(ctx);
    EXPECT_EQ(m->release(ctx), ReleaseStatus::Released);
  }
  EXPECT_EQ(m->misuse_count(), 0u);
}

INSTANTIATE_TEST_SUITE_P(Locks, HardenedLock, testing::ValuesIn(hardened_algorithms()),
                         [](const testing::TestParamInfo<Algorithm>& p) { return std::string(lockharden::info(p.param).name); });

TEST(Peterson, ThirdThreadIsRejected) {
  PetersonLock<NativeBackend> p;
  EXPECT_NO_THROW(p.make_context(ThreadId(2)));
  EXPECT_THROW(p.make_context(ThreadId(3)), ThreadLimitExceeded);
}

TEST(Ticket, ReleaseAdvancesNowServing) {
  TicketLock<NativeBackend, Variant::Original> t;
  auto ctx = t.make_context(ThreadId(1));
  t.acquire(ctx);
  EXPECT_EQ(t.next_ticket(), 1u);
  EXPECT_EQ(t.now_serving(), 0u);
  t.release(ctx);
  EXPECT_EQ(t.now_serving(), 1u);
  // Original: an unbalanced release still advances the counter.
  t.release(ctx);
  EXPECT_EQ(t.now_serving(), 2u);
  EXPECT_EQ(t.misuse_count(), 0u);
}

TEST(Tas, HardenedWordHoldsThePid) {
  TasLock<NativeBackend, Variant::Hardened> l;
  auto ctx = l.make_context(ThreadId(7));
  l.acquire(ctx);
  EXPECT_EQ(l.word(), 7u);
  l.release(ctx);
  EXPECT_EQ(l.word(), 0u);
}

TEST(RwLock, ReadersShareWritersExclude) {
  sim::World w;
  sim::World::Scope scope(w);
  LockOptions o;
  o.max_procs = 4;
  CohortRwLock<sim::SimBackend, Variant::Hardened> rw(o);
  int readers = 0, max_readers = 0, writer_overlap = 0;
  bool writer_in = false;
  for (std::uint32_t t = 0; t < 3; ++t)
    w.add_thread([&, t] {
      auto ctx = rw.make_context(ThreadId(t + 1));
      rw.read_lock(ctx);
      max_readers = std::max(max_readers, ++readers);
      sim::World::require().nop();
      --readers;
      rw.read_unlock(ctx);
    });
  w.add_thread([&] {
    auto ctx = rw.make_context(ThreadId(4));
    rw.write_lock(ctx);
    writer_in = true;
    if (readers != 0) ++writer_overlap;
    sim::World::require().nop();
    if (readers != 0) ++writer_overlap;
    writer_in = false;
    rw.write_unlock(ctx);
  });
  w.start();
  // Readers first, all the way into the critical section.
  for (std::uint32_t t = 0; t < 3; ++t)
    while (readers <= static_cast<int>(t) && !w.finished(t)) w.grant(t);
  EXPECT_EQ(max_readers, 3);
  std::mt19937_64 rng(7);
  while (!w.all_finished()) {
    auto en = w.enabled_threads();
    ASSERT_FALSE(en.empty());
    w.grant(en[rng() % en.size()]);
  }
  EXPECT_EQ(writer_overlap, 0);
  EXPECT_FALSE(writer_in);
}

TEST(RwLock, UnbalancedReadUnlockGoesUnnoticed) {
  CohortRwLock<NativeBackend, Variant::Hardened> rw;
  auto ctx = rw.make_context(ThreadId(1));
  rw.read_unlock(ctx);
  EXPECT_EQ(rw.misuse_count(), 0u);
  EXPECT_EQ(rw.write_unlock(ctx), ReleaseStatus::MisuseDetected);
  EXPECT_EQ(rw.misuse_count(), 1u);
}
