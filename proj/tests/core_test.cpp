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

#include <cstdlib>
#include <set>
#include <thread>
#include <vector>

#include "lockharden/catalog.hpp"

using namespace lockharden;

TEST(ThreadRegistry, HandsOutDistinctPidsFromOne) {
  ThreadRegistry reg(3);
  EXPECT_EQ(reg.register_thread().value(), 1u);
  EXPECT_EQ(reg.register_thread().value(), 2u);
  EXPECT_EQ(reg.register_thread().value(), 3u);
  EXPECT_THROW(reg.register_thread(), CapacityExceeded);
  EXPECT_EQ(reg.registered(), 3u);
}

TEST(ThreadRegistry, ConcurrentRegistrationIsUnique) {
  ThreadRegistry reg(64);
  std::vector<std::uint32_t> got(8);
  std::vector<std::thread> ts;
  for (int i = 0; i < 8; ++i) ts.emplace_back([&, i] { got[i] = reg.register_thread().value(); });
  for (auto& t : ts) t.join();
  std::set<std::uint32_t> uniq(got.begin(), got.end());
  EXPECT_EQ(uniq.size(), 8u);
  EXPECT_EQ(*uniq.begin(), 1u);
  EXPECT_EQ(*uniq.rbegin(), 8u);
}

TEST(ThreadId, ZeroIsInvalid) {
  EXPECT_FALSE(ThreadId().valid());
  EXPECT_TRUE(ThreadId(1).valid());
  EXPECT_EQ(ThreadId(4), ThreadId(4));
}

TEST(Variant, ParsesBothNames) {
  EXPECT_EQ(parse_variant("original"), Variant::Original);
  EXPECT_EQ(parse_variant("hardened"), Variant::Hardened);
  EXPECT_FALSE(parse_variant("fixed").has_value());
  EXPECT_STREQ(to_string(Variant::Hardened), "hardened");
  EXPECT_STREQ(to_string(ReleaseStatus::MisuseDetected), "misuse_detected");
}

TEST(MisusePolicy, ReadsEnvironment) {
  ::unsetenv("LOCKHARDEN_CHECKS");
  EXPECT_TRUE(MisusePolicy::from_env().checks_enabled);
  ::setenv("LOCKHARDEN_CHECKS", "off", 1);
  EXPECT_FALSE(MisusePolicy::from_env().checks_enabled);
  ::setenv("LOCKHARDEN_CHECKS", "on", 1);
  EXPECT_TRUE(MisusePolicy::from_env().checks_enabled);
  ::unsetenv("LOCKHARDEN_CHECKS");
}

TEST(LockOptions, ExplicitChecksOverrideEnvironment) {
  ::setenv("LOCKHARDEN_CHECKS", "off", 1);
  TicketLock<NativeBackend, Variant::Hardened> env_off;
  LockOptions o;
  o.checks = true;
  TicketLock<NativeBackend, Variant::Hardened> forced(o);
  ::unsetenv("LOCKHARDEN_CHECKS");
  EXPECT_FALSE(env_off.checks_enabled());
  EXPECT_TRUE(forced.checks_enabled());
}

TEST(Place, InvalidUntilSet) {
  Place p;
  EXPECT_FALSE(p.valid());
  p.set(0);
  EXPECT_TRUE(p.valid());
  EXPECT_EQ(p.get(), 0u);
  p.reset();
  EXPECT_FALSE(p.valid());
}

TEST(Arena, HandlesSkipReservedValues) {
  Arena<NativeCell> a(2);
  const auto h0 = a.allocate();
  const auto h1 = a.allocate();
  EXPECT_EQ(h0, kFirstNodeHandle);
  EXPECT_EQ(h1, kFirstNodeHandle + 1);
  EXPECT_NE(h0, kNullHandle);
  EXPECT_NE(h0, kAcqHandle);
  EXPECT_THROW(a.allocate(), CapacityExceeded);
  a[h1].store(9);
  EXPECT_EQ(a[h1].load(), 9u);
  EXPECT_EQ(a[h0].load(), 0u);
}

TEST(LockBase, RejectsPidOutsideRange) {
  LockOptions o;
  o.max_procs = 4;
  McsLock<NativeBackend, Variant::Hardened> m(o);
  EXPECT_THROW(m.make_context(ThreadId()), CapacityExceeded);
  EXPECT_THROW(m.make_context(ThreadId(5)), CapacityExceeded);
  EXPECT_NO_THROW(m.make_context(ThreadId(4)));
}

TEST(LockBase, ZeroMaxProcsIsRejected) {
  LockOptions o;
  o.max_procs = 0;
  EXPECT_THROW((TasLock<NativeBackend, Variant::Original>(o)), std::invalid_argument);
}

TEST(ThreadContext, GroupIsPidModuloGroups) {
  LockOptions o;
  o.groups = 3;
  HboLock<NativeBackend, Variant::Hardened> l(o);
  EXPECT_EQ(l.make_context(ThreadId(1)).group(), 0u);
  EXPECT_EQ(l.make_context(ThreadId(3)).group(), 2u);
  EXPECT_EQ(l.make_context(ThreadId(4)).group(), 0u);
}

TEST(Catalog, NamesRoundTrip) {
  for (const auto& i : kAlgorithms) {
    EXPECT_EQ(parse_algorithm(i.name), i.id);
    EXPECT_EQ(info(i.id).name, i.name);
  }
  EXPECT_FALSE(parse_algorithm("hclh").has_value());
}

TEST(Catalog, HardenedRequestForUnfixableLockThrows) {
  EXPECT_THROW(make_mutex<NativeBackend>(Algorithm::McsK42, Variant::Hardened), UnsupportedVariant);
  EXPECT_THROW(make_mutex<NativeBackend>(Algorithm::Peterson, Variant::Hardened), UnsupportedVariant);
  EXPECT_NO_THROW(make_mutex<NativeBackend>(Algorithm::McsK42, Variant::Original));
}

TEST(Catalog, OnlyTheRwLockHasAReadSide) {
  for (const auto& i : kAlgorithms) {
    auto m = make_mutex<NativeBackend>(i.id, Variant::Original);
    EXPECT_EQ(m->reader_writer(), i.reader_writer) << i.name;
  }
  auto tas = make_mutex<NativeBackend>(Algorithm::Tas, Variant::Original);
  auto ctx = tas->make_context(ThreadId(1));
  EXPECT_THROW(tas->read_lock(ctx), NotReaderWriter);
}
