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

// Neutral-preference reader-writer lock over a cohort mutex. Readers pass
// through the mutex to bump `ingress` and leave by bumping `egress`; a
// writer holds the mutex and waits for the two counters to meet.
//
// Read-unlock cannot be checked: egress is anonymous, so a read-unlock by a
// thread that holds no read lock is indistinguishable from a real one. Only
// the write side is hardened.

#pragma once

#include <cstdint>

#include "core.hpp"
#include "locks_hier.hpp"

namespace lockharden {

template <class B, Variant V>
class CohortRwLock : public LockBase {
 public:
  static constexpr Variant kVariant = V;
  using Cell = typename B::Cell;

  explicit CohortRwLock(const LockOptions& o = {}) : LockBase(o), mutex_(o) {}

  ThreadContext make_context(ThreadId pid) { return mutex_.make_context(pid); }

  void read_lock(ThreadContext& ctx) {
    mutex_.acquire(ctx);
    B::yield_point("rw.read.enter");
    ingress_.fetch_add(1);
    mutex_.release(ctx);
  }

  void read_unlock(ThreadContext&) {
    B::yield_point("rw.read.leave");
    egress_.fetch_add(1);
  }

  void write_lock(ThreadContext& ctx) {
    mutex_.acquire(ctx);
    B::spin_until([&] {
      B::yield_point("rw.write.drain_in");
      const std::uint64_t in = ingress_.load();
      B::yield_point("rw.write.drain_out");
      return egress_.load() == in;
    });
  }

  ReleaseStatus write_unlock(ThreadContext& ctx) { return note(mutex_.release(ctx)); }
  ReleaseStatus write_unlock_unchecked(ThreadContext& ctx) { return note(mutex_.release_unchecked(ctx)); }

  // Mutex view: exclusive access is the write side.
  void acquire(ThreadContext& ctx) { write_lock(ctx); }
  ReleaseStatus release(ThreadContext& ctx) { return write_unlock(ctx); }
  ReleaseStatus release_unchecked(ThreadContext& ctx) { return write_unlock_unchecked(ctx); }

  std::uint64_t ingress() const { return ingress_.load(); }
  std::uint64_t egress() const { return egress_.load(); }

 private:
  ReleaseStatus note(ReleaseStatus s) {
    if (s == ReleaseStatus::MisuseDetected) flag_misuse();
    return s;
  }

  CohortTicketLock<B, V> mutex_;
  Cell ingress_{0};
  Cell egress_{0};
};

}  // namespace lockharden
