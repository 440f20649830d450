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

// NUMA-aware locks: two-level HMCS, hierarchical backoff, and the
// ticket-ticket cohort lock. A thread's group is (pid - 1) % groups.

#pragma once

#include <cstdint>
#include <limits>
#include <memory>

#include "core.hpp"
#include "locks_queue.hpp"

namespace lockharden {

template <class B, Variant V>
class HmcsLock : public LockBase {
 public:
  static constexpr Variant kVariant = V;
  static constexpr std::uint64_t kWait = std::numeric_limits<std::uint64_t>::max();
  static constexpr std::uint64_t kAcquireParent = kWait - 1;
  static constexpr std::uint64_t kCohortStart = 1;
  using Cell = typename B::Cell;

  explicit HmcsLock(const LockOptions& o = {})
      : LockBase(o), threshold_(o.hmcs_threshold == 0 ? 1 : o.hmcs_threshold), nodes_(node_capacity(o) + o.groups),
        leaf_tail_(std::make_unique<Cell[]>(groups())), group_node_(std::make_unique<std::uint64_t[]>(groups())) {
    for (std::uint32_t g = 0; g < groups(); ++g) group_node_[g] = nodes_.allocate();
  }

  ThreadContext make_context(ThreadId pid) {
    auto f = base_fields(pid);
    f.node = nodes_.allocate();
    return mint(f);
  }

  void acquire(ThreadContext& ctx) {
    auto& f = fields(ctx);
    const std::uint64_t me = f.node;
    Node& I = nodes_[me];
    B::yield_point("hmcs.leaf.init_status");
    I.status.store(kWait);
    B::yield_point("hmcs.leaf.init_next");
    I.next.store(kNullHandle);
    B::yield_point("hmcs.leaf.enqueue");
    const std::uint64_t pred = leaf_tail_[f.group].swap(me);
    bool inherited = false;
    if (pred != kNullHandle) {
      B::yield_point("hmcs.leaf.link");
      nodes_[pred].next.store(me);
      std::uint64_t st = kWait;
      B::spin_until([&] {
        B::yield_point("hmcs.leaf.wait");
        st = I.status.load();
        return st != kWait;
      });
      inherited = st < kAcquireParent;
    }
    if (!inherited) {
      B::yield_point("hmcs.leaf.start_cohort");
      I.status.store(kCohortStart);
      acquire_root(group_node_[f.group]);
    }
    if constexpr (V == Variant::Hardened) {
      B::yield_point("hmcs.acquire.held");
      I.held.store(1);
    }
  }

  ReleaseStatus release(ThreadContext& ctx) { return release_impl(ctx, checks_enabled()); }
  ReleaseStatus release_unchecked(ThreadContext& ctx) { return release_impl(ctx, false); }

 private:
  struct Node {
    Cell next{kNullHandle};
    Cell status{kWait};
    Cell held{0};
  };

  void acquire_root(std::uint64_t me) {
    Node& I = nodes_[me];
    B::yield_point("hmcs.root.init_status");
    I.status.store(kWait);
    B::yield_point("hmcs.root.init_next");
    I.next.store(kNullHandle);
    B::yield_point("hmcs.root.enqueue");
    const std::uint64_t pred = root_tail_.swap(me);
    if (pred != kNullHandle) {
      B::yield_point("hmcs.root.link");
      nodes_[pred].next.store(me);
      B::spin_until([&] {
        B::yield_point("hmcs.root.wait");
        return I.status.load() != kWait;
      });
    }
  }

  void release_root(std::uint64_t me) {
    Node& I = nodes_[me];
    B::yield_point("hmcs.root.read_next");
    std::uint64_t succ = I.next.load();
    if (succ == kNullHandle) {
      B::yield_point("hmcs.root.detach");
      if (root_tail_.cas(me, kNullHandle)) return;
      B::spin_until([&] {
        B::yield_point("hmcs.root.wait_next");
        succ = I.next.load();
        return succ != kNullHandle;
      });
    }
    B::yield_point("hmcs.root.grant");
    nodes_[succ].status.store(kCohortStart);
  }

  ReleaseStatus release_impl(ThreadContext& ctx, bool check) {
    auto& f = fields(ctx);
    const std::uint64_t me = f.node;
    Node& I = nodes_[me];
    if constexpr (V == Variant::Hardened) {
      if (check) {
        B::yield_point("hmcs.release.check");
        if (I.held.load() == 0) return flag_misuse();
      }
      B::yield_point("hmcs.release.unmark");
      I.held.store(0);
    }
    B::yield_point("hmcs.leaf.read_count");
    const std::uint64_t count = I.status.load();
    if (count < threshold_) {
      B::yield_point("hmcs.leaf.peek_next");
      const std::uint64_t succ = I.next.load();
      if (succ != kNullHandle) {
        B::yield_point("hmcs.leaf.pass_local");
        nodes_[succ].status.store(count + 1);
        finish(I);
        return ReleaseStatus::Released;
      }
    }
    release_root(group_node_[f.group]);
    B::yield_point("hmcs.leaf.read_next");
    std::uint64_t succ = I.next.load();
    if (succ == kNullHandle) {
      B::yield_point("hmcs.leaf.detach");
      if (leaf_tail_[f.group].cas(me, kNullHandle)) {
        finish(I);
        return ReleaseStatus::Released;
      }
      B::spin_until([&] {
        B::yield_point("hmcs.leaf.wait_next");
        succ = I.next.load();
        return succ != kNullHandle;
      });
    }
    B::yield_point("hmcs.leaf.pass_parent");
    nodes_[succ].status.store(kAcquireParent);
    finish(I);
    return ReleaseStatus::Released;
  }

  void finish(Node& I) {
    if constexpr (V == Variant::Hardened) {
      B::yield_point("hmcs.release.reset");
      I.next.store(kNullHandle);
    }
  }

  std::uint64_t threshold_;
  Arena<Node> nodes_;
  std::unique_ptr<Cell[]> leaf_tail_;
  std::unique_ptr<std::uint64_t[]> group_node_;
  Cell root_tail_{kNullHandle};
};

// Hierarchical backoff: a waiter backs off less when the holder is in its
// own group. The lock word records the holder's group (and, hardened, pid).
template <class B, Variant V>
class HboLock : public LockBase {
 public:
  static constexpr Variant kVariant = V;
  using Cell = typename B::Cell;

  explicit HboLock(const LockOptions& o = {})
      : LockBase(o), local_(o.hbo_local_backoff), remote_(o.hbo_remote_backoff) {}

  ThreadContext make_context(ThreadId pid) { return mint(base_fields(pid)); }

  void acquire(ThreadContext& ctx) {
    const auto& f = fields(ctx);
    const std::uint64_t mine = encode(f);
    B::spin_until([&] {
      B::yield_point("hbo.acquire.try");
      if (word_.cas(0, mine)) return true;
      B::yield_point("hbo.acquire.inspect");
      const std::uint64_t v = word_.load();
      if (v != 0) B::backoff(group_of(v) == f.group ? local_ : remote_);
      return false;
    });
  }

  ReleaseStatus release(ThreadContext& ctx) { return release_impl(ctx, checks_enabled()); }
  ReleaseStatus release_unchecked(ThreadContext& ctx) { return release_impl(ctx, false); }

 private:
  static std::uint64_t encode(const detail::ContextFields& f) {
    if constexpr (V == Variant::Hardened)
      return (std::uint64_t{f.pid.value()} << 16) | f.group;
    else
      return (std::uint64_t{f.group} << 1) | 1u;
  }
  static std::uint64_t group_of(std::uint64_t v) {
    if constexpr (V == Variant::Hardened)
      return v & 0xffffu;
    else
      return v >> 1;
  }

  ReleaseStatus release_impl(ThreadContext& ctx, bool check) {
    if constexpr (V == Variant::Hardened) {
      if (check) {
        B::yield_point("hbo.release.check");
        if ((word_.load() >> 16) != fields(ctx).pid.value()) return flag_misuse();
      }
    }
    B::yield_point("hbo.release.store");
    word_.store(0);
    return ReleaseStatus::Released;
  }

  Cell word_{0};
  unsigned local_;
  unsigned remote_;
};

// Cohort lock: a global ticket lock plus one ticket lock per group. A
// releasing holder with a same-group waiter passes both levels to it, at
// most cohort_bound times in a row.
template <class B, Variant V>
class CohortTicketLock : public LockBase {
 public:
  static constexpr Variant kVariant = V;
  using Cell = typename B::Cell;

  explicit CohortTicketLock(const LockOptions& o = {})
      : LockBase(o), bound_(o.cohort_bound), local_(std::make_unique<Local[]>(groups())) {}

  ThreadContext make_context(ThreadId pid) { return mint(base_fields(pid)); }

  void acquire(ThreadContext& ctx) {
    auto& f = fields(ctx);
    Local& l = local_[f.group];
    B::yield_point("cohort.local.take");
    const std::uint64_t t = l.next.fetch_add(1);
    f.ticket = t;
    B::spin_until([&] {
      B::yield_point("cohort.local.wait");
      return l.serving.load() == t;
    });
    if constexpr (V == Variant::Hardened) {
      B::yield_point("cohort.local.pid");
      l.holder.store(f.pid.value());
    }
    B::yield_point("cohort.inherit.check");
    if (l.top_granted.load() != 0) {
      B::yield_point("cohort.inherit.take");
      l.top_granted.store(0);
      return;
    }
    B::yield_point("cohort.global.take");
    const std::uint64_t gt = global_next_.fetch_add(1);
    B::spin_until([&] {
      B::yield_point("cohort.global.wait");
      return global_serving_.load() == gt;
    });
  }

  ReleaseStatus release(ThreadContext& ctx) { return release_impl(ctx, checks_enabled()); }
  ReleaseStatus release_unchecked(ThreadContext& ctx) { return release_impl(ctx, false); }

 private:
  struct Local {
    Cell next{0};
    Cell serving{0};
    Cell holder{0};
    Cell top_granted{0};
    Cell streak{0};
  };

  ReleaseStatus release_impl(ThreadContext& ctx, bool check) {
    auto& f = fields(ctx);
    Local& l = local_[f.group];
    if constexpr (V == Variant::Hardened) {
      if (check) {
        B::yield_point("cohort.release.check");
        if (l.holder.load() != f.pid.value()) return flag_misuse();
      }
      B::yield_point("cohort.release.clear");
      l.holder.store(0);
    }
    B::yield_point("cohort.release.streak");
    const std::uint64_t streak = l.streak.load();
    B::yield_point("cohort.release.waiters");
    const bool waiters = l.next.load() != f.ticket + 1;
    if (waiters && streak < bound_) {
      B::yield_point("cohort.pass.streak");
      l.streak.store(streak + 1);
      B::yield_point("cohort.pass.grant");
      l.top_granted.store(1);
    } else {
      B::yield_point("cohort.global.reset");
      l.streak.store(0);
      B::yield_point("cohort.global.load");
      const std::uint64_t g = global_serving_.load();
      B::yield_point("cohort.global.store");
      global_serving_.store(g + 1);
    }
    B::yield_point("cohort.local.load");
    const std::uint64_t s = l.serving.load();
    B::yield_point("cohort.local.store");
    l.serving.store(s + 1);
    return ReleaseStatus::Released;
  }

  std::uint64_t bound_;
  std::unique_ptr<Local[]> local_;
  Cell global_next_{0};
  Cell global_serving_{0};
};

}  // namespace lockharden
