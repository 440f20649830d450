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

// Queue locks: MCS, CLH, the K42 MCS variant, and Hemlock.
//
// Queue nodes live in a fixed arena owned by the lock and are named by
// handles, so tail words hold plain integers (kNullHandle when empty).
// make_context() allocates the context's node.

#pragma once

#include <cstdint>
#include <limits>

#include "core.hpp"

namespace lockharden {

inline std::size_t node_capacity(const LockOptions& o) { return 4u * o.max_procs + 8u; }

template <class B, Variant V>
class McsLock : public LockBase {
 public:
  static constexpr Variant kVariant = V;
  using Cell = typename B::Cell;

  explicit McsLock(const LockOptions& o = {}) : LockBase(o), nodes_(node_capacity(o)) {}

  ThreadContext make_context(ThreadId pid) {
    auto f = base_fields(pid);
    f.node = nodes_.allocate();
    return mint(f);
  }

  void acquire(ThreadContext& ctx) {
    const std::uint64_t me = fields(ctx).node;
    Node& I = nodes_[me];
    B::yield_point("mcs.acquire.init");
    I.next.store(kNullHandle);
    B::yield_point("mcs.acquire.enqueue");
    const std::uint64_t pred = tail_.swap(me);
    if (pred != kNullHandle) {
      B::yield_point("mcs.acquire.mark");
      I.locked.store(1);
      B::yield_point("mcs.acquire.link");
      nodes_[pred].next.store(me);
      B::spin_until([&] {
        B::yield_point("mcs.acquire.wait");
        return I.locked.load() == 0;
      });
    }
    if constexpr (V == Variant::Hardened) {
      // From here on `locked` means "this node holds the lock".
      B::yield_point("mcs.acquire.held");
      I.locked.store(1);
    }
  }

  ReleaseStatus release(ThreadContext& ctx) { return release_impl(ctx, checks_enabled()); }
  ReleaseStatus release_unchecked(ThreadContext& ctx) { return release_impl(ctx, false); }

 private:
  struct Node {
    Cell next{kNullHandle};
    Cell locked{0};
  };

  ReleaseStatus release_impl(ThreadContext& ctx, bool check) {
    const std::uint64_t me = fields(ctx).node;
    Node& I = nodes_[me];
    if constexpr (V == Variant::Hardened) {
      if (check) {
        B::yield_point("mcs.release.check");
        if (I.locked.load() == 0) return flag_misuse();
      }
      B::yield_point("mcs.release.unmark");
      I.locked.store(0);
    }
    B::yield_point("mcs.release.read_next");
    std::uint64_t succ = I.next.load();
    bool handed = false;
    if (succ == kNullHandle) {
      B::yield_point("mcs.release.detach");
      if (tail_.cas(me, kNullHandle)) {
        handed = true;
      } else {
        B::spin_until([&] {
          B::yield_point("mcs.release.wait_next");
          succ = I.next.load();
          return succ != kNullHandle;
        });
      }
    }
    if (!handed) {
      B::yield_point("mcs.release.grant");
      nodes_[succ].locked.store(0);
    }
    // After a successful detach no successor exists, so next is already NULL.
    if constexpr (V == Variant::Hardened) {
      if (!handed) {
        B::yield_point("mcs.release.reset");
        I.next.store(kNullHandle);
      }
    }
    return ReleaseStatus::Released;
  }

  Arena<Node> nodes_;
  Cell tail_{kNullHandle};
};

// CLH with node recycling: on release a thread adopts its predecessor's
// node. The predecessor link is kept in the node itself.
template <class B, Variant V>
class ClhLock : public LockBase {
 public:
  static constexpr Variant kVariant = V;
  using Cell = typename B::Cell;

  explicit ClhLock(const LockOptions& o = {}) : LockBase(o), nodes_(node_capacity(o)) {
    const std::uint64_t dummy = nodes_.allocate();
    tail_.store(dummy);
  }

  ThreadContext make_context(ThreadId pid) {
    auto f = base_fields(pid);
    f.node = nodes_.allocate();
    return mint(f);
  }

  void acquire(ThreadContext& ctx) {
    const std::uint64_t me = fields(ctx).node;
    Node& I = nodes_[me];
    B::yield_point("clh.acquire.mark");
    I.succ_must_wait.store(1);
    B::yield_point("clh.acquire.enqueue");
    const std::uint64_t pred = tail_.swap(me);
    B::yield_point("clh.acquire.link");
    I.prev.store(pred);
    B::spin_until([&] {
      B::yield_point("clh.acquire.wait");
      return nodes_[pred].succ_must_wait.load() == 0;
    });
  }

  ReleaseStatus release(ThreadContext& ctx) { return release_impl(ctx, checks_enabled()); }
  ReleaseStatus release_unchecked(ThreadContext& ctx) { return release_impl(ctx, false); }

 private:
  struct Node {
    Cell succ_must_wait{0};
    Cell prev{kNullHandle};
  };

  ReleaseStatus release_impl(ThreadContext& ctx, bool check) {
    auto& f = fields(ctx);
    const std::uint64_t me = f.node;
    Node& I = nodes_[me];
    B::yield_point("clh.release.read_prev");
    const std::uint64_t pred = I.prev.load();
    if constexpr (V == Variant::Hardened) {
      if (check && pred == kNullHandle) return flag_misuse();
      B::yield_point("clh.release.unlink");
      I.prev.store(kNullHandle);
    }
    B::yield_point("clh.release.grant");
    I.succ_must_wait.store(0);
    // A never-enqueued node has no predecessor to adopt; keep it.
    if (pred != kNullHandle) f.node = pred;
    return ReleaseStatus::Released;
  }

  Arena<Node> nodes_;
  Cell tail_{kNullHandle};
};

// MCS-K42: the lock word is itself a queue node q; waiters use short-lived
// nodes that exist only during acquire. There is no hardened form.
template <class B, Variant V = Variant::Original>
class McsK42Lock : public LockBase {
  static_assert(V == Variant::Original, "MCS-K42 has no hardened variant");

 public:
  static constexpr Variant kVariant = V;
  static constexpr std::uint64_t kWaiting = kAcqHandle;
  using Cell = typename B::Cell;

  explicit McsK42Lock(const LockOptions& o = {}) : LockBase(o), nodes_(node_capacity(o)), q_(nodes_.allocate()) {}

  ThreadContext make_context(ThreadId pid) {
    auto f = base_fields(pid);
    f.node = nodes_.allocate();
    Node& n = nodes_[f.node];
    B::set_live(n.tail, false);
    B::set_live(n.next, false);
    return mint(f);
  }

  void acquire(ThreadContext& ctx) {
    const std::uint64_t me = fields(ctx).node;
    Node& q = nodes_[q_];
    Node& n = nodes_[me];
    for (;;) {
      B::yield_point("k42.acquire.read_tail");
      const std::uint64_t prev = q.tail.load();
      if (prev == kNullHandle) {
        B::yield_point("k42.acquire.take_free");
        if (q.tail.cas(kNullHandle, q_)) return;
        continue;
      }
      // n comes into existence on this thread's stack.
      B::set_live(n.tail, true);
      B::set_live(n.next, true);
      B::yield_point("k42.acquire.init_tail");
      n.tail.store(kWaiting);
      B::yield_point("k42.acquire.init_next");
      n.next.store(kNullHandle);
      B::yield_point("k42.acquire.enqueue");
      if (!q.tail.cas(prev, me)) {
        B::set_live(n.tail, false);
        B::set_live(n.next, false);
        continue;
      }
      B::yield_point("k42.acquire.link");
      nodes_[prev].next.store(me);
      B::spin_until([&] {
        B::yield_point("k42.acquire.wait");
        return n.tail.load() != kWaiting;
      });
      B::yield_point("k42.acquire.read_succ");
      std::uint64_t succ = n.next.load();
      if (succ == kNullHandle) {
        B::yield_point("k42.acquire.clear_next");
        q.next.store(kNullHandle);
        B::yield_point("k42.acquire.self_tail");
        if (!q.tail.cas(me, q_)) {
          B::spin_until([&] {
            B::yield_point("k42.acquire.wait_succ");
            succ = n.next.load();
            return succ != kNullHandle;
          });
          B::yield_point("k42.acquire.publish_succ");
          q.next.store(succ);
        }
      } else {
        B::yield_point("k42.acquire.publish_succ");
        q.next.store(succ);
      }
      B::set_live(n.tail, false);
      B::set_live(n.next, false);
      return;
    }
  }

  ReleaseStatus release(ThreadContext& ctx) { return release_impl(ctx, false); }
  ReleaseStatus release_unchecked(ThreadContext& ctx) { return release_impl(ctx, false); }

 private:
  struct Node {
    Cell tail{kNullHandle};
    Cell next{kNullHandle};
  };

  ReleaseStatus release_impl(ThreadContext&, bool) {
    Node& q = nodes_[q_];
    B::yield_point("k42.release.read_next");
    std::uint64_t succ = q.next.load();
    if (succ == kNullHandle) {
      B::yield_point("k42.release.detach");
      if (q.tail.cas(q_, kNullHandle)) return ReleaseStatus::Released;
      B::spin_until([&] {
        B::yield_point("k42.release.wait_next");
        succ = q.next.load();
        return succ != kNullHandle;
      });
    }
    B::yield_point("k42.release.grant");
    nodes_[succ].tail.store(kNullHandle);
    return ReleaseStatus::Released;
  }

  Arena<Node> nodes_;
  std::uint64_t q_;
};

// Hemlock: each thread owns one Grant word; the holder hands off by writing
// the lock's identity into its own Grant.
template <class B, Variant V>
class HemlockLock : public LockBase {
 public:
  static constexpr Variant kVariant = V;
  static constexpr std::uint64_t kLockTag = std::numeric_limits<std::uint64_t>::max() - 1;
  using Cell = typename B::Cell;

  explicit HemlockLock(const LockOptions& o = {}) : LockBase(o), nodes_(node_capacity(o)) {}

  ThreadContext make_context(ThreadId pid) {
    auto f = base_fields(pid);
    f.node = nodes_.allocate();
    return mint(f);
  }

  void acquire(ThreadContext& ctx) {
    const std::uint64_t me = fields(ctx).node;
    B::yield_point("hemlock.acquire.enqueue");
    const std::uint64_t pred = tail_.swap(me);
    if (pred != kNullHandle) {
      Cell& g = nodes_[pred].grant;
      B::spin_until([&] {
        B::yield_point("hemlock.acquire.wait");
        return g.load() == kLockTag;
      });
      B::yield_point("hemlock.acquire.ack");
      g.store(kNullHandle);
    }
    if constexpr (V == Variant::Hardened) {
      B::yield_point("hemlock.acquire.held");
      nodes_[me].grant.store(kAcqHandle);
    }
  }

  ReleaseStatus release(ThreadContext& ctx) { return release_impl(ctx, checks_enabled()); }
  ReleaseStatus release_unchecked(ThreadContext& ctx) { return release_impl(ctx, false); }

 private:
  struct Node {
    Cell grant{kNullHandle};
  };

  ReleaseStatus release_impl(ThreadContext& ctx, bool check) {
    const std::uint64_t me = fields(ctx).node;
    Cell& g = nodes_[me].grant;
    if constexpr (V == Variant::Hardened) {
      if (check) {
        B::yield_point("hemlock.release.check");
        if (g.load() != kAcqHandle) return flag_misuse();
      }
    }
    B::yield_point("hemlock.release.detach");
    if (tail_.cas(me, kNullHandle)) {
      if constexpr (V == Variant::Hardened) {
        B::yield_point("hemlock.release.clear");
        g.store(kNullHandle);
      }
      return ReleaseStatus::Released;
    }
    B::yield_point("hemlock.release.grant");
    g.store(kLockTag);
    B::spin_until([&] {
      B::yield_point("hemlock.release.wait_ack");
      return g.load() == kNullHandle;
    });
    return ReleaseStatus::Released;
  }

  Arena<Node> nodes_;
  Cell tail_{kNullHandle};
};

}  // namespace lockharden
