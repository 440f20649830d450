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

// Test-and-set family, ticket, Anderson array-based queue, and
// Graunke-Thakkar locks. Each is a template over a backend B and a Variant;
// the hardened variant differs from the original only in the misuse check
// and the bookkeeping that feeds it.

#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>

#include "core.hpp"

namespace lockharden {

enum class TasFlavor : std::uint8_t { Tas, Tatas, TatasBackoff };

// L holds 0/1 (original) or the holder's pid (hardened).
template <class B, Variant V, TasFlavor F = TasFlavor::Tas>
class TasLock : public LockBase {
 public:
  static constexpr Variant kVariant = V;
  using Cell = typename B::Cell;

  explicit TasLock(const LockOptions& o = {}) : LockBase(o), backoff_initial_(o.backoff_initial), backoff_cap_(o.backoff_cap) {}

  ThreadContext make_context(ThreadId pid) { return mint(base_fields(pid)); }

  void acquire(ThreadContext& ctx) {
    const std::uint64_t mine = V == Variant::Hardened ? fields(ctx).pid.value() : 1;
    auto try_once = [&] {
      B::yield_point("tas.acquire.try");
      if constexpr (V == Variant::Hardened)
        return lock_.cas(0, mine);
      else
        return lock_.swap(1) == 0;
    };
    if constexpr (F == TasFlavor::Tas) {
      B::spin_until(try_once);
    } else {
      unsigned delay = backoff_initial_;
      for (;;) {
        B::spin_until([&] {
          B::yield_point("tas.acquire.test");
          return lock_.load() == 0;
        });
        if (try_once()) return;
        if constexpr (F == TasFlavor::TatasBackoff) {
          B::backoff(delay);
          delay = std::min(delay * 2, backoff_cap_);
        }
      }
    }
  }

  ReleaseStatus release(ThreadContext& ctx) { return release_impl(ctx, checks_enabled()); }
  ReleaseStatus release_unchecked(ThreadContext& ctx) { return release_impl(ctx, false); }

  std::uint64_t word() const { return lock_.load(); }

 private:
  ReleaseStatus release_impl(ThreadContext& ctx, bool check) {
    if constexpr (V == Variant::Hardened) {
      if (check) {
        B::yield_point("tas.release.check");
        if (lock_.load() != fields(ctx).pid.value()) return flag_misuse();
      }
    }
    B::yield_point("tas.release.store");
    lock_.store(0);
    return ReleaseStatus::Released;
  }

  Cell lock_{0};
  unsigned backoff_initial_;
  unsigned backoff_cap_;
};

template <class B, Variant V>
class TicketLock : public LockBase {
 public:
  static constexpr Variant kVariant = V;
  using Cell = typename B::Cell;

  explicit TicketLock(const LockOptions& o = {}) : LockBase(o) {}

  ThreadContext make_context(ThreadId pid) { return mint(base_fields(pid)); }

  void acquire(ThreadContext& ctx) {
    auto& f = fields(ctx);
    B::yield_point("ticket.acquire.take");
    const std::uint64_t my = next_ticket_.fetch_add(1);
    f.ticket = my;
    B::spin_until([&] {
      B::yield_point("ticket.acquire.wait");
      return now_serving_.load() == my;
    });
    if constexpr (V == Variant::Hardened) {
      B::yield_point("ticket.acquire.pid");
      holder_.store(f.pid.value());
    }
  }

  ReleaseStatus release(ThreadContext& ctx) { return release_impl(ctx, checks_enabled()); }
  ReleaseStatus release_unchecked(ThreadContext& ctx) { return release_impl(ctx, false); }

  // Cohort detection: another thread has taken a ticket after the holder.
  bool has_waiters(const ThreadContext& ctx) const {
    B::yield_point("ticket.waiters");
    return next_ticket_.load() != detail::ContextAccess::fields(ctx).ticket + 1;
  }

  std::uint64_t now_serving() const { return now_serving_.load(); }
  std::uint64_t next_ticket() const { return next_ticket_.load(); }

 private:
  ReleaseStatus release_impl(ThreadContext& ctx, bool check) {
    if constexpr (V == Variant::Hardened) {
      if (check) {
        B::yield_point("ticket.release.check");
        if (holder_.load() != fields(ctx).pid.value()) return flag_misuse();
      }
      // Cleared before the hand-off so it cannot race the next holder's write.
      B::yield_point("ticket.release.clear");
      holder_.store(0);
    }
    B::yield_point("ticket.release.load");
    const std::uint64_t v = now_serving_.load();
    B::yield_point("ticket.release.store");
    now_serving_.store(v + 1);
    return ReleaseStatus::Released;
  }

  Cell next_ticket_{0};
  Cell now_serving_{0};
  Cell holder_{0};
};

// Anderson's array-based queue lock, token-circulation form.
template <class B, Variant V>
class AbqlLock : public LockBase {
 public:
  static constexpr Variant kVariant = V;
  static constexpr std::uint64_t kMustWait = 0;
  static constexpr std::uint64_t kHasLock = 1;
  using Cell = typename B::Cell;

  explicit AbqlLock(const LockOptions& o = {}) : LockBase(o), slots_(std::make_unique<Cell[]>(o.max_procs)) {
    slots_[0].store(kHasLock);
  }

  ThreadContext make_context(ThreadId pid) { return mint(base_fields(pid)); }

  void acquire(ThreadContext& ctx) {
    auto& f = fields(ctx);
    B::yield_point("abql.acquire.take");
    const std::uint64_t place = queue_last_.fetch_add(1) % max_procs();
    B::spin_until([&] {
      B::yield_point("abql.acquire.wait");
      return slots_[place].load() == kHasLock;
    });
    B::yield_point("abql.acquire.consume");
    slots_[place].store(kMustWait);
    if constexpr (V == Variant::Hardened)
      f.place.set(place);
    else
      f.ticket = place;
  }

  ReleaseStatus release(ThreadContext& ctx) { return release_impl(ctx, checks_enabled()); }
  ReleaseStatus release_unchecked(ThreadContext& ctx) { return release_impl(ctx, false); }

 private:
  ReleaseStatus release_impl(ThreadContext& ctx, bool check) {
    auto& f = fields(ctx);
    std::uint64_t place;
    if constexpr (V == Variant::Hardened) {
      if (check && !f.place.valid()) return flag_misuse();
      place = f.place.get();
    } else {
      place = f.ticket;
    }
    B::yield_point("abql.release.pass");
    slots_[(place + 1) % max_procs()].store(kHasLock);
    if constexpr (V == Variant::Hardened) f.place.reset();
    return ReleaseStatus::Released;
  }

  std::unique_ptr<Cell[]> slots_;
  Cell queue_last_{0};
};

// Graunke-Thakkar. Slot 0 only bootstraps the queue; thread pid owns
// slots[pid]. The tail word packs (slot index << 1 | bit to wait on).
template <class B, Variant V>
class GtLock : public LockBase {
 public:
  static constexpr Variant kVariant = V;
  using Cell = typename B::Cell;

  explicit GtLock(const LockOptions& o = {})
      : LockBase(o), slots_(std::make_unique<Cell[]>(o.max_procs + 1)),
        holder_(V == Variant::Hardened ? std::make_unique<Cell[]>(o.max_procs + 1) : nullptr) {
    // tail = &slots[0] | !slots[0]
    tail_.store((0u << 1) | 1u);
  }

  ThreadContext make_context(ThreadId pid) { return mint(base_fields(pid)); }

  void acquire(ThreadContext& ctx) {
    const std::uint64_t pid = fields(ctx).pid.value();
    B::yield_point("gt.acquire.read_own");
    const std::uint64_t mine = slots_[pid].load() & 1u;
    B::yield_point("gt.acquire.enqueue");
    const std::uint64_t prev = tail_.swap((pid << 1) | mine);
    const std::uint64_t pred = prev >> 1;
    const std::uint64_t locked = prev & 1u;
    B::spin_until([&] {
      B::yield_point("gt.acquire.wait");
      return (slots_[pred].load() & 1u) != locked;
    });
    if constexpr (V == Variant::Hardened) {
      B::yield_point("gt.acquire.holder");
      holder_[pid].store(1);
    }
  }

  ReleaseStatus release(ThreadContext& ctx) { return release_impl(ctx, checks_enabled()); }
  ReleaseStatus release_unchecked(ThreadContext& ctx) { return release_impl(ctx, false); }

 private:
  ReleaseStatus release_impl(ThreadContext& ctx, bool check) {
    const std::uint64_t pid = fields(ctx).pid.value();
    if constexpr (V == Variant::Hardened) {
      if (check) {
        B::yield_point("gt.release.check");
        if (holder_[pid].load() == 0) return flag_misuse();
      }
      B::yield_point("gt.release.clear");
      holder_[pid].store(0);
    }
    B::yield_point("gt.release.toggle");
    slots_[pid].fetch_xor(1);
    return ReleaseStatus::Released;
  }

  std::unique_ptr<Cell[]> slots_;
  Cell tail_;
  std::unique_ptr<Cell[]> holder_;
};

}  // namespace lockharden
