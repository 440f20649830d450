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

// Software mutual exclusion from loads and stores only: Peterson (two
// threads), Fischer, Lamport's fast algorithms, and the bakery.
//
// Fischer and Lamport's first algorithm are timing-based. On the simulator
// their delay is modelled exactly (see sim::World::delay); natively it is a
// fixed spin and correctness depends on the machine.

#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>

#include "core.hpp"

namespace lockharden {

// Peterson and the bakery tolerate an unbalanced release as written (it
// resets the caller's own flag or number), so they have no hardened form.
template <class B, Variant V = Variant::Original>
class PetersonLock : public LockBase {
 public:
  static constexpr Variant kVariant = V;
  using Cell = typename B::Cell;

  explicit PetersonLock(const LockOptions& o = {}) : LockBase(o) {}

  ThreadContext make_context(ThreadId pid) {
    if (pid.value() > 2)
      throw ThreadLimitExceeded("Peterson supports two threads, got pid " + std::to_string(pid.value()));
    return mint(base_fields(pid));
  }

  void acquire(ThreadContext& ctx) {
    const std::uint64_t i = fields(ctx).pid.value() - 1;
    const std::uint64_t j = 1 - i;
    B::yield_point("peterson.acquire.flag");
    flag_[i].store(1);
    B::yield_point("peterson.acquire.victim");
    victim_.store(i);
    B::spin_until([&] {
      B::yield_point("peterson.acquire.wait_flag");
      if (flag_[j].load() == 0) return true;
      B::yield_point("peterson.acquire.wait_victim");
      return victim_.load() != i;
    });
  }

  ReleaseStatus release(ThreadContext& ctx) { return release_impl(ctx, checks_enabled()); }
  ReleaseStatus release_unchecked(ThreadContext& ctx) { return release_impl(ctx, false); }

 private:
  ReleaseStatus release_impl(ThreadContext& ctx, bool) {
    const std::uint64_t i = fields(ctx).pid.value() - 1;
    B::yield_point("peterson.release.flag");
    flag_[i].store(0);
    return ReleaseStatus::Released;
  }

  Cell flag_[2];
  Cell victim_{0};
};

template <class B, Variant V>
class FischerLock : public LockBase {
 public:
  static constexpr Variant kVariant = V;
  using Cell = typename B::Cell;

  explicit FischerLock(const LockOptions& o = {}) : LockBase(o), delay_(o.fisher_delay == 0 ? 1 : o.fisher_delay) {}

  ThreadContext make_context(ThreadId pid) { return mint(base_fields(pid)); }

  void acquire(ThreadContext& ctx) {
    const std::uint64_t i = fields(ctx).pid.value();
    for (;;) {
      B::spin_until([&] {
        B::yield_point("fischer.acquire.wait_free");
        if (x_.load() != 0) return false;
        B::region_enter();
        return true;
      });
      B::yield_point("fischer.acquire.claim");
      x_.store(i);
      B::region_leave();
      B::yield_point("fischer.acquire.delay");
      B::delay(delay_);
      B::yield_point("fischer.acquire.verify");
      if (x_.load() == i) return;
    }
  }

  ReleaseStatus release(ThreadContext& ctx) { return release_impl(ctx, checks_enabled()); }
  ReleaseStatus release_unchecked(ThreadContext& ctx) { return release_impl(ctx, false); }

 private:
  ReleaseStatus release_impl(ThreadContext& ctx, bool check) {
    if constexpr (V == Variant::Hardened) {
      if (check) {
        B::yield_point("fischer.release.check");
        if (x_.load() != fields(ctx).pid.value()) return flag_misuse();
      }
    }
    B::yield_point("fischer.release.store");
    x_.store(0);
    return ReleaseStatus::Released;
  }

  unsigned delay_;
  Cell x_{0};
};

// Lamport's fast mutual exclusion with a delay on the contended path.
// A fast-path holder stays inside its timed region until it releases: the
// delay must outlast a competitor's whole pass through the critical section.
//
// The hardened form records the holder in its own word. y cannot serve as
// the holder check: a contender that read y == 0 just before the holder set
// it may overwrite y while the holder is inside.
template <class B, Variant V>
class Lamport1Lock : public LockBase {
 public:
  static constexpr Variant kVariant = V;
  using Cell = typename B::Cell;

  explicit Lamport1Lock(const LockOptions& o = {}) : LockBase(o), delay_(o.fisher_delay == 0 ? 1 : o.fisher_delay) {}

  ThreadContext make_context(ThreadId pid) { return mint(base_fields(pid)); }

  void acquire(ThreadContext& ctx) {
    auto& f = fields(ctx);
    const std::uint64_t i = f.pid.value();
    for (;;) {
      B::spin_until([&] {
        B::yield_point("lamport1.acquire.set_x");
        x_.store(i);
        B::yield_point("lamport1.acquire.test_y");
        if (y_.load() != 0) return false;
        B::region_enter();
        return true;
      });
      B::yield_point("lamport1.acquire.set_y");
      y_.store(i);
      B::yield_point("lamport1.acquire.test_x");
      if (x_.load() == i) {
        f.fast_path = true;
        claim(i);
        return;
      }
      B::region_leave();
      B::yield_point("lamport1.acquire.delay");
      B::delay(delay_);
      B::yield_point("lamport1.acquire.recheck_y");
      if (y_.load() == i) {
        f.fast_path = false;
        claim(i);
        return;
      }
    }
  }

  ReleaseStatus release(ThreadContext& ctx) { return release_impl(ctx, checks_enabled()); }
  ReleaseStatus release_unchecked(ThreadContext& ctx) { return release_impl(ctx, false); }

 private:
  ReleaseStatus release_impl(ThreadContext& ctx, bool check) {
    auto& f = fields(ctx);
    if constexpr (V == Variant::Hardened) {
      if (check) {
        B::yield_point("lamport1.release.check");
        if (owner_.load() != f.pid.value()) return flag_misuse();
      }
      B::yield_point("lamport1.release.disown");
      owner_.store(0);
    }
    B::yield_point("lamport1.release.clear_y");
    y_.store(0);
    if (f.fast_path) {
      B::region_leave();
      f.fast_path = false;
    }
    return ReleaseStatus::Released;
  }

  void claim(std::uint64_t i) {
    if constexpr (V == Variant::Hardened) {
      B::yield_point("lamport1.acquire.own");
      owner_.store(i);
    }
  }

  unsigned delay_;
  Cell x_{0};
  Cell y_{0};
  Cell owner_{0};
};

// Lamport's fast algorithm without delays: per-thread b[] flags.
template <class B, Variant V>
class Lamport2Lock : public LockBase {
 public:
  static constexpr Variant kVariant = V;
  using Cell = typename B::Cell;

  explicit Lamport2Lock(const LockOptions& o = {}) : LockBase(o), b_(std::make_unique<Cell[]>(o.max_procs + 1)) {}

  ThreadContext make_context(ThreadId pid) { return mint(base_fields(pid)); }

  void acquire(ThreadContext& ctx) {
    const std::uint64_t i = fields(ctx).pid.value();
    for (;;) {
      B::yield_point("lamport2.acquire.raise");
      b_[i].store(1);
      B::yield_point("lamport2.acquire.set_x");
      x_.store(i);
      B::yield_point("lamport2.acquire.test_y");
      if (y_.load() != 0) {
        B::yield_point("lamport2.acquire.lower");
        b_[i].store(0);
        await_y_free();
        continue;
      }
      B::yield_point("lamport2.acquire.set_y");
      y_.store(i);
      B::yield_point("lamport2.acquire.test_x");
      if (x_.load() != i) {
        B::yield_point("lamport2.acquire.lower");
        b_[i].store(0);
        for (std::uint64_t j = 1; j <= max_procs(); ++j) {
          B::spin_until([&] {
            B::yield_point("lamport2.acquire.await_b");
            return b_[j].load() == 0;
          });
        }
        B::yield_point("lamport2.acquire.recheck_y");
        if (y_.load() != i) {
          await_y_free();
          continue;
        }
      }
      if constexpr (V == Variant::Hardened) {
        B::yield_point("lamport2.acquire.own");
        owner_.store(i);
      }
      return;
    }
  }

  ReleaseStatus release(ThreadContext& ctx) { return release_impl(ctx, checks_enabled()); }
  ReleaseStatus release_unchecked(ThreadContext& ctx) { return release_impl(ctx, false); }

 private:
  void await_y_free() {
    B::spin_until([&] {
      B::yield_point("lamport2.acquire.await_y");
      return y_.load() == 0;
    });
  }

  ReleaseStatus release_impl(ThreadContext& ctx, bool check) {
    const std::uint64_t i = fields(ctx).pid.value();
    if constexpr (V == Variant::Hardened) {
      if (check) {
        B::yield_point("lamport2.release.check");
        if (owner_.load() != i) return flag_misuse();
      }
      B::yield_point("lamport2.release.disown");
      owner_.store(0);
    }
    B::yield_point("lamport2.release.clear_y");
    y_.store(0);
    B::yield_point("lamport2.release.lower");
    b_[i].store(0);
    return ReleaseStatus::Released;
  }

  std::unique_ptr<Cell[]> b_;
  Cell x_{0};
  Cell y_{0};
  Cell owner_{0};
};

template <class B, Variant V = Variant::Original>
class BakeryLock : public LockBase {
 public:
  static constexpr Variant kVariant = V;
  using Cell = typename B::Cell;

  explicit BakeryLock(const LockOptions& o = {})
      : LockBase(o), choosing_(std::make_unique<Cell[]>(o.max_procs + 1)),
        number_(std::make_unique<Cell[]>(o.max_procs + 1)) {}

  ThreadContext make_context(ThreadId pid) { return mint(base_fields(pid)); }

  void acquire(ThreadContext& ctx) {
    const std::uint64_t i = fields(ctx).pid.value();
    B::yield_point("bakery.acquire.choose");
    choosing_[i].store(1);
    std::uint64_t top = 0;
    for (std::uint64_t j = 1; j <= max_procs(); ++j) {
      B::yield_point("bakery.acquire.scan");
      top = std::max(top, number_[j].load());
    }
    const std::uint64_t mine = top + 1;
    B::yield_point("bakery.acquire.number");
    number_[i].store(mine);
    B::yield_point("bakery.acquire.chosen");
    choosing_[i].store(0);
    for (std::uint64_t j = 1; j <= max_procs(); ++j) {
      if (j == i) continue;
      B::spin_until([&] {
        B::yield_point("bakery.acquire.await_choice");
        return choosing_[j].load() == 0;
      });
      B::spin_until([&] {
        B::yield_point("bakery.acquire.await_turn");
        const std::uint64_t n = number_[j].load();
        return n == 0 || n > mine || (n == mine && j > i);
      });
    }
  }

  ReleaseStatus release(ThreadContext& ctx) { return release_impl(ctx, checks_enabled()); }
  ReleaseStatus release_unchecked(ThreadContext& ctx) { return release_impl(ctx, false); }

 private:
  ReleaseStatus release_impl(ThreadContext& ctx, bool) {
    const std::uint64_t i = fields(ctx).pid.value();
    B::yield_point("bakery.release.clear");
    number_[i].store(0);
    return ReleaseStatus::Released;
  }

  std::unique_ptr<Cell[]> choosing_;
  std::unique_ptr<Cell[]> number_;
};

}  // namespace lockharden
