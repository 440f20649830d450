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

// Shared-word substrate: the only memory primitive a lock may touch.
//
// Every lock is a template over a backend policy B that provides
//   B::Cell                      64-bit sequentially consistent word
//   B::yield_point(label)        names the next atomic step
//   B::spin_until(pred)          spin loop; pred performs Cell ops
//   B::backoff(units)            bounded delay between retries
//   B::region_enter/leave()      timed-region markers (timing-based locks)
//   B::delay(steps)              timed delay (Fischer, Lamport)
//   B::set_live(cell, bool)      lifetime annotation for stack-like nodes
//
// NativeBackend maps these onto std::atomic; sim::SimBackend (sim.hpp)
// runs them on a deterministic, single-threaded scheduler.

#pragma once

#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <thread>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#endif

namespace lockharden {

inline constexpr std::size_t kCacheLine = 64;

enum class OpKind : std::uint8_t { Load, Store, Swap, Cas, FetchAdd, FetchXor, Nop, Delay };

inline const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::Load: return "load";
    case OpKind::Store: return "store";
    case OpKind::Swap: return "swap";
    case OpKind::Cas: return "cas";
    case OpKind::FetchAdd: return "fetch_add";
    case OpKind::FetchXor: return "fetch_xor";
    case OpKind::Nop: return "nop";
    case OpKind::Delay: return "delay";
  }
  return "?";
}

// Thrown out of a native spin loop when a watchdog asks all spinners to stop.
struct SpinAborted : std::runtime_error {
  SpinAborted() : std::runtime_error("spin aborted by watchdog") {}
};

inline void cpu_relax() {
#if defined(__x86_64__) || defined(__i386__)
  _mm_pause();
#else
  std::atomic_signal_fence(std::memory_order_seq_cst);
#endif
}

class NativeCell {
 public:
  NativeCell() noexcept : v_(0) {}
  explicit NativeCell(std::uint64_t init) noexcept : v_(init) {}
  NativeCell(const NativeCell&) = delete;
  NativeCell& operator=(const NativeCell&) = delete;

  std::uint64_t load() const noexcept { return v_.load(); }
  void store(std::uint64_t v) noexcept { v_.store(v); }
  std::uint64_t swap(std::uint64_t v) noexcept { return v_.exchange(v); }
  bool cas(std::uint64_t expect, std::uint64_t desired) noexcept {
    return v_.compare_exchange_strong(expect, desired);
  }
  std::uint64_t fetch_add(std::uint64_t d) noexcept { return v_.fetch_add(d); }
  std::uint64_t fetch_xor(std::uint64_t m) noexcept { return v_.fetch_xor(m); }

 private:
  alignas(kCacheLine) std::atomic<std::uint64_t> v_;
};

static_assert(sizeof(NativeCell) == kCacheLine);

struct NativeBackend {
  using Cell = NativeCell;
  static constexpr bool kSimulated = false;

  // Process-wide abort switch polled by spinners once they start yielding.
  static std::atomic<bool>& abort_flag() {
    static std::atomic<bool> flag{false};
    return flag;
  }

  static bool single_cpu() {
    static const bool one = std::thread::hardware_concurrency() <= 1;
    return one;
  }

  static void yield_point(std::string_view) noexcept {}

  // Spins with pause, then falls back to yielding. On a single CPU a
  // spinner cannot make progress without the holder running, so it yields
  // from the first failed iteration.
  template <class Pred>
  static void spin_until(Pred&& pred) {
    const unsigned pause_limit = single_cpu() ? 0u : 128u;
    for (unsigned i = 0; !pred(); ++i) {
      if (i < pause_limit) {
        cpu_relax();
      } else {
        if (abort_flag().load(std::memory_order_relaxed)) throw SpinAborted();
        std::this_thread::yield();
      }
    }
  }

  static void backoff(unsigned units) {
    if (single_cpu()) {
      std::this_thread::yield();
      return;
    }
    for (unsigned i = 0; i < units; ++i) cpu_relax();
  }

  static void region_enter() noexcept {}
  static void region_leave() noexcept {}

  // Real-time delay for timing-based software locks. One step is a fixed
  // number of pause iterations; correctness of such locks on real hardware
  // depends on this exceeding the other threads' doorway time.
  static void delay(unsigned steps) {
    for (unsigned i = 0; i < steps * 4096u; ++i) cpu_relax();
  }

  static void set_live(Cell&, bool) noexcept {}
};

}  // namespace lockharden
