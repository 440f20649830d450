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

#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "substrate.hpp"

namespace lockharden {

struct CapacityExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ThreadLimitExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Holder identity stored in lock words. 0 is reserved as UNLOCKED / absent.
class ThreadId {
 public:
  constexpr ThreadId() noexcept = default;
  constexpr explicit ThreadId(std::uint32_t pid) noexcept : pid_(pid) {}
  constexpr std::uint32_t value() const noexcept { return pid_; }
  constexpr bool valid() const noexcept { return pid_ != 0; }
  friend constexpr bool operator==(ThreadId, ThreadId) noexcept = default;

 private:
  std::uint32_t pid_ = 0;
};

inline constexpr std::uint32_t kDefaultMaxProcs = 64;

// Hands out pids 1..max_procs.
class ThreadRegistry {
 public:
  explicit ThreadRegistry(std::uint32_t max_procs = kDefaultMaxProcs) : max_procs_(max_procs) {}

  ThreadId register_thread() {
    std::uint32_t cur = next_.load();
    do {
      if (cur >= max_procs_)
        throw CapacityExceeded("thread registry full (" + std::to_string(max_procs_) + " threads)");
    } while (!next_.compare_exchange_weak(cur, cur + 1));
    return ThreadId(cur + 1);
  }

  std::uint32_t registered() const noexcept { return next_.load(); }
  std::uint32_t max_procs() const noexcept { return max_procs_; }

 private:
  std::uint32_t max_procs_;
  std::atomic<std::uint32_t> next_{0};
};

enum class ReleaseStatus : std::uint8_t { Released, MisuseDetected };

inline const char* to_string(ReleaseStatus s) {
  return s == ReleaseStatus::Released ? "released" : "misuse_detected";
}

enum class Variant : std::uint8_t { Original, Hardened };

inline const char* to_string(Variant v) { return v == Variant::Original ? "original" : "hardened"; }

inline std::optional<Variant> parse_variant(std::string_view s) {
  if (s == "original") return Variant::Original;
  if (s == "hardened") return Variant::Hardened;
  return std::nullopt;
}

// Process-wide misuse-check switch, read from LOCKHARDEN_CHECKS.
struct MisusePolicy {
  bool checks_enabled = true;

  static MisusePolicy from_env() {
    const char* v = std::getenv("LOCKHARDEN_CHECKS");
    if (v == nullptr) return {};
    const std::string_view s(v);
    return {!(s == "off" || s == "0" || s == "false" || s == "no")};
  }
};

// Construction parameters shared by every lock. Fields a lock does not use
// are ignored.
struct LockOptions {
  std::uint32_t max_procs = kDefaultMaxProcs;
  std::uint32_t groups = 2;              // NUMA groups (HMCS, HBO, cohort, C-RW-NP)
  std::uint32_t hmcs_threshold = 64;     // intra-group passing bound, HMCS
  std::uint32_t cohort_bound = 64;       // intra-group passing bound, cohort
  unsigned backoff_initial = 1;
  unsigned backoff_cap = 1024;
  unsigned hbo_local_backoff = 4;        // same-domain backoff units
  unsigned hbo_remote_backoff = 64;      // remote-domain backoff units
  unsigned fisher_delay = 2;             // delay length in simulator steps
  std::optional<bool> checks;            // overrides MisusePolicy::from_env()
};

// Reserved handle values flowing through tail/grant words.
inline constexpr std::uint64_t kNullHandle = 0;
inline constexpr std::uint64_t kAcqHandle = 1;
inline constexpr std::uint64_t kFirstNodeHandle = 2;

// ABQL slot index wrapper; INVALID outside a held acquisition.
class Place {
 public:
  static constexpr std::uint64_t kInvalid = std::numeric_limits<std::uint64_t>::max();
  constexpr Place() noexcept = default;
  constexpr bool valid() const noexcept { return v_ != kInvalid; }
  constexpr std::uint64_t get() const noexcept { return v_; }
  constexpr void set(std::uint64_t v) noexcept { v_ = v; }
  constexpr void reset() noexcept { v_ = kInvalid; }

 private:
  std::uint64_t v_ = kInvalid;
};

class ThreadContext;

namespace detail {

// Per-thread protocol state carried from acquire to release. Only lock
// implementations reach it, through ContextAccess.
struct ContextFields {
  ThreadId pid;
  std::uint32_t group = 0;
  std::uint64_t ticket = 0;        // Ticket, cohort local ticket
  Place place;                     // ABQL
  std::uint64_t node = kNullHandle;   // own qnode / grant node / stack node
  std::uint64_t aux = kNullHandle;    // second node (unused by most locks)
  bool fast_path = false;          // Lamport 1: entered without delay
  const void* owner = nullptr;     // the mutex that minted this context
};

struct ContextAccess;

}  // namespace detail

// Opaque, move-only. Minted by a lock's make_context(); a fresh context is
// in the unowned state.
class ThreadContext {
 public:
  ThreadContext(ThreadContext&&) noexcept = default;
  ThreadContext& operator=(ThreadContext&&) noexcept = default;
  ThreadContext(const ThreadContext&) = delete;
  ThreadContext& operator=(const ThreadContext&) = delete;

  ThreadId pid() const noexcept { return f_.pid; }
  std::uint32_t group() const noexcept { return f_.group; }

 private:
  friend struct detail::ContextAccess;
  explicit ThreadContext(detail::ContextFields f) : f_(f) {}
  detail::ContextFields f_;
};

namespace detail {

struct ContextAccess {
  static ThreadContext make(ContextFields f) { return ThreadContext(f); }
  static ContextFields& fields(ThreadContext& c) noexcept { return c.f_; }
  static const ContextFields& fields(const ThreadContext& c) noexcept { return c.f_; }
};

}  // namespace detail

// Misuse counter and check switch common to all locks.
class LockBase {
 public:
  explicit LockBase(const LockOptions& o)
      : max_procs_(o.max_procs), groups_(o.groups == 0 ? 1 : o.groups),
        checks_(o.checks.value_or(MisusePolicy::from_env().checks_enabled)) {
    if (max_procs_ == 0) throw std::invalid_argument("max_procs must be positive");
  }

  std::uint64_t misuse_count() const noexcept { return misuses_.load(std::memory_order_relaxed); }
  bool checks_enabled() const noexcept { return checks_; }
  std::uint32_t max_procs() const noexcept { return max_procs_; }
  std::uint32_t groups() const noexcept { return groups_; }

 protected:
  ReleaseStatus flag_misuse() noexcept {
    misuses_.fetch_add(1, std::memory_order_relaxed);
    return ReleaseStatus::MisuseDetected;
  }

  detail::ContextFields base_fields(ThreadId pid) const {
    if (!pid.valid() || pid.value() > max_procs_)
      throw CapacityExceeded("pid " + std::to_string(pid.value()) + " outside 1.." + std::to_string(max_procs_));
    detail::ContextFields f;
    f.pid = pid;
    f.group = (pid.value() - 1) % groups_;
    f.owner = this;
    return f;
  }

  static detail::ContextFields& fields(ThreadContext& c) noexcept { return detail::ContextAccess::fields(c); }
  static ThreadContext mint(const detail::ContextFields& f) { return detail::ContextAccess::make(f); }

 private:
  std::uint32_t max_procs_;
  std::uint32_t groups_;
  bool checks_;
  std::atomic<std::uint64_t> misuses_{0};
};

// Fixed-capacity node pool addressed by handles (index + kFirstNodeHandle).
// Storage never moves, so handles stay valid under concurrency.
template <class Node>
class Arena {
 public:
  explicit Arena(std::size_t capacity) : capacity_(capacity), nodes_(std::make_unique<Node[]>(capacity)) {}

  std::uint64_t allocate() {
    const std::size_t i = used_.fetch_add(1);
    if (i >= capacity_) throw CapacityExceeded("qnode arena exhausted");
    return i + kFirstNodeHandle;
  }

  Node& operator[](std::uint64_t handle) noexcept { return nodes_[handle - kFirstNodeHandle]; }
  const Node& operator[](std::uint64_t handle) const noexcept { return nodes_[handle - kFirstNodeHandle]; }
  std::size_t capacity() const noexcept { return capacity_; }

 private:
  std::size_t capacity_;
  std::unique_ptr<Node[]> nodes_;
  std::atomic<std::size_t> used_{0};
};

}  // namespace lockharden
