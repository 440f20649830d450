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

// Runtime names for every lock, compile-time dispatch from (Algorithm,
// Variant) to the concrete type, and a type-erased Mutex for callers that
// pick the lock at runtime.

#pragma once

#include <array>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>

#include "core.hpp"
#include "locks_basic.hpp"
#include "locks_hier.hpp"
#include "locks_queue.hpp"
#include "locks_sw.hpp"
#include "rwlock.hpp"

namespace lockharden {

enum class Algorithm : std::uint8_t {
  Tas, Tatas, TatasBackoff, Ticket, Abql, Gt,
  Mcs, Clh, McsK42, Hemlock,
  Hmcs, Hbo, CohortTicket, CohortRw,
  Peterson, Fisher, Lamport1, Lamport2, Bakery,
};

struct AlgorithmInfo {
  Algorithm id;
  std::string_view name;
  std::string_view title;
  bool has_hardened;
  bool reader_writer;
  bool software_only;  // loads and stores only; native use needs opting in
  std::uint32_t thread_cap;  // 0 = MAX_PROCS
};

inline constexpr std::array<AlgorithmInfo, 19> kAlgorithms{{
    {Algorithm::Tas, "tas", "TAS", true, false, false, 0},
    {Algorithm::Tatas, "tatas", "TATAS", true, false, false, 0},
    {Algorithm::TatasBackoff, "tatas_bo", "TATAS with backoff", true, false, false, 0},
    {Algorithm::Ticket, "ticket", "Ticket", true, false, false, 0},
    {Algorithm::Abql, "abql", "ABQL", true, false, false, 0},
    {Algorithm::Gt, "gt", "Graunke-Thakkar", true, false, false, 0},
    {Algorithm::Mcs, "mcs", "MCS", true, false, false, 0},
    {Algorithm::Clh, "clh", "CLH", true, false, false, 0},
    {Algorithm::McsK42, "mcs_k42", "MCS-K42", false, false, false, 0},
    {Algorithm::Hemlock, "hemlock", "Hemlock", true, false, false, 0},
    {Algorithm::Hmcs, "hmcs", "HMCS", true, false, false, 0},
    {Algorithm::Hbo, "hbo", "HBO", true, false, false, 0},
    {Algorithm::CohortTicket, "c_tkt_tkt", "C-TKT-TKT", true, false, false, 0},
    {Algorithm::CohortRw, "c_rw_np", "C-RW-NP", true, true, false, 0},
    {Algorithm::Peterson, "peterson", "Peterson", false, false, true, 2},
    {Algorithm::Fisher, "fisher", "Fischer", true, false, true, 0},
    {Algorithm::Lamport1, "lamport1", "Lamport 1", true, false, true, 0},
    {Algorithm::Lamport2, "lamport2", "Lamport 2", true, false, true, 0},
    {Algorithm::Bakery, "bakery", "Bakery", false, false, true, 0},
}};

inline const AlgorithmInfo& info(Algorithm a) { return kAlgorithms[static_cast<std::size_t>(a)]; }

inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
  for (const auto& i : kAlgorithms)
    if (i.name == s) return i.id;
  return std::nullopt;
}

struct UnsupportedVariant : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

template <class B, Variant V>
using TatasLock = TasLock<B, V, TasFlavor::Tatas>;
template <class B, Variant V>
using TatasBackoffLock = TasLock<B, V, TasFlavor::TatasBackoff>;

namespace detail {

template <class B, template <class, Variant> class L, bool HasHardened = true, class F>
decltype(auto) pick_variant(Algorithm a, Variant v, F&& f) {
  if (v == Variant::Original) return f(std::type_identity<L<B, Variant::Original>>{});
  if constexpr (HasHardened) return f(std::type_identity<L<B, Variant::Hardened>>{});
  throw UnsupportedVariant(std::string(info(a).name) + " has no hardened variant");
}

}  // namespace detail

// Calls f(std::type_identity<LockType>{}) for the concrete lock type.
template <class B, class F>
decltype(auto) dispatch(Algorithm a, Variant v, F&& f) {
  using detail::pick_variant;
  switch (a) {
    case Algorithm::Tas: return pick_variant<B, TasLock>(a, v, f);
    case Algorithm::Tatas: return pick_variant<B, TatasLock>(a, v, f);
    case Algorithm::TatasBackoff: return pick_variant<B, TatasBackoffLock>(a, v, f);
    case Algorithm::Ticket: return pick_variant<B, TicketLock>(a, v, f);
    case Algorithm::Abql: return pick_variant<B, AbqlLock>(a, v, f);
    case Algorithm::Gt: return pick_variant<B, GtLock>(a, v, f);
    case Algorithm::Mcs: return pick_variant<B, McsLock>(a, v, f);
    case Algorithm::Clh: return pick_variant<B, ClhLock>(a, v, f);
    case Algorithm::McsK42: return pick_variant<B, McsK42Lock, false>(a, v, f);
    case Algorithm::Hemlock: return pick_variant<B, HemlockLock>(a, v, f);
    case Algorithm::Hmcs: return pick_variant<B, HmcsLock>(a, v, f);
    case Algorithm::Hbo: return pick_variant<B, HboLock>(a, v, f);
    case Algorithm::CohortTicket: return pick_variant<B, CohortTicketLock>(a, v, f);
    case Algorithm::CohortRw: return pick_variant<B, CohortRwLock>(a, v, f);
    case Algorithm::Peterson: return pick_variant<B, PetersonLock, false>(a, v, f);
    case Algorithm::Fisher: return pick_variant<B, FischerLock>(a, v, f);
    case Algorithm::Lamport1: return pick_variant<B, Lamport1Lock>(a, v, f);
    case Algorithm::Lamport2: return pick_variant<B, Lamport2Lock>(a, v, f);
    case Algorithm::Bakery: return pick_variant<B, BakeryLock, false>(a, v, f);
  }
  throw std::invalid_argument("unknown algorithm");
}

struct NotReaderWriter : std::logic_error {
  NotReaderWriter() : std::logic_error("lock has no read side") {}
};

template <class B>
class Mutex {
 public:
  virtual ~Mutex() = default;
  virtual ThreadContext make_context(ThreadId pid) = 0;
  virtual void acquire(ThreadContext& ctx) = 0;
  virtual ReleaseStatus release(ThreadContext& ctx) = 0;
  virtual ReleaseStatus release_unchecked(ThreadContext& ctx) = 0;
  virtual void read_lock(ThreadContext&) { throw NotReaderWriter(); }
  virtual void read_unlock(ThreadContext&) { throw NotReaderWriter(); }
  virtual bool reader_writer() const { return false; }
  // (ingress, egress) of a reader-writer lock's read indicator.
  virtual std::optional<std::pair<std::uint64_t, std::uint64_t>> read_counters() const { return std::nullopt; }
  virtual std::uint64_t misuse_count() const = 0;
  virtual bool checks_enabled() const = 0;
};

template <class B, class L>
class MutexAdapter final : public Mutex<B> {
 public:
  explicit MutexAdapter(const LockOptions& o) : lock_(o) {}
  ThreadContext make_context(ThreadId pid) override { return lock_.make_context(pid); }
  void acquire(ThreadContext& ctx) override { lock_.acquire(ctx); }
  ReleaseStatus release(ThreadContext& ctx) override { return lock_.release(ctx); }
  ReleaseStatus release_unchecked(ThreadContext& ctx) override { return lock_.release_unchecked(ctx); }
  void read_lock(ThreadContext& ctx) override {
    if constexpr (requires { lock_.read_lock(ctx); })
      lock_.read_lock(ctx);
    else
      throw NotReaderWriter();
  }
  void read_unlock(ThreadContext& ctx) override {
    if constexpr (requires { lock_.read_unlock(ctx); })
      lock_.read_unlock(ctx);
    else
      throw NotReaderWriter();
  }
  bool reader_writer() const override { return requires(L& l, ThreadContext& c) { l.read_lock(c); }; }
  std::optional<std::pair<std::uint64_t, std::uint64_t>> read_counters() const override {
    if constexpr (requires { lock_.ingress(); })
      return std::make_pair(lock_.ingress(), lock_.egress());
    else
      return std::nullopt;
  }
  std::uint64_t misuse_count() const override { return lock_.misuse_count(); }
  bool checks_enabled() const override { return lock_.checks_enabled(); }
  L& lock() noexcept { return lock_; }

 private:
  L lock_;
};

template <class B>
std::unique_ptr<Mutex<B>> make_mutex(Algorithm a, Variant v, const LockOptions& o = {}) {
  return dispatch<B>(a, v, [&]<class L>(std::type_identity<L>) -> std::unique_ptr<Mutex<B>> {
    return std::make_unique<MutexAdapter<B, L>>(o);
  });
}

}  // namespace lockharden
