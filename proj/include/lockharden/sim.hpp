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

// Deterministic simulated memory.
//
// Each simulated thread runs on its own fiber. A thread parks before every
// Cell operation; the scheduler grants exactly one parked thread at a time,
// which then executes that one operation plus whatever local code follows
// until its next Cell operation. Only one fiber ever runs, so the world is
// single-threaded and a (program, grant sequence) pair fully determines the
// trace.
//
// Spin loops are modelled precisely enough for exhaustive search without
// unbounded unrolling: an iteration of spin_until() that returns false and
// changed no cell value is rolled back out of the thread's history, and the
// thread is disabled until some cell it touched in that iteration holds a
// different value. A thread that stays disabled once no thread can run is
// spinning forever.

#pragma once

#include <boost/context/fiber.hpp>
#include <boost/context/pooled_fixedsize_stack.hpp>

#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "substrate.hpp"

namespace lockharden::sim {

inline constexpr std::uint32_t kNoCell = std::numeric_limits<std::uint32_t>::max();
inline constexpr std::uint32_t kNoThread = std::numeric_limits<std::uint32_t>::max();

struct InvalidSchedule : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TraceStep {
  std::uint64_t step = 0;
  std::uint32_t thread = 0;
  std::uint32_t cell = kNoCell;
  OpKind op = OpKind::Nop;
  std::uint64_t old_value = 0;
  std::uint64_t new_value = 0;
  std::string label;
};

enum class EventKind : std::uint8_t { CsEnter, CsExit, Released, MisuseDetected, ReclaimedWrite, Note };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::CsEnter: return "cs_enter";
    case EventKind::CsExit: return "cs_exit";
    case EventKind::Released: return "released";
    case EventKind::MisuseDetected: return "misuse_detected";
    case EventKind::ReclaimedWrite: return "reclaimed_write";
    case EventKind::Note: return "note";
  }
  return "?";
}

struct TraceEvent {
  std::uint64_t step = 0;
  std::uint32_t thread = 0;
  EventKind kind = EventKind::Note;
  std::string detail;
};

inline std::uint64_t mix(std::uint64_t h, std::uint64_t v) noexcept {
  // splitmix64 finaliser over (h + v)
  std::uint64_t z = h + 0x9e3779b97f4a7c15ULL + v;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class World {
 public:
  World() : stacks_(64 * 1024) {}
  World(const World&) = delete;
  World& operator=(const World&) = delete;
  ~World() { kill(); }

  static World*& current() {
    thread_local World* w = nullptr;
    return w;
  }
  static World& require() {
    World* w = current();
    if (w == nullptr) throw std::logic_error("simulated Cell created outside a sim::World");
    return *w;
  }

  // RAII installer for current().
  class Scope {
   public:
    explicit Scope(World& w) : prev_(current()) { current() = &w; }
    ~Scope() { current() = prev_; }
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    World* prev_;
  };

  // ---- cells -------------------------------------------------------------

  std::uint32_t new_cell(std::uint64_t init) {
    cells_.push_back(init);
    live_.push_back(true);
    return static_cast<std::uint32_t>(cells_.size() - 1);
  }
  std::uint64_t peek(std::uint32_t cell) const { return cells_.at(cell); }
  std::size_t cell_count() const noexcept { return cells_.size(); }
  void set_live(std::uint32_t cell, bool live) { live_.at(cell) = live; }

  // ---- threads -----------------------------------------------------------

  std::uint32_t add_thread(std::function<void()> body) {
    auto t = std::make_unique<Thread>();
    t->body = std::move(body);
    threads_.push_back(std::move(t));
    return static_cast<std::uint32_t>(threads_.size() - 1);
  }
  std::size_t thread_count() const noexcept { return threads_.size(); }

  // Runs every thread up to its first Cell operation. Not a step.
  void start() {
    for (std::uint32_t i = 0; i < threads_.size(); ++i) {
      Thread& t = *threads_[i];
      t.fib = boost::context::fiber(std::allocator_arg, stacks_,
                                    [this, i](boost::context::fiber&& back) { return run_thread(i, std::move(back)); });
      resume(i);
    }
  }

  bool finished(std::uint32_t t) const { return threads_.at(t)->finished; }
  bool failed(std::uint32_t t) const { return threads_.at(t)->error != nullptr; }
  std::exception_ptr error(std::uint32_t t) const { return threads_.at(t)->error; }
  bool blocked(std::uint32_t t) const { return !finished(t) && !enabled(t); }
  std::uint32_t running() const noexcept { return cur_; }
  bool in_thread() const noexcept { return cur_ != kNoThread; }
  const std::string& pending_label(std::uint32_t t) const { return threads_.at(t)->pending_label; }
  OpKind pending_op(std::uint32_t t) const { return threads_.at(t)->pending_kind; }

  bool enabled(std::uint32_t i) const {
    const Thread& t = *threads_.at(i);
    if (t.finished) return false;
    if (t.blocked) {
      bool woken = false;
      for (const auto& [cell, value] : t.block_watch) {
        if (cells_[cell] != value) {
          woken = true;
          break;
        }
      }
      if (!woken) return false;
    }
    if (t.pending_kind == OpKind::Delay) {
      for (std::uint32_t j = 0; j < threads_.size(); ++j)
        if (j != i && threads_[j]->in_region && !threads_[j]->finished) return false;
    }
    return true;
  }

  std::vector<std::uint32_t> enabled_threads() const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < threads_.size(); ++i)
      if (enabled(i)) out.push_back(i);
    return out;
  }

  bool all_finished() const {
    for (const auto& t : threads_)
      if (!t->finished) return false;
    return true;
  }

  // Executes exactly one atomic step of thread i.
  void grant(std::uint32_t i) {
    if (i >= threads_.size()) throw InvalidSchedule("grant to unknown thread " + std::to_string(i));
    Thread& t = *threads_[i];
    if (t.finished) throw InvalidSchedule("grant to finished thread " + std::to_string(i));
    if (!enabled(i)) throw InvalidSchedule("grant to blocked thread " + std::to_string(i));
    t.blocked = false;
    t.block_watch.clear();
    ++steps_;
    resume(i);
  }

  std::uint64_t steps() const noexcept { return steps_; }

  std::uint64_t state_hash() const {
    std::uint64_t h = mix(0, cells_.size());
    for (std::uint64_t v : cells_) h = mix(h, v);
    for (const auto& tp : threads_) {
      const Thread& t = *tp;
      h = mix(h, (t.finished ? 1u : 0u) | (t.error ? 2u : 0u) | (t.blocked ? 4u : 0u) | (t.in_region ? 8u : 0u));
      h = mix(h, t.hist);
      if (t.blocked)
        for (const auto& [cell, value] : t.block_watch) h = mix(mix(h, cell), value);
    }
    return h;
  }

  // ---- called from thread fibers -------------------------------------------

  std::uint64_t op(std::uint32_t cell, OpKind kind, std::uint64_t a, std::uint64_t b, bool* ok) {
    if (cur_ == kNoThread) return apply(kNoThread, cell, kind, a, b, ok);
    const std::uint32_t self = cur_;
    Thread& t = *threads_[self];
    t.pending_kind = kind;
    t.pending_cell = cell;
    t.pending_label = std::move(t.label);
    t.label.clear();
    park(t);
    return apply(self, cell, kind, a, b, ok);
  }

  void yield_point(std::string_view label) {
    if (cur_ != kNoThread) threads_[cur_]->label.assign(label);
  }

  // A scheduling point that touches no cell.
  void nop() { op(kNoCell, OpKind::Nop, 0, 0, nullptr); }

  // Timed delay: `steps` scheduling points, the last of which may only run
  // once no other thread is inside a timed region.
  void delay(unsigned steps) {
    for (unsigned i = 1; i < steps; ++i) nop();
    op(kNoCell, OpKind::Delay, 0, 0, nullptr);
  }

  void region_enter() {
    if (cur_ != kNoThread) threads_[cur_]->in_region = true;
  }
  void region_leave() {
    if (cur_ != kNoThread) threads_[cur_]->in_region = false;
  }

  template <class Pred>
  void spin_until(Pred&& pred) {
    if (cur_ == kNoThread) {
      if (!pred()) throw std::logic_error("spin_until would block outside a simulated thread");
      return;
    }
    Thread& t = *threads_[cur_];
    for (;;) {
      t.in_iter = true;
      t.iter_changed = false;
      t.iter_saved = t.hist;
      t.iter_watch.clear();
      const bool done = pred();
      t.in_iter = false;
      if (done) return;
      if (t.iter_watch.empty()) throw std::logic_error("spin_until predicate performed no Cell operation");
      if (!t.iter_changed) {
        t.hist = t.iter_saved;
        t.blocked = true;
        t.block_watch = std::move(t.iter_watch);
        t.iter_watch.clear();
      }
    }
  }

  // Engine-level events (CS entry/exit, release outcomes) interleaved with
  // the atomic steps.
  void event(EventKind kind, std::string detail = {}) {
    const std::uint32_t who = cur_ == kNoThread ? 0u : cur_;
    if (kind == EventKind::ReclaimedWrite) ++reclaimed_writes_;
    if (recording_) events_.push_back({steps_, who, kind, std::move(detail)});
  }

  // ---- trace ---------------------------------------------------------------

  void set_recording(bool on) noexcept { recording_ = on; }
  const std::vector<TraceStep>& trace() const noexcept { return trace_; }
  const std::vector<TraceEvent>& events() const noexcept { return events_; }
  std::uint64_t reclaimed_writes() const noexcept { return reclaimed_writes_; }

  // Destroys all fibers, unwinding any thread still parked.
  void kill() {
    for (auto& t : threads_) {
      if (t->fib) {
        std::uint32_t saved = cur_;
        cur_ = kNoThread;
        t->fib = boost::context::fiber{};
        cur_ = saved;
      }
    }
    threads_.clear();
    cur_ = kNoThread;
  }

 private:
  struct Thread {
    boost::context::fiber fib;
    boost::context::fiber back;
    std::function<void()> body;
    bool finished = false;
    std::exception_ptr error;

    OpKind pending_kind = OpKind::Nop;
    std::uint32_t pending_cell = kNoCell;
    std::string label;
    std::string pending_label;

    std::uint64_t hist = 0;
    bool in_iter = false;
    bool iter_changed = false;
    std::uint64_t iter_saved = 0;
    std::vector<std::pair<std::uint32_t, std::uint64_t>> iter_watch;
    bool blocked = false;
    std::vector<std::pair<std::uint32_t, std::uint64_t>> block_watch;
    bool in_region = false;
  };

  boost::context::fiber run_thread(std::uint32_t i, boost::context::fiber&& back) {
    Thread& t = *threads_[i];
    t.back = std::move(back);
    try {
      t.body();
    } catch (const boost::context::detail::forced_unwind&) {
      throw;
    } catch (...) {
      t.error = std::current_exception();
    }
    t.finished = true;
    t.in_region = false;
    return std::move(t.back);
  }

  void park(Thread& t) { t.back = std::move(t.back).resume(); }

  void resume(std::uint32_t i) {
    Thread& t = *threads_[i];
    const std::uint32_t saved = cur_;
    cur_ = i;
    t.fib = std::move(t.fib).resume();
    cur_ = saved;
  }

  std::uint64_t apply(std::uint32_t self, std::uint32_t cell, OpKind kind, std::uint64_t a, std::uint64_t b, bool* ok) {
    std::uint64_t old = 0, neu = 0, ret = 0;
    bool wrote = false;
    if (cell != kNoCell) {
      old = cells_.at(cell);
      neu = old;
    }
    switch (kind) {
      case OpKind::Load: ret = old; break;
      case OpKind::Store: neu = a; wrote = true; break;
      case OpKind::Swap: neu = a; ret = old; wrote = true; break;
      case OpKind::Cas: {
        const bool success = old == a;
        if (success) {
          neu = b;
          wrote = true;
        }
        if (ok) *ok = success;
        ret = old;
        break;
      }
      case OpKind::FetchAdd: neu = old + a; ret = old; wrote = true; break;
      case OpKind::FetchXor: neu = old ^ a; ret = old; wrote = true; break;
      case OpKind::Nop:
      case OpKind::Delay: break;
    }
    if (cell != kNoCell) cells_[cell] = neu;
    if (self == kNoThread) return ret;

    Thread& t = *threads_[self];
    t.hist = mix(mix(t.hist, static_cast<std::uint64_t>(kind)), ret);
    if (kind == OpKind::Cas) t.hist = mix(t.hist, ok && *ok ? 1 : 0);
    if (t.in_iter && cell != kNoCell) {
      t.iter_watch.emplace_back(cell, neu);
      if (neu != old) t.iter_changed = true;
    }
    if (recording_) trace_.push_back({steps_ - 1, self, cell, kind, old, neu, t.pending_label});
    if (wrote && cell != kNoCell && !live_[cell]) {
      ++reclaimed_writes_;
      if (recording_) events_.push_back({steps_ - 1, self, EventKind::ReclaimedWrite, "cell " + std::to_string(cell)});
    }
    return ret;
  }

  std::vector<std::uint64_t> cells_;
  std::vector<bool> live_;
  std::vector<std::unique_ptr<Thread>> threads_;
  boost::context::pooled_fixedsize_stack stacks_;
  std::uint32_t cur_ = kNoThread;
  std::uint64_t steps_ = 0;
  bool recording_ = true;
  std::vector<TraceStep> trace_;
  std::vector<TraceEvent> events_;
  std::uint64_t reclaimed_writes_ = 0;
};

class SimCell {
 public:
  SimCell() : SimCell(0) {}
  explicit SimCell(std::uint64_t init) : world_(&World::require()), id_(world_->new_cell(init)) {}
  SimCell(const SimCell&) = delete;
  SimCell& operator=(const SimCell&) = delete;

  std::uint64_t load() const { return world_->op(id_, OpKind::Load, 0, 0, nullptr); }
  void store(std::uint64_t v) { world_->op(id_, OpKind::Store, v, 0, nullptr); }
  std::uint64_t swap(std::uint64_t v) { return world_->op(id_, OpKind::Swap, v, 0, nullptr); }
  bool cas(std::uint64_t expect, std::uint64_t desired) {
    bool ok = false;
    world_->op(id_, OpKind::Cas, expect, desired, &ok);
    return ok;
  }
  std::uint64_t fetch_add(std::uint64_t d) { return world_->op(id_, OpKind::FetchAdd, d, 0, nullptr); }
  std::uint64_t fetch_xor(std::uint64_t m) { return world_->op(id_, OpKind::FetchXor, m, 0, nullptr); }

  std::uint32_t id() const noexcept { return id_; }

 private:
  World* world_;
  std::uint32_t id_;
};

struct SimBackend {
  using Cell = SimCell;
  static constexpr bool kSimulated = true;

  static void yield_point(std::string_view label) { World::require().yield_point(label); }
  template <class Pred>
  static void spin_until(Pred&& pred) {
    World::require().spin_until(std::forward<Pred>(pred));
  }
  // The scheduler already covers every possible delay.
  static void backoff(unsigned) noexcept {}
  static void region_enter() { World::require().region_enter(); }
  static void region_leave() { World::require().region_leave(); }
  static void delay(unsigned steps) { World::require().delay(steps); }
  static void set_live(Cell& c, bool live) { World::require().set_live(c.id(), live); }
};

// One JSON object per line: {step, thread, cell, op, old, new, label}.
inline void write_trace_jsonl(std::ostream& os, const std::vector<TraceStep>& steps) {
  for (const auto& s : steps) {
    nlohmann::ordered_json j;
    j["step"] = s.step;
    j["thread"] = s.thread;
    if (s.cell == kNoCell)
      j["cell"] = nullptr;
    else
      j["cell"] = s.cell;
    j["op"] = to_string(s.op);
    j["old"] = s.old_value;
    j["new"] = s.new_value;
    j["label"] = s.label;
    os << j.dump() << '\n';
  }
}

}  // namespace lockharden::sim
