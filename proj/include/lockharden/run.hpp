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

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "scenario.hpp"

namespace lockharden::scenario {

// Classification of one execution. Occupancy comes only from the engine's
// own enter/exit bookkeeping, never from lock internals.
struct Verdict {
  std::uint32_t max_occupancy = 0;
  bool reader_writer_overlap = false;
  std::vector<std::uint32_t> starved;   // unfinished when nothing could run (or at the step bound)
  bool starves_misbehaving = false;     // an unbalanced release never returns
  bool starves_others = false;          // a well-behaved operation never completes
  std::uint64_t misuse_detected = 0;
  std::uint64_t reclaimed_writes = 0;
  std::uint64_t steps = 0;
  bool bound_hit = false;
  std::optional<std::int64_t> counter_divergence;   // egress - ingress (reader-writer locks)

  bool violates_mutex() const { return max_occupancy > 1; }
};

enum class ThreadStatus : std::uint8_t { Done, Spinning, Error, Runnable };

inline const char* to_string(ThreadStatus s) {
  switch (s) {
    case ThreadStatus::Done: return "done";
    case ThreadStatus::Spinning: return "spinning";
    case ThreadStatus::Error: return "error";
    case ThreadStatus::Runnable: return "runnable";
  }
  return "?";
}

struct ThreadReport {
  std::uint32_t index = 0;
  bool misbehaving = false;
  ThreadStatus status = ThreadStatus::Runnable;
  std::uint32_t pc = 0;
  std::uint64_t misuse_detected = 0;
  std::string error;
};

// One execution of a scenario on its own simulated world.
class Run {
 public:
  explicit Run(const Scenario& s, bool record = false) : scen_(s), ts_(s.threads.size()) {
    sim::World::Scope scope(world_);
    world_.set_recording(record);
    mutex_ = make_mutex<sim::SimBackend>(s.algorithm, s.variant, s.lock_options());
    for (std::uint32_t t = 0; t < s.threads.size(); ++t) {
      ts_[t].misbehaving = s.misbehaving(t);
      world_.add_thread([this, t] { body(t); });
    }
    world_.start();
  }
  ~Run() { world_.kill(); }
  Run(const Run&) = delete;
  Run& operator=(const Run&) = delete;

  const Scenario& scenario() const noexcept { return scen_; }
  sim::World& world() noexcept { return world_; }
  const sim::World& world() const noexcept { return world_; }
  std::size_t thread_count() const noexcept { return ts_.size(); }
  std::uint32_t pc(std::uint32_t t) const { return ts_.at(t).pc; }

  void grant(std::uint32_t t) {
    sim::World::Scope scope(world_);
    world_.grant(t);
    grants_.push_back(t);
  }
  const std::vector<std::uint32_t>& grants() const noexcept { return grants_; }

  std::vector<std::uint32_t> enabled() const { return world_.enabled_threads(); }
  std::uint32_t occupancy() const { return writers_ + (readers_ > 0 ? 1u : 0u); }
  std::uint32_t max_occupancy() const noexcept { return max_occupancy_; }
  bool reader_writer_overlap() const noexcept { return rw_overlap_; }
  std::uint64_t misuse_detected() const {
    std::uint64_t n = 0;
    for (const auto& t : ts_) n += t.misuse_detected;
    return n;
  }
  std::uint64_t state_hash() const { return world_.state_hash(); }

  // Classifies the execution so far. At a quiescent point every unfinished
  // thread is starved; at the step bound the same holds when `bound_starves`.
  Verdict verdict(bool bound_starves = false) const {
    Verdict v;
    v.max_occupancy = max_occupancy_;
    v.reader_writer_overlap = rw_overlap_;
    v.misuse_detected = misuse_detected();
    v.reclaimed_writes = world_.reclaimed_writes();
    v.steps = world_.steps();
    const bool quiet = enabled().empty();
    v.bound_hit = !quiet && !world_.all_finished();
    if (quiet || (v.bound_hit && bound_starves)) {
      for (std::uint32_t t = 0; t < ts_.size(); ++t) {
        if (world_.finished(t)) continue;
        v.starved.push_back(t);
        (stuck_in_misuse(t) ? v.starves_misbehaving : v.starves_others) = true;
      }
    }
    if (auto c = mutex_->read_counters()) {
      v.counter_divergence = static_cast<std::int64_t>(c->second) - static_cast<std::int64_t>(c->first);
    }
    return v;
  }

  std::vector<ThreadReport> thread_reports() const {
    std::vector<ThreadReport> out;
    const bool quiet = enabled().empty();
    for (std::uint32_t t = 0; t < ts_.size(); ++t) {
      ThreadReport r;
      r.index = t;
      r.misbehaving = ts_[t].misbehaving;
      r.pc = ts_[t].pc;
      r.misuse_detected = ts_[t].misuse_detected;
      if (world_.failed(t)) {
        r.status = ThreadStatus::Error;
        try {
          std::rethrow_exception(world_.error(t));
        } catch (const std::exception& e) {
          r.error = e.what();
        } catch (...) {
          r.error = "unknown error";
        }
      } else if (world_.finished(t)) {
        r.status = ThreadStatus::Done;
      } else if (quiet || world_.blocked(t)) {
        r.status = ThreadStatus::Spinning;
      }
      out.push_back(std::move(r));
    }
    return out;
  }

 private:
  bool stuck_in_misuse(std::uint32_t t) const {
    const auto& prog = scen_.threads[t];
    return ts_[t].pc < prog.size() && prog[ts_[t].pc].misuse();
  }

  struct ThreadState {
    std::uint32_t pc = 0;
    bool misbehaving = false;
    bool writing = false;
    bool reading = false;
    std::uint64_t misuse_detected = 0;
  };

  void body(std::uint32_t t) {
    ThreadState& st = ts_[t];
    const auto& prog = scen_.threads[t];
    auto ctx = mutex_->make_context(ThreadId(t + 1));
    for (std::uint32_t k = 0; k < prog.size(); ++k) {
      st.pc = k;
      exec(st, ctx, prog[k]);
    }
    st.pc = static_cast<std::uint32_t>(prog.size());
  }

  void exec(ThreadState& st, ThreadContext& ctx, const ProgramOp& op) {
    sim::World& w = world_;
    switch (op.code) {
      case OpCode::Acquire:
      case OpCode::WLock:
        mutex_->acquire(ctx);
        enter(st, false);
        break;
      case OpCode::Release:
      case OpCode::WUnlock:
        if (st.writing) leave(st, false);
        note(st, mutex_->release(ctx));
        break;
      case OpCode::Misuse:
      case OpCode::MisuseWUnlock:
        note(st, mutex_->release(ctx));
        break;
      case OpCode::MisuseFresh: {
        auto fresh = mutex_->make_context(ctx.pid());
        note(st, mutex_->release(fresh));
        break;
      }
      case OpCode::Cs:
        for (unsigned i = 0; i < op.n; ++i) {
          w.yield_point("cs");
          w.nop();
        }
        break;
      case OpCode::RLock:
        mutex_->read_lock(ctx);
        enter(st, true);
        break;
      case OpCode::RUnlock:
        if (st.reading) leave(st, true);
        mutex_->read_unlock(ctx);
        w.event(sim::EventKind::Released, "read");
        break;
      case OpCode::MisuseRUnlock:
        mutex_->read_unlock(ctx);
        w.event(sim::EventKind::Released, "read (unbalanced)");
        break;
    }
  }

  void enter(ThreadState& st, bool reader) {
    (reader ? st.reading : st.writing) = true;
    ++(reader ? readers_ : writers_);
    world_.event(sim::EventKind::CsEnter, reader ? "read" : "");
    max_occupancy_ = std::max(max_occupancy_, occupancy());
    if (writers_ > 0 && readers_ > 0) rw_overlap_ = true;
  }

  void leave(ThreadState& st, bool reader) {
    world_.yield_point("cs");
    world_.nop();
    (reader ? st.reading : st.writing) = false;
    --(reader ? readers_ : writers_);
    world_.event(sim::EventKind::CsExit, reader ? "read" : "");
  }

  void note(ThreadState& st, ReleaseStatus s) {
    if (s == ReleaseStatus::MisuseDetected) {
      ++st.misuse_detected;
      world_.event(sim::EventKind::MisuseDetected);
    } else {
      world_.event(sim::EventKind::Released);
    }
  }

  const Scenario& scen_;
  sim::World world_;
  std::unique_ptr<Mutex<sim::SimBackend>> mutex_;
  std::vector<ThreadState> ts_;
  std::uint32_t writers_ = 0;
  std::uint32_t readers_ = 0;
  std::uint32_t max_occupancy_ = 0;
  bool rw_overlap_ = false;
  std::vector<std::uint32_t> grants_;
};

}  // namespace lockharden::scenario
