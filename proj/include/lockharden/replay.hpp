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

// Deterministic replay along a schedule.
//
// Schedule directives, applied in order (thread indices are 0-based):
//   T:n       grant thread T exactly n steps; T must be runnable throughout
//   T:op      run T until its current program op completes, T finishes, or
//             T starts spinning; skipped if T cannot run
//   T:@label  run T until its next step carries `label` or T finishes
// After the directives the remaining threads run round-robin (or, given a
// seed, in a seeded random order), one step at a time, until all finish,
// nothing can run, or the step bound is reached.

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "run.hpp"

namespace lockharden::scenario {

using sim::InvalidSchedule;

struct Directive {
  enum Kind : std::uint8_t { Steps, Op, Label } kind = Steps;
  std::uint32_t thread = 0;
  std::uint64_t steps = 0;
  std::string label;
};

inline Directive parse_directive(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == s.size())
    throw InvalidSchedule("bad schedule directive '" + s + "'");
  auto digits = [](const std::string& x) {
    return !x.empty() && x.size() <= 18 && x.find_first_not_of("0123456789") == std::string::npos;
  };
  if (!digits(s.substr(0, colon))) throw InvalidSchedule("bad thread index in directive '" + s + "'");
  Directive d;
  try {
    std::size_t used = 0;
    d.thread = static_cast<std::uint32_t>(std::stoul(s.substr(0, colon), &used));
    if (used != colon) throw InvalidSchedule("");
  } catch (const std::exception&) {
    throw InvalidSchedule("bad thread index in directive '" + s + "'");
  }
  const std::string rest = s.substr(colon + 1);
  if (rest == "op") {
    d.kind = Directive::Op;
  } else if (rest[0] == '@') {
    d.kind = Directive::Label;
    d.label = rest.substr(1);
  } else {
    if (!digits(rest)) throw InvalidSchedule("bad step count in directive '" + s + "'");
    try {
      std::size_t used = 0;
      d.steps = std::stoull(rest, &used);
      if (used != rest.size()) throw InvalidSchedule("");
    } catch (const std::exception&) {
      throw InvalidSchedule("bad step count in directive '" + s + "'");
    }
  }
  return d;
}

// Compact "T:n" form of a grant sequence.
inline std::vector<std::string> grants_to_schedule(const std::vector<std::uint32_t>& grants) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < grants.size();) {
    std::size_t j = i;
    while (j < grants.size() && grants[j] == grants[i]) ++j;
    out.push_back(std::to_string(grants[i]) + ":" + std::to_string(j - i));
    i = j;
  }
  return out;
}

struct ReplayResult {
  Verdict verdict;
  std::vector<ThreadReport> threads;
  std::vector<sim::TraceStep> trace;
  std::vector<sim::TraceEvent> events;
  std::vector<std::uint32_t> grants;
  std::uint64_t trace_hash = 0;
};

inline std::uint64_t hash_trace(const std::vector<sim::TraceStep>& trace) {
  std::uint64_t h = 0;
  for (const auto& s : trace) {
    h = sim::mix(h, s.step);
    h = sim::mix(h, s.thread);
    h = sim::mix(h, s.cell);
    h = sim::mix(h, static_cast<std::uint64_t>(s.op));
    h = sim::mix(h, s.old_value);
    h = sim::mix(h, s.new_value);
  }
  return h;
}

inline void apply_directive(Run& run, const Directive& d, std::uint64_t max_steps) {
  auto& w = run.world();
  if (d.thread >= run.thread_count()) throw InvalidSchedule("schedule names unknown thread " + std::to_string(d.thread));
  const std::uint32_t t = d.thread;
  switch (d.kind) {
    case Directive::Steps:
      for (std::uint64_t i = 0; i < d.steps; ++i) run.grant(t);
      break;
    case Directive::Op: {
      if (!w.enabled(t)) return;
      const std::uint32_t pc = run.pc(t);
      do {
        run.grant(t);
      } while (run.pc(t) == pc && w.enabled(t) && w.steps() < max_steps);
      break;
    }
    case Directive::Label:
      while (w.pending_label(t) != d.label) {
        if (w.finished(t)) return;
        if (!w.enabled(t))
          throw InvalidSchedule("thread " + std::to_string(t) + " cannot reach label '" + d.label + "'");
        if (w.steps() >= max_steps) throw InvalidSchedule("step bound reached before label '" + d.label + "'");
        run.grant(t);
      }
      break;
  }
}

inline void run_round_robin(Run& run, std::uint64_t max_steps) {
  auto& w = run.world();
  std::uint32_t next = run.grants().empty() ? 0 : (run.grants().back() + 1) % run.thread_count();
  while (w.steps() < max_steps) {
    const auto en = run.enabled();
    if (en.empty()) return;
    std::uint32_t pick = en.front();
    for (std::uint32_t t : en)
      if (t >= next) {
        pick = t;
        break;
      }
    run.grant(pick);
    next = (pick + 1) % run.thread_count();
  }
}

// std::mt19937_64 output is fixed by the standard; the pick uses plain
// modulo so the order does not depend on the library's distributions.
inline void run_random(Run& run, std::uint64_t seed, std::uint64_t max_steps) {
  auto& w = run.world();
  std::mt19937_64 rng(seed);
  while (w.steps() < max_steps) {
    const auto en = run.enabled();
    if (en.empty()) return;
    run.grant(en[rng() % en.size()]);
  }
}

inline ReplayResult replay(const Scenario& s, const std::vector<std::string>& schedule, std::uint64_t max_steps = kReplaySteps,
                           bool record = true, std::optional<std::uint64_t> seed = std::nullopt) {
  std::vector<Directive> ds;
  for (const auto& d : schedule) ds.push_back(parse_directive(d));
  Run run(s, record);
  for (const auto& d : ds) apply_directive(run, d, max_steps);
  if (seed)
    run_random(run, *seed, max_steps);
  else
    run_round_robin(run, max_steps);
  ReplayResult r;
  r.verdict = run.verdict(/*bound_starves=*/true);
  r.threads = run.thread_reports();
  r.trace = run.world().trace();
  r.events = run.world().events();
  r.grants = run.grants();
  r.trace_hash = hash_trace(r.trace);
  return r;
}

inline ReplayResult replay(const Scenario& s) {
  return replay(s, s.schedule, s.bounds ? s.bounds->max_steps : kReplaySteps);
}

// ---- JSON ------------------------------------------------------------------

inline ordered_json verdict_to_json(const Verdict& v) {
  ordered_json j;
  j["max_occupancy"] = v.max_occupancy;
  j["violates_mutex"] = v.violates_mutex();
  j["starved_threads"] = v.starved;
  j["starves_misbehaving"] = v.starves_misbehaving;
  j["starves_others"] = v.starves_others;
  j["misuse_detected"] = v.misuse_detected;
  j["reclaimed_writes"] = v.reclaimed_writes;
  j["reader_writer_overlap"] = v.reader_writer_overlap;
  if (v.counter_divergence) j["counter_divergence"] = *v.counter_divergence;
  j["steps"] = v.steps;
  j["bound_hit"] = v.bound_hit;
  return j;
}

inline ordered_json replay_to_json(const Scenario& s, const ReplayResult& r) {
  ordered_json j;
  j["scenario"] = s.name.empty() ? ordered_json(nullptr) : ordered_json(s.name);
  j["lock"] = std::string(info(s.algorithm).name);
  j["variant"] = to_string(s.variant);
  j["verdict"] = verdict_to_json(r.verdict);
  ordered_json threads = ordered_json::array();
  for (const auto& t : r.threads) {
    ordered_json jt;
    jt["thread"] = t.index;
    jt["misbehaving"] = t.misbehaving;
    jt["status"] = to_string(t.status);
    jt["pc"] = t.pc;
    jt["misuse_detected"] = t.misuse_detected;
    if (!t.error.empty()) jt["error"] = t.error;
    threads.push_back(std::move(jt));
  }
  j["threads"] = std::move(threads);
  j["schedule"] = grants_to_schedule(r.grants);
  std::ostringstream h;
  h << std::hex << r.trace_hash;
  j["trace_hash"] = h.str();
  return j;
}

inline void write_events_jsonl(std::ostream& os, const std::vector<sim::TraceEvent>& events) {
  for (const auto& e : events) {
    ordered_json j;
    j["step"] = e.step;
    j["thread"] = e.thread;
    j["event"] = sim::to_string(e.kind);
    if (!e.detail.empty()) j["detail"] = e.detail;
    os << j.dump() << '\n';
  }
}

}  // namespace lockharden::scenario
