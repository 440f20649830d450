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

// Built-in named scenarios. A scenario with Mode::Replay is judged by one
// deterministic run of its schedule; Mode::Explore enumerates every
// interleaving (after the schedule, if one is given, as a fixed prefix).

#pragma once

#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include "scenario.hpp"

namespace lockharden::scenario {

enum class Mode : std::uint8_t { Replay, Explore };

inline const char* to_string(Mode m) { return m == Mode::Replay ? "replay" : "explore"; }

struct NamedScenario {
  Scenario scenario;
  Mode mode = Mode::Explore;
};

struct MissingScenario : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline NamedScenario named(std::string name, std::string desc, Algorithm a, Mode mode,
                           std::initializer_list<std::initializer_list<const char*>> threads, const char* schedule = "",
                           LockOptions params = {}) {
  NamedScenario n;
  n.mode = mode;
  n.scenario.name = std::move(name);
  n.scenario.description = std::move(desc);
  n.scenario.algorithm = a;
  n.scenario.params = params;
  for (const auto& prog : threads) {
    std::vector<ProgramOp> ops;
    for (const char* op : prog) ops.push_back(parse_op(op));
    n.scenario.threads.push_back(std::move(ops));
  }
  n.scenario.schedule = split_schedule(schedule);
  return n;
}

}  // namespace detail

// Thread programs are written for the original variant; the same scenario
// run with Variant::Hardened shows the remedy.
inline const std::vector<NamedScenario>& named_scenarios() {
  using detail::named;
  using A = Algorithm;
  static const std::vector<NamedScenario> all = [] {
    std::vector<NamedScenario> v;
    // Test-and-set family: a stray store of 0 admits a waiter.
    v.push_back(named("tas_stray_unlock", "misuse clears L while a holder is inside; a waiter enters", A::Tas, Mode::Explore,
                      {{"acquire", "release"}, {"acquire", "release"}, {"misuse"}}));
    v.push_back(named("tatas_stray_unlock", "as tas_stray_unlock for TATAS", A::Tatas, Mode::Explore,
                      {{"acquire", "release"}, {"acquire", "release"}, {"misuse"}}));
    v.push_back(named("tatas_bo_stray_unlock", "as tas_stray_unlock for TATAS with backoff", A::TatasBackoff, Mode::Explore,
                      {{"acquire", "release"}, {"acquire", "release"}, {"misuse"}}));
    v.push_back(named("hbo_stray_unlock", "as tas_stray_unlock for the hierarchical backoff lock", A::Hbo, Mode::Explore,
                      {{"acquire", "release"}, {"acquire", "release"}, {"misuse"}}));
    // Ticket.
    v.push_back(named("ticket_extra_serve", "misuse advances nowServing; the next ticket holder enters early", A::Ticket,
                      Mode::Explore, {{"acquire", "release"}, {"acquire", "release"}, {"misuse"}}));
    v.push_back(named("ticket_nowserving_regress",
                      "a stale nowServing store moves the counter backwards; later tickets are never served", A::Ticket,
                      Mode::Replay, {{"acquire", "release"}, {"acquire", "release"}, {"misuse"}, {"acquire", "release"}},
                      "0:op 1:op 2:@ticket.release.store 0:op 1:op 1:op 2:op 3:op"));
    // Array-based queues.
    v.push_back(named("abql_stale_place", "a stale myPlace passes HasLock to the next slot", A::Abql, Mode::Explore,
                      {{"acquire", "release"}, {"acquire", "release"}, {"acquire", "release", "misuse"}}));
    v.push_back(named("abql_fresh_place", "an unset myPlace passes HasLock to slot 1", A::Abql, Mode::Explore,
                      {{"acquire", "release"}, {"acquire", "release"}, {"misuse_fresh"}}));
    v.push_back(named("gt_toggle_revert", "a second toggle reverts the bit before the successor observes it", A::Gt,
                      Mode::Replay, {{"acquire", "release", "misuse"}, {"acquire", "release"}}, "0:op 1:op 0:op 0:op"));
    v.push_back(named("gt_misuse_explore", "every interleaving of one misuse after a full round", A::Gt, Mode::Explore,
                      {{"acquire", "release"}, {"acquire", "release", "misuse"}}));
    // MCS.
    v.push_back(named("mcs_loop_forever", "a fresh qnode has next==NULL; the releaser waits for a successor forever",
                      A::Mcs, Mode::Replay, {{"acquire", "release"}, {"misuse_fresh"}}, "0:op 1:op"));
    v.push_back(named("mcs_stale_next", "a stale I.next still names an enqueued qnode; that waiter is admitted", A::Mcs,
                      Mode::Explore,
                      {{"acquire", "release", "acquire", "release"}, {"acquire", "release"}, {"acquire", "release", "misuse"}}));
    // CLH.
    v.push_back(named("clh_fig6_reenqueue",
                      "T_m releases a recycled node; two threads re-enqueue the same node and both enter", A::Clh,
                      Mode::Replay,
                      {{"acquire", "release"},
                       {"acquire", "release", "acquire", "release"},
                       {"acquire", "release", "misuse", "acquire", "release"},
                       {"acquire", "release"},
                       {"acquire", "release"}},
                      "0:op 1:op 2:op 0:op 1:op 1:op 2:op 2:op 2:op 1:op 3:op 2:op 4:op 1:op 3:op 4:op"));
    v.push_back(named("clh_fig6_lost_update",
                      "same start as clh_fig6_reenqueue; some continuation loses a succ_must_wait update", A::Clh,
                      Mode::Explore,
                      {{"acquire", "release"},
                       {"acquire", "release", "acquire", "release"},
                       {"acquire", "release", "misuse", "acquire", "release"},
                       {"acquire", "release"},
                       {"acquire", "release"}},
                      "0:op 1:op 2:op 0:op 1:op 1:op 2:op 2:op 2:op 1:op"));
    // MCS-K42 and Hemlock.
    v.push_back(named("mcsk42_stack_write", "misuse hands the lock through a waiter node that has been reclaimed",
                      A::McsK42, Mode::Explore, {{"acquire", "release"}, {"acquire", "release"}, {"misuse"}}));
    v.push_back(named("hemlock_grant_wait", "the releaser waits for a successor to consume a Grant nobody reads",
                      A::Hemlock, Mode::Explore, {{"acquire", "release"}, {"acquire", "release"}, {"misuse"}}));
    // Hierarchical.
    v.push_back(named("hmcs_stale_next", "stale leaf qnode misuse inside a two-level HMCS", A::Hmcs, Mode::Explore,
                      {{"acquire", "release"}, {"acquire", "release"}, {"acquire", "release", "misuse"}}));
    v.push_back(named("hmcs_loop_forever", "fresh leaf qnode misuse inside a two-level HMCS", A::Hmcs, Mode::Explore,
                      {{"acquire", "release"}, {"acquire", "release"}, {"misuse_fresh"}}));
    v.push_back(named("cohort_ticket_misuse", "local ticket misuse inside C-TKT-TKT", A::CohortTicket, Mode::Explore,
                      {{"acquire", "release"}, {"acquire", "release"}, {"misuse"}}));
    // Reader-writer.
    v.push_back(named("rw_read_misuse",
                      "a stray RUnlock lets a writer in beside a reader; egress then exceeds ingress for good",
                      A::CohortRw, Mode::Replay,
                      {{"rlock", "runlock"}, {"misuse_runlock"}, {"wlock", "wunlock"}, {"wlock", "wunlock"}},
                      "0:op 1:op 2:op 0:op 2:op 3:op"));
    v.push_back(named("rw_write_misuse", "a stray WUnlock releases the cohort lock under a writer", A::CohortRw,
                      Mode::Explore, {{"wlock", "wunlock"}, {"wlock", "wunlock"}, {"misuse_wunlock"}}));
    // Load/store-only locks.
    v.push_back(named("peterson_misuse", "the misbehaving thread clears only its own flag", A::Peterson, Mode::Explore,
                      {{"acquire", "release"}, {"acquire", "release", "misuse"}}));
    v.push_back(named("peterson_misuse_first", "misuse before the first acquisition", A::Peterson, Mode::Explore,
                      {{"acquire", "release"}, {"misuse", "acquire", "release"}}));
    v.push_back(named("fisher_stray_reset", "a stray x:=0 admits a waiter beside the holder", A::Fisher, Mode::Explore,
                      {{"acquire", "release"}, {"acquire", "release"}, {"misuse"}}));
    v.push_back(named("lamport1_stray_reset", "stray y:=0 in Lamport's first algorithm", A::Lamport1, Mode::Explore,
                      {{"acquire", "release"}, {"acquire", "release"}, {"misuse"}}));
    v.push_back(named("lamport2_stray_reset", "stray y:=0 in Lamport's second algorithm", A::Lamport2, Mode::Explore,
                      {{"acquire", "release"}, {"acquire", "release"}, {"misuse"}}));
    v.push_back(named("bakery_misuse", "the misbehaving thread resets only its own number", A::Bakery, Mode::Explore,
                      {{"acquire", "release"}, {"acquire", "release"}, {"misuse"}}));
    return v;
  }();
  return all;
}

inline const NamedScenario& find_named(std::string_view name) {
  for (const auto& n : named_scenarios())
    if (n.scenario.name == name) return n;
  throw MissingScenario("no built-in scenario named '" + std::string(name) + "'");
}

}  // namespace lockharden::scenario
