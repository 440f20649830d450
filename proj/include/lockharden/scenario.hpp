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

// Scenarios: a lock plus one straight-line program per simulated thread.
// A Run executes a scenario on a fresh sim::World and keeps the
// critical-section oracle; replay() drives it along a schedule, explore()
// (explore.hpp) enumerates schedules.
//
// Program ops:
//   acquire, release          well-behaved use
//   misuse                    unbalanced release with the thread's own
//                             context (stale if it was used before)
//   misuse_fresh              unbalanced release with a newly minted context
//   cs:N                      N extra steps inside the critical section
//   rlock, runlock, wlock, wunlock, misuse_runlock, misuse_wunlock
//                             reader-writer locks
//
// Every critical section lasts at least one step: release begins with a
// step labelled "cs" before the exit is recorded.

#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "catalog.hpp"
#include "json.hpp"
#include "sim.hpp"

namespace lockharden::scenario {

using nlohmann::json;
using nlohmann::ordered_json;

struct ScenarioError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class OpCode : std::uint8_t {
  Acquire, Release, Misuse, MisuseFresh, Cs,
  RLock, RUnlock, WLock, WUnlock, MisuseRUnlock, MisuseWUnlock,
};

struct ProgramOp {
  OpCode code = OpCode::Acquire;
  unsigned n = 0;  // cs:N

  bool misuse() const {
    return code == OpCode::Misuse || code == OpCode::MisuseFresh || code == OpCode::MisuseRUnlock ||
           code == OpCode::MisuseWUnlock;
  }
  friend bool operator==(const ProgramOp&, const ProgramOp&) = default;
};

inline std::string to_string(const ProgramOp& op) {
  switch (op.code) {
    case OpCode::Acquire: return "acquire";
    case OpCode::Release: return "release";
    case OpCode::Misuse: return "misuse";
    case OpCode::MisuseFresh: return "misuse_fresh";
    case OpCode::Cs: return "cs:" + std::to_string(op.n);
    case OpCode::RLock: return "rlock";
    case OpCode::RUnlock: return "runlock";
    case OpCode::WLock: return "wlock";
    case OpCode::WUnlock: return "wunlock";
    case OpCode::MisuseRUnlock: return "misuse_runlock";
    case OpCode::MisuseWUnlock: return "misuse_wunlock";
  }
  return "?";
}

inline ProgramOp parse_op(const std::string& s) {
  static const std::pair<const char*, OpCode> names[] = {
      {"acquire", OpCode::Acquire}, {"release", OpCode::Release},
      {"misuse", OpCode::Misuse}, {"misuse_fresh", OpCode::MisuseFresh},
      {"rlock", OpCode::RLock}, {"runlock", OpCode::RUnlock},
      {"wlock", OpCode::WLock}, {"wunlock", OpCode::WUnlock},
      {"misuse_runlock", OpCode::MisuseRUnlock}, {"misuse_wunlock", OpCode::MisuseWUnlock},
  };
  for (const auto& [name, code] : names)
    if (s == name) return {code, 0};
  if (s.rfind("cs:", 0) == 0) {
    try {
      std::size_t used = 0;
      const unsigned long n = std::stoul(s.substr(3), &used);
      if (used == s.size() - 3 && n <= 1000) return {OpCode::Cs, static_cast<unsigned>(n)};
    } catch (const std::exception&) {
    }
  }
  throw ScenarioError("unknown program op '" + s + "'");
}

struct Bounds {
  std::uint64_t max_steps = 200;        // per schedule
  std::uint64_t max_states = 2000000;   // exploration budget
};

inline constexpr std::uint64_t kExploreSteps = 200;
inline constexpr std::uint64_t kReplaySteps = 10000;

struct Scenario {
  std::string name;
  std::string description;
  Algorithm algorithm = Algorithm::Tas;
  Variant variant = Variant::Original;
  LockOptions params;
  std::vector<std::vector<ProgramOp>> threads;
  std::vector<std::string> schedule;   // replay directives, see replay.hpp
  std::optional<Bounds> bounds;

  bool misbehaving(std::size_t t) const {
    return std::any_of(threads.at(t).begin(), threads.at(t).end(), [](const ProgramOp& o) { return o.misuse(); });
  }

  // Simulated locks default to one slot per scenario thread.
  LockOptions lock_options() const {
    LockOptions o = params;
    if (o.max_procs == kDefaultMaxProcs) o.max_procs = static_cast<std::uint32_t>(std::max<std::size_t>(threads.size(), 1));
    o.checks = params.checks.value_or(MisusePolicy::from_env().checks_enabled);
    return o;
  }

  void validate() const {
    if (threads.empty()) throw ScenarioError("scenario has no threads");
    const auto cap = info(algorithm).thread_cap;
    if (cap != 0 && threads.size() > cap)
      throw ThreadLimitExceeded(std::string(info(algorithm).name) + " supports at most " + std::to_string(cap) + " threads");
    if (variant == Variant::Hardened && !info(algorithm).has_hardened)
      throw UnsupportedVariant(std::string(info(algorithm).name) + " has no hardened variant");
    for (const auto& prog : threads)
      for (const auto& op : prog) {
        const bool rw_op = op.code == OpCode::RLock || op.code == OpCode::RUnlock || op.code == OpCode::MisuseRUnlock;
        if (rw_op && !info(algorithm).reader_writer)
          throw ScenarioError(std::string(info(algorithm).name) + " has no read side (op " + to_string(op) + ")");
      }
  }
};

// ---- JSON ------------------------------------------------------------------

inline LockOptions params_from_json(const json& j) {
  LockOptions o;
  if (!j.is_object()) return o;
  auto get_u = [&](const char* k, auto& field) {
    if (j.contains(k)) field = j.at(k).get<std::remove_reference_t<decltype(field)>>();
  };
  get_u("max_procs", o.max_procs);
  get_u("groups", o.groups);
  get_u("hmcs_threshold", o.hmcs_threshold);
  get_u("cohort_bound", o.cohort_bound);
  get_u("fisher_delay", o.fisher_delay);
  if (j.contains("checks")) o.checks = j.at("checks").get<bool>();
  return o;
}

inline ordered_json params_to_json(const LockOptions& o) {
  ordered_json j;
  const LockOptions d;
  if (o.max_procs != d.max_procs) j["max_procs"] = o.max_procs;
  if (o.groups != d.groups) j["groups"] = o.groups;
  if (o.hmcs_threshold != d.hmcs_threshold) j["hmcs_threshold"] = o.hmcs_threshold;
  if (o.cohort_bound != d.cohort_bound) j["cohort_bound"] = o.cohort_bound;
  if (o.fisher_delay != d.fisher_delay) j["fisher_delay"] = o.fisher_delay;
  if (o.checks) j["checks"] = *o.checks;
  if (j.is_null()) j = ordered_json::object();
  return j;
}

inline std::vector<std::string> split_schedule(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == ',' || c == '\t' || c == '\n') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline Scenario scenario_from_json(const json& j) {
  try {
    Scenario s;
    s.name = j.value("name", std::string{});
    s.description = j.value("description", std::string{});
    const std::string lock = j.at("lock").get<std::string>();
    auto algo = parse_algorithm(lock);
    if (!algo) throw ScenarioError("unknown lock '" + lock + "'");
    s.algorithm = *algo;
    const std::string variant = j.value("variant", std::string("original"));
    auto v = parse_variant(variant);
    if (!v) throw ScenarioError("unknown variant '" + variant + "'");
    s.variant = *v;
    if (j.contains("params")) s.params = params_from_json(j.at("params"));
    for (const auto& prog : j.at("threads")) {
      std::vector<ProgramOp> ops;
      for (const auto& op : prog) ops.push_back(parse_op(op.get<std::string>()));
      s.threads.push_back(std::move(ops));
    }
    if (j.contains("schedule")) {
      const auto& sch = j.at("schedule");
      if (sch.is_string()) {
        s.schedule = split_schedule(sch.get<std::string>());
      } else {
        for (const auto& d : sch) s.schedule.push_back(d.get<std::string>());
      }
    }
    if (j.contains("bounds")) {
      Bounds b;
      const auto& jb = j.at("bounds");
      b.max_steps = jb.value("max_steps", b.max_steps);
      b.max_states = jb.value("max_states", b.max_states);
      s.bounds = b;
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("malformed scenario: ") + e.what());
  }
}

inline ordered_json scenario_to_json(const Scenario& s) {
  ordered_json j;
  if (!s.name.empty()) j["name"] = s.name;
  if (!s.description.empty()) j["description"] = s.description;
  j["lock"] = std::string(info(s.algorithm).name);
  j["variant"] = to_string(s.variant);
  j["params"] = params_to_json(s.params);
  ordered_json threads = ordered_json::array();
  for (const auto& prog : s.threads) {
    ordered_json p = ordered_json::array();
    for (const auto& op : prog) p.push_back(to_string(op));
    threads.push_back(std::move(p));
  }
  j["threads"] = std::move(threads);
  if (!s.schedule.empty()) j["schedule"] = s.schedule;
  if (s.bounds) j["bounds"] = {{"max_steps", s.bounds->max_steps}, {"max_states", s.bounds->max_states}};
  return j;
}

}  // namespace lockharden::scenario
