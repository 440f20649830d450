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

// Bounded exhaustive exploration: depth-first over every grant order, with
// a visited set keyed by the world's state hash (cell values plus each
// thread's operation history). A state reached again at a depth no smaller
// than before is not expanded twice.
//
// The first child of a node continues in the parent's world; its siblings
// replay the prefix from scratch, since fibers cannot be forked.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "replay.hpp"

namespace lockharden::scenario {

struct ExploreSummary {
  Bounds bounds;
  std::uint64_t states = 0;
  std::uint64_t terminals = 0;
  std::uint64_t truncated = 0;   // schedules cut at max_steps
  bool bounds_exceeded = false;  // state budget exhausted; summary is partial

  std::uint32_t max_occupancy = 0;
  bool reader_writer_overlap = false;
  bool starves_misbehaving = false;
  bool starves_others = false;
  std::uint64_t max_misuse_detected = 0;
  std::uint64_t max_reclaimed_writes = 0;
  std::optional<std::int64_t> max_counter_divergence;

  std::optional<std::vector<std::uint32_t>> violation_witness;
  std::optional<std::vector<std::uint32_t>> starves_misbehaving_witness;
  std::optional<std::vector<std::uint32_t>> starves_others_witness;

  bool violates_mutex() const { return max_occupancy > 1; }
};

class Explorer {
 public:
  Explorer(const Scenario& s, Bounds b) : s_(s) { sum_.bounds = b; }

  // A scenario schedule, if any, is applied first; exploration covers every
  // continuation from there.
  ExploreSummary run() {
    s_.validate();
    auto start = std::make_unique<Run>(s_, false);
    for (const auto& d : s_.schedule) apply_directive(*start, parse_directive(d), sum_.bounds.max_steps);
    prefix_ = start->grants();
    visit(std::move(start));
    return sum_;
  }

 private:
  void observe(const Run& run) {
    const std::uint32_t occ = run.occupancy();
    if (occ > sum_.max_occupancy) sum_.max_occupancy = occ;
    if (occ > 1 && !sum_.violation_witness) sum_.violation_witness = prefix_;
    if (run.reader_writer_overlap()) sum_.reader_writer_overlap = true;
    sum_.max_misuse_detected = std::max(sum_.max_misuse_detected, run.misuse_detected());
    sum_.max_reclaimed_writes = std::max(sum_.max_reclaimed_writes, run.world().reclaimed_writes());
  }

  void terminal(const Run& run) {
    ++sum_.terminals;
    const Verdict v = run.verdict();
    if (v.starves_misbehaving) {
      sum_.starves_misbehaving = true;
      if (!sum_.starves_misbehaving_witness) sum_.starves_misbehaving_witness = prefix_;
    }
    if (v.starves_others) {
      sum_.starves_others = true;
      if (!sum_.starves_others_witness) sum_.starves_others_witness = prefix_;
    }
    if (v.counter_divergence)
      sum_.max_counter_divergence = std::max(sum_.max_counter_divergence.value_or(*v.counter_divergence), *v.counter_divergence);
  }

  std::unique_ptr<Run> replay_prefix() {
    auto r = std::make_unique<Run>(s_, false);
    for (std::uint32_t t : prefix_) r->grant(t);
    return r;
  }

  void visit(std::unique_ptr<Run> run) {
    if (sum_.states >= sum_.bounds.max_states) {
      sum_.bounds_exceeded = true;
      return;
    }
    const auto depth = static_cast<std::uint32_t>(prefix_.size());
    const std::uint64_t h = run->state_hash();
    auto [it, fresh] = seen_.try_emplace(h, depth);
    if (!fresh) {
      if (it->second <= depth) return;
      it->second = depth;
    } else {
      ++sum_.states;
    }
    observe(*run);
    const auto en = run->enabled();
    if (en.empty()) {
      terminal(*run);
      return;
    }
    if (depth >= sum_.bounds.max_steps) {
      ++sum_.truncated;
      return;
    }
    // Siblings first from fresh replays, then the last child in place.
    for (std::size_t k = 0; k < en.size(); ++k) {
      std::unique_ptr<Run> child = k + 1 == en.size() ? std::move(run) : replay_prefix();
      child->grant(en[k]);
      prefix_.push_back(en[k]);
      visit(std::move(child));
      prefix_.pop_back();
      if (sum_.bounds_exceeded) return;
    }
  }

  const Scenario& s_;
  ExploreSummary sum_;
  std::unordered_map<std::uint64_t, std::uint32_t> seen_;
  std::vector<std::uint32_t> prefix_;
};

inline ExploreSummary explore(const Scenario& s, std::optional<Bounds> b = std::nullopt) {
  Bounds bounds = b ? *b : (s.bounds ? *s.bounds : Bounds{});
  return Explorer(s, bounds).run();
}

inline ordered_json explore_to_json(const Scenario& s, const ExploreSummary& e) {
  ordered_json j;
  j["scenario"] = s.name.empty() ? ordered_json(nullptr) : ordered_json(s.name);
  j["lock"] = std::string(info(s.algorithm).name);
  j["variant"] = to_string(s.variant);
  j["bounds"] = {{"max_steps", e.bounds.max_steps}, {"max_states", e.bounds.max_states}};
  j["states"] = e.states;
  j["terminals"] = e.terminals;
  j["truncated"] = e.truncated;
  j["bounds_exceeded"] = e.bounds_exceeded;
  j["max_occupancy"] = e.max_occupancy;
  j["violates_mutex"] = e.violates_mutex();
  j["starves_misbehaving"] = e.starves_misbehaving;
  j["starves_others"] = e.starves_others;
  j["max_misuse_detected"] = e.max_misuse_detected;
  j["max_reclaimed_writes"] = e.max_reclaimed_writes;
  j["reader_writer_overlap"] = e.reader_writer_overlap;
  if (e.max_counter_divergence) j["max_counter_divergence"] = *e.max_counter_divergence;
  auto witness = [&](const char* key, const std::optional<std::vector<std::uint32_t>>& w) {
    j[key] = w ? ordered_json(grants_to_schedule(*w)) : ordered_json(nullptr);
  };
  witness("violation_witness", e.violation_witness);
  witness("starves_misbehaving_witness", e.starves_misbehaving_witness);
  witness("starves_others_witness", e.starves_others_witness);
  j["note"] = "starvation means no thread could run while this one was unfinished, within the step bound";
  return j;
}

}  // namespace lockharden::scenario
