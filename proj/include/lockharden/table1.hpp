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

// Misuse matrix: for each lock, does a single unbalanced release violate
// mutual exclusion, starve the misbehaving thread, or starve the others?
// A row's measured answer is the OR over its probe scenarios; a probe is
// either one replay or a bounded exhaustive exploration.

#pragma once

#include <array>
#include <chrono>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "catalog_scenarios.hpp"
#include "explore.hpp"
#include "replay.hpp"

namespace lockharden::scenario {

enum class Mark : std::uint8_t { No, Yes, NA };

inline const char* to_string(Mark m) {
  switch (m) {
    case Mark::No: return "no";
    case Mark::Yes: return "yes";
    case Mark::NA: return "n/a";
  }
  return "?";
}

inline const char* symbol(Mark m) { return m == Mark::Yes ? "Y" : m == Mark::No ? "-" : "n/a"; }

// Columns: violates mutex, starves T_m, starves others.
using Marks = std::array<Mark, 3>;

struct Outcome {
  std::string scenario;
  Mode mode = Mode::Explore;
  bool violates = false;
  bool starves_tm = false;
  bool starves_others = false;
  std::uint64_t misuse_detected = 0;
  std::uint64_t reclaimed_writes = 0;
  bool reader_writer_overlap = false;
  std::optional<std::int64_t> counter_divergence;
  std::uint64_t states = 0;           // explored states, or replay steps
  bool bounds_exceeded = false;
  std::vector<std::string> witness;   // schedule reaching the first pathology found
  double seconds = 0;
};

inline Outcome evaluate(const NamedScenario& n, Variant v) {
  Scenario s = n.scenario;
  s.variant = v;
  Outcome o;
  o.scenario = s.name;
  o.mode = n.mode;
  const auto t0 = std::chrono::steady_clock::now();
  if (n.mode == Mode::Replay) {
    const auto r = replay(s, s.schedule, s.bounds ? s.bounds->max_steps : kReplaySteps, /*record=*/false);
    const auto& x = r.verdict;
    o.violates = x.violates_mutex() || x.reclaimed_writes > 0;
    o.starves_tm = x.starves_misbehaving;
    o.starves_others = x.starves_others;
    o.misuse_detected = x.misuse_detected;
    o.reclaimed_writes = x.reclaimed_writes;
    o.reader_writer_overlap = x.reader_writer_overlap;
    o.counter_divergence = x.counter_divergence;
    o.states = x.steps;
    if (o.violates || o.starves_tm || o.starves_others) o.witness = grants_to_schedule(r.grants);
  } else {
    const auto e = explore(s);
    o.violates = e.violates_mutex() || e.max_reclaimed_writes > 0;
    o.starves_tm = e.starves_misbehaving;
    o.starves_others = e.starves_others;
    o.misuse_detected = e.max_misuse_detected;
    o.reclaimed_writes = e.max_reclaimed_writes;
    o.reader_writer_overlap = e.reader_writer_overlap;
    o.counter_divergence = e.max_counter_divergence;
    o.states = e.states;
    o.bounds_exceeded = e.bounds_exceeded;
    for (const auto* w : {&e.violation_witness, &e.starves_misbehaving_witness, &e.starves_others_witness})
      if (w->has_value()) {
        o.witness = grants_to_schedule(**w);
        break;
      }
  }
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return o;
}

struct Table1Row {
  std::string label;
  std::optional<Algorithm> algorithm;   // empty: documented only, never run
  Marks expected;
  std::vector<std::string> probes;
  std::vector<std::string> original_only;   // probes of a misuse the remedy does not cover
  std::string remedy;
};

inline const std::vector<Table1Row>& table1_rows() {
  using A = Algorithm;
  constexpr Mark Y = Mark::Yes, N = Mark::No, X = Mark::NA;
  static const std::vector<Table1Row> rows = {
      {"TAS", A::Tas, {Y, N, X}, {"tas_stray_unlock"}, {}, "store pid in L"},
      {"TATAS", A::Tatas, {Y, N, X}, {"tatas_stray_unlock"}, {}, "store pid in L"},
      {"TATAS-BO", A::TatasBackoff, {Y, N, X}, {"tatas_bo_stray_unlock"}, {}, "store pid in L"},
      {"Ticket", A::Ticket, {Y, N, Y}, {"ticket_extra_serve", "ticket_nowserving_regress"}, {}, "pid field"},
      {"ABQL", A::Abql, {Y, N, N}, {"abql_stale_place", "abql_fresh_place"}, {}, "check and reset myPlace"},
      {"Graunke-Thakkar", A::Gt, {N, N, Y}, {"gt_toggle_revert", "gt_misuse_explore"}, {}, "holder array"},
      {"MCS", A::Mcs, {Y, Y, N}, {"mcs_loop_forever", "mcs_stale_next"}, {}, "check I.locked, reset I.next"},
      {"CLH", A::Clh, {Y, N, Y}, {"clh_fig6_reenqueue", "clh_fig6_lost_update"}, {}, "check and reset prev"},
      {"MCS-K42", A::McsK42, {Y, Y, Y}, {"mcsk42_stack_write"}, {}, "none implemented"},
      {"Hemlock", A::Hemlock, {N, Y, N}, {"hemlock_grant_wait"}, {}, "check and reset Grant"},
      {"HMCS", A::Hmcs, {Y, Y, N}, {"hmcs_loop_forever", "hmcs_stale_next"}, {}, "leaf MCS remedy"},
      {"HCLH", std::nullopt, {N, N, N}, {}, {}, "not applicable (release only clears succ_must_wait)"},
      {"HBO", A::Hbo, {Y, N, X}, {"hbo_stray_unlock"}, {}, "pid and domain in L"},
      {"C-TKT-TKT", A::CohortTicket, {Y, N, Y}, {"cohort_ticket_misuse"}, {}, "pid field in local ticket lock"},
      {"C-RW-NP", A::CohortRw, {Y, N, Y}, {"rw_write_misuse"}, {"rw_read_misuse"}, "write side only; read side unsolved"},
      {"Peterson", A::Peterson, {N, N, N}, {"peterson_misuse", "peterson_misuse_first"}, {}, "not applicable"},
      {"Fischer", A::Fisher, {Y, N, N}, {"fisher_stray_reset"}, {}, "check x in release"},
      {"Lamport 1", A::Lamport1, {Y, N, Y}, {"lamport1_stray_reset"}, {}, "holder check in release"},
      {"Lamport 2", A::Lamport2, {Y, N, Y}, {"lamport2_stray_reset"}, {}, "holder check in release"},
      {"Bakery", A::Bakery, {N, N, N}, {"bakery_misuse"}, {}, "not applicable"},
  };
  return rows;
}

struct RowResult {
  std::string label;
  std::optional<Algorithm> algorithm;
  Variant variant = Variant::Original;
  bool applicable = true;   // false: documented row, not run
  Marks expected{};
  Marks measured{};
  std::uint64_t misuse_detected = 0;
  std::vector<Outcome> outcomes;
  bool pass = true;
};

inline bool marks_match(const Marks& expected, const Marks& measured) {
  for (std::size_t i = 0; i < 3; ++i)
    if (expected[i] != Mark::NA && expected[i] != measured[i]) return false;
  return true;
}

inline RowResult evaluate_row(const Table1Row& row, Variant v) {
  RowResult r;
  r.label = row.label;
  r.algorithm = row.algorithm;
  r.variant = v;
  r.expected = row.expected;
  if (!row.algorithm) {
    r.applicable = false;
    r.measured = row.expected;
    return r;
  }
  if (v == Variant::Hardened) {
    if (!info(*row.algorithm).has_hardened) throw UnsupportedVariant(row.label + " has no hardened variant");
    r.expected = {Mark::No, Mark::No, Mark::No};
  }
  bool viol = false, tm = false, oth = false;
  std::vector<std::string> probes = row.probes;
  if (v == Variant::Original) probes.insert(probes.end(), row.original_only.begin(), row.original_only.end());
  if (probes.empty()) throw MissingScenario("no scenario registered for " + row.label);
  for (const auto& name : probes) {
    auto o = evaluate(find_named(name), v);
    viol |= o.violates;
    tm |= o.starves_tm;
    oth |= o.starves_others;
    r.misuse_detected += o.misuse_detected;
    r.outcomes.push_back(std::move(o));
  }
  auto mark = [](bool b) { return b ? Mark::Yes : Mark::No; };
  r.measured = {mark(viol), mark(tm), mark(oth)};
  // NA columns stay NA in the report so the row reads like the reference.
  for (std::size_t i = 0; i < 3; ++i)
    if (r.expected[i] == Mark::NA) r.measured[i] = Mark::NA;
  r.pass = marks_match(r.expected, r.measured);
  // A remedy must also report every probe's misuse.
  if (v == Variant::Hardened)
    for (const auto& o : r.outcomes)
      if (o.misuse_detected == 0) r.pass = false;
  return r;
}

inline const Table1Row& find_row(Algorithm a) {
  for (const auto& r : table1_rows())
    if (r.algorithm == a) return r;
  throw MissingScenario(std::string("no misuse row registered for ") + std::string(info(a).name));
}

// Every row for the original variant, then every remedied row hardened.
inline std::vector<RowResult> table1_suite(bool include_hardened = true) {
  std::vector<RowResult> out;
  for (const auto& row : table1_rows()) out.push_back(evaluate_row(row, Variant::Original));
  if (include_hardened)
    for (const auto& row : table1_rows())
      if (row.algorithm && info(*row.algorithm).has_hardened) out.push_back(evaluate_row(row, Variant::Hardened));
  return out;
}

inline ordered_json outcome_to_json(const Outcome& o) {
  ordered_json j;
  j["scenario"] = o.scenario;
  j["mode"] = to_string(o.mode);
  j["violates_mutex"] = o.violates;
  j["starves_misbehaving"] = o.starves_tm;
  j["starves_others"] = o.starves_others;
  j["misuse_detected"] = o.misuse_detected;
  j["reclaimed_writes"] = o.reclaimed_writes;
  j["reader_writer_overlap"] = o.reader_writer_overlap;
  j["counter_divergence"] = o.counter_divergence ? ordered_json(*o.counter_divergence) : ordered_json(nullptr);
  j[o.mode == Mode::Replay ? "steps" : "states"] = o.states;
  j["bounds_exceeded"] = o.bounds_exceeded;
  j["witness"] = o.witness;
  return j;
}

inline ordered_json row_to_json(const RowResult& r) {
  ordered_json j;
  j["lock"] = r.label;
  j["variant"] = to_string(r.variant);
  j["applicable"] = r.applicable;
  auto marks = [](const Marks& m) { return ordered_json{to_string(m[0]), to_string(m[1]), to_string(m[2])}; };
  j["expected"] = marks(r.expected);
  j["measured"] = marks(r.measured);
  j["misuse_detected"] = r.misuse_detected;
  j["pass"] = r.pass;
  ordered_json os = ordered_json::array();
  for (const auto& o : r.outcomes) os.push_back(outcome_to_json(o));
  j["probes"] = std::move(os);
  return j;
}

inline ordered_json table1_to_json(const std::vector<RowResult>& rows) {
  ordered_json j;
  j["note"] = "starvation is bounded non-progress (no enabled step, or the step bound), not a liveness proof";
  ordered_json a = ordered_json::array();
  bool all = true;
  for (const auto& r : rows) {
    a.push_back(row_to_json(r));
    all = all && r.pass;
  }
  j["rows"] = std::move(a);
  j["pass"] = all;
  return j;
}

inline std::string table1_text(const std::vector<RowResult>& rows) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-16s %-9s %-13s %-13s %-13s %s\n", "lock", "variant", "violates", "starves T_m",
                "starves other", "result");
  os << buf;
  auto cell = [](Mark e, Mark m) { return std::string(symbol(m)) + " (exp " + symbol(e) + ")"; };
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-16s %-9s %-13s %-13s %-13s %s\n", r.label.c_str(), to_string(r.variant),
                  cell(r.expected[0], r.measured[0]).c_str(), cell(r.expected[1], r.measured[1]).c_str(),
                  cell(r.expected[2], r.measured[2]).c_str(),
                  !r.applicable ? "not applicable" : r.pass ? "PASS" : "FAIL");
    os << buf;
  }
  return os.str();
}

}  // namespace lockharden::scenario
