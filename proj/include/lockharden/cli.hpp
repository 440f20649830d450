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

// Command-line front end. run() is the whole program; main() only forwards
// argv, so tests drive it in-process.
//
// Exit status: 0 success, 1 a property violation was found where finding
// one is a failure, 2 usage or input error.

#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bench.hpp"
#include "stress.hpp"
#include "table1.hpp"

namespace lockharden::cli {

inline constexpr int kOk = 0;
inline constexpr int kViolation = 1;
inline constexpr int kUsage = 2;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Common {
  std::string out_path;
  bool json_errors = false;
  bool pretty = false;
};

inline void emit(const Common& c, std::ostream& out, const std::string& text) {
  if (c.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.out_path);
  if (!f) throw UsageError("cannot write " + c.out_path);
  f << text;
}

inline std::string dump(const Common& c, const nlohmann::ordered_json& j) { return j.dump(c.pretty ? 2 : -1) + "\n"; }

inline Algorithm lock_arg(const std::string& s) {
  auto a = parse_algorithm(s);
  if (!a) throw UsageError("unknown lock '" + s + "' (see `list`)");
  return *a;
}

inline Variant variant_arg(const std::string& s) {
  auto v = parse_variant(s);
  if (!v) throw UsageError("variant must be original or hardened, not '" + s + "'");
  return *v;
}

template <class T>
std::vector<T> csv_list(const std::string& s, T (*conv)(const std::string&)) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(conv(item));
  return out;
}

inline std::uint32_t u32_arg(const std::string& s) {
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(s, &used);
    if (used == s.size() && v > 0 && v <= 4096) return static_cast<std::uint32_t>(v);
  } catch (const std::exception&) {
  }
  throw UsageError("expected a positive thread count, got '" + s + "'");
}

// "steps" or "steps,states".
inline scenario::Bounds bounds_arg(const std::string& s) {
  scenario::Bounds b;
  try {
    const auto comma = s.find(',');
    std::size_t used = 0;
    b.max_steps = std::stoull(s.substr(0, comma), &used);
    if (used != (comma == std::string::npos ? s.size() : comma)) throw UsageError("");
    if (comma != std::string::npos) {
      const std::string rest = s.substr(comma + 1);
      b.max_states = std::stoull(rest, &used);
      if (used != rest.size()) throw UsageError("");
    }
  } catch (const std::exception&) {
    throw UsageError("bounds must be STEPS or STEPS,STATES, got '" + s + "'");
  }
  if (b.max_steps == 0 || b.max_states == 0) throw UsageError("bounds must be positive");
  return b;
}

// Scenario source: an existing file path wins over a built-in name; with
// neither, --lock/--threads build N-1 well-behaved threads plus one
// misbehaving thread.
struct ScenarioArgs {
  std::string scenario;
  std::string lock;
  std::string variant;
  std::uint32_t threads = 3;
  std::string schedule;
  bool schedule_set = false;
};

inline scenario::NamedScenario resolve(const ScenarioArgs& a) {
  scenario::NamedScenario n;
  if (!a.scenario.empty()) {
    if (std::filesystem::is_regular_file(a.scenario)) {
      std::ifstream f(a.scenario);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(f);
      } catch (const nlohmann::json::exception& e) {
        throw scenario::ScenarioError(a.scenario + ": " + e.what());
      }
      n.scenario = scenario::scenario_from_json(j);
      n.mode = n.scenario.schedule.empty() ? scenario::Mode::Explore : scenario::Mode::Replay;
      if (n.scenario.name.empty()) n.scenario.name = std::filesystem::path(a.scenario).stem().string();
    } else {
      n = scenario::find_named(a.scenario);
    }
    if (!a.lock.empty() && lock_arg(a.lock) != n.scenario.algorithm)
      throw UsageError("--lock conflicts with the scenario's lock");
  } else {
    if (a.lock.empty()) throw UsageError("give --scenario or --lock");
    if (a.threads < 2) throw UsageError("an ad-hoc scenario needs at least 2 threads");
    n.scenario.algorithm = lock_arg(a.lock);
    n.scenario.name = "adhoc";
    for (std::uint32_t t = 0; t + 1 < a.threads; ++t)
      n.scenario.threads.push_back({{scenario::OpCode::Acquire, 0}, {scenario::OpCode::Release, 0}});
    n.scenario.threads.push_back({{scenario::OpCode::Misuse, 0}});
  }
  if (!a.variant.empty()) n.scenario.variant = variant_arg(a.variant);
  if (a.schedule_set) n.scenario.schedule = scenario::split_schedule(a.schedule);
  n.scenario.validate();
  return n;
}

inline bool pathological(bool violates, bool starves_tm, bool starves_others) {
  return violates || starves_tm || starves_others;
}

inline int cmd_list(const Common& c, std::ostream& out) {
  nlohmann::ordered_json j;
  auto locks = nlohmann::ordered_json::array();
  for (const auto& i : kAlgorithms) {
    nlohmann::ordered_json l;
    l["name"] = std::string(i.name);
    l["title"] = std::string(i.title);
    l["hardened"] = i.has_hardened;
    l["reader_writer"] = i.reader_writer;
    l["software_only"] = i.software_only;
    if (i.thread_cap) l["max_threads"] = i.thread_cap;
    locks.push_back(std::move(l));
  }
  auto scens = nlohmann::ordered_json::array();
  for (const auto& n : scenario::named_scenarios()) {
    nlohmann::ordered_json s;
    s["name"] = n.scenario.name;
    s["lock"] = std::string(info(n.scenario.algorithm).name);
    s["mode"] = scenario::to_string(n.mode);
    s["description"] = n.scenario.description;
    scens.push_back(std::move(s));
  }
  if (c.pretty) {
    std::ostringstream os;
    os << "locks:\n";
    for (const auto& l : locks)
      os << "  " << l["name"].get<std::string>() << (l["hardened"].get<bool>() ? "" : " (original only)") << "\n";
    os << "scenarios:\n";
    for (const auto& s : scens)
      os << "  " << s["name"].get<std::string>() << " [" << s["mode"].get<std::string>() << "] "
         << s["description"].get<std::string>() << "\n";
    emit(c, out, os.str());
  } else {
    j["locks"] = std::move(locks);
    j["scenarios"] = std::move(scens);
    emit(c, out, dump(c, j));
  }
  return kOk;
}

struct SimulateArgs {
  ScenarioArgs s;
  std::optional<std::uint64_t> seed;
  std::uint64_t max_steps = 0;
  std::string trace_path;
  std::string events_path;
};

inline int cmd_simulate(const Common& c, const SimulateArgs& a, std::ostream& out) {
  const auto n = resolve(a.s);
  const auto& s = n.scenario;
  const std::uint64_t steps = a.max_steps ? a.max_steps : (s.bounds ? s.bounds->max_steps : scenario::kReplaySteps);
  const bool record = !a.trace_path.empty() || !a.events_path.empty();
  auto r = scenario::replay(s, s.schedule, steps, record, a.seed);
  if (!a.trace_path.empty()) {
    std::ofstream f(a.trace_path);
    if (!f) throw UsageError("cannot write " + a.trace_path);
    sim::write_trace_jsonl(f, r.trace);
  }
  if (!a.events_path.empty()) {
    std::ofstream f(a.events_path);
    if (!f) throw UsageError("cannot write " + a.events_path);
    scenario::write_events_jsonl(f, r.events);
  }
  auto j = scenario::replay_to_json(s, r);
  if (a.seed) j["seed"] = *a.seed;
  emit(c, out, dump(c, j));
  const auto& v = r.verdict;
  return s.variant == Variant::Hardened && pathological(v.violates_mutex(), v.starves_misbehaving, v.starves_others)
             ? kViolation
             : kOk;
}

struct ExploreArgs {
  ScenarioArgs s;
  std::string bounds;
};

inline int cmd_explore(const Common& c, const ExploreArgs& a, std::ostream& out) {
  const auto n = resolve(a.s);
  std::optional<scenario::Bounds> b;
  if (!a.bounds.empty()) b = bounds_arg(a.bounds);
  const auto e = scenario::explore(n.scenario, b);
  emit(c, out, dump(c, scenario::explore_to_json(n.scenario, e)));
  return n.scenario.variant == Variant::Hardened &&
                 pathological(e.violates_mutex(), e.starves_misbehaving, e.starves_others)
             ? kViolation
             : kOk;
}

inline int cmd_table1(const Common& c, bool original_only, const std::string& lock, std::ostream& out) {
  std::vector<scenario::RowResult> rows;
  if (!lock.empty()) {
    const auto& row = scenario::find_row(lock_arg(lock));
    rows.push_back(scenario::evaluate_row(row, Variant::Original));
    if (!original_only && info(*row.algorithm).has_hardened) rows.push_back(scenario::evaluate_row(row, Variant::Hardened));
  } else {
    rows = scenario::table1_suite(!original_only);
  }
  emit(c, out, c.pretty ? scenario::table1_text(rows) : dump(c, scenario::table1_to_json(rows)));
  for (const auto& r : rows)
    if (!r.pass) return kViolation;
  return kOk;
}

struct StressArgs {
  std::string lock;
  std::string variant = "hardened";
  std::uint32_t threads = 8;
  std::uint64_t iterations = 100000;
  double misuse_rate = 0.0;
  std::string misuse_kind = "mixed";
  unsigned cs_work = 0;
  double watchdog = 30.0;
  std::uint64_t seed = 1;
  bool unsafe = false;
  bool software = false;
};

inline int cmd_stress(const Common& c, const StressArgs& a, std::ostream& out) {
  stress::StressConfig cfg;
  cfg.algorithm = lock_arg(a.lock);
  cfg.variant = variant_arg(a.variant);
  cfg.threads = a.threads;
  cfg.iterations = a.iterations;
  cfg.misuse_rate = a.misuse_rate;
  auto k = stress::parse_misuse_kind(a.misuse_kind);
  if (!k) throw UsageError("misuse kind must be stale, fresh or mixed");
  cfg.misuse_kind = *k;
  cfg.cs_work = a.cs_work;
  cfg.watchdog_seconds = a.watchdog;
  cfg.seed = a.seed;
  cfg.unsafe = a.unsafe;
  cfg.allow_software = a.software;
  cfg.options.max_procs = std::max(cfg.options.max_procs, a.threads);
  const auto r = stress::run_stress(cfg);
  emit(c, out, dump(c, stress::report_to_json(cfg, r)));
  const bool checks = MisusePolicy::from_env().checks_enabled;
  const bool bad = r.max_occupancy > 1 || r.watchdog_fired || !r.errors.empty() || r.false_detections > 0 ||
                   (cfg.variant == Variant::Hardened && checks && r.detected != r.injected);
  return bad ? kViolation : kOk;
}

struct BenchArgs {
  std::string locks = "tas,ticket,abql,mcs,clh,hmcs";
  std::string threads;
  double duration = 3.0;
  double warmup = 0.2;
  unsigned reps = 5;
  std::string format;
};

inline std::string format_for(const Common& c, const std::string& explicit_format, bool json_flag) {
  if (!explicit_format.empty()) return explicit_format;
  if (json_flag) return "json";
  return c.pretty ? "table" : "csv";
}

inline int cmd_bench(const Common& c, const BenchArgs& a, bool json_flag, std::ostream& out) {
  bench::BenchConfig cfg;
  cfg.locks = csv_list<Algorithm>(a.locks, [](const std::string& s) { return lock_arg(s); });
  if (!a.threads.empty()) cfg.threads = csv_list<std::uint32_t>(a.threads, [](const std::string& s) { return u32_arg(s); });
  cfg.duration_seconds = a.duration;
  cfg.warmup_seconds = a.warmup;
  cfg.repetitions = a.reps;
  std::uint32_t maxt = 1;
  for (auto t : cfg.threads) maxt = std::max(maxt, t);
  cfg.options.max_procs = std::max(cfg.options.max_procs, maxt);
  const std::string fmt = format_for(c, a.format, json_flag);
  if (fmt != "csv" && fmt != "json" && fmt != "table") throw UsageError("unknown format '" + fmt + "'");
  const auto recs = bench::run_bench(cfg);
  emit(c, out, bench::report(recs, fmt));
  return kOk;
}

inline int cmd_report(const Common& c, const std::string& input, const std::string& format, bool json_flag,
                      std::ostream& out) {
  std::ifstream f(input);
  if (!f) throw UsageError("cannot read " + input);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw bench::UnknownData(input + ": " + e.what());
  }
  const auto recs = bench::records_from_json(j);
  emit(c, out, bench::report(recs, format_for(c, format, json_flag)));
  return kOk;
}

inline int fail(const Common& c, std::ostream& out, std::ostream& err, const char* kind, const std::string& msg) {
  if (c.json_errors) {
    nlohmann::ordered_json j;
    j["error"] = {{"kind", kind}, {"message", msg}};
    out << j.dump() << "\n";
  } else {
    err << "error: " << msg << "\n";
  }
  return kUsage;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Spinlock misuse laboratory: simulate, explore, stress and benchmark locks"};
  app.name("lockharden");
  app.require_subcommand(1);
  app.fallthrough();
  Common c;
  app.add_option("--out", c.out_path, "write the document to this file instead of stdout");
  app.add_flag("--json", c.json_errors, "machine-readable errors (and JSON output where a choice exists)");
  app.add_flag("--pretty", c.pretty, "human-readable tables / indented JSON");

  auto add_scenario_opts = [](CLI::App* sc, ScenarioArgs& s) {
    sc->add_option("--scenario", s.scenario, "built-in scenario name or scenario JSON file");
    sc->add_option("--lock", s.lock, "lock for an ad-hoc scenario");
    sc->add_option("--variant", s.variant, "original or hardened");
    sc->add_option("--threads", s.threads, "threads in an ad-hoc scenario (last one misbehaves)");
    sc->add_option("--schedule", s.schedule, "replay directives, e.g. \"0:op 1:3 2:@label\"")
        ->each([&s](const std::string&) { s.schedule_set = true; });
  };

  auto* list = app.add_subcommand("list", "list locks and built-in scenarios");

  SimulateArgs sim_args;
  std::uint64_t seed_value = 0;
  auto* simulate = app.add_subcommand("simulate", "replay one schedule on the simulator");
  add_scenario_opts(simulate, sim_args.s);
  auto* seed_opt = simulate->add_option("--seed", seed_value, "random continuation after the schedule");
  simulate->add_option("--max-steps", sim_args.max_steps, "step bound (default 10000)");
  simulate->add_option("--trace", sim_args.trace_path, "write the atomic-step trace as JSON lines");
  simulate->add_option("--events", sim_args.events_path, "write CS and misuse events as JSON lines");

  ExploreArgs ex_args;
  auto* explore = app.add_subcommand("explore", "enumerate every interleaving up to the bounds");
  add_scenario_opts(explore, ex_args.s);
  explore->add_option("--bounds", ex_args.bounds, "STEPS or STEPS,STATES (default 200,2000000)");

  bool original_only = false;
  std::string table_lock;
  auto* table1 = app.add_subcommand("table1", "misuse matrix: measured against expected");
  table1->add_flag("--original-only", original_only, "skip the hardened rows");
  table1->add_option("--lock", table_lock, "evaluate a single lock's row");

  StressArgs st;
  auto* stress = app.add_subcommand("stress", "native-thread stress with misuse injection");
  stress->add_option("--lock", st.lock, "lock name")->required();
  stress->add_option("--variant", st.variant, "original or hardened (default hardened)");
  stress->add_option("--threads", st.threads, "threads (default 8)");
  stress->add_option("--iterations", st.iterations, "acquire/release pairs per thread (default 100000)");
  stress->add_option("--misuse-rate", st.misuse_rate, "probability of an unbalanced release per iteration");
  stress->add_option("--misuse-kind", st.misuse_kind, "stale, fresh or mixed (default mixed)");
  stress->add_option("--cs-work", st.cs_work, "pause iterations inside the critical section");
  stress->add_option("--watchdog", st.watchdog, "seconds before spinners are aborted (default 30)");
  stress->add_option("--seed", st.seed, "injector seed (default 1)");
  stress->add_flag("--unsafe", st.unsafe, "allow misuse injection on original variants");
  stress->add_flag("--software", st.software, "allow load/store-only locks on native threads");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "empty critical-section throughput, original vs hardened");
  bench->add_option("--locks,--lock", ba.locks, "comma-separated locks (default tas,ticket,abql,mcs,clh,hmcs)");
  bench->add_option("--threads", ba.threads, "comma-separated thread counts (default 1,2,4,...,hardware)");
  bench->add_option("--duration", ba.duration, "seconds per measurement (default 3)");
  bench->add_option("--warmup", ba.warmup, "seconds of warm-up per measurement (default 0.2)");
  bench->add_option("--reps", ba.reps, "repetitions, best kept (default 5)");
  bench->add_option("--format", ba.format, "csv, json or table");

  std::string report_input, report_format;
  auto* report = app.add_subcommand("report", "render saved benchmark records");
  report->add_option("--input", report_input, "JSON array of benchmark records")->required();
  report->add_option("--format", report_format, "csv, json or table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    return fail(c, out, err, "usage", e.what());
  }

  try {
    if (*list) return cmd_list(c, out);
    if (*simulate) {
      if (seed_opt->count()) sim_args.seed = seed_value;
      return cmd_simulate(c, sim_args, out);
    }
    if (*explore) return cmd_explore(c, ex_args, out);
    if (*table1) return cmd_table1(c, original_only, table_lock, out);
    if (*stress) return cmd_stress(c, st, out);
    if (*bench) return cmd_bench(c, ba, c.json_errors, out);
    if (*report) return cmd_report(c, report_input, report_format, c.json_errors, out);
  } catch (const UsageError& e) {
    return fail(c, out, err, "usage", e.what());
  } catch (const scenario::MissingScenario& e) {
    return fail(c, out, err, "missing_scenario", e.what());
  } catch (const scenario::ScenarioError& e) {
    return fail(c, out, err, "scenario", e.what());
  } catch (const sim::InvalidSchedule& e) {
    return fail(c, out, err, "invalid_schedule", e.what());
  } catch (const UnsupportedVariant& e) {
    return fail(c, out, err, "unsupported_variant", e.what());
  } catch (const bench::UnknownFormat& e) {
    return fail(c, out, err, "unknown_format", e.what());
  } catch (const bench::UnknownData& e) {
    return fail(c, out, err, "unknown_data", e.what());
  } catch (const CapacityExceeded& e) {
    return fail(c, out, err, "capacity", e.what());
  } catch (const ThreadLimitExceeded& e) {
    return fail(c, out, err, "thread_limit", e.what());
  } catch (const std::invalid_argument& e) {
    return fail(c, out, err, "invalid_argument", e.what());
  }
  return kUsage;
}

}  // namespace lockharden::cli
