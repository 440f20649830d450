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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. `--skip-bench` leaves out the multi-minute benchmark.

#include <chrono>
#include <cstring>
#include <functional>
#include <map>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lockharden/bench.hpp"
#include "lockharden/cli.hpp"
#include "lockharden/stress.hpp"
#include "lockharden/table1.hpp"

using namespace lockharden;
using namespace lockharden::scenario;

namespace {

// Pinned tolerances.
constexpr double kOverheadBoundPct = 10.0;
constexpr double kBenchDuration = 3.0;
constexpr double kBenchWarmup = 0.2;
constexpr unsigned kBenchReps = 5;
constexpr std::uint32_t kStressThreads = 8;
constexpr std::uint64_t kStressIterations = 100000;
constexpr double kStressMisuseRate = 0.01;
constexpr std::uint64_t kStressSeed = 1;
constexpr double kStressBudgetSeconds = 120.0;
constexpr double kTicketBudgetSeconds = 60.0;

struct Check {
  bool ok = true;
  std::vector<std::string> notes;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes.push_back(what);
    }
  }
};

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fixed(double v, int prec = 2) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(prec);
  os << v;
  return os.str();
}

}  // namespace

namespace {

Check misuse_matrix() {
  Check c;
  for (const auto& r : table1_suite(/*include_hardened=*/true)) {
    if (!r.applicable || r.pass) continue;
    std::string got;
    for (auto m : r.measured) got += symbol(m), got += ' ';
    c.expect(false, r.label + "/" + to_string(r.variant) + " measured " + got);
  }
  return c;
}

Check named_replays() {
  Check c;
  auto run = [&](const char* name, Variant v) {
    Scenario s = find_named(name).scenario;
    s.variant = v;
    const auto a = replay(s);
    const auto b = replay(s);
    c.expect(a.trace_hash == b.trace_hash, std::string(name) + " replay is not deterministic");
    return a.verdict;
  };
  const auto clh_o = run("clh_fig6_reenqueue", Variant::Original);
  c.expect(clh_o.max_occupancy == 2, "clh original occupancy " + std::to_string(clh_o.max_occupancy));
  const auto clh_h = run("clh_fig6_reenqueue", Variant::Hardened);
  c.expect(clh_h.max_occupancy == 1 && clh_h.misuse_detected >= 1, "clh hardened not clean");

  const auto tk_o = run("ticket_nowserving_regress", Variant::Original);
  c.expect(tk_o.starves_others, "ticket original does not starve");
  const auto tk_h = run("ticket_nowserving_regress", Variant::Hardened);
  c.expect(tk_h.starved.empty() && tk_h.misuse_detected >= 1, "ticket hardened starves");

  const auto gt_o = run("gt_toggle_revert", Variant::Original);
  c.expect(!gt_o.starved.empty(), "gt original does not starve");

  // A spin that can never observe a change is reported as starved at the
  // quiescent point rather than burning the step bound.
  const auto mcs_o = run("mcs_loop_forever", Variant::Original);
  c.expect(mcs_o.starves_misbehaving, "mcs original misuse does not spin forever");
  const auto mcs_h = run("mcs_loop_forever", Variant::Hardened);
  c.expect(mcs_h.starved.empty() && mcs_h.misuse_detected >= 1, "mcs hardened misuse not detected");
  return c;
}

Check ticket_bound() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint32_t n : {1u, 2u}) {
    Scenario s;
    s.name = "ticket_misuse_bound";
    s.algorithm = Algorithm::Ticket;
    for (int t = 0; t < 3; ++t) s.threads.push_back({{OpCode::Acquire}, {OpCode::Release}});
    s.threads.push_back(std::vector<ProgramOp>(n, ProgramOp{OpCode::Misuse}));
    const auto e = explore(s);
    c.expect(!e.bounds_exceeded, "N=" + std::to_string(n) + " exploration exceeded its bounds");
    c.expect(e.max_occupancy == n + 1,
             "N=" + std::to_string(n) + " max occupancy " + std::to_string(e.max_occupancy));
    c.notes.push_back("N=" + std::to_string(n) + " states " + std::to_string(e.states));
  }
  const double secs = since(t0);
  c.expect(secs < kTicketBudgetSeconds, "took " + fixed(secs) + " s");
  return c;
}

Check hardened_stress() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& i : kAlgorithms) {
    if (!i.has_hardened || i.software_only) continue;
    stress::StressConfig cfg;
    cfg.algorithm = i.id;
    cfg.variant = Variant::Hardened;
    cfg.threads = kStressThreads;
    cfg.iterations = kStressIterations;
    cfg.misuse_rate = kStressMisuseRate;
    cfg.seed = kStressSeed;
    cfg.options.checks = true;
    const auto r = stress::run_stress(cfg);
    const std::string n(i.name);
    c.expect(r.max_occupancy <= 1, n + " occupancy " + std::to_string(r.max_occupancy));
    c.expect(r.detected == r.injected,
             n + " detected " + std::to_string(r.detected) + " of " + std::to_string(r.injected));
    c.expect(!r.watchdog_fired, n + " watchdog fired");
    c.expect(r.errors.empty() && r.false_detections == 0, n + " errors or false detections");
  }
  const double secs = since(t0);
  c.expect(secs < kStressBudgetSeconds, "took " + fixed(secs) + " s");
  c.notes.push_back(fixed(secs, 1) + " s");
  return c;
}

Check rw_lock() {
  Check c;
  Scenario rd = find_named("rw_read_misuse").scenario;
  const auto o = replay(rd);
  c.expect(o.verdict.reader_writer_overlap, "no writer+reader co-occupancy");
  c.expect(o.verdict.starves_others, "writers do not starve");
  c.expect(o.verdict.counter_divergence == 1, "egress-ingress is not 1");

  Scenario wr = find_named("rw_write_misuse").scenario;
  wr.variant = Variant::Hardened;
  const auto h = replay(wr);
  c.expect(h.verdict.misuse_detected >= 1, "hardened wunlock misuse not detected");
  c.expect(h.verdict.max_occupancy <= 1 && !h.verdict.reader_writer_overlap, "hardened occupancy");
  c.expect(h.verdict.starved.empty(), "hardened lock left threads unfinished");
  const auto e = explore(wr);
  c.expect(!e.violates_mutex() && !e.starves_others && !e.starves_misbehaving && !e.bounds_exceeded,
           "hardened wunlock misuse exploration not clean");
  return c;
}

Check overhead(bool skip) {
  Check c;
  if (skip) {
    c.ok = false;
    c.notes.push_back("skipped");
    return c;
  }
  bench::BenchConfig cfg;
  cfg.locks = {Algorithm::Tas, Algorithm::Ticket, Algorithm::Abql, Algorithm::Mcs, Algorithm::Clh, Algorithm::Hmcs};
  cfg.threads = {bench::hardware_threads()};
  cfg.duration_seconds = kBenchDuration;
  cfg.warmup_seconds = kBenchWarmup;
  cfg.repetitions = kBenchReps;
  std::map<std::string, double> ovh;
  for (const auto& r : bench::run_bench(cfg))
    if (r.overhead_pct) ovh[r.lock] = *r.overhead_pct;
  std::string summary = std::to_string(bench::hardware_threads()) + "T:";
  for (const auto& [lock, pct] : ovh) summary += " " + lock + "=" + fixed(pct) + "%";
  c.notes.push_back(summary);
  for (const char* l : {"abql", "mcs", "clh", "hmcs"})
    c.expect(ovh.at(l) <= kOverheadBoundPct, std::string(l) + " overhead above " + fixed(kOverheadBoundPct, 0) + "%");
  c.expect(ovh.at("ticket") > ovh.at("mcs"), "ticket overhead does not exceed mcs");
  return c;
}

std::string cli_output(std::vector<std::string> args) {
  args.insert(args.begin(), "lockharden");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return out.str() + err.str();
}

Check determinism() {
  Check c;
  const std::vector<std::vector<std::string>> cases{
      {"simulate", "--scenario", "clh_fig6_reenqueue"},
      {"simulate", "--lock", "mcs", "--threads", "3", "--seed", "7"},
      {"explore", "--scenario", "tas_stray_unlock"},
      {"explore", "--scenario", "gt_misuse_explore"},
  };
  for (const auto& args : cases) {
    const auto a = std::hash<std::string>{}(cli_output(args));
    const auto b = std::hash<std::string>{}(cli_output(args));
    c.expect(a == b, args[0] + " " + args[2] + " output differs between runs");
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  const bool skip_bench = argc > 1 && std::strcmp(argv[1], "--skip-bench") == 0;
  struct Criterion {
    const char* name;
    std::function<Check()> run;
  };
  const std::vector<Criterion> criteria{
      {"misuse matrix", misuse_matrix},
      {"named pathology replays", named_replays},
      {"ticket misuse occupancy bound", ticket_bound},
      {"hardened stress", hardened_stress},
      {"reader-writer misuse", rw_lock},
      {"hardening overhead", [&] { return overhead(skip_bench); }},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = criteria[k].run();
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    if (!c.ok) ++failed;
    std::cout << "AC" << k + 1 << " " << (c.ok ? "PASS" : "FAIL") << " " << criteria[k].name << " (" << fixed(since(t0), 1)
              << " s)";
    for (const auto& n : c.notes) std::cout << "; " << n;
    std::cout << std::endl;
  }
  return failed ? 1 : 0;
}
