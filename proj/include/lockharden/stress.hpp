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

// Native-thread stress: real OS threads hammer one lock while an oracle
// word counts critical-section occupants, and a seeded injector issues
// unbalanced releases. A watchdog aborts spinners that make no progress.

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "catalog.hpp"
#include "json.hpp"

namespace lockharden::stress {

enum class MisuseKind : std::uint8_t { Stale, Fresh, Mixed };

inline const char* to_string(MisuseKind k) {
  switch (k) {
    case MisuseKind::Stale: return "stale";
    case MisuseKind::Fresh: return "fresh";
    case MisuseKind::Mixed: return "mixed";
  }
  return "?";
}

inline std::optional<MisuseKind> parse_misuse_kind(std::string_view s) {
  if (s == "stale") return MisuseKind::Stale;
  if (s == "fresh") return MisuseKind::Fresh;
  if (s == "mixed") return MisuseKind::Mixed;
  return std::nullopt;
}

struct StressConfig {
  Algorithm algorithm = Algorithm::Mcs;
  Variant variant = Variant::Hardened;
  LockOptions options;
  std::uint32_t threads = 8;
  std::uint64_t iterations = 100000;   // per thread
  double misuse_rate = 0.0;            // probability per iteration
  MisuseKind misuse_kind = MisuseKind::Mixed;
  unsigned cs_work = 0;                // pause iterations inside the CS
  double watchdog_seconds = 30.0;
  std::uint64_t seed = 1;
  bool unsafe = false;                 // allow misuse injection on original variants
  bool allow_software = false;         // allow load/store-only locks natively
};

struct StressReport {
  std::uint32_t max_occupancy = 0;
  std::uint64_t oracle_violations = 0;
  std::uint64_t injected = 0;
  std::uint64_t detected = 0;
  std::uint64_t false_detections = 0;   // a holder's own release reported as misuse
  std::uint64_t completed_pairs = 0;
  std::uint32_t completed_threads = 0;
  double wall_seconds = 0;
  bool watchdog_fired = false;
  std::vector<std::string> errors;

  bool clean() const {
    return max_occupancy <= 1 && oracle_violations == 0 && detected == injected && false_detections == 0 &&
           !watchdog_fired && errors.empty();
  }
};

struct WatchdogTimeout : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void validate(const StressConfig& c) {
  if (c.threads == 0) throw std::invalid_argument("stress needs at least one thread");
  if (c.threads > c.options.max_procs)
    throw CapacityExceeded("threads (" + std::to_string(c.threads) + ") exceed MAX_PROCS (" + std::to_string(c.options.max_procs) + ")");
  const auto& i = info(c.algorithm);
  if (i.thread_cap != 0 && c.threads > i.thread_cap)
    throw ThreadLimitExceeded(std::string(i.name) + " supports at most " + std::to_string(i.thread_cap) + " threads");
  if (c.variant == Variant::Hardened && !i.has_hardened)
    throw UnsupportedVariant(std::string(i.name) + " has no hardened variant");
  if (c.misuse_rate < 0 || c.misuse_rate > 1) throw std::invalid_argument("misuse_rate must be within [0, 1]");
  if (c.misuse_rate > 0 && c.variant == Variant::Original && !c.unsafe)
    throw std::invalid_argument("misuse injection on an original variant corrupts the lock; pass the unsafe flag to allow it");
  if (i.software_only && !c.allow_software)
    throw std::invalid_argument(std::string(i.name) + " uses only loads and stores; native runs need the software flag");
}

inline StressReport run_stress(const StressConfig& cfg) {
  validate(cfg);
  auto m = make_mutex<NativeBackend>(cfg.algorithm, cfg.variant, cfg.options);

  NativeCell oracle;
  std::atomic<std::uint32_t> max_occ{0};
  std::atomic<std::uint64_t> violations{0}, injected{0}, detected{0}, false_det{0}, pairs{0};
  std::atomic<std::uint32_t> done{0};
  std::atomic<bool> stop{false};
  std::atomic<std::uint32_t> ready{0};
  std::atomic<bool> go{false};
  std::mutex err_mu;
  std::vector<std::string> errors;
  std::mutex done_mu;
  std::condition_variable done_cv;

  auto& abort = NativeBackend::abort_flag();
  abort.store(false);

  auto worker = [&](std::uint32_t t) {
    try {
      auto ctx = m->make_context(ThreadId(t + 1));
      auto spare = m->make_context(ThreadId(t + 1));   // never acquired with
      std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ULL + t);
      std::bernoulli_distribution inject(cfg.misuse_rate);
      std::bernoulli_distribution coin(0.5);
      ready.fetch_add(1);
      while (!go.load()) std::this_thread::yield();
      for (std::uint64_t i = 0; i < cfg.iterations && !stop.load(std::memory_order_relaxed); ++i) {
        m->acquire(ctx);
        const std::uint64_t before = oracle.fetch_add(1);
        if (before != 0) {
          violations.fetch_add(1);
          stop.store(true);
        }
        std::uint32_t occ = static_cast<std::uint32_t>(before + 1);
        std::uint32_t seen = max_occ.load();
        while (occ > seen && !max_occ.compare_exchange_weak(seen, occ)) {
        }
        for (unsigned w = 0; w < cfg.cs_work; ++w) cpu_relax();
        oracle.fetch_add(~std::uint64_t{0});
        if (m->release(ctx) != ReleaseStatus::Released) false_det.fetch_add(1);
        pairs.fetch_add(1, std::memory_order_relaxed);
        if (cfg.misuse_rate > 0 && inject(rng)) {
          const bool fresh = cfg.misuse_kind == MisuseKind::Fresh || (cfg.misuse_kind == MisuseKind::Mixed && coin(rng));
          injected.fetch_add(1);
          if (m->release(fresh ? spare : ctx) == ReleaseStatus::MisuseDetected) detected.fetch_add(1);
        }
      }
    } catch (const SpinAborted&) {
      std::lock_guard<std::mutex> g(err_mu);
      errors.push_back("thread " + std::to_string(t + 1) + " aborted by watchdog");
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> g(err_mu);
      errors.push_back("thread " + std::to_string(t + 1) + ": " + e.what());
    }
    {
      std::lock_guard<std::mutex> g(done_mu);
      done.fetch_add(1);
    }
    done_cv.notify_all();
  };

  StressReport r;
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::thread> ts;
  ts.reserve(cfg.threads);
  for (std::uint32_t t = 0; t < cfg.threads; ++t) ts.emplace_back(worker, t);
  while (ready.load() < cfg.threads && done.load() == 0) std::this_thread::yield();
  go.store(true);
  {
    std::unique_lock<std::mutex> g(done_mu);
    const auto deadline = t0 + std::chrono::duration<double>(cfg.watchdog_seconds);
    if (!done_cv.wait_until(g, deadline, [&] { return done.load() == cfg.threads; })) {
      r.watchdog_fired = true;
      stop.store(true);
      abort.store(true);
    }
  }
  for (auto& t : ts) t.join();
  abort.store(false);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  r.max_occupancy = max_occ.load();
  r.oracle_violations = violations.load();
  r.injected = injected.load();
  r.detected = detected.load();
  r.false_detections = false_det.load();
  r.completed_pairs = pairs.load();
  r.errors = std::move(errors);
  r.completed_threads = cfg.threads - static_cast<std::uint32_t>(r.errors.size());
  return r;
}

inline nlohmann::ordered_json report_to_json(const StressConfig& c, const StressReport& r) {
  nlohmann::ordered_json j;
  j["lock"] = std::string(info(c.algorithm).name);
  j["variant"] = to_string(c.variant);
  j["threads"] = c.threads;
  j["iterations"] = c.iterations;
  j["misuse_rate"] = c.misuse_rate;
  j["misuse_kind"] = to_string(c.misuse_kind);
  j["seed"] = c.seed;
  j["max_occupancy"] = r.max_occupancy;
  j["oracle_violations"] = r.oracle_violations;
  j["injected"] = r.injected;
  j["detected"] = r.detected;
  j["false_detections"] = r.false_detections;
  j["completed_pairs"] = r.completed_pairs;
  j["completed_threads"] = r.completed_threads;
  j["wall_seconds"] = r.wall_seconds;
  j["watchdog_fired"] = r.watchdog_fired;
  j["errors"] = r.errors;
  j["clean"] = r.clean();
  return j;
}

}  // namespace lockharden::stress
