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

// Empty-critical-section throughput benchmark. Each point runs a tight
// acquire/release loop for a fixed wall time; the best of R repetitions is
// kept, and hardened throughput is compared with original throughput at the
// same thread count.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "catalog.hpp"
#include "json.hpp"

namespace lockharden::bench {

struct UnknownFormat : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnknownData : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct BenchConfig {
  std::vector<Algorithm> locks;
  std::vector<std::uint32_t> threads;   // empty: default sweep
  double duration_seconds = 3.0;
  double warmup_seconds = 0.2;
  unsigned repetitions = 5;
  LockOptions options;
};

struct BenchRecord {
  std::string lock;
  Variant variant = Variant::Original;
  std::uint32_t threads = 0;
  double mops = 0;                       // million acquire/release pairs per second
  std::optional<double> overhead_pct;    // hardened only
  std::uint64_t pairs = 0;               // completed pairs in the best run
  double seconds = 0;                    // measured length of the best run
  bool under_duration = false;
  bool oversubscribed = false;
};

inline std::uint32_t hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

// {1, 2, 4, ...} up to and including the hardware thread count.
inline std::vector<std::uint32_t> default_sweep() {
  std::vector<std::uint32_t> v;
  const std::uint32_t hw = hardware_threads();
  for (std::uint32_t t = 1; t < hw; t *= 2) v.push_back(t);
  v.push_back(hw);
  return v;
}

inline double overhead_pct(double original, double hardened) { return (original - hardened) / original * 100.0; }

struct PointResult {
  std::uint64_t pairs = 0;
  double seconds = 0;
};

namespace detail {

template <class L>
PointResult run_point(const LockOptions& opts, std::uint32_t threads, double warmup, double duration) {
  L lock(opts);
  std::vector<std::uint64_t> counts(threads, 0);
  std::atomic<bool> measuring{false}, stop{false};
  std::atomic<std::uint32_t> ready{0};
  std::atomic<bool> go{false};
  std::vector<std::thread> ts;
  ts.reserve(threads);
  for (std::uint32_t t = 0; t < threads; ++t) {
    ts.emplace_back([&, t] {
      auto ctx = lock.make_context(ThreadId(t + 1));
      ready.fetch_add(1);
      while (!go.load()) std::this_thread::yield();
      while (!measuring.load(std::memory_order_relaxed)) {
        lock.acquire(ctx);
        lock.release(ctx);
      }
      std::uint64_t n = 0;
      while (!stop.load(std::memory_order_relaxed)) {
        lock.acquire(ctx);
        lock.release(ctx);
        ++n;
      }
      counts[t] = n;
    });
  }
  while (ready.load() < threads) std::this_thread::yield();
  go.store(true);
  std::this_thread::sleep_for(std::chrono::duration<double>(warmup));
  const auto t0 = std::chrono::steady_clock::now();
  measuring.store(true);
  std::this_thread::sleep_for(std::chrono::duration<double>(duration));
  stop.store(true);
  const auto t1 = std::chrono::steady_clock::now();
  for (auto& t : ts) t.join();
  PointResult r;
  for (auto c : counts) r.pairs += c;
  r.seconds = std::chrono::duration<double>(t1 - t0).count();
  return r;
}

}  // namespace detail

inline PointResult run_point(Algorithm a, Variant v, const LockOptions& opts, std::uint32_t threads, double warmup,
                             double duration) {
  return dispatch<NativeBackend>(a, v, [&](auto tag) {
    using L = typename decltype(tag)::type;
    return detail::run_point<L>(opts, threads, warmup, duration);
  });
}

inline void validate(const BenchConfig& c) {
  if (c.locks.empty()) throw std::invalid_argument("bench needs at least one lock");
  if (c.repetitions == 0) throw std::invalid_argument("repetitions must be positive");
  if (c.duration_seconds <= 0) throw std::invalid_argument("duration must be positive");
  for (auto a : c.locks) {
    const auto& i = info(a);
    if (!i.has_hardened) throw UnsupportedVariant(std::string(i.name) + " has no hardened variant to compare");
    if (i.software_only) throw std::invalid_argument(std::string(i.name) + " uses only loads and stores; not benchmarked");
  }
}

inline std::vector<BenchRecord> run_bench(const BenchConfig& cfg) {
  validate(cfg);
  const auto sweep = cfg.threads.empty() ? default_sweep() : cfg.threads;
  LockOptions opts = cfg.options;
  std::uint32_t maxt = 0;
  for (auto t : sweep) maxt = std::max(maxt, t);
  if (maxt > opts.max_procs) throw CapacityExceeded("thread count exceeds MAX_PROCS");

  std::vector<BenchRecord> out;
  for (auto a : cfg.locks) {
    for (auto t : sweep) {
      std::optional<double> orig;
      for (auto v : {Variant::Original, Variant::Hardened}) {
        PointResult best;
        double best_mops = -1;
        for (unsigned r = 0; r < cfg.repetitions; ++r) {
          const auto p = run_point(a, v, opts, t, cfg.warmup_seconds, cfg.duration_seconds);
          const double m = static_cast<double>(p.pairs) / p.seconds / 1e6;
          if (m > best_mops) {
            best_mops = m;
            best = p;
          }
        }
        BenchRecord rec;
        rec.lock = std::string(info(a).name);
        rec.variant = v;
        rec.threads = t;
        rec.mops = best_mops;
        rec.pairs = best.pairs;
        rec.seconds = best.seconds;
        rec.under_duration = best.seconds < cfg.duration_seconds * 0.95;
        rec.oversubscribed = t > hardware_threads();
        if (v == Variant::Original)
          orig = best_mops;
        else if (orig && *orig > 0)
          rec.overhead_pct = overhead_pct(*orig, best_mops);
        out.push_back(std::move(rec));
      }
    }
  }
  return out;
}

inline nlohmann::ordered_json record_to_json(const BenchRecord& r) {
  nlohmann::ordered_json j;
  j["lock"] = r.lock;
  j["variant"] = to_string(r.variant);
  j["threads"] = r.threads;
  j["mops"] = r.mops;
  j["overhead_pct"] = r.overhead_pct ? nlohmann::ordered_json(*r.overhead_pct) : nlohmann::ordered_json(nullptr);
  j["pairs"] = r.pairs;
  j["seconds"] = r.seconds;
  j["under_duration"] = r.under_duration;
  j["oversubscribed"] = r.oversubscribed;
  return j;
}

inline BenchRecord record_from_json(const nlohmann::json& j) {
  BenchRecord r;
  r.lock = j.at("lock").get<std::string>();
  auto v = parse_variant(j.at("variant").get<std::string>());
  if (!v) throw UnknownData("bad variant in record");
  r.variant = *v;
  r.threads = j.at("threads").get<std::uint32_t>();
  r.mops = j.at("mops").get<double>();
  if (j.contains("overhead_pct") && !j["overhead_pct"].is_null()) r.overhead_pct = j["overhead_pct"].get<double>();
  r.pairs = j.value("pairs", std::uint64_t{0});
  r.seconds = j.value("seconds", 0.0);
  r.under_duration = j.value("under_duration", false);
  r.oversubscribed = j.value("oversubscribed", false);
  return r;
}

inline std::vector<BenchRecord> records_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw UnknownData("bench records must be a JSON array");
  std::vector<BenchRecord> out;
  for (const auto& e : j) out.push_back(record_from_json(e));
  return out;
}

inline std::string fmt(double v, int prec) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

// format: csv | json | table
inline std::string report(const std::vector<BenchRecord>& recs, std::string_view format) {
  if (format != "csv" && format != "json" && format != "table") throw UnknownFormat("unknown format: " + std::string(format));
  if (recs.empty()) throw UnknownData("no benchmark records");
  std::ostringstream os;
  if (format == "csv") {
    os << "lock,variant,threads,mops,overhead_pct\n";
    for (const auto& r : recs)
      os << r.lock << ',' << to_string(r.variant) << ',' << r.threads << ',' << fmt(r.mops, 4) << ','
         << (r.overhead_pct ? fmt(*r.overhead_pct, 2) : "") << '\n';
    return os.str();
  }
  if (format == "json") {
    auto a = nlohmann::ordered_json::array();
    for (const auto& r : recs) a.push_back(record_to_json(r));
    return a.dump(2) + "\n";
  }
  // Overhead table: one row per lock, one column per thread count.
  std::vector<std::string> locks;
  std::set<std::uint32_t> cols;
  std::map<std::pair<std::string, std::uint32_t>, double> cell;
  for (const auto& r : recs) {
    if (std::find(locks.begin(), locks.end(), r.lock) == locks.end()) locks.push_back(r.lock);
    cols.insert(r.threads);
    if (r.overhead_pct) cell[{r.lock, r.threads}] = *r.overhead_pct;
  }
  os << "overhead % (positive = hardened slower)\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-12s", "lock");
  os << buf;
  for (auto t : cols) {
    std::snprintf(buf, sizeof buf, " %10s", (std::to_string(t) + "T").c_str());
    os << buf;
  }
  os << '\n';
  for (const auto& l : locks) {
    std::snprintf(buf, sizeof buf, "%-12s", l.c_str());
    os << buf;
    for (auto t : cols) {
      auto it = cell.find({l, t});
      std::snprintf(buf, sizeof buf, " %10s", it == cell.end() ? "-" : fmt(it->second, 2).c_str());
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace lockharden::bench
