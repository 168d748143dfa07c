// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// criterion 7 is informational (hardware-bound targets) and reports its
// measurements without gating the suite.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <barrier>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <memory>
#include <random>
#include <set>
#include <thread>
#include <vector>

#include "snapiter/harness/bench.hpp"
#include "snapiter/harness/lincheck.hpp"
#include "snapiter/harness/local_suite.hpp"
#include "snapiter/harness/stress.hpp"
#include "snapiter/hash_set.hpp"
#include "snapiter/iterable_set.hpp"
#include "snapiter/ubst.hpp"

using namespace snapiter;
using namespace snapiter::harness;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void verdict(int criterion, bool pass, const char* fmt, ...) {
  std::printf("[criterion %d] %s ", criterion, pass ? "PASS" : "FAIL");
  va_list args;
  va_start(args, fmt);
  std::vprintf(fmt, args);
  va_end(args);
  std::printf("\n");
  std::fflush(stdout);
}

template <class A>
bool sequential_conformance(std::uint64_t seed) {
  IterableSet<A> set(1);
  std::set<Key> model;
  std::mt19937_64 rng(seed);
  bool ok = true;
  for (int i = 0; i < 100000; ++i) {
    Key k = static_cast<Key>(rng() % 512);
    switch (rng() % 3) {
      case 0:
        ok &= set.insert(0, k) == model.insert(k).second;
        break;
      case 1:
        ok &= set.erase(0, k) == (model.erase(k) == 1);
        break;
      default:
        ok &= set.contains(0, k) == (model.count(k) != 0);
        break;
    }
    if (i % 500 == 0) {
      ok &= set.iterate(0) == std::vector<Key>(model.begin(), model.end());
    }
    if (!ok) break;
  }
  ok &= set.iterate(0) == std::vector<Key>(model.begin(), model.end());
  return ok;
}

}  // namespace

TEST_CASE("criterion 1: sequential conformance against a reference model") {
  const auto t0 = std::chrono::steady_clock::now();
  const bool ubst_ok = sequential_conformance<UbstAdapter>(1);
  const bool hash_ok = sequential_conformance<HashSetAdapter>(1);
  const double elapsed = seconds_since(t0);
  const bool pass = ubst_ok && hash_ok && elapsed < 10.0;
  CHECK(ubst_ok);
  CHECK(hash_ok);
  CHECK(elapsed < 10.0);
  verdict(1, pass,
          "sequential conformance: 100000 ops per backend, %.1f s "
          "(ubst %s, hashset %s)",
          elapsed, ubst_ok ? "ok" : "mismatch",
          hash_ok ? "ok" : "mismatch");
}

TEST_CASE("criterion 2: snapshot merge rule, truth table and randomized") {
  bool pass = true;
  // expected membership: (collected or insert-reported) and not deleted
  for (int mask = 0; mask < 8; ++mask) {
    const bool collected = mask & 4;
    const bool ins = mask & 2;
    const bool del = mask & 1;
    SnapCollector sc(1);
    NodeHandle n(5);
    if (collected) sc.add_node(&n);
    if (ins) sc.report(0, Report{&n, n.key(), ReportKind::kInsert});
    if (del) sc.report(0, Report{&n, n.key(), ReportKind::kDelete});
    sc.block_and_deactivate();
    const bool in = !sc.reconstruct_snapshot().empty();
    const bool want = (collected || ins) && !del;
    CHECK(in == want);
    pass &= in == want;
  }
  std::mt19937_64 rng(7);
  for (int round = 0; round < 1000; ++round) {
    const unsigned threads = 1 + rng() % 4;
    SnapCollector sc(threads);
    const int n = 1 + static_cast<int>(rng() % 16);
    std::vector<std::unique_ptr<NodeHandle>> nodes;
    std::set<Key> expected;
    for (int i = 0; i < n; ++i) {
      nodes.push_back(std::make_unique<NodeHandle>(i));
      NodeHandle* h = nodes.back().get();
      const bool collected = rng() % 2;
      const bool ins = rng() % 2;
      const bool del = rng() % 2;
      if (collected) sc.add_node(h);
      if (ins) {
        sc.report(rng() % threads, Report{h, h->key(), ReportKind::kInsert});
      }
      if (del) {
        sc.report(rng() % threads, Report{h, h->key(), ReportKind::kDelete});
      }
      if ((collected || ins) && !del) expected.insert(h->key());
    }
    sc.block_and_deactivate();
    const bool eq = sc.reconstruct_snapshot() ==
                    std::vector<Key>(expected.begin(), expected.end());
    CHECK(eq);
    pass &= eq;
  }
  verdict(2, pass,
          "merge rule: 8/8 truth-table combinations and 1000 randomized "
          "multi-node cases match the evidence formula");
}

TEST_CASE("criterion 3: every shipped single-step mutator is view-safe") {
  const auto t0 = std::chrono::steady_clock::now();
  auto ubst = run_ubst_local_suite(8, 42);
  auto hash = run_hashset_local_suite(8, 12, 42);
  auto rotation = run_rotation_counterexample();
  const double elapsed = seconds_since(t0);
  const bool pass = ubst.ok() && hash.ok() && rotation.has_value() &&
                    elapsed < 60.0;
  CHECK(ubst.ok());
  CHECK(hash.ok());
  REQUIRE(rotation.has_value());
  CHECK(elapsed < 60.0);
  verdict(3, pass,
          "local consistency: %zu ubst + %zu hashset scenarios clean; "
          "rotation rejected (position %zu drops node %llu); %.1f s",
          ubst.scenarios, hash.scenarios, rotation->position,
          static_cast<unsigned long long>(rotation->node_id), elapsed);
}

TEST_CASE("criterion 4: cold-range containment under 10 s stress, 20 seeds") {
  std::uint64_t total_snapshots = 0;
  std::uint64_t total_violations = 0;
  bool enough = true;
  for (Backend b : {Backend::kUbst, Backend::kHashSet}) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      StressConfig cfg;
      cfg.backend = b;
      cfg.cold = {1, 100};
      cfg.hot = {200, 300};
      cfg.updaters = 4;
      cfg.iterators = 2;
      cfg.seconds = 10.0;
      cfg.seed = seed;
      StressResult r = global_consistency_stress(cfg);
      total_snapshots += r.snapshots;
      total_violations += r.violations;
      enough &= r.snapshots >= 1000;
      CHECK(r.violations == 0);
      CHECK(r.snapshots >= 1000);
    }
  }
  const bool pass = total_violations == 0 && enough;
  verdict(4, pass,
          "global consistency: %llu snapshots over 2 backends x 20 seeds "
          "x 10 s, %llu violations",
          static_cast<unsigned long long>(total_snapshots),
          static_cast<unsigned long long>(total_violations));
}

TEST_CASE("criterion 5: linearizability checking at desk scale") {
  std::size_t agreement = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    History h = generate_random_history(seed, 6, 3, 3);
    if (check_linearizable(h) == check_linearizable_bruteforce(h)) {
      ++agreement;
    }
  }
  CHECK(agreement == 1000);

  std::size_t live_total = 0;
  std::size_t live_linearizable = 0;
  for (Backend b : {Backend::kUbst, Backend::kHashSet}) {
    auto histories = capture_live_histories(b, 512, 3, 4, 4, 2024);
    for (const History& h : histories) {
      ++live_total;
      if (h.ops.size() <= 16 && check_linearizable(h)) ++live_linearizable;
    }
  }
  CHECK(live_total >= 1000);
  CHECK(live_linearizable == live_total);
  const bool pass =
      agreement == 1000 && live_total >= 1000 && live_linearizable == live_total;
  verdict(5, pass,
          "linearizability: %zu/1000 oracle agreements on generated "
          "histories; %zu/%zu live histories linearizable",
          agreement, live_linearizable, live_total);
}

namespace {

template <class A>
bool concurrent_delete_trials(int trials, std::uint64_t seed,
                              std::string& detail) {
  IterableSet<A> set(3);
  std::barrier sync(3);
  std::atomic<bool> done{false};
  std::atomic<int> wins{0};
  std::atomic<int> exceptions{0};
  const Key key = 1000;

  auto deleter = [&](unsigned tid) {
    while (true) {
      sync.arrive_and_wait();  // trial armed
      if (done.load(std::memory_order_acquire)) return;
      try {
        if (set.erase(tid, key)) wins.fetch_add(1);
      } catch (...) {
        exceptions.fetch_add(1);
      }
      sync.arrive_and_wait();  // trial scored
    }
  };
  std::thread t1(deleter, 1);
  std::thread t2(deleter, 2);

  std::mt19937_64 rng(seed);
  bool pass = true;
  for (int trial = 0; trial < trials && pass; ++trial) {
    // refill with some background keys so the deleted key sits at varying
    // positions of the structure
    if (trial % 64 == 0) {
      Key k = static_cast<Key>(rng() % 512);
      if (rng() % 2) {
        set.insert(0, k);
      } else {
        set.erase(0, k);
      }
    }
    bool inserted = set.insert(0, key);
    pass &= inserted;
    wins.store(0);
    sync.arrive_and_wait();
    sync.arrive_and_wait();
    pass &= wins.load() == 1;
    pass &= exceptions.load() == 0;
    pass &= !set.contains(0, key);
    if (trial % 1000 == 0) pass &= set.adapter().audit().ok;
  }
  done.store(true, std::memory_order_release);
  sync.arrive_and_wait();
  t1.join();
  t2.join();
  pass &= set.adapter().audit().ok;
  detail += pass ? "ok " : "violated ";
  return pass;
}

}  // namespace

TEST_CASE("criterion 6: exactly one winner per concurrent delete") {
  std::string detail;
  const bool ubst_ok =
      concurrent_delete_trials<UbstAdapter>(10000, 3, detail);
  const bool hash_ok =
      concurrent_delete_trials<HashSetAdapter>(10000, 3, detail);
  CHECK(ubst_ok);
  CHECK(hash_ok);
  verdict(6, ubst_ok && hash_ok,
          "race determinism: 10000 concurrent-delete trials per backend, "
          "one winner each, audits clean (ubst %s, hashset %s)",
          ubst_ok ? "ok" : "violated", hash_ok ? "ok" : "violated");
}

TEST_CASE("criterion 7: throughput characteristics (informational)") {
  const unsigned hw = std::thread::hardware_concurrency();
  bool slowdown_ok = true;
  double worst_slowdown = 0;
  bool monotone_ok = true;
  bool slope_ok = true;
  for (Backend b : {Backend::kUbst, Backend::kHashSet}) {
    std::vector<double> updater_tp;
    std::vector<double> iterator_tp;
    const std::vector<unsigned> counts{1, 3, 5, 7, 9};
    for (unsigned u : counts) {
      WorkloadConfig cfg;
      cfg.structure = b;
      cfg.updaters = u;
      cfg.iterators = 3;
      cfg.range_bits = 14;
      cfg.mix = Mix{25, 25, 50};
      cfg.seconds = 1.0;
      cfg.warmup = 0.3;
      cfg.seed = 9;
      BenchReport r = run_benchmark(cfg);
      updater_tp.push_back(r.wi.updater_throughput);
      iterator_tp.push_back(r.wi.iterator_throughput);
      if (r.slowdown > worst_slowdown) worst_slowdown = r.slowdown;
      slowdown_ok &= r.slowdown <= 1.6;
      std::printf("  [criterion 7] %s updaters=%u slowdown=%.2f "
                  "wi_updater=%.0f/s wi_iterator=%.0f/s\n",
                  to_string(b).c_str(), u, r.slowdown,
                  r.wi.updater_throughput, r.wi.iterator_throughput);
    }
    // monotone growth applies only up to the physical core count
    for (std::size_t i = 1; i < counts.size(); ++i) {
      if (counts[i] <= hw) {
        monotone_ok &= updater_tp[i] >= updater_tp[i - 1] * 0.9;
      }
    }
    // least-squares slope of iterator throughput over updater count
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      sx += counts[i];
      sy += iterator_tp[i];
      sxx += double(counts[i]) * counts[i];
      sxy += counts[i] * iterator_tp[i];
    }
    const double n = static_cast<double>(counts.size());
    slope_ok &= (n * sxy - sx * sy) / (n * sxx - sx * sx) < 0;
  }
  // Informational: targets assume multi-core hardware, so these do not gate
  // the suite. WARN still surfaces the measurements in the test log.
  WARN(slowdown_ok);
  WARN(monotone_ok);
  CHECK(slope_ok);
  const bool pass = slowdown_ok && monotone_ok && slope_ok;
  verdict(7, pass,
          "performance (informational, %u hardware threads): worst slowdown "
          "%.2f (target <= 1.6 %s), updater scaling to core count %s, "
          "iterator throughput slope negative %s",
          hw, worst_slowdown, slowdown_ok ? "met" : "not met",
          monotone_ok ? "ok" : "not met", slope_ok ? "ok" : "not met");
}

namespace {

std::vector<std::vector<Key>> scripted_snapshots(bool sorted,
                                                 std::uint64_t seed) {
  IterableSet<UbstAdapter> set(1);
  set.set_sorted_append(sorted);
  std::mt19937_64 rng(seed);
  std::vector<std::vector<Key>> snaps;
  for (int i = 0; i < 5000; ++i) {
    Key k = static_cast<Key>(rng() % 256);
    if (rng() % 2) {
      set.insert(0, k);
    } else {
      set.erase(0, k);
    }
    if (i % 50 == 0) snaps.push_back(set.iterate(0));
  }
  return snaps;
}

std::uint64_t cas_failures_under_iterators(bool sorted, double seconds) {
  const unsigned iterators = 3;
  IterableSet<UbstAdapter> set(iterators + 1);
  set.set_sorted_append(sorted);
  for (Key k = 0; k < 4096; ++k) set.insert(0, k);
  std::atomic<bool> stop{false};
  std::vector<std::thread> threads;
  for (unsigned t = 1; t <= iterators; ++t) {
    threads.emplace_back([&, t] {
      while (!stop.load(std::memory_order_relaxed)) set.iterate(t);
    });
  }
  std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
  stop.store(true);
  for (auto& t : threads) t.join();
  return set.registry().total_append_cas_failures();
}

}  // namespace

TEST_CASE("criterion 8: sorted-append optimization") {
  // Determinism: with a single driver thread the snapshot sequence is a
  // pure function of the seed, so the optimized and unoptimized runs must
  // produce byte-identical outputs.
  const bool identical =
      scripted_snapshots(false, 31) == scripted_snapshots(true, 31);
  CHECK(identical);

  // Contention: under 3 concurrent iterators the optimized mode must lose
  // strictly fewer snapshot-list CAS races (it skips appends already
  // covered by the list tail). Summed over 3 runs per mode.
  std::uint64_t plain = 0;
  std::uint64_t optimized = 0;
  for (int rep = 0; rep < 3; ++rep) {
    plain += cas_failures_under_iterators(false, 2.0);
    optimized += cas_failures_under_iterators(true, 2.0);
  }
  const bool fewer = optimized < plain;
  CHECK(fewer);
  verdict(8, identical && fewer,
          "sorted append: scripted snapshots identical %s; CAS failures "
          "%llu optimized vs %llu plain under 3 iterators (%s)",
          identical ? "yes" : "NO",
          static_cast<unsigned long long>(optimized),
          static_cast<unsigned long long>(plain),
          fewer ? "strictly lower" : "not lower");
}
