#include "snapiter/harness/stress.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "snapiter/hash_set.hpp"
#include "snapiter/iterable_set.hpp"
#include "snapiter/ubst.hpp"

namespace snapiter::harness {
namespace {

template <class A>
StressResult run(const StressConfig& cfg) {
  const unsigned total_threads = cfg.updaters + cfg.iterators;
  IterableSet<A> set(total_threads);
  for (Key k = cfg.cold.first; k <= cfg.cold.second; ++k) {
    set.insert(0, k);
  }

  std::atomic<bool> stop{false};
  std::atomic<std::uint64_t> snapshots{0};
  std::atomic<std::uint64_t> violations{0};
  std::atomic<std::uint64_t> updater_ops{0};

  auto updater = [&](unsigned tid) {
    std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ull + tid);
    const auto span =
        static_cast<std::uint64_t>(cfg.hot.second - cfg.hot.first + 1);
    std::uint64_t ops = 0;
    while (!stop.load(std::memory_order_relaxed)) {
      Key k = cfg.hot.first + static_cast<Key>(rng() % span);
      if (rng() % 2) {
        set.insert(tid, k);
      } else {
        set.erase(tid, k);
      }
      ++ops;
    }
    updater_ops.fetch_add(ops, std::memory_order_relaxed);
  };

  auto iterator = [&](unsigned tid) {
    while (!stop.load(std::memory_order_relaxed)) {
      std::vector<Key> snap = set.iterate(tid);
      bool ok = true;
      auto it = snap.begin();
      for (Key k = cfg.cold.first; k <= cfg.cold.second; ++k) {
        it = std::lower_bound(it, snap.end(), k);
        if (it == snap.end() || *it != k) {
          ok = false;
          break;
        }
      }
      snapshots.fetch_add(1, std::memory_order_relaxed);
      if (!ok) violations.fetch_add(1, std::memory_order_relaxed);
    }
  };

  std::vector<std::thread> threads;
  for (unsigned t = 0; t < cfg.updaters; ++t) {
    threads.emplace_back(updater, t);
  }
  for (unsigned t = cfg.updaters; t < total_threads; ++t) {
    threads.emplace_back(iterator, t);
  }
  std::this_thread::sleep_for(std::chrono::duration<double>(cfg.seconds));
  stop.store(true, std::memory_order_relaxed);
  for (auto& t : threads) t.join();

  return StressResult{snapshots.load(), violations.load(),
                      updater_ops.load()};
}

}  // namespace

StressResult global_consistency_stress(const StressConfig& cfg) {
  if (cfg.cold.second >= cfg.hot.first && cfg.hot.second >= cfg.cold.first) {
    throw std::invalid_argument("cold and hot ranges must be disjoint");
  }
  if (cfg.iterators == 0) {
    throw std::invalid_argument("stress needs at least one iterator");
  }
  return cfg.backend == Backend::kUbst ? run<UbstAdapter>(cfg)
                                       : run<HashSetAdapter>(cfg);
}

}  // namespace snapiter::harness
