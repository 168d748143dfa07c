#include "snapiter/harness/bench.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "snapiter/hash_set.hpp"
#include "snapiter/iterable_set.hpp"
#include "snapiter/ubst.hpp"

namespace snapiter::harness {

Mix mix_from_string(const std::string& s) {
  Mix m;
  if (std::sscanf(s.c_str(), "%u-%u-%u", &m.insert_pct, &m.delete_pct,
                  &m.contains_pct) != 3 ||
      !m.valid()) {
    throw std::invalid_argument("unsupported mix: " + s);
  }
  return m;
}

std::string to_string(const Mix& m) {
  std::ostringstream os;
  os << m.insert_pct << "-" << m.delete_pct << "-" << m.contains_pct;
  return os.str();
}

namespace {

struct alignas(64) PaddedCounter {
  std::atomic<std::uint64_t> value{0};
};

template <class A>
PhaseReport run_phase(const WorkloadConfig& cfg, unsigned iterators,
                      std::vector<Key>* first_snapshot) {
  const unsigned total_threads = cfg.updaters + std::max(iterators, 1u);
  IterableSet<A> set(total_threads);
  set.set_sorted_append(cfg.sorted_append);

  // Deterministic preload: each key present with probability 1/2.
  const std::uint64_t range = std::uint64_t{1} << cfg.range_bits;
  std::mt19937_64 preload_rng(cfg.seed);
  for (std::uint64_t k = 0; k < range; ++k) {
    if (preload_rng() % 2) set.insert(0, static_cast<Key>(k));
  }

  std::atomic<bool> stop{false};
  std::vector<PaddedCounter> ops(total_threads);
  std::atomic<bool> snapshot_taken{false};
  std::mutex snapshot_mu;

  auto updater = [&](unsigned tid) {
    std::mt19937_64 rng(cfg.seed ^ (0x9E3779B97F4A7C15ull * (tid + 1)));
    while (!stop.load(std::memory_order_relaxed)) {
      const auto roll = rng() % 100;
      const Key k = static_cast<Key>(rng() % range);
      if (roll < cfg.mix.insert_pct) {
        set.insert(tid, k);
      } else if (roll < cfg.mix.insert_pct + cfg.mix.delete_pct) {
        set.erase(tid, k);
      } else {
        set.contains(tid, k);
      }
      ops[tid].value.fetch_add(1, std::memory_order_relaxed);
    }
  };

  auto iterator = [&](unsigned tid) {
    while (!stop.load(std::memory_order_relaxed)) {
      std::vector<Key> snap = set.iterate(tid);
      if (first_snapshot && !snapshot_taken.exchange(true)) {
        std::lock_guard<std::mutex> lock(snapshot_mu);
        *first_snapshot = std::move(snap);
      }
      ops[tid].value.fetch_add(1, std::memory_order_relaxed);
    }
  };

  std::vector<std::thread> threads;
  for (unsigned t = 0; t < cfg.updaters; ++t) threads.emplace_back(updater, t);
  for (unsigned t = cfg.updaters; t < cfg.updaters + iterators; ++t) {
    threads.emplace_back(iterator, t);
  }

  std::this_thread::sleep_for(std::chrono::duration<double>(cfg.warmup));
  std::vector<std::uint64_t> start(total_threads);
  for (unsigned t = 0; t < total_threads; ++t) {
    start[t] = ops[t].value.load(std::memory_order_relaxed);
  }
  const std::uint64_t cas_start = set.registry().total_append_cas_failures();
  const auto t0 = std::chrono::steady_clock::now();
  std::this_thread::sleep_for(std::chrono::duration<double>(cfg.seconds));
  PhaseReport r;
  for (unsigned t = 0; t < total_threads; ++t) {
    const std::uint64_t n =
        ops[t].value.load(std::memory_order_relaxed) - start[t];
    r.per_thread_ops.push_back(n);
    if (t < cfg.updaters) {
      r.updater_ops += n;
    } else {
      r.iterator_ops += n;
    }
  }
  r.append_cas_failures =
      set.registry().total_append_cas_failures() - cas_start;
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  stop.store(true, std::memory_order_relaxed);
  for (auto& t : threads) t.join();

  r.per_thread_ops.resize(cfg.updaters + iterators);
  r.updater_throughput = static_cast<double>(r.updater_ops) / elapsed;
  r.iterator_throughput = static_cast<double>(r.iterator_ops) / elapsed;
  return r;
}

template <class A>
BenchReport run_backend(const WorkloadConfig& cfg) {
  BenchReport report;
  report.config = cfg;
  report.woi = run_phase<A>(cfg, 0, nullptr);
  report.wi = run_phase<A>(cfg, cfg.iterators, &report.first_snapshot);
  report.slowdown = report.wi.updater_throughput > 0
                        ? report.woi.updater_throughput /
                              report.wi.updater_throughput
                        : 0.0;
  return report;
}

nlohmann::json phase_json(const PhaseReport& p) {
  return {{"updater_ops", p.updater_ops},
          {"iterator_ops", p.iterator_ops},
          {"updater_throughput", p.updater_throughput},
          {"iterator_throughput", p.iterator_throughput},
          {"append_cas_failures", p.append_cas_failures},
          {"per_thread_ops", p.per_thread_ops}};
}

}  // namespace

BenchReport run_benchmark(const WorkloadConfig& cfg) {
  if (!cfg.mix.valid()) {
    throw std::invalid_argument("mix percentages must sum to 100");
  }
  if (cfg.updaters == 0) {
    throw std::invalid_argument("benchmark needs at least one updater");
  }
  return cfg.structure == Backend::kUbst ? run_backend<UbstAdapter>(cfg)
                                         : run_backend<HashSetAdapter>(cfg);
}

std::string report_to_json(const BenchReport& r) {
  nlohmann::json j{
      {"structure", to_string(r.config.structure)},
      {"config",
       {{"updaters", r.config.updaters},
        {"iterators", r.config.iterators},
        {"range_bits", r.config.range_bits},
        {"mix", to_string(r.config.mix)},
        {"seconds", r.config.seconds},
        {"warmup", r.config.warmup},
        {"seed", r.config.seed},
        {"sorted_append", r.config.sorted_append}}},
      {"throughput_woi", r.woi.updater_throughput},
      {"throughput_wi", r.wi.updater_throughput},
      {"slowdown", r.slowdown},
      {"iterator_ops", r.wi.iterator_ops},
      {"phases", {{"woi", phase_json(r.woi)}, {"wi", phase_json(r.wi)}}}};
  return j.dump(2);
}

std::string report_to_csv(const BenchReport& r) {
  std::ostringstream os;
  os << "structure,updaters,iterators,range_bits,mix,seed,sorted_append,"
        "throughput_woi,throughput_wi,slowdown,iterator_ops,"
        "cas_failures_woi,cas_failures_wi\n";
  os << to_string(r.config.structure) << "," << r.config.updaters << ","
     << r.config.iterators << "," << r.config.range_bits << ","
     << to_string(r.config.mix) << "," << r.config.seed << ","
     << (r.config.sorted_append ? 1 : 0) << "," << r.woi.updater_throughput
     << "," << r.wi.updater_throughput << "," << r.slowdown << ","
     << r.wi.iterator_ops << "," << r.woi.append_cas_failures << ","
     << r.wi.append_cas_failures << "\n";
  return os.str();
}

}  // namespace snapiter::harness
