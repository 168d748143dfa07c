#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snapiter/harness/common.hpp"
#include "snapiter/core.hpp"

namespace snapiter::harness {

struct Mix {
  unsigned insert_pct = 25;
  unsigned delete_pct = 25;
  unsigned contains_pct = 50;

  bool valid() const {
    return insert_pct + delete_pct + contains_pct == 100;
  }
};

Mix mix_from_string(const std::string& s);  // "25-25-50" form
std::string to_string(const Mix& m);

struct WorkloadConfig {
  Backend structure = Backend::kUbst;
  unsigned updaters = 4;
  unsigned iterators = 0;
  unsigned range_bits = 14;  // keys drawn from [0, 2^range_bits)
  Mix mix;
  double seconds = 2.0;
  double warmup = 0.5;
  std::uint64_t seed = 1;
  bool sorted_append = false;
};

struct PhaseReport {
  std::uint64_t updater_ops = 0;
  std::uint64_t iterator_ops = 0;
  double updater_throughput = 0;   // ops per second over the measured window
  double iterator_throughput = 0;
  std::uint64_t append_cas_failures = 0;
  std::vector<std::uint64_t> per_thread_ops;  // updaters then iterators
};

struct BenchReport {
  WorkloadConfig config;
  PhaseReport woi;  // phase without iterators
  PhaseReport wi;   // phase with the configured iterators
  double slowdown = 0;  // woi.updater_throughput / wi.updater_throughput
  std::vector<Key> first_snapshot;  // first iterate of the WI phase, if any
};

/// Two deterministic-preload phases with identical updater streams: first
/// without iterators (WOI), then with them (WI). slowdown is the updater
/// throughput ratio WOI/WI.
BenchReport run_benchmark(const WorkloadConfig& cfg);

std::string report_to_json(const BenchReport& r);
std::string report_to_csv(const BenchReport& r);

}  // namespace snapiter::harness
