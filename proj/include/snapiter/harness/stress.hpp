#pragma once

#include <cstdint>
#include <utility>

#include "snapiter/harness/common.hpp"
#include "snapiter/core.hpp"

namespace snapiter::harness {

struct StressConfig {
  Backend backend = Backend::kUbst;
  std::pair<Key, Key> cold{1, 100};   // inclusive; preloaded, never touched
  std::pair<Key, Key> hot{200, 300};  // inclusive; updaters stay inside
  unsigned updaters = 4;
  unsigned iterators = 2;
  double seconds = 2.0;
  std::uint64_t seed = 1;
};

struct StressResult {
  std::uint64_t snapshots = 0;
  std::uint64_t violations = 0;  // snapshots missing some cold key
  std::uint64_t updater_ops = 0;
};

/// Preloads the cold range, lets updaters churn the hot range while
/// iterators snapshot, and counts snapshots that fail cold ⊆ snapshot.
StressResult global_consistency_stress(const StressConfig& cfg);

}  // namespace snapiter::harness
