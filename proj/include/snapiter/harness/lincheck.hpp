#pragma once

#include <cstdint>
#include <vector>

#include "snapiter/harness/common.hpp"
#include "snapiter/harness/history.hpp"

namespace snapiter::harness {

/// Searches for a total order of the history's operations consistent with
/// real-time precedence and the sequential set+snapshot specification
/// (iterate returns exactly the keys present at its point in the order).
/// Depth-first over completion sets with dead-state memoization; intended
/// for histories of at most ~16 operations.
bool check_linearizable(const History& h);

/// Reference oracle: tries every permutation of the operations. Usable only
/// for tiny histories (factorial cost).
bool check_linearizable_bruteforce(const History& h);

/// Well-formed random history with arbitrary results and snapshots: results
/// are invented, not executed, so the corpus mixes linearizable and
/// non-linearizable cases.
History generate_random_history(std::uint64_t seed, unsigned max_ops,
                                unsigned num_threads, Key key_range);

/// Runs num_threads real threads over a live set, each performing a few
/// operations on a tiny key range, and records the events with a global
/// logical clock. Every returned history comes from a real execution and
/// must therefore be linearizable.
std::vector<History> capture_live_histories(Backend backend,
                                            std::size_t count,
                                            unsigned num_threads,
                                            unsigned ops_per_thread,
                                            Key key_range,
                                            std::uint64_t seed);

}  // namespace snapiter::harness
