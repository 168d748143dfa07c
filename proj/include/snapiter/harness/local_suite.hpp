#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "snapiter/harness/local_check.hpp"

namespace snapiter::harness {

struct LocalSuiteResult {
  std::size_t scenarios = 0;
  struct Failure {
    std::string description;
    std::size_t position;
    std::uint64_t node_id;
  };
  std::vector<Failure> failures;

  bool ok() const { return failures.empty(); }
};

/// Exhaustively checks every shipped single-CAS mutator of the unbalanced
/// BST (insert, mark, flag, tag, cleanup) over trees up to max_leaves
/// leaves, built from enumerated and sampled insertion orders with varied
/// mark patterns.
LocalSuiteResult run_ubst_local_suite(int max_leaves, std::uint64_t seed);

/// Same for the hash set's four atomic steps (bucket insert, bucket delete,
/// bucket init, head swing) over tables up to max_buckets buckets and
/// max_keys keys.
LocalSuiteResult run_hashset_local_suite(int max_buckets, int max_keys,
                                         std::uint64_t seed);

/// Adversarial root rotation on an internal (keys-in-every-node) tree, the
/// kind of step the framework must reject: the rotation's change set is
/// empty but it pulls the whole left subtree out of a paused iterator's
/// view. Returns the violation the checker finds; nullopt would mean the
/// checker wrongly accepted it.
std::optional<LocalViolation> run_rotation_counterexample();

}  // namespace snapiter::harness
