#pragma once

#include <utility>
#include <vector>

#include "snapiter/core.hpp"
#include "snapiter/snap_collector.hpp"

namespace snapiter {

/// Concurrent set with a linearizable iterate, built from a backend's
/// seek/ds_insert/ds_delete plus marking and snap-collector reporting.
/// Threads are registered up front: callers pass their dense id (0..T-1)
/// to every operation.
template <SetAdapter A>
class IterableSet {
 public:
  template <class... Args>
  explicit IterableSet(unsigned num_threads, Args&&... args)
      : adapter_(std::forward<Args>(args)...), registry_(num_threads) {}

  bool insert(unsigned tid, Key k) {
    while (true) {
      NodeHandle* n = adapter_.seek(k);
      if (n != nullptr) {
        if (n->marked()) {
          report_delete(tid, n);
          adapter_.ds_delete(n);
          continue;
        }
        try_report(tid, n);
        return false;
      }
      NodeHandle* inserted = adapter_.ds_insert(k);
      if (inserted != nullptr) {
        try_report(tid, inserted);
        return true;
      }
    }
  }

  bool erase(unsigned tid, Key k) {
    while (true) {
      NodeHandle* n = adapter_.seek(k);
      if (n == nullptr) return false;
      bool marked_here = n->try_mark();
      report_delete(tid, n);
      adapter_.ds_delete(n);
      if (marked_here) return true;
      // Lost the marking race; the node is physically gone now, restart.
    }
  }

  bool contains(unsigned tid, Key k) {
    NodeHandle* n = adapter_.seek(k);
    if (n == nullptr) return false;
    if (n->marked()) {
      report_delete(tid, n);
      return false;
    }
    try_report(tid, n);
    return true;
  }

  /// Linearized at the shared collector's deactivation.
  std::vector<Key> iterate(unsigned tid) {
    SnapCollector& sc = registry_.acquire(tid);
    auto cur = adapter_.cursor();
    const bool sorted = A::kSortedTraversal && sorted_append_;
    while (sc.active()) {
      NodeHandle* n = cur.next();
      if (n == nullptr) break;
      if (!sc.add_node(n, sorted)) break;  // blocked: abandon remaining adds
    }
    sc.block_and_deactivate();
    auto snapshot = sc.reconstruct_snapshot();
    registry_.clear_hazard(tid);
    return snapshot;
  }

  /// Enables the snapshot-append optimization; only effective on backends
  /// whose cursor yields keys in sorted order.
  void set_sorted_append(bool on) { sorted_append_ = on; }
  bool sorted_append() const { return sorted_append_; }

  A& adapter() { return adapter_; }
  const A& adapter() const { return adapter_; }
  CollectorRegistry& registry() { return registry_; }

 private:
  void try_report(unsigned tid, NodeHandle* n) {
    SnapCollector* sc = registry_.read_active(tid);
    if (sc == nullptr) return;
    if (n->marked()) {
      sc->report(tid, Report{n, n->key(), ReportKind::kDelete});
    } else {
      sc->report(tid, Report{n, n->key(), ReportKind::kInsert});
    }
    registry_.clear_hazard(tid);
  }

  void report_delete(unsigned tid, NodeHandle* n) {
    SnapCollector* sc = registry_.read_active(tid);
    if (sc == nullptr) return;
    sc->report(tid, Report{n, n->key(), ReportKind::kDelete});
    registry_.clear_hazard(tid);
  }

  A adapter_;
  CollectorRegistry registry_;
  bool sorted_append_ = false;
};

}  // namespace snapiter
