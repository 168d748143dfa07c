#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "snapiter/core.hpp"

namespace snapiter {

enum class ReportKind : std::uint8_t { kInsert, kDelete };

struct Report {
  const NodeHandle* node;
  Key key;
  ReportKind kind;
};

/// Shared snapshot-building object. Iterators append collected nodes to the
/// snapshot-list; updaters append reports to their per-thread report-lists.
/// Blocking appends a distinguished sentinel cell to each list, so late
/// appenders fail deterministically and the blocked lists are immutable.
class SnapCollector {
 public:
  explicit SnapCollector(unsigned num_threads)
      : num_threads_(num_threads),
        reports_(std::make_unique<ReportList[]>(num_threads)) {
    tail_.store(&snap_head_, std::memory_order_relaxed);
  }

  SnapCollector(const SnapCollector&) = delete;
  SnapCollector& operator=(const SnapCollector&) = delete;

  ~SnapCollector() {
    free_chain(snap_head_.next.load(std::memory_order_relaxed), &snap_end_);
    for (unsigned t = 0; t < num_threads_; ++t) {
      auto& rl = reports_[t];
      ReportCell* p = rl.head.next.load(std::memory_order_relaxed);
      while (p && p != &rl.end) {
        ReportCell* next = p->next.load(std::memory_order_relaxed);
        delete p;
        p = next;
      }
    }
  }

  bool active() const { return active_.load(std::memory_order_acquire); }

  bool nodes_blocked() const {
    return nodes_blocked_.load(std::memory_order_acquire);
  }

  /// Appends n to the snapshot-list. Returns true iff the node is covered by
  /// the list: either this call linked it, or (sorted mode) an entry with a
  /// key >= n's key is already at the tail, meaning the node was appended by
  /// an iterator further along the sorted traversal. Returns false once the
  /// list is blocked or the collector deactivated.
  bool add_node(const NodeHandle* n, bool sorted_append = false) {
    if (nodes_blocked()) return false;
    SnapCell* fresh = nullptr;
    while (true) {
      SnapCell* t = tail_.load(std::memory_order_acquire);
      if (t == &snap_end_) {
        delete fresh;
        return false;
      }
      SnapCell* next = t->next.load(std::memory_order_acquire);
      if (next == &snap_end_) {
        delete fresh;
        return false;
      }
      if (next != nullptr) {
        tail_.compare_exchange_strong(t, next, std::memory_order_acq_rel);
        continue;
      }
      if (sorted_append && t != &snap_head_ && t->node->key() >= n->key()) {
        delete fresh;
        return true;
      }
      if (!fresh) fresh = new SnapCell{n};
      SnapCell* expected = nullptr;
      if (t->next.compare_exchange_strong(expected, fresh,
                                          std::memory_order_acq_rel)) {
        tail_.compare_exchange_strong(t, fresh, std::memory_order_acq_rel);
        return true;
      }
      append_cas_failures_.fetch_add(1, std::memory_order_relaxed);
      if (!active() && nodes_blocked()) {
        delete fresh;
        return false;
      }
    }
  }

  /// Appends a report to thread_id's report-list. Drops it silently when the
  /// collector is inactive or the list is blocked.
  void report(unsigned thread_id, Report r) {
    auto& rl = reports_[thread_id];
    if (rl.blocked.load(std::memory_order_acquire)) return;
    if (!active()) return;
    ReportCell* fresh = nullptr;
    while (true) {
      ReportCell* t = rl.tail.load(std::memory_order_acquire);
      if (t == &rl.end) {
        delete fresh;
        return;
      }
      ReportCell* next = t->next.load(std::memory_order_acquire);
      if (next == &rl.end) {
        delete fresh;
        return;
      }
      if (next != nullptr) {
        rl.tail.compare_exchange_strong(t, next, std::memory_order_acq_rel);
        continue;
      }
      if (!fresh) fresh = new ReportCell{r};
      ReportCell* expected = nullptr;
      if (t->next.compare_exchange_strong(expected, fresh,
                                          std::memory_order_acq_rel)) {
        rl.tail.compare_exchange_strong(t, fresh, std::memory_order_acq_rel);
        return;
      }
    }
  }

  /// Deactivates the collector and blocks every list by appending sentinels.
  /// Idempotent; safe to call from several iterators at once. After any call
  /// returns, no further add_node or report can land.
  void block_and_deactivate() {
    active_.store(false, std::memory_order_release);
    nodes_blocked_.store(true, std::memory_order_release);
    while (true) {
      SnapCell* t = tail_.load(std::memory_order_acquire);
      if (t == &snap_end_) break;
      SnapCell* next = t->next.load(std::memory_order_acquire);
      if (next == &snap_end_) break;
      if (next != nullptr) {
        tail_.compare_exchange_strong(t, next, std::memory_order_acq_rel);
        continue;
      }
      SnapCell* expected = nullptr;
      if (t->next.compare_exchange_strong(expected, &snap_end_,
                                          std::memory_order_acq_rel)) {
        break;
      }
    }
    for (unsigned i = 0; i < num_threads_; ++i) {
      auto& rl = reports_[i];
      rl.blocked.store(true, std::memory_order_release);
      while (true) {
        ReportCell* t = rl.tail.load(std::memory_order_acquire);
        if (t == &rl.end) break;
        ReportCell* next = t->next.load(std::memory_order_acquire);
        if (next == &rl.end) break;
        if (next != nullptr) {
          rl.tail.compare_exchange_strong(t, next, std::memory_order_acq_rel);
          continue;
        }
        ReportCell* expected = nullptr;
        if (t->next.compare_exchange_strong(expected, &rl.end,
                                            std::memory_order_acq_rel)) {
          break;
        }
      }
    }
    blocked_all_.store(true, std::memory_order_release);
  }

  /// Merge rule over the blocked lists: a node is in the snapshot iff it was
  /// collected or insert-reported, and is in no delete report. Membership is
  /// per node identity; the result projects to sorted, deduplicated keys.
  std::vector<Key> reconstruct_snapshot() const {
    if (!blocked_all_.load(std::memory_order_acquire)) {
      throw std::logic_error(
          "reconstruct_snapshot called before block_and_deactivate completed");
    }
    std::unordered_map<std::uint64_t, Key> candidates;
    std::unordered_set<std::uint64_t> deleted;
    for (const SnapCell* c = snap_head_.next.load(std::memory_order_acquire);
         c && c != &snap_end_; c = c->next.load(std::memory_order_acquire)) {
      candidates.emplace(c->node->id(), c->node->key());
    }
    for (unsigned t = 0; t < num_threads_; ++t) {
      const auto& rl = reports_[t];
      for (const ReportCell* c = rl.head.next.load(std::memory_order_acquire);
           c && c != &rl.end; c = c->next.load(std::memory_order_acquire)) {
        if (c->r.kind == ReportKind::kInsert) {
          candidates.emplace(c->r.node->id(), c->r.key);
        } else {
          deleted.insert(c->r.node->id());
        }
      }
    }
    std::vector<Key> keys;
    keys.reserve(candidates.size());
    for (const auto& [id, key] : candidates) {
      if (!deleted.contains(id)) keys.push_back(key);
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return keys;
  }

  /// Raw snapshot-list contents, in append order (test/audit use).
  std::vector<const NodeHandle*> snapshot_list() const {
    std::vector<const NodeHandle*> out;
    for (const SnapCell* c = snap_head_.next.load(std::memory_order_acquire);
         c && c != &snap_end_; c = c->next.load(std::memory_order_acquire)) {
      out.push_back(c->node);
    }
    return out;
  }

  /// Reports of one thread, in append order (test/audit use).
  std::vector<Report> reports_of(unsigned thread_id) const {
    std::vector<Report> out;
    const auto& rl = reports_[thread_id];
    for (const ReportCell* c = rl.head.next.load(std::memory_order_acquire);
         c && c != &rl.end; c = c->next.load(std::memory_order_acquire)) {
      out.push_back(c->r);
    }
    return out;
  }

  std::uint64_t append_cas_failures() const {
    return append_cas_failures_.load(std::memory_order_relaxed);
  }

  unsigned num_threads() const { return num_threads_; }

 private:
  struct SnapCell {
    const NodeHandle* node = nullptr;
    std::atomic<SnapCell*> next{nullptr};
  };

  struct ReportCell {
    Report r{};
    std::atomic<ReportCell*> next{nullptr};
  };

  struct ReportList {
    ReportCell head;
    std::atomic<ReportCell*> tail{&head};
    std::atomic<bool> blocked{false};
    ReportCell end;
  };

  void free_chain(SnapCell* p, SnapCell* stop) {
    while (p && p != stop) {
      SnapCell* next = p->next.load(std::memory_order_relaxed);
      delete p;
      p = next;
    }
  }

  unsigned num_threads_;
  std::atomic<bool> active_{true};
  std::atomic<bool> nodes_blocked_{false};
  std::atomic<bool> blocked_all_{false};
  SnapCell snap_head_;
  SnapCell snap_end_;
  std::atomic<SnapCell*> tail_;
  std::unique_ptr<ReportList[]> reports_;
  std::atomic<std::uint64_t> append_cas_failures_{0};
};

/// Global collector slot shared by all threads of one set instance. Threads
/// are registered up front with dense ids 0..T-1. Superseded collectors are
/// reclaimed through per-thread hazard slots: a thread publishes the collector
/// it is about to use and re-validates the slot, so the scanner never frees a
/// collector still in use.
class CollectorRegistry {
 public:
  explicit CollectorRegistry(unsigned num_threads)
      : num_threads_(num_threads),
        hazards_(std::make_unique<HazardSlot[]>(num_threads)) {}

  CollectorRegistry(const CollectorRegistry&) = delete;
  CollectorRegistry& operator=(const CollectorRegistry&) = delete;

  ~CollectorRegistry() {
    delete slot_.load(std::memory_order_relaxed);
    Retired* r = retired_.load(std::memory_order_relaxed);
    while (r) {
      Retired* next = r->next;
      fold_stats(r->collector);
      delete r->collector;
      delete r;
      r = next;
    }
  }

  unsigned num_threads() const { return num_threads_; }

  /// Returns the active collector, installing a fresh one if none is active.
  /// Racing callers converge on a single winner. The returned collector is
  /// hazard-protected for the calling thread until clear_hazard(tid).
  SnapCollector& acquire(unsigned tid) {
    while (true) {
      SnapCollector* c = protect(tid);
      if (c && c->active()) return *c;
      auto* fresh = new SnapCollector(num_threads_);
      // Publish the hazard before installing, so no scanner can free the
      // fresh collector between a competing replacement and our return.
      hazards_[tid].ptr.store(fresh, std::memory_order_release);
      SnapCollector* expected = c;
      if (slot_.compare_exchange_strong(expected, fresh,
                                        std::memory_order_acq_rel)) {
        if (c) retire(c);
        return *fresh;
      }
      delete fresh;
    }
  }

  /// Returns the active collector or nullptr; never creates one. The result,
  /// when non-null, is hazard-protected until clear_hazard(tid).
  SnapCollector* read_active(unsigned tid) {
    SnapCollector* c = protect(tid);
    if (c && c->active()) return c;
    clear_hazard(tid);
    return nullptr;
  }

  void clear_hazard(unsigned tid) {
    hazards_[tid].ptr.store(nullptr, std::memory_order_release);
  }

  /// Snapshot-list CAS failures summed over retired and live collectors.
  std::uint64_t total_append_cas_failures() const {
    std::uint64_t total =
        folded_cas_failures_.load(std::memory_order_relaxed);
    for (Retired* r = retired_.load(std::memory_order_acquire); r;
         r = r->next) {
      total += r->collector->append_cas_failures();
    }
    if (auto* c = slot_.load(std::memory_order_acquire)) {
      total += c->append_cas_failures();
    }
    return total;
  }

 private:
  struct HazardSlot {
    std::atomic<SnapCollector*> ptr{nullptr};
    char pad[64 - sizeof(std::atomic<SnapCollector*>)];
  };

  struct Retired {
    SnapCollector* collector;
    Retired* next;
  };

  SnapCollector* protect(unsigned tid) {
    auto& hp = hazards_[tid].ptr;
    while (true) {
      SnapCollector* c = slot_.load(std::memory_order_acquire);
      hp.store(c, std::memory_order_release);
      if (slot_.load(std::memory_order_acquire) == c) return c;
    }
  }

  void retire(SnapCollector* c) {
    auto* cell = new Retired{c, retired_.load(std::memory_order_relaxed)};
    while (!retired_.compare_exchange_weak(cell->next, cell,
                                           std::memory_order_release,
                                           std::memory_order_relaxed)) {
    }
    if (++retire_count_ % kScanInterval == 0) scan();
  }

  // Frees retired collectors not protected by any hazard slot. Single
  // scanner at a time; contenders skip and the work is picked up later.
  void scan() {
    bool expected = false;
    if (!scanning_.compare_exchange_strong(expected, true,
                                           std::memory_order_acq_rel)) {
      return;
    }
    Retired* list = retired_.exchange(nullptr, std::memory_order_acq_rel);
    std::unordered_set<SnapCollector*> protected_set;
    for (unsigned i = 0; i < num_threads_; ++i) {
      if (auto* p = hazards_[i].ptr.load(std::memory_order_acquire)) {
        protected_set.insert(p);
      }
    }
    Retired* keep = nullptr;
    while (list) {
      Retired* next = list->next;
      if (protected_set.contains(list->collector)) {
        list->next = keep;
        keep = list;
      } else {
        fold_stats(list->collector);
        delete list->collector;
        delete list;
      }
      list = next;
    }
    while (keep) {
      Retired* next = keep->next;
      keep->next = retired_.load(std::memory_order_relaxed);
      while (!retired_.compare_exchange_weak(keep->next, keep,
                                             std::memory_order_release,
                                             std::memory_order_relaxed)) {
      }
      keep = next;
    }
    scanning_.store(false, std::memory_order_release);
  }

  void fold_stats(SnapCollector* c) {
    folded_cas_failures_.fetch_add(c->append_cas_failures(),
                                   std::memory_order_relaxed);
  }

  static constexpr unsigned kScanInterval = 64;

  unsigned num_threads_;
  std::atomic<SnapCollector*> slot_{nullptr};
  std::atomic<Retired*> retired_{nullptr};
  std::atomic<unsigned> retire_count_{0};
  std::atomic<bool> scanning_{false};
  std::atomic<std::uint64_t> folded_cas_failures_{0};
  std::unique_ptr<HazardSlot[]> hazards_;
};

}  // namespace snapiter
