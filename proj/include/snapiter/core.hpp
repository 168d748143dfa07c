#pragma once

#include <atomic>
#include <concepts>
#include <cstdint>
#include <memory>

namespace snapiter {

using Key = std::int64_t;

/// One set element behind a level of indirection. The handle carries the
/// logical-deletion mark and a process-wide unique identity token; identities
/// are never reused, so reports and snapshot entries can be matched by node
/// rather than by key.
class NodeHandle {
 public:
  explicit NodeHandle(Key k) : key_(k), id_(next_id()) {}

  NodeHandle(const NodeHandle&) = delete;
  NodeHandle& operator=(const NodeHandle&) = delete;

  Key key() const { return key_; }
  std::uint64_t id() const { return id_; }

  bool marked() const { return mark_.load(std::memory_order_acquire); }

  /// Attempts the false->true transition. Returns true iff this call
  /// performed it; the mark never goes back.
  bool try_mark() {
    bool expected = false;
    return mark_.compare_exchange_strong(expected, true,
                                         std::memory_order_acq_rel);
  }

 private:
  static std::uint64_t next_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
  }

  Key key_;
  std::uint64_t id_;
  std::atomic<bool> mark_{false};
};

/// Intrusive allocation registry. Nodes are pushed on allocation and freed
/// only when the owning structure is destroyed, which realizes the memory
/// contract: anything a collector or in-flight operation may still reference
/// stays dereferenceable for the structure's lifetime.
template <class T>
class AllocList {
 public:
  AllocList() = default;
  AllocList(const AllocList&) = delete;
  AllocList& operator=(const AllocList&) = delete;

  ~AllocList() {
    T* p = head_.load(std::memory_order_acquire);
    while (p) {
      T* next = p->alloc_next_;
      delete p;
      p = next;
    }
  }

  void track(T* p) {
    T* h = head_.load(std::memory_order_relaxed);
    do {
      p->alloc_next_ = h;
    } while (!head_.compare_exchange_weak(h, p, std::memory_order_release,
                                          std::memory_order_relaxed));
  }

 private:
  std::atomic<T*> head_{nullptr};
};

/// Contract every backend implements. seek/ds_insert/ds_delete are the
/// original structure's operations restated over NodeHandle; the cursor is
/// the backend's sequential iterator and fixes the traversal order <_T.
template <class A>
concept SetAdapter = requires(A a, Key k, NodeHandle* n) {
  { a.seek(k) } -> std::same_as<NodeHandle*>;
  { a.ds_insert(k) } -> std::same_as<NodeHandle*>;
  { a.ds_delete(n) };
  typename A::Cursor;
  requires std::copyable<typename A::Cursor>;
  { a.cursor() } -> std::same_as<typename A::Cursor>;
  { A::kSortedTraversal } -> std::convertible_to<bool>;
};

}  // namespace snapiter
