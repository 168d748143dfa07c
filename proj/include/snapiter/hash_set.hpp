#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "snapiter/core.hpp"

namespace snapiter {

/// Lock-free resizable hash set: versioned bucket arrays (HNode) with
/// freezable copy-on-write buckets (FSet) and lazy migration. A bucket slot
/// packs the FSet pointer with a freeze bit, so freezing and bucket
/// replacement serialize on a single word: once the bit is set, the slot's
/// logical contents never change again.
class HashSetAdapter {
 public:
  struct FSet {
    explicit FSet(std::vector<NodeHandle*> n) : nodes(std::move(n)) {}
    const std::vector<NodeHandle*> nodes;
    std::atomic<bool> frozen{false};
    FSet* alloc_next_ = nullptr;
  };

  struct HNode {
    HNode(std::size_t n, HNode* p) : buckets(n), size(n), pred(p) {}
    std::vector<std::atomic<std::uintptr_t>> buckets;  // FSet* | freeze bit
    const std::size_t size;  // power of two
    std::atomic<HNode*> pred;
    HNode* alloc_next_ = nullptr;
  };

  static constexpr bool kSortedTraversal = false;

  explicit HashSetAdapter(std::size_t initial_buckets = 4,
                          std::size_t grow_threshold = 8)
      : grow_threshold_(grow_threshold) {
    head_.store(make_hnode(initial_buckets, nullptr),
                std::memory_order_relaxed);
  }

  HashSetAdapter(const HashSetAdapter&) = delete;
  HashSetAdapter& operator=(const HashSetAdapter&) = delete;

  static std::size_t bucket_of(Key k, std::size_t size) {
    return static_cast<std::size_t>(static_cast<std::uint64_t>(k) *
                                    0x9E3779B97F4A7C15ull) &
           (size - 1);
  }

  // --- adapter contract --------------------------------------------------

  NodeHandle* seek(Key k) {
    HNode* h = head_.load(std::memory_order_acquire);
    std::size_t i = bucket_of(k, h->size);
    std::uintptr_t w = h->buckets[i].load(std::memory_order_acquire);
    if (FSet* b = fset(w)) return find_in(b, k);
    HNode* pred = h->pred.load(std::memory_order_acquire);
    if (pred == nullptr) {
      // pred may have been cleared after the bucket got initialized
      w = h->buckets[i].load(std::memory_order_acquire);
      if (FSet* b = fset(w)) return find_in(b, k);
      return nullptr;
    }
    std::size_t j = bucket_of(k, pred->size);
    FSet* b = fset(pred->buckets[j].load(std::memory_order_acquire));
    return b ? find_in(b, k) : nullptr;
  }

  /// One bucket-replacing CAS: copy of the bucket plus a fresh node for k.
  /// nullptr on interference or a frozen bucket (framework retries).
  NodeHandle* ds_insert(Key k) {
    HNode* h = head_.load(std::memory_order_acquire);
    std::size_t i = bucket_of(k, h->size);
    FSet* b = ensure_bucket(h, i);
    for (NodeHandle* n : b->nodes) {
      if (n->key() == k) return nullptr;  // raced with another insert
    }
    NodeHandle* handle = make_handle(k);
    std::vector<NodeHandle*> nodes = b->nodes;
    nodes.push_back(handle);
    FSet* copy = make_fset(std::move(nodes));
    std::uintptr_t expected = word(b);
    if (h->buckets[i].compare_exchange_strong(expected, word(copy),
                                              std::memory_order_acq_rel)) {
      if (copy->nodes.size() > grow_threshold_) resize(true);
      return handle;
    }
    return nullptr;
  }

  /// Replaces n's bucket with a copy omitting n, helping lazy migration on
  /// the way. Returns once n is unreachable from the head version.
  void ds_delete(NodeHandle* n) {
    const Key k = n->key();
    while (true) {
      HNode* h = head_.load(std::memory_order_acquire);
      std::size_t i = bucket_of(k, h->size);
      FSet* b = ensure_bucket(h, i);
      bool found = false;
      for (NodeHandle* m : b->nodes) {
        if (m == n) {
          found = true;
          break;
        }
      }
      if (!found) return;  // absence is monotone across copies
      std::vector<NodeHandle*> nodes;
      nodes.reserve(b->nodes.size() - 1);
      for (NodeHandle* m : b->nodes) {
        if (m != n) nodes.push_back(m);
      }
      FSet* copy = make_fset(std::move(nodes));
      std::uintptr_t expected = word(b);
      if (h->buckets[i].compare_exchange_strong(expected, word(copy),
                                                std::memory_order_acq_rel)) {
        return;
      }
    }
  }

  /// Initializes bucket i of h from the frozen predecessor bucket(s); racing
  /// initializers adopt the single installed FSet.
  FSet* ensure_bucket(HNode* h, std::size_t i) {
    std::uintptr_t w = h->buckets[i].load(std::memory_order_acquire);
    if (FSet* b = fset(w)) return b;
    HNode* pred = h->pred.load(std::memory_order_acquire);
    std::vector<NodeHandle*> nodes;
    if (pred == nullptr) {
      w = h->buckets[i].load(std::memory_order_acquire);
      if (FSet* b = fset(w)) return b;
      // initial table: bucket starts out empty
    } else if (h->size > pred->size) {
      FSet* src = freeze_bucket(pred, i & (pred->size - 1));
      for (NodeHandle* n : src->nodes) {
        if (bucket_of(n->key(), h->size) == i) nodes.push_back(n);
      }
    } else {
      FSet* lo = freeze_bucket(pred, i);
      FSet* hi = freeze_bucket(pred, i + h->size);
      nodes = lo->nodes;
      nodes.insert(nodes.end(), hi->nodes.begin(), hi->nodes.end());
    }
    FSet* fresh = make_fset(std::move(nodes));
    std::uintptr_t expected = 0;
    if (h->buckets[i].compare_exchange_strong(expected, word(fresh),
                                              std::memory_order_acq_rel)) {
      return fresh;
    }
    return fset(h->buckets[i].load(std::memory_order_acquire));
  }

  /// Installs a double (or half) sized HNode with one CAS on head, after
  /// finishing any pending migration so the pred chain stays at length one.
  void resize(bool grow) {
    HNode* h = head_.load(std::memory_order_acquire);
    if (!grow && h->size == 1) return;
    for (std::size_t i = 0; i < h->size; ++i) ensure_bucket(h, i);
    h->pred.store(nullptr, std::memory_order_release);
    HNode* fresh = make_hnode(grow ? h->size * 2 : h->size / 2, h);
    HNode* expected = h;
    head_.compare_exchange_strong(expected, fresh,
                                  std::memory_order_acq_rel);
    // loser's allocation stays in the alloc list and is freed at teardown
  }

  // --- sequential iterator ----------------------------------------------

  /// Visits the captured head's buckets in index order; an uninitialized
  /// bucket is read through pred without initializing it. Within a bucket,
  /// nodes come out in array order.
  class Cursor {
   public:
    explicit Cursor(const HashSetAdapter* owner)
        : h_(owner->head_.load(std::memory_order_acquire)) {}

    NodeHandle* next() {
      while (true) {
        if (!resolved_) {
          if (bucket_ == h_->size) return nullptr;
          resolve();
        }
        while (pos_ < nodes_.size()) {
          NodeHandle* n = nodes_[pos_++];
          if (!n->marked()) return n;
        }
        ++bucket_;
        resolved_ = false;
      }
    }

   private:
    void resolve() {
      nodes_.clear();
      pos_ = 0;
      resolved_ = true;
      std::uintptr_t w = h_->buckets[bucket_].load(std::memory_order_acquire);
      if (FSet* b = fset(w)) {
        nodes_ = b->nodes;
        return;
      }
      HNode* pred = h_->pred.load(std::memory_order_acquire);
      if (pred == nullptr) {
        w = h_->buckets[bucket_].load(std::memory_order_acquire);
        if (FSet* b = fset(w)) nodes_ = b->nodes;
        return;
      }
      if (h_->size > pred->size) {
        FSet* b = fset(
            pred->buckets[bucket_ & (pred->size - 1)].load(
                std::memory_order_acquire));
        for (NodeHandle* n : b->nodes) {
          if (bucket_of(n->key(), h_->size) == bucket_) nodes_.push_back(n);
        }
      } else {
        for (std::size_t j : {bucket_, bucket_ + h_->size}) {
          FSet* b = fset(pred->buckets[j].load(std::memory_order_acquire));
          nodes_.insert(nodes_.end(), b->nodes.begin(), b->nodes.end());
        }
      }
    }

    const HNode* h_;
    std::size_t bucket_ = 0;
    bool resolved_ = false;
    std::vector<NodeHandle*> nodes_;
    std::size_t pos_ = 0;
  };

  Cursor cursor() { return Cursor(this); }

  // --- single-step mutators (harness hooks) ------------------------------

  bool step_mark(NodeHandle* n) { return n->try_mark(); }
  FSet* step_init_bucket(std::size_t i) {
    return ensure_bucket(head_.load(std::memory_order_acquire), i);
  }
  void step_resize(bool grow) { resize(grow); }

  // --- audit -------------------------------------------------------------

  struct Audit {
    bool ok = true;
    std::string error;
    std::vector<Key> unmarked_keys;  // sorted
  };

  /// Quiescent audit: every reachable node sits in exactly the bucket its
  /// hash selects, and no key occurs twice unmarked.
  Audit audit() const {
    Audit a;
    HNode* h = head_.load(std::memory_order_acquire);
    for (std::size_t i = 0; i < h->size; ++i) {
      for (NodeHandle* n : resolve_bucket(h, i)) {
        if (bucket_of(n->key(), h->size) != i) {
          a.ok = false;
          a.error = "node reachable through wrong bucket";
          return a;
        }
        if (!n->marked()) a.unmarked_keys.push_back(n->key());
      }
    }
    std::sort(a.unmarked_keys.begin(), a.unmarked_keys.end());
    for (std::size_t i = 1; i < a.unmarked_keys.size(); ++i) {
      if (a.unmarked_keys[i - 1] == a.unmarked_keys[i]) {
        a.ok = false;
        a.error = "duplicate unmarked key";
        return a;
      }
    }
    return a;
  }

  HNode* head() const { return head_.load(std::memory_order_acquire); }

  /// Reachable contents of bucket i of h, through pred when uninitialized.
  std::vector<NodeHandle*> resolve_bucket(HNode* h, std::size_t i) const {
    std::uintptr_t w = h->buckets[i].load(std::memory_order_acquire);
    if (FSet* b = fset(w)) return b->nodes;
    HNode* pred = h->pred.load(std::memory_order_acquire);
    if (pred == nullptr) {
      w = h->buckets[i].load(std::memory_order_acquire);
      if (FSet* b = fset(w)) return b->nodes;
      return {};
    }
    std::vector<NodeHandle*> out;
    if (h->size > pred->size) {
      FSet* b =
          fset(pred->buckets[i & (pred->size - 1)].load(
              std::memory_order_acquire));
      for (NodeHandle* n : b->nodes) {
        if (bucket_of(n->key(), h->size) == i) out.push_back(n);
      }
    } else {
      for (std::size_t j : {i, i + h->size}) {
        FSet* b = fset(pred->buckets[j].load(std::memory_order_acquire));
        out.insert(out.end(), b->nodes.begin(), b->nodes.end());
      }
    }
    return out;
  }

  static bool slot_frozen(const HNode* h, std::size_t i) {
    return (h->buckets[i].load(std::memory_order_acquire) & 1) != 0;
  }

 private:
  struct HandleCell {
    explicit HandleCell(Key k) : h(k) {}
    NodeHandle h;
    HandleCell* alloc_next_ = nullptr;
  };

  static FSet* fset(std::uintptr_t w) {
    return reinterpret_cast<FSet*>(w & ~std::uintptr_t{1});
  }
  static std::uintptr_t word(FSet* b) {
    return reinterpret_cast<std::uintptr_t>(b);
  }

  static NodeHandle* find_in(FSet* b, Key k) {
    for (NodeHandle* n : b->nodes) {
      if (n->key() == k) return n;
    }
    return nullptr;
  }

  /// Sets the freeze bit on pred's bucket slot; after this no replacement
  /// CAS can land there. The FSet's mirror flag is set for observers.
  FSet* freeze_bucket(HNode* pred, std::size_t j) {
    std::uintptr_t w =
        pred->buckets[j].fetch_or(1, std::memory_order_acq_rel);
    FSet* b = fset(w);
    b->frozen.store(true, std::memory_order_release);
    return b;
  }

  NodeHandle* make_handle(Key k) {
    auto* cell = new HandleCell(k);
    handles_.track(cell);
    return &cell->h;
  }

  FSet* make_fset(std::vector<NodeHandle*> nodes) {
    auto* b = new FSet(std::move(nodes));
    fsets_.track(b);
    return b;
  }

  HNode* make_hnode(std::size_t size, HNode* pred) {
    auto* h = new HNode(size, pred);
    hnodes_.track(h);
    return h;
  }

  std::size_t grow_threshold_;
  std::atomic<HNode*> head_{nullptr};
  AllocList<HandleCell> handles_;
  AllocList<FSet> fsets_;
  AllocList<HNode> hnodes_;
};

}  // namespace snapiter
