#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "snapiter/core.hpp"

namespace snapiter {

/// Lock-free external (leaf-oriented) binary search tree. Keys live only in
/// leaves; internal nodes route searches. Child edges pack a flag bit (both
/// incident nodes to be removed) and a tag bit (parent only) into the low
/// bits of the pointer word, so the (child, flag, tag) triple updates with a
/// single CAS. Real keys compare below the three sentinel tiers.
class UbstAdapter {
 public:
  struct Node {
    Node(Key k, int t) : handle(k), tier(t) {}
    NodeHandle handle;  // element for leaves, routing key for internals
    int tier;           // 0 = real key; 1..3 = sentinel tiers inf0..inf2
    std::atomic<std::uintptr_t> left{0};
    std::atomic<std::uintptr_t> right{0};
    Node* alloc_next_ = nullptr;

    bool is_leaf() const { return left.load(std::memory_order_acquire) == 0; }
  };

  struct SeekRecord {
    Node* ancestor;   // parent's nearest ancestor reached over untagged edges
    Node* successor;  // ancestor's child on the search path
    Node* parent;     // leaf's parent
    Node* leaf;
  };

  static constexpr bool kSortedTraversal = true;

  UbstAdapter() {
    root_ = make_node(0, 3);
    Node* s = make_node(0, 2);
    root_->left.store(pack(s, false, false), std::memory_order_relaxed);
    root_->right.store(pack(make_node(0, 3), false, false),
                       std::memory_order_relaxed);
    s->left.store(pack(make_node(0, 1), false, false),
                  std::memory_order_relaxed);
    s->right.store(pack(make_node(0, 2), false, false),
                   std::memory_order_relaxed);
  }

  UbstAdapter(const UbstAdapter&) = delete;
  UbstAdapter& operator=(const UbstAdapter&) = delete;

  // --- edge word packing -------------------------------------------------

  static Node* unpack(std::uintptr_t w) {
    return reinterpret_cast<Node*>(w & ~std::uintptr_t{3});
  }
  static bool flagged(std::uintptr_t w) { return (w & 1) != 0; }
  static bool tagged(std::uintptr_t w) { return (w & 2) != 0; }
  static std::uintptr_t pack(Node* p, bool flag, bool tag) {
    return reinterpret_cast<std::uintptr_t>(p) |
           std::uintptr_t{flag ? 1u : 0u} | std::uintptr_t{tag ? 2u : 0u};
  }

  // --- adapter contract --------------------------------------------------

  /// Returns the node holding k, marked or not, if a leaf with k is
  /// physically reachable; the caller inspects the mark.
  NodeHandle* seek(Key k) {
    SeekRecord sr = ds_seek(k);
    if (sr.leaf->tier == 0 && sr.leaf->handle.key() == k) {
      return &sr.leaf->handle;
    }
    return nullptr;
  }

  /// Single insertion attempt: links a fresh internal node with leaves
  /// {new leaf(k), existing leaf} and swings the parent edge with one CAS.
  /// Returns the inserted handle, or nullptr on interference (after helping
  /// cleanup if the failed edge was flagged or tagged).
  NodeHandle* ds_insert(Key k) {
    SeekRecord sr = ds_seek(k);
    Node* leaf = sr.leaf;
    Node* parent = sr.parent;
    if (leaf->tier == 0 && leaf->handle.key() == k) return nullptr;

    auto* child_addr = key_less(k, parent) ? &parent->left : &parent->right;
    Node* new_leaf = make_node(k, 0);
    bool new_on_left = node_less(k, 0, leaf);
    // Routing key of the fresh internal node is the larger child's key.
    Node* larger = new_on_left ? leaf : new_leaf;
    Node* internal = make_node(larger->tier == 0 ? larger->handle.key() : 0,
                               larger->tier);
    internal->left.store(
        pack(new_on_left ? new_leaf : leaf, false, false),
        std::memory_order_relaxed);
    internal->right.store(
        pack(new_on_left ? leaf : new_leaf, false, false),
        std::memory_order_relaxed);

    std::uintptr_t expected = pack(leaf, false, false);
    if (child_addr->compare_exchange_strong(expected,
                                            pack(internal, false, false),
                                            std::memory_order_acq_rel)) {
      return &new_leaf->handle;
    }
    std::uintptr_t cur = child_addr->load(std::memory_order_acquire);
    if (unpack(cur) == leaf && (flagged(cur) || tagged(cur))) {
      cleanup(k, sr);
    }
    return nullptr;
  }

  /// Physically removes n's leaf. n must already be marked; the parent edge
  /// flag is the structural realization of the logical delete. Loops over
  /// seek + cleanup until the leaf is unreachable. Idempotent helping.
  void ds_delete(NodeHandle* n) {
    const Key k = n->key();
    while (true) {
      SeekRecord sr = ds_seek(k);
      if (!(sr.leaf->tier == 0 && &sr.leaf->handle == n)) return;
      auto* child_addr =
          key_less(k, sr.parent) ? &sr.parent->left : &sr.parent->right;
      std::uintptr_t w = child_addr->load(std::memory_order_acquire);
      if (unpack(w) != sr.leaf) continue;
      if (!flagged(w) && !tagged(w)) {
        child_addr->compare_exchange_strong(w, pack(sr.leaf, true, false),
                                            std::memory_order_acq_rel);
      }
      cleanup(k, sr);
    }
  }

  /// Binary search ending at a leaf regardless of whether it holds k.
  SeekRecord ds_seek(Key k) const {
    SeekRecord sr;
    sr.ancestor = root_;
    sr.successor = unpack(root_->left.load(std::memory_order_acquire));
    sr.parent = sr.successor;
    std::uintptr_t parent_field =
        sr.parent->left.load(std::memory_order_acquire);
    sr.leaf = unpack(parent_field);
    std::uintptr_t current_field =
        sr.leaf->left.load(std::memory_order_acquire);
    Node* current = unpack(current_field);
    while (current != nullptr) {
      if (!tagged(parent_field)) {
        sr.ancestor = sr.parent;
        sr.successor = sr.leaf;
      }
      sr.parent = sr.leaf;
      sr.leaf = current;
      parent_field = current_field;
      current_field = key_less(k, current)
                          ? current->left.load(std::memory_order_acquire)
                          : current->right.load(std::memory_order_acquire);
      current = unpack(current_field);
    }
    return sr;
  }

  /// One physical-removal attempt: tags the surviving edge, then a single
  /// CAS swings the ancestor's edge from successor to the survivor,
  /// detaching the whole tagged path. Returns whether the CAS succeeded.
  bool cleanup(Key k, const SeekRecord& sr) {
    Node* ancestor = sr.ancestor;
    Node* successor = sr.successor;
    Node* parent = sr.parent;

    auto* successor_addr =
        key_less(k, ancestor) ? &ancestor->left : &ancestor->right;
    std::atomic<std::uintptr_t>* child_addr;
    std::atomic<std::uintptr_t>* sibling_addr;
    if (key_less(k, parent)) {
      child_addr = &parent->left;
      sibling_addr = &parent->right;
    } else {
      child_addr = &parent->right;
      sibling_addr = &parent->left;
    }
    std::uintptr_t child_w = child_addr->load(std::memory_order_acquire);
    if (!flagged(child_w)) {
      // The flagged edge is the sibling's; the leaf survives instead.
      sibling_addr = child_addr;
    }
    tag_edge(sibling_addr);
    std::uintptr_t survivor = sibling_addr->load(std::memory_order_acquire);

    std::uintptr_t expected = pack(successor, false, false);
    return successor_addr->compare_exchange_strong(
        expected, pack(unpack(survivor), flagged(survivor), false),
        std::memory_order_acq_rel);
  }

  // --- sequential iterator ----------------------------------------------

  /// In-order depth-first traversal over leaves; marked leaves and sentinel
  /// leaves are skipped. Copyable: a copy resumes from the same position,
  /// retaining pointers into subgraphs that may since have been detached.
  class Cursor {
   public:
    explicit Cursor(Node* root) { stack_.push_back(root); }

    NodeHandle* next() {
      while (!stack_.empty()) {
        Node* n = stack_.back();
        stack_.pop_back();
        std::uintptr_t l = n->left.load(std::memory_order_acquire);
        if (unpack(l) == nullptr) {
          if (n->tier == 0 && !n->handle.marked()) return &n->handle;
          continue;
        }
        std::uintptr_t r = n->right.load(std::memory_order_acquire);
        stack_.push_back(unpack(r));
        stack_.push_back(unpack(l));
      }
      return nullptr;
    }

   private:
    std::vector<Node*> stack_;
  };

  Cursor cursor() { return Cursor(root_); }

  // --- single-step mutators (harness hooks) ------------------------------

  bool step_mark(NodeHandle* n) { return n->try_mark(); }

  /// Flags the parent->leaf edge of n's leaf. One CAS.
  bool step_flag(NodeHandle* n) {
    const Key k = n->key();
    SeekRecord sr = ds_seek(k);
    if (!(sr.leaf->tier == 0 && &sr.leaf->handle == n)) return false;
    auto* child_addr =
        key_less(k, sr.parent) ? &sr.parent->left : &sr.parent->right;
    std::uintptr_t expected = pack(sr.leaf, false, false);
    return child_addr->compare_exchange_strong(
        expected, pack(sr.leaf, true, false), std::memory_order_acq_rel);
  }

  /// Tags the surviving edge ahead of a cleanup swing. View-invisible.
  void step_tag(Key k) {
    SeekRecord sr = ds_seek(k);
    auto* child_addr =
        key_less(k, sr.parent) ? &sr.parent->left : &sr.parent->right;
    auto* sibling_addr =
        key_less(k, sr.parent) ? &sr.parent->right : &sr.parent->left;
    if (!flagged(child_addr->load(std::memory_order_acquire))) {
      sibling_addr = child_addr;
    }
    tag_edge(sibling_addr);
  }

  bool step_cleanup(Key k) {
    SeekRecord sr = ds_seek(k);
    return cleanup(k, sr);
  }

  // --- audit -------------------------------------------------------------

  struct Audit {
    bool ok = true;
    std::string error;
    std::vector<Key> unmarked_keys;  // sorted
    std::size_t leaf_count = 0;
  };

  /// Quiescent structural audit: every internal node has two children, the
  /// routing invariant holds, and real leaf keys come out strictly sorted.
  Audit audit() const {
    Audit a;
    audit_walk(root_, nullptr, nullptr, a);
    for (std::size_t i = 1; i < a.unmarked_keys.size(); ++i) {
      if (a.unmarked_keys[i - 1] >= a.unmarked_keys[i]) {
        a.ok = false;
        a.error = "leaf keys not strictly increasing";
      }
    }
    return a;
  }

  Node* root() { return root_; }

 private:
  struct Bound {
    Key key;
    int tier;
  };

  static bool bound_less(Bound a, Bound b) {
    if (a.tier != b.tier) return a.tier < b.tier;
    return a.key < b.key;
  }

  // Search comparison: real key k against a node's routing key.
  static bool key_less(Key k, const Node* n) {
    if (n->tier > 0) return true;
    return k < n->handle.key();
  }

  static bool node_less(Key k, int tier, const Node* n) {
    return bound_less(Bound{k, tier}, Bound{n->handle.key(), n->tier});
  }

  // Tagging makes the edge immutable; flagged edges already are, so the tag
  // is skipped for them and the two bits stay mutually exclusive.
  static void tag_edge(std::atomic<std::uintptr_t>* edge) {
    while (true) {
      std::uintptr_t w = edge->load(std::memory_order_acquire);
      if (tagged(w) || flagged(w)) return;
      if (edge->compare_exchange_strong(w, w | 2,
                                        std::memory_order_acq_rel)) {
        return;
      }
    }
  }

  Node* make_node(Key k, int tier) {
    auto* n = new Node(k, tier);
    nodes_.track(n);
    return n;
  }

  void audit_walk(const Node* n, const Bound* lo, const Bound* hi,
                  Audit& a) const {
    if (!a.ok) return;
    std::uintptr_t l = n->left.load(std::memory_order_acquire);
    std::uintptr_t r = n->right.load(std::memory_order_acquire);
    if (unpack(l) == nullptr) {
      if (unpack(r) != nullptr) {
        a.ok = false;
        a.error = "half-leaf node";
        return;
      }
      Bound self{n->handle.key(), n->tier};
      if ((lo && !bound_less(*lo, self) && !bounds_equal(*lo, self)) ||
          (hi && !bound_less(self, *hi))) {
        a.ok = false;
        a.error = "leaf outside routing bounds";
        return;
      }
      ++a.leaf_count;
      if (n->tier == 0 && !n->handle.marked()) {
        a.unmarked_keys.push_back(n->handle.key());
      }
      return;
    }
    if (unpack(r) == nullptr) {
      a.ok = false;
      a.error = "internal node with one child";
      return;
    }
    Bound self{n->handle.key(), n->tier};
    // left subtree strictly below self; right subtree at or above self
    audit_walk(unpack(l), lo, &self, a);
    audit_walk(unpack(r), &self, hi, a);
  }

  static bool bounds_equal(Bound a, Bound b) {
    return a.tier == b.tier && a.key == b.key;
  }

  Node* root_;
  AllocList<Node> nodes_;
};

}  // namespace snapiter
