#include "snapiter/harness/local_suite.hpp"

#include <algorithm>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

#include "snapiter/hash_set.hpp"
#include "snapiter/ubst.hpp"

namespace snapiter::harness {
namespace {

// ---------------------------------------------------------------------------
// UBST scenarios
// ---------------------------------------------------------------------------

enum class UbstStep { kInsert, kMark, kFlag, kTag, kCleanup };

const char* step_name(UbstStep s) {
  switch (s) {
    case UbstStep::kInsert:
      return "insert";
    case UbstStep::kMark:
      return "mark";
    case UbstStep::kFlag:
      return "flag";
    case UbstStep::kTag:
      return "tag";
    case UbstStep::kCleanup:
      return "cleanup";
  }
  return "?";
}

struct UbstSpec {
  std::vector<Key> insert_order;
  std::vector<Key> marked;   // marked during setup
  std::vector<Key> flagged;  // marked + edge-flagged during setup
  UbstStep step;
  Key step_key;
};

struct UbstScenario {
  std::unique_ptr<UbstAdapter> tree;
  const UbstSpec* spec;

  UbstAdapter::Cursor cursor() { return tree->cursor(); }

  std::vector<std::uint64_t> apply() {
    UbstAdapter& t = *tree;
    switch (spec->step) {
      case UbstStep::kInsert: {
        NodeHandle* h = t.ds_insert(spec->step_key);
        return h ? std::vector<std::uint64_t>{h->id()}
                 : std::vector<std::uint64_t>{};
      }
      case UbstStep::kMark: {
        NodeHandle* h = t.seek(spec->step_key);
        h->try_mark();
        return {h->id()};
      }
      case UbstStep::kFlag: {
        NodeHandle* h = t.seek(spec->step_key);
        t.step_flag(h);
        return {h->id()};
      }
      case UbstStep::kTag: {
        NodeHandle* h = t.seek(spec->step_key);
        t.step_tag(spec->step_key);
        return {h->id()};
      }
      case UbstStep::kCleanup: {
        NodeHandle* h = t.seek(spec->step_key);
        t.step_cleanup(spec->step_key);
        return {h->id()};
      }
    }
    return {};
  }
};

UbstScenario build_ubst(const UbstSpec& spec) {
  auto tree = std::make_unique<UbstAdapter>();
  for (Key k : spec.insert_order) tree->ds_insert(k);
  for (Key k : spec.marked) tree->seek(k)->try_mark();
  for (Key k : spec.flagged) {
    NodeHandle* h = tree->seek(k);
    h->try_mark();
    tree->step_flag(h);
  }
  return UbstScenario{std::move(tree), &spec};
}

std::string describe(const UbstSpec& s) {
  std::ostringstream os;
  os << "ubst " << step_name(s.step) << "(" << s.step_key << ") order=[";
  for (Key k : s.insert_order) os << k << " ";
  os << "] marked=[";
  for (Key k : s.marked) os << k << " ";
  os << "] flagged=[";
  for (Key k : s.flagged) os << k << " ";
  os << "]";
  return os.str();
}

void run_one_ubst(const UbstSpec& spec, LocalSuiteResult& out) {
  ++out.scenarios;
  auto violation =
      check_local_consistency([&spec] { return build_ubst(spec); });
  if (violation) {
    out.failures.push_back(
        {describe(spec), violation->position, violation->node_id});
  }
}

std::vector<std::vector<Key>> insertion_orders(int n, std::mt19937_64& rng) {
  std::vector<Key> keys;
  for (int i = 1; i <= n; ++i) keys.push_back(i * 10);
  std::vector<std::vector<Key>> orders;
  if (n <= 4) {
    std::sort(keys.begin(), keys.end());
    do {
      orders.push_back(keys);
    } while (std::next_permutation(keys.begin(), keys.end()));
  } else {
    orders.push_back(keys);  // sorted (worst-case path)
    for (int s = 0; s < 11; ++s) {
      auto shuffled = keys;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      orders.push_back(shuffled);
    }
  }
  return orders;
}

// Mark patterns: quiescent, one marked leaf each, and one random pair.
std::vector<std::vector<Key>> mark_patterns(const std::vector<Key>& keys,
                                            std::mt19937_64& rng) {
  std::vector<std::vector<Key>> out;
  out.push_back({});
  for (Key k : keys) out.push_back({k});
  if (keys.size() >= 2) {
    auto pair = keys;
    std::shuffle(pair.begin(), pair.end(), rng);
    out.push_back({pair[0], pair[1]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hash-set scenarios
// ---------------------------------------------------------------------------

enum class HashStep { kInsert, kDelete, kMark, kInitBucket, kResize, kShrink };

const char* step_name(HashStep s) {
  switch (s) {
    case HashStep::kInsert:
      return "insert";
    case HashStep::kDelete:
      return "delete";
    case HashStep::kMark:
      return "mark";
    case HashStep::kInitBucket:
      return "init-bucket";
    case HashStep::kResize:
      return "resize-grow";
    case HashStep::kShrink:
      return "resize-shrink";
  }
  return "?";
}

struct HashSpec {
  std::size_t buckets;
  std::vector<Key> keys;
  std::vector<Key> marked;
  bool pre_resize = false;  // grow before the step, leaving buckets lazy
  HashStep step;
  Key step_key = 0;
  std::size_t bucket_index = 0;
};

struct HashScenario {
  std::unique_ptr<HashSetAdapter> set;
  const HashSpec* spec;

  HashSetAdapter::Cursor cursor() { return set->cursor(); }

  std::vector<std::uint64_t> apply() {
    HashSetAdapter& s = *set;
    switch (spec->step) {
      case HashStep::kInsert: {
        NodeHandle* h = s.ds_insert(spec->step_key);
        return h ? std::vector<std::uint64_t>{h->id()}
                 : std::vector<std::uint64_t>{};
      }
      case HashStep::kDelete: {
        NodeHandle* h = s.seek(spec->step_key);
        s.ds_delete(h);
        return {h->id()};
      }
      case HashStep::kMark: {
        NodeHandle* h = s.seek(spec->step_key);
        h->try_mark();
        return {h->id()};
      }
      case HashStep::kInitBucket:
        s.step_init_bucket(spec->bucket_index);
        return {};
      case HashStep::kResize:
        s.step_resize(true);
        return {};
      case HashStep::kShrink:
        s.step_resize(false);
        return {};
    }
    return {};
  }
};

HashScenario build_hash(const HashSpec& spec) {
  // Large threshold: growth only happens when the scenario asks for it.
  auto set = std::make_unique<HashSetAdapter>(spec.buckets, 1u << 20);
  for (Key k : spec.keys) set->ds_insert(k);
  for (Key k : spec.marked) set->seek(k)->try_mark();
  if (spec.pre_resize) set->resize(true);
  return HashScenario{std::move(set), &spec};
}

std::string describe(const HashSpec& s) {
  std::ostringstream os;
  os << "hashset " << step_name(s.step) << " buckets=" << s.buckets
     << " key=" << s.step_key << " bucket_index=" << s.bucket_index
     << (s.pre_resize ? " (post-grow, lazy)" : "") << " keys=[";
  for (Key k : s.keys) os << k << " ";
  os << "] marked=[";
  for (Key k : s.marked) os << k << " ";
  os << "]";
  return os.str();
}

void run_one_hash(const HashSpec& spec, LocalSuiteResult& out) {
  ++out.scenarios;
  auto violation =
      check_local_consistency([&spec] { return build_hash(spec); });
  if (violation) {
    out.failures.push_back(
        {describe(spec), violation->position, violation->node_id});
  }
}

// ---------------------------------------------------------------------------
// Rotation counterexample (internal tree, keys at every node)
// ---------------------------------------------------------------------------

struct RotNode {
  explicit RotNode(Key k) : handle(k) {}
  NodeHandle handle;
  RotNode* left = nullptr;
  RotNode* right = nullptr;
};

struct RotTree {
  std::vector<std::unique_ptr<RotNode>> pool;
  RotNode* root = nullptr;

  RotNode* node(Key k, RotNode* l = nullptr, RotNode* r = nullptr) {
    pool.push_back(std::make_unique<RotNode>(k));
    pool.back()->left = l;
    pool.back()->right = r;
    return pool.back().get();
  }

  class Cursor {
   public:
    explicit Cursor(RotNode* root) : cur_(root) {}
    NodeHandle* next() {
      while (cur_ != nullptr || !stack_.empty()) {
        while (cur_ != nullptr) {
          stack_.push_back(cur_);
          cur_ = cur_->left;
        }
        RotNode* n = stack_.back();
        stack_.pop_back();
        cur_ = n->right;
        if (!n->handle.marked()) return &n->handle;
      }
      return nullptr;
    }

   private:
    std::vector<RotNode*> stack_;
    RotNode* cur_;
  };

  Cursor cursor() { return Cursor(root); }

  // Single right rotation at the root. Rebalancing moves no set elements,
  // so the change set is empty.
  std::vector<std::uint64_t> apply() {
    RotNode* r = root;
    RotNode* l = r->left;
    r->left = l->right;
    l->right = r;
    root = l;
    return {};
  }
};

RotTree build_rotation_tree() {
  RotTree t;
  // 6 -> (2 -> (1, 4 -> (3, 5)), 7)
  RotNode* n3 = t.node(3);
  RotNode* n5 = t.node(5);
  RotNode* n4 = t.node(4, n3, n5);
  RotNode* n1 = t.node(1);
  RotNode* n2 = t.node(2, n1, n4);
  RotNode* n7 = t.node(7);
  t.root = t.node(6, n2, n7);
  return t;
}

}  // namespace

LocalSuiteResult run_ubst_local_suite(int max_leaves, std::uint64_t seed) {
  LocalSuiteResult out;
  std::mt19937_64 rng(seed);
  for (int n = 0; n <= max_leaves; ++n) {
    for (const auto& order : insertion_orders(n, rng)) {
      for (const auto& marks : mark_patterns(order, rng)) {
        // insert of a fresh key: below, between, above the existing range
        for (Key cand : {Key{5}, Key{n * 10 + 5}, Key{n >= 2 ? 15 : 7}}) {
          UbstSpec spec{order, marks, {}, UbstStep::kInsert, cand};
          run_one_ubst(spec, out);
        }
        for (Key k : order) {
          bool is_marked =
              std::find(marks.begin(), marks.end(), k) != marks.end();
          if (!is_marked) {
            run_one_ubst({order, marks, {}, UbstStep::kMark, k}, out);
          }
          // flag requires the leaf marked; tag/cleanup require the flag too
          auto marks_without_k = marks;
          std::erase(marks_without_k, k);
          auto marks_with_k = marks_without_k;
          marks_with_k.push_back(k);
          run_one_ubst({order, marks_with_k, {}, UbstStep::kFlag, k}, out);
          run_one_ubst({order, marks_without_k, {k}, UbstStep::kTag, k}, out);
          run_one_ubst({order, marks_without_k, {k}, UbstStep::kCleanup, k},
                       out);
        }
      }
    }
  }
  return out;
}

LocalSuiteResult run_hashset_local_suite(int max_buckets, int max_keys,
                                         std::uint64_t seed) {
  LocalSuiteResult out;
  std::mt19937_64 rng(seed);
  std::vector<Key> universe;
  for (Key k = 0; k < 64; ++k) universe.push_back(k);

  for (std::size_t buckets : {1u, 2u, 4u, 8u}) {
    if (static_cast<int>(buckets) > max_buckets) break;
    for (int nkeys = 0; nkeys <= max_keys; nkeys += (nkeys < 4 ? 1 : 4)) {
      auto keys = universe;
      std::shuffle(keys.begin(), keys.end(), rng);
      keys.resize(nkeys);
      for (const auto& marks : mark_patterns(keys, rng)) {
        for (bool lazy : {false, true}) {
          // fresh-key insert
          Key cand = 100 + static_cast<Key>(rng() % 50);
          run_one_hash({buckets, keys, marks, lazy, HashStep::kInsert, cand},
                       out);
          // delete of a marked node, mark of an unmarked one
          for (Key k : keys) {
            bool is_marked =
                std::find(marks.begin(), marks.end(), k) != marks.end();
            if (is_marked) {
              run_one_hash({buckets, keys, marks, lazy, HashStep::kDelete, k},
                           out);
            } else if (!lazy) {
              run_one_hash({buckets, keys, marks, lazy, HashStep::kMark, k},
                           out);
            }
          }
          if (lazy) {
            // initialize each bucket of the grown, still-lazy table
            for (std::size_t i = 0; i < buckets * 2; ++i) {
              run_one_hash({buckets, keys, marks, true, HashStep::kInitBucket,
                            0, i},
                           out);
            }
          }
        }
        // head swing, growing and shrinking
        run_one_hash({buckets, keys, marks, false, HashStep::kResize}, out);
        if (buckets >= 2) {
          run_one_hash({buckets, keys, marks, false, HashStep::kShrink}, out);
        }
      }
    }
  }
  return out;
}

std::optional<LocalViolation> run_rotation_counterexample() {
  return check_local_consistency([] { return build_rotation_tree(); });
}

}  // namespace snapiter::harness
