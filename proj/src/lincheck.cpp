#include "snapiter/harness/lincheck.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "snapiter/hash_set.hpp"
#include "snapiter/iterable_set.hpp"
#include "snapiter/ubst.hpp"

namespace snapiter::harness {
namespace {

bool op_valid(const Operation& o, const std::set<Key>& present) {
  switch (o.op) {
    case OpType::kInsert:
      return o.result == (present.count(o.key) == 0);
    case OpType::kDelete:
    case OpType::kContains:
      return o.result == (present.count(o.key) != 0);
    case OpType::kIterate:
      return std::equal(present.begin(), present.end(), o.snapshot.begin(),
                        o.snapshot.end());
  }
  return false;
}

// Applies the op's effect; only successful insert/delete change the set.
void op_apply(const Operation& o, std::set<Key>& present) {
  if (o.op == OpType::kInsert && o.result) present.insert(o.key);
  if (o.op == OpType::kDelete && o.result) present.erase(o.key);
}

void op_undo(const Operation& o, std::set<Key>& present) {
  if (o.op == OpType::kInsert && o.result) present.erase(o.key);
  if (o.op == OpType::kDelete && o.result) present.insert(o.key);
}

struct Search {
  const std::vector<Operation>& ops;
  std::vector<std::uint32_t> precede;  // ops that must complete first
  std::unordered_set<std::uint32_t> dead;
  std::set<Key> present;
  std::uint32_t full;

  explicit Search(const History& h) : ops(h.ops) {
    const std::size_t n = ops.size();
    precede.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (ops[j].respond_seq < ops[i].invoke_seq) {
          precede[i] |= std::uint32_t{1} << j;
        }
      }
    }
    full = n == 32 ? ~std::uint32_t{0} : (std::uint32_t{1} << n) - 1;
  }

  // The set contents reached by any valid order of a given operation subset
  // are unique (successful inserts and deletes of one key must alternate),
  // so a mask that failed once can never succeed.
  bool dfs(std::uint32_t mask) {
    if (mask == full) return true;
    if (dead.count(mask)) return false;
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const std::uint32_t bit = std::uint32_t{1} << i;
      if ((mask & bit) || (precede[i] & ~mask)) continue;
      if (!op_valid(ops[i], present)) continue;
      op_apply(ops[i], present);
      if (dfs(mask | bit)) return true;
      op_undo(ops[i], present);
    }
    dead.insert(mask);
    return false;
  }
};

void require_checkable(const History& h, std::size_t max_ops) {
  if (!h.well_formed()) throw std::invalid_argument("malformed history");
  if (h.ops.size() > max_ops) {
    throw std::invalid_argument("history too large for exhaustive search");
  }
}

}  // namespace

bool check_linearizable(const History& h) {
  require_checkable(h, 16);
  Search s(h);
  return s.dfs(0);
}

bool check_linearizable_bruteforce(const History& h) {
  require_checkable(h, 8);
  const std::size_t n = h.ops.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    std::set<Key> present;
    for (std::size_t pos = 0; pos < n && ok; ++pos) {
      const Operation& o = h.ops[perm[pos]];
      // real-time order: nothing later in the permutation responded earlier
      for (std::size_t later = pos + 1; later < n; ++later) {
        if (h.ops[perm[later]].respond_seq < o.invoke_seq) {
          ok = false;
          break;
        }
      }
      if (!ok) break;
      if (!op_valid(o, present)) {
        ok = false;
        break;
      }
      op_apply(o, present);
    }
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

History generate_random_history(std::uint64_t seed, unsigned max_ops,
                                unsigned num_threads, Key key_range) {
  std::mt19937_64 rng(seed);
  const unsigned total = 1 + static_cast<unsigned>(rng() % max_ops);
  History h;
  std::uint64_t clock = 0;
  std::vector<Operation> pending;  // at most one per thread
  unsigned invoked = 0;

  auto respond = [&](std::size_t idx) {
    Operation o = pending[idx];
    pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(idx));
    o.respond_seq = ++clock;
    if (o.op == OpType::kIterate) {
      for (Key k = 0; k < key_range; ++k) {
        if (rng() % 2) o.snapshot.push_back(k);
      }
    } else {
      o.result = rng() % 2 == 0;
    }
    h.ops.push_back(std::move(o));
  };

  while (h.ops.size() < total) {
    bool can_invoke =
        invoked < total && pending.size() < num_threads;
    if (can_invoke && (pending.empty() || rng() % 2)) {
      Operation o;
      // pick an idle thread
      while (true) {
        o.thread = static_cast<unsigned>(rng() % num_threads);
        bool busy = false;
        for (const Operation& p : pending) {
          if (p.thread == o.thread) busy = true;
        }
        if (!busy) break;
      }
      switch (rng() % 10) {
        case 0:
        case 1:
        case 2:
          o.op = OpType::kInsert;
          break;
        case 3:
        case 4:
        case 5:
          o.op = OpType::kDelete;
          break;
        case 6:
        case 7:
          o.op = OpType::kContains;
          break;
        default:
          o.op = OpType::kIterate;
          break;
      }
      if (o.op != OpType::kIterate) {
        o.key = static_cast<Key>(rng() % static_cast<std::uint64_t>(key_range));
      }
      o.invoke_seq = ++clock;
      pending.push_back(std::move(o));
      ++invoked;
    } else {
      respond(rng() % pending.size());
    }
  }
  while (!pending.empty()) respond(rng() % pending.size());
  return h;
}

namespace {

template <class A, class... Args>
History capture_one(unsigned num_threads, unsigned ops_per_thread,
                    Key key_range, std::uint64_t seed, Args&&... args) {
  IterableSet<A> set(num_threads, std::forward<Args>(args)...);
  std::atomic<std::uint64_t> clock{0};
  std::vector<std::vector<Operation>> logs(num_threads);

  auto worker = [&](unsigned tid) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + tid);
    for (unsigned i = 0; i < ops_per_thread; ++i) {
      Operation o;
      o.thread = tid;
      const auto roll = rng() % 10;
      o.op = roll < 3   ? OpType::kInsert
             : roll < 6 ? OpType::kDelete
             : roll < 8 ? OpType::kContains
                        : OpType::kIterate;
      if (o.op != OpType::kIterate) {
        o.key = static_cast<Key>(rng() % static_cast<std::uint64_t>(key_range));
      }
      o.invoke_seq = clock.fetch_add(1, std::memory_order_acq_rel) + 1;
      switch (o.op) {
        case OpType::kInsert:
          o.result = set.insert(tid, o.key);
          break;
        case OpType::kDelete:
          o.result = set.erase(tid, o.key);
          break;
        case OpType::kContains:
          o.result = set.contains(tid, o.key);
          break;
        case OpType::kIterate:
          o.snapshot = set.iterate(tid);
          break;
      }
      o.respond_seq = clock.fetch_add(1, std::memory_order_acq_rel) + 1;
      logs[tid].push_back(std::move(o));
      if (rng() % 2) std::this_thread::yield();
    }
  };

  std::vector<std::thread> threads;
  for (unsigned t = 0; t < num_threads; ++t) threads.emplace_back(worker, t);
  for (auto& t : threads) t.join();

  History h;
  for (auto& log : logs) {
    for (Operation& o : log) h.ops.push_back(std::move(o));
  }
  return h;
}

}  // namespace

std::vector<History> capture_live_histories(Backend backend,
                                            std::size_t count,
                                            unsigned num_threads,
                                            unsigned ops_per_thread,
                                            Key key_range,
                                            std::uint64_t seed) {
  std::vector<History> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t run_seed = seed + i;
    if (backend == Backend::kUbst) {
      out.push_back(capture_one<UbstAdapter>(num_threads, ops_per_thread,
                                             key_range, run_seed));
    } else {
      out.push_back(capture_one<HashSetAdapter>(num_threads, ops_per_thread,
                                                key_range, run_seed));
    }
  }
  return out;
}

}  // namespace snapiter::harness
