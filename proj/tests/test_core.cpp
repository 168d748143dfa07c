#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <thread>
#include <vector>

#include "snapiter/core.hpp"
#include "snapiter/hash_set.hpp"
#include "snapiter/ubst.hpp"

using namespace snapiter;

static_assert(SetAdapter<UbstAdapter>);
static_assert(SetAdapter<HashSetAdapter>);

TEST_CASE("handles carry key, unique id, and a one-way mark") {
  NodeHandle a(7);
  NodeHandle b(7);
  CHECK(a.key() == 7);
  CHECK(a.id() != b.id());
  CHECK_FALSE(a.marked());
  CHECK(a.try_mark());
  CHECK(a.marked());
  CHECK_FALSE(a.try_mark());  // transition happens exactly once
  CHECK(a.marked());
  CHECK_FALSE(b.marked());
}

TEST_CASE("only one thread wins the marking race") {
  for (int round = 0; round < 200; ++round) {
    NodeHandle n(1);
    int wins = 0;
    std::vector<std::thread> threads;
    std::atomic<int> winners{0};
    for (int t = 0; t < 4; ++t) {
      threads.emplace_back([&] {
        if (n.try_mark()) winners.fetch_add(1);
      });
    }
    for (auto& t : threads) t.join();
    wins = winners.load();
    CHECK(wins == 1);
  }
}

TEST_CASE("ids are unique under concurrent allocation") {
  std::vector<std::vector<std::uint64_t>> ids(4);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 2000; ++i) {
        NodeHandle n(i);
        ids[t].push_back(n.id());
      }
    });
  }
  for (auto& t : threads) t.join();
  std::set<std::uint64_t> all;
  for (const auto& v : ids) all.insert(v.begin(), v.end());
  CHECK(all.size() == 4u * 2000u);
}

namespace {
struct Tracked {
  explicit Tracked(int* c) : counter(c) { ++*counter; }
  ~Tracked() { --*counter; }
  int* counter;
  Tracked* alloc_next_ = nullptr;
};
}  // namespace

TEST_CASE("alloc list frees everything it tracked, at destruction only") {
  int live = 0;
  {
    AllocList<Tracked> list;
    for (int i = 0; i < 100; ++i) list.track(new Tracked(&live));
    CHECK(live == 100);  // nothing freed while the list is alive
  }
  CHECK(live == 0);
}
