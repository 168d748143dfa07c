#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "snapiter/harness/lincheck.hpp"

using namespace snapiter;
using namespace snapiter::harness;

namespace {
Operation op(unsigned thread, OpType t, Key k, bool result,
             std::uint64_t invoke, std::uint64_t respond) {
  Operation o;
  o.thread = thread;
  o.op = t;
  o.key = k;
  o.result = result;
  o.invoke_seq = invoke;
  o.respond_seq = respond;
  return o;
}

Operation iter(unsigned thread, std::vector<Key> snapshot,
               std::uint64_t invoke, std::uint64_t respond) {
  Operation o;
  o.thread = thread;
  o.op = OpType::kIterate;
  o.snapshot = std::move(snapshot);
  o.invoke_seq = invoke;
  o.respond_seq = respond;
  return o;
}
}  // namespace

TEST_CASE("sequential insert then contains is linearizable") {
  History h;
  h.ops = {op(0, OpType::kInsert, 5, true, 1, 2),
           op(0, OpType::kContains, 5, true, 3, 4)};
  CHECK(check_linearizable(h));
  CHECK(check_linearizable_bruteforce(h));
}

TEST_CASE("concurrent insert and empty snapshot can be ordered") {
  History h;
  h.ops = {op(0, OpType::kInsert, 5, true, 1, 4),
           iter(1, {}, 2, 3)};  // overlapping: iterate may precede insert
  CHECK(check_linearizable(h));
  CHECK(check_linearizable_bruteforce(h));
}

TEST_CASE("empty snapshot after a completed insert is not linearizable") {
  History h;
  h.ops = {op(0, OpType::kInsert, 5, true, 1, 2),
           iter(1, {}, 3, 4)};  // real time forces insert before iterate
  CHECK_FALSE(check_linearizable(h));
  CHECK_FALSE(check_linearizable_bruteforce(h));
}

TEST_CASE("successful delete without any insert is not linearizable") {
  History h;
  h.ops = {op(0, OpType::kDelete, 5, true, 1, 2)};
  CHECK_FALSE(check_linearizable(h));
  CHECK_FALSE(check_linearizable_bruteforce(h));
}

TEST_CASE("failed insert needs a concurrent successful one") {
  History h;
  h.ops = {op(0, OpType::kInsert, 5, false, 1, 4),
           op(1, OpType::kInsert, 5, true, 2, 3)};
  CHECK(check_linearizable(h));
  History alone;
  alone.ops = {op(0, OpType::kInsert, 5, false, 1, 2)};
  CHECK_FALSE(check_linearizable(alone));
}

TEST_CASE("snapshot must match the exact member set at its point") {
  History h;
  h.ops = {op(0, OpType::kInsert, 1, true, 1, 2),
           op(0, OpType::kInsert, 3, true, 3, 4),
           iter(1, {1, 3}, 5, 6)};
  CHECK(check_linearizable(h));
  h.ops.back().snapshot = {1};
  CHECK_FALSE(check_linearizable(h));
  h.ops.back().snapshot = {1, 2, 3};
  CHECK_FALSE(check_linearizable(h));
}

TEST_CASE("three-way race with a snapshot in the middle") {
  History h;
  h.ops = {op(0, OpType::kInsert, 7, true, 1, 6),
           op(1, OpType::kDelete, 7, true, 2, 7),
           iter(2, {7}, 3, 8)};
  // order insert < iterate < delete works
  CHECK(check_linearizable(h));
  CHECK(check_linearizable_bruteforce(h));
}

TEST_CASE("oversized histories are refused") {
  History h;
  for (unsigned i = 0; i < 17; ++i) {
    h.ops.push_back(op(i, OpType::kInsert, i, true, 2 * i + 1, 2 * i + 2));
  }
  CHECK_THROWS_AS(check_linearizable(h), std::invalid_argument);
}

TEST_CASE("search and brute force agree on random histories") {
  std::size_t linearizable = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    History h = generate_random_history(seed, 6, 3, 3);
    REQUIRE(h.well_formed());
    const bool fast = check_linearizable(h);
    const bool slow = check_linearizable_bruteforce(h);
    INFO("seed ", seed);
    CHECK(fast == slow);
    if (fast) ++linearizable;
  }
  // the generated corpus must exercise both verdicts
  CHECK(linearizable > 0);
  CHECK(linearizable < 300);
}

TEST_CASE("live captured histories are always linearizable") {
  for (Backend b : {Backend::kUbst, Backend::kHashSet}) {
    auto histories = capture_live_histories(b, 25, 3, 4, 4, 555);
    REQUIRE(histories.size() == 25);
    for (const History& h : histories) {
      REQUIRE(h.well_formed());
      REQUIRE(h.ops.size() <= 16);
      CHECK(check_linearizable(h));
    }
  }
}
