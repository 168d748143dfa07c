#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace snapiter::harness {

/// Remaining traversal of a cursor run solo: the ids of the unmarked nodes
/// it would still visit. Consumes the (copied) cursor.
template <class Cursor>
std::vector<std::uint64_t> view_of(Cursor c) {
  std::vector<std::uint64_t> ids;
  while (auto* n = c.next()) ids.push_back(n->id());
  std::sort(ids.begin(), ids.end());
  return ids;
}

/// View of a structure relative to a position: runs the sequential cursor
/// in isolation, skipping everything up to and including the node with
/// position_id. No position means the full view.
template <class Structure>
std::vector<std::uint64_t> compute_view(
    Structure& s, std::optional<std::uint64_t> position_id = std::nullopt) {
  auto c = s.cursor();
  if (position_id) {
    bool found = false;
    while (auto* n = c.next()) {
      if (n->id() == *position_id) {
        found = true;
        break;
      }
    }
    if (!found) throw std::invalid_argument("position not reachable");
  }
  return view_of(std::move(c));
}

struct LocalViolation {
  std::size_t position;      // cursor position: nodes visited before the step
  std::uint64_t node_id;     // offending node outside the change set
};

/// Checks one mutator against every cursor position of one structure.
/// The factory rebuilds the identical scenario on each call; a scenario
/// exposes cursor() and apply(), where apply performs the atomic step and
/// returns the owning operation's change set (node ids).
///
/// Verifies V(N,T) symdiff V(N,m(T)) is within the change set for every
/// position N including the start; returns the first violation found.
template <class Factory>
std::optional<LocalViolation> check_local_consistency(Factory&& make) {
  std::size_t total = 0;
  {
    auto s = make();
    auto c = s.cursor();
    while (c.next()) ++total;
  }
  for (std::size_t pos = 0; pos <= total; ++pos) {
    auto s = make();
    auto c = s.cursor();
    for (std::size_t i = 0; i < pos; ++i) {
      if (!c.next()) break;
    }
    auto before = view_of(c);
    std::vector<std::uint64_t> change = s.apply();
    auto after = view_of(c);
    std::sort(change.begin(), change.end());

    std::vector<std::uint64_t> diff;
    std::set_symmetric_difference(before.begin(), before.end(), after.begin(),
                                  after.end(), std::back_inserter(diff));
    for (std::uint64_t id : diff) {
      if (!std::binary_search(change.begin(), change.end(), id)) {
        return LocalViolation{pos, id};
      }
    }
  }
  return std::nullopt;
}

}  // namespace snapiter::harness
