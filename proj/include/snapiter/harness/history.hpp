#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "snapiter/core.hpp"

namespace snapiter::harness {

enum class OpType { kInsert, kDelete, kContains, kIterate };

std::string to_string(OpType t);
OpType op_from_string(const std::string& s);

/// One completed operation of a history. Events carry logical timestamps
/// from a global sequence counter; invoke_seq < respond_seq always, and two
/// operations are concurrent iff their [invoke, respond] spans overlap.
struct Operation {
  unsigned thread = 0;
  OpType op = OpType::kInsert;
  Key key = 0;                // ignored for iterate
  bool result = false;        // ignored for iterate
  std::vector<Key> snapshot;  // iterate only; sorted
  std::uint64_t invoke_seq = 0;
  std::uint64_t respond_seq = 0;
};

struct History {
  std::vector<Operation> ops;
  std::optional<bool> expected;  // corpus annotation, when present

  /// invoke/respond pairing, span sanity, per-thread alternation.
  bool well_formed() const;
};

/// One corpus line: {"events": [{thread, op, phase, value, seq}, ...]}
/// with an optional "expected" verdict. Invoke events carry the key as
/// value (null for iterate); respond events carry the boolean result, or
/// the snapshot key array for iterate.
std::string to_json_line(const History& h);
History history_from_json_line(const std::string& line);

std::vector<History> load_corpus(std::istream& in);
void save_corpus(std::ostream& out, const std::vector<History>& corpus);

}  // namespace snapiter::harness
