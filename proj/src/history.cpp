#include "snapiter/harness/history.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace snapiter::harness {

using nlohmann::json;

std::string to_string(OpType t) {
  switch (t) {
    case OpType::kInsert:
      return "insert";
    case OpType::kDelete:
      return "delete";
    case OpType::kContains:
      return "contains";
    case OpType::kIterate:
      return "iterate";
  }
  return "?";
}

OpType op_from_string(const std::string& s) {
  if (s == "insert") return OpType::kInsert;
  if (s == "delete") return OpType::kDelete;
  if (s == "contains") return OpType::kContains;
  if (s == "iterate") return OpType::kIterate;
  throw std::invalid_argument("unknown op: " + s);
}

bool History::well_formed() const {
  std::map<unsigned, std::vector<std::pair<std::uint64_t, std::uint64_t>>>
      spans;
  for (const Operation& o : ops) {
    if (o.invoke_seq >= o.respond_seq) return false;
    spans[o.thread].emplace_back(o.invoke_seq, o.respond_seq);
  }
  for (auto& [tid, v] : spans) {
    std::sort(v.begin(), v.end());
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i].first < v[i - 1].second) return false;  // overlapping spans
    }
  }
  return true;
}

std::string to_json_line(const History& h) {
  json events = json::array();
  for (const Operation& o : h.ops) {
    json invoke_value;
    if (o.op != OpType::kIterate) invoke_value = o.key;
    events.push_back({{"thread", o.thread},
                      {"op", to_string(o.op)},
                      {"phase", "invoke"},
                      {"value", invoke_value},
                      {"seq", o.invoke_seq}});
    json respond_value;
    if (o.op == OpType::kIterate) {
      respond_value = o.snapshot;
    } else {
      respond_value = o.result;
    }
    events.push_back({{"thread", o.thread},
                      {"op", to_string(o.op)},
                      {"phase", "respond"},
                      {"value", respond_value},
                      {"seq", o.respond_seq}});
  }
  std::sort(events.begin(), events.end(),
            [](const json& a, const json& b) {
              return a["seq"].get<std::uint64_t>() <
                     b["seq"].get<std::uint64_t>();
            });
  json out{{"events", std::move(events)}};
  if (h.expected) out["expected"] = *h.expected;
  return out.dump();
}

History history_from_json_line(const std::string& line) {
  json j = json::parse(line);
  History h;
  if (j.contains("expected")) h.expected = j["expected"].get<bool>();

  // open invocation per thread, awaiting its respond event
  std::map<unsigned, Operation> open;
  for (const json& e : j.at("events")) {
    unsigned tid = e.at("thread").get<unsigned>();
    OpType op = op_from_string(e.at("op").get<std::string>());
    std::uint64_t seq = e.at("seq").get<std::uint64_t>();
    std::string phase = e.at("phase").get<std::string>();
    if (phase == "invoke") {
      if (open.count(tid)) {
        throw std::invalid_argument("nested invocation on one thread");
      }
      Operation o;
      o.thread = tid;
      o.op = op;
      o.invoke_seq = seq;
      if (op != OpType::kIterate) o.key = e.at("value").get<Key>();
      open[tid] = std::move(o);
    } else if (phase == "respond") {
      auto it = open.find(tid);
      if (it == open.end() || it->second.op != op) {
        throw std::invalid_argument("respond without matching invocation");
      }
      Operation o = std::move(it->second);
      open.erase(it);
      o.respond_seq = seq;
      if (op == OpType::kIterate) {
        o.snapshot = e.at("value").get<std::vector<Key>>();
        std::sort(o.snapshot.begin(), o.snapshot.end());
      } else {
        o.result = e.at("value").get<bool>();
      }
      h.ops.push_back(std::move(o));
    } else {
      throw std::invalid_argument("unknown phase: " + phase);
    }
  }
  if (!open.empty()) {
    throw std::invalid_argument("unresponded invocation in history");
  }
  if (!h.well_formed()) throw std::invalid_argument("malformed history");
  return h;
}

std::vector<History> load_corpus(std::istream& in) {
  std::vector<History> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(history_from_json_line(line));
  }
  return out;
}

void save_corpus(std::ostream& out, const std::vector<History>& corpus) {
  for (const History& h : corpus) out << to_json_line(h) << "\n";
}

}  // namespace snapiter::harness
