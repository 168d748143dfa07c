#pragma once

#include <stdexcept>
#include <string>

namespace snapiter::harness {

enum class Backend { kUbst, kHashSet };

inline Backend backend_from_string(const std::string& s) {
  if (s == "ubst") return Backend::kUbst;
  if (s == "hashset") return Backend::kHashSet;
  throw std::invalid_argument("unknown structure: " + s);
}

inline std::string to_string(Backend b) {
  return b == Backend::kUbst ? "ubst" : "hashset";
}

}  // namespace snapiter::harness
