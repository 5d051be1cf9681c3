#pragma once

#include <string>
#include <vector>

namespace forge {

// Collects per-record warnings from streaming parsers, which skip bad
// records instead of aborting.
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
  bool empty() const { return warnings.empty(); }
};

}  // namespace forge
