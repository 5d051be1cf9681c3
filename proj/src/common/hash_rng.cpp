#include <cstdio>
#include <string_view>
#include <unordered_map>

#include "forge/common/error.hpp"
#include "forge/common/hash.hpp"
#include "forge/common/rng.hpp"

namespace forge {

std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

std::uint64_t from_hex(std::string_view hex) {
  if (hex.empty() || hex.size() > 16) {
    throw ParseError("bad hex id '" + std::string(hex) + "'");
  }
  std::uint64_t v = 0;
  for (char c : hex) {
    v <<= 4;
    if (c >= '0' && c <= '9') {
      v |= static_cast<std::uint64_t>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      v |= static_cast<std::uint64_t>(c - 'a' + 10);
    } else if (c >= 'A' && c <= 'F') {
      v |= static_cast<std::uint64_t>(c - 'A' + 10);
    } else {
      throw ParseError("bad hex id '" + std::string(hex) + "'");
    }
  }
  return v;
}

std::uint64_t SeededRng::below(std::uint64_t bound) {
  // Rejection sampling on the top of the range removes modulo bias.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

std::vector<std::size_t> sample_indices(std::size_t count, std::size_t n,
                                        std::uint64_t seed) {
  if (n > count) {
    throw ValidationError("cannot sample " + std::to_string(n) + " of " +
                          std::to_string(count) + " items");
  }
  SeededRng rng(seed);
  // Partial Fisher-Yates over a sparse swap table; O(n) memory.
  std::unordered_map<std::size_t, std::size_t> swapped;
  auto at = [&](std::size_t i) {
    auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(count - i));
    const std::size_t vi = at(i);
    const std::size_t vj = at(j);
    out.push_back(vj);
    swapped[j] = vi;
    swapped[i] = vj;
  }
  return out;
}

std::vector<std::size_t> permutation(std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) idx[i] = i;
  SeededRng rng(seed);
  rng.shuffle(idx);
  return idx;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage) {
  Fnv1a64 h;
  for (int i = 0; i < 8; ++i) h.update_byte((seed >> (8 * i)) & 0xFF);
  h.update(stage);
  return h.digest();
}

}  // namespace forge
