#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace forge {

// 64-bit FNV-1a. Stable across platforms and runs; used for pair ids and
// corpus checksums.
class Fnv1a64 {
 public:
  static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

  void update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= kPrime;
    }
  }
  void update_byte(unsigned char c) {
    state_ ^= c;
    state_ *= kPrime;
  }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = kOffset;
};

inline std::uint64_t fnv1a64(std::string_view bytes) {
  Fnv1a64 h;
  h.update(bytes);
  return h.digest();
}

// Lower-case, zero-padded 16 hex digits.
std::string to_hex(std::uint64_t value);
std::uint64_t from_hex(std::string_view hex);

}  // namespace forge
