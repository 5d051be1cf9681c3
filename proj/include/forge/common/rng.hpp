#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace forge {

// Seeded generator whose output sequence is fixed by the standard
// (mt19937_64) and whose derived operations avoid the implementation-defined
// std distributions, so sampling is byte-reproducible across toolchains.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// n distinct indices drawn uniformly from [0, count) in draw order.
// Requires n <= count.
std::vector<std::size_t> sample_indices(std::size_t count, std::size_t n,
                                        std::uint64_t seed);

// Seed-determined permutation of [0, count).
std::vector<std::size_t> permutation(std::size_t count, std::uint64_t seed);

// Derives an independent sub-seed for a named stage of a pipeline.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage);

}  // namespace forge
