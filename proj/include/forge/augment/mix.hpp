#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "forge/corpus/types.hpp"
#include "forge/mono/mono.hpp"

namespace forge::augment {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t num, std::int64_t den);  // reduced, den > 0
  std::string str() const;                                    // "1/2", "3"
  bool is_zero() const { return num == 0; }
  friend bool operator==(const Rational&, const Rational&) = default;
};

// How much gold and synthetic data go into one training corpus. "1:k" uses
// all gold plus k synthetic pairs per gold pair ("1:0" is the gold-only
// baseline); "h:h" uses half the gold plus as many synthetic pairs.
struct MixRecipe {
  Rational gold_fraction{1, 1};
  Rational synth_ratio{0, 1};
  std::string label = "1:0";

  static MixRecipe parse(const std::string& label);
  void validate() const;
  bool is_baseline() const { return synth_ratio.is_zero(); }

  std::size_t gold_count(std::size_t gold_size) const;        // ceil(fraction * size)
  std::size_t synth_count(std::size_t gold_used) const;       // floor(ratio * used)
};

enum class Role { kForward, kBackward };
std::string_view to_string(Role role);
Role parse_role(std::string_view text);
Direction direction_of(Role role);  // forward = yue->en

// Pairs translations with their monolingual originals so the real sentence
// sits on the target side of the model being trained: forward training takes
// English originals, backward training Cantonese ones.
std::vector<corpus::SentencePair> orient_synthetic(const mono::MonoCorpus& mono,
                                                   const std::vector<std::string>& translations,
                                                   Role training_role);

// Gold pairs first (all of them, in order, when the fraction is 1), then the
// synthetic pairs sampled without replacement. Both inputs must share a
// direction; dev/test gold throws ContaminationError.
corpus::Corpus mix(const corpus::Corpus& gold, const corpus::Corpus& synth_pool,
                   const MixRecipe& recipe, std::uint64_t seed);

// Argmax; ties go to the lexicographically smallest id.
std::string select_best(const std::map<std::string, double>& scores);

struct RunDescriptor {
  std::string model_id;          // "nllb-forward-syn-1:1-mbart"
  std::string family;            // family fine-tuned
  std::string generator_family;  // family producing the synthetic data
  std::string generator_model;   // "<generator_family>-backward-bl"
  Role role = Role::kForward;
  MixRecipe recipe;
};

// One forward model per (pair, recipe). A gold-only recipe yields a single
// "<family>-forward-bl" descriptor per forward family.
std::vector<RunDescriptor> expand_switch_plan(
    const std::vector<std::pair<std::string, std::string>>& switch_pairs,
    const std::vector<MixRecipe>& recipes, const std::string& pivot_family);

// "<family>-<role>-bl" or "<family>-<role>-syn-<label>[-<generator>]".
std::string model_name(const std::string& family, Role role, const MixRecipe& recipe,
                       const std::string& generator_family = "");

}  // namespace forge::augment
