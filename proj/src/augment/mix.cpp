#include "forge/augment/mix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "forge/common/error.hpp"
#include "forge/common/rng.hpp"

namespace forge::augment {

Rational Rational::make(std::int64_t num, std::int64_t den) {
  if (den == 0) throw ValidationError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  return {num / (g ? g : 1), den / (g ? g : 1)};
}

std::string Rational::str() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

MixRecipe MixRecipe::parse(const std::string& label) {
  MixRecipe r;
  r.label = label;
  if (label == "h:h") {
    r.gold_fraction = {1, 2};
    r.synth_ratio = {1, 1};
    return r;
  }
  if (label.size() > 2 && label.compare(0, 2, "1:") == 0 &&
      std::all_of(label.begin() + 2, label.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
      label.size() <= 8) {
    r.gold_fraction = {1, 1};
    r.synth_ratio = {std::stoll(label.substr(2)), 1};
    return r;
  }
  throw ParseError("unknown mix recipe '" + label + "' (expected 1:<k> or h:h)");
}

void MixRecipe::validate() const {
  if (gold_fraction.num <= 0 || gold_fraction.num > gold_fraction.den) {
    throw ValidationError("recipe " + label + ": gold fraction must be in (0, 1]");
  }
  if (synth_ratio.num < 0) throw ValidationError("recipe " + label + ": negative synthetic ratio");
  if (label == "h:h") {
    if (!(gold_fraction == Rational{1, 2} && synth_ratio == Rational{1, 1})) {
      throw ValidationError("recipe h:h must mean half the gold plus as many synthetic pairs");
    }
  } else if (label.compare(0, 2, "1:") == 0) {
    if (!(gold_fraction == Rational{1, 1}) || synth_ratio.den != 1 ||
        label != "1:" + std::to_string(synth_ratio.num)) {
      throw ValidationError("recipe " + label + " must use all gold and an integer ratio");
    }
  }
}

std::size_t MixRecipe::gold_count(std::size_t gold_size) const {
  const auto n = static_cast<std::int64_t>(gold_size);
  return static_cast<std::size_t>((gold_fraction.num * n + gold_fraction.den - 1) / gold_fraction.den);
}

std::size_t MixRecipe::synth_count(std::size_t gold_used) const {
  return static_cast<std::size_t>(synth_ratio.num * static_cast<std::int64_t>(gold_used) /
                                  synth_ratio.den);
}

std::string_view to_string(Role role) { return role == Role::kForward ? "forward" : "backward"; }

Role parse_role(std::string_view text) {
  if (text == "forward") return Role::kForward;
  if (text == "backward") return Role::kBackward;
  throw ParseError("unknown role '" + std::string(text) + "'");
}

Direction direction_of(Role role) {
  return role == Role::kForward ? Direction::forward() : Direction::backward();
}

std::vector<corpus::SentencePair> orient_synthetic(const mono::MonoCorpus& mono,
                                                   const std::vector<std::string>& translations,
                                                   Role training_role) {
  if (mono.sentences.size() != translations.size()) {
    throw ValidationError("orientation: " + std::to_string(mono.sentences.size()) +
                          " monolingual sentences but " + std::to_string(translations.size()) +
                          " translations");
  }
  const Lang real_side = direction_of(training_role).tgt;
  if (!mono.sentences.empty() && mono.manifest.lang != real_side) {
    throw ValidationError("orientation: training a " + std::string(to_string(training_role)) +
                          " model needs " + std::string(to_string(real_side)) +
                          " monolingual text, got " + std::string(to_string(mono.manifest.lang)));
  }
  std::vector<corpus::SentencePair> out;
  out.reserve(translations.size());
  for (std::size_t i = 0; i < translations.size(); ++i) {
    out.push_back({translations[i], mono.sentences[i], corpus::Origin::kSynthetic});
  }
  return out;
}

namespace {

nlohmann::json manifest_ref(const corpus::CorpusManifest& m) {
  return {{"name", m.name}, {"checksum", m.checksum}, {"count", m.count}};
}

}  // namespace

corpus::Corpus mix(const corpus::Corpus& gold, const corpus::Corpus& synth_pool,
                   const MixRecipe& recipe, std::uint64_t seed) {
  recipe.validate();
  if (gold.manifest.split == corpus::Split::kDev || gold.manifest.split == corpus::Split::kTest) {
    throw ContaminationError("refusing to mix " + std::string(to_string(gold.manifest.split)) +
                             " corpus '" + gold.manifest.name + "' into training data");
  }
  const std::size_t gold_used = recipe.gold_count(gold.size());
  const std::size_t synth_used = recipe.synth_count(gold_used);
  if (synth_used > 0 && synth_pool.manifest.direction != gold.manifest.direction) {
    throw ValidationError("gold is " + gold.manifest.direction.str() + " but the synthetic pool is " +
                          synth_pool.manifest.direction.str());
  }
  if (synth_used > synth_pool.size()) {
    throw ValidationError("recipe " + recipe.label + " needs " + std::to_string(synth_used) +
                          " synthetic pairs for " + std::to_string(gold_used) +
                          " gold pairs, but the pool has only " +
                          std::to_string(synth_pool.size()) + " (short by " +
                          std::to_string(synth_used - synth_pool.size()) + ")");
  }
  std::vector<corpus::SentencePair> pairs;
  pairs.reserve(gold_used + synth_used);
  if (gold_used == gold.size()) {
    pairs.insert(pairs.end(), gold.pairs.begin(), gold.pairs.end());
  } else {
    auto idx = sample_indices(gold.size(), gold_used, derive_seed(seed, "gold"));
    std::sort(idx.begin(), idx.end());
    for (std::size_t i : idx) pairs.push_back(gold.pairs[i]);
  }
  for (std::size_t i : sample_indices(synth_pool.size(), synth_used, derive_seed(seed, "synthetic"))) {
    auto p = synth_pool.pairs[i];
    p.origin = corpus::Origin::kSynthetic;
    pairs.push_back(std::move(p));
  }
  corpus::Corpus out = corpus::make_corpus(gold.manifest.name + "+" + recipe.label, std::move(pairs),
                                           corpus::Split::kTrain, seed, gold.manifest.direction);
  out.manifest.attributes = {{"recipe", recipe.label},
                             {"gold_fraction", recipe.gold_fraction.str()},
                             {"synth_ratio", recipe.synth_ratio.str()},
                             {"gold_used", gold_used},
                             {"synth_used", synth_used},
                             {"gold_manifest", manifest_ref(gold.manifest)},
                             {"synth_manifest", synth_used ? manifest_ref(synth_pool.manifest)
                                                           : nlohmann::json(nullptr)}};
  return out;
}

std::string select_best(const std::map<std::string, double>& scores) {
  if (scores.empty()) throw ValidationError("select_best: no scores");
  const std::string* best = nullptr;
  double best_score = 0.0;
  for (const auto& [id, score] : scores) {
    if (std::isnan(score)) throw ValidationError("select_best: score of '" + id + "' is NaN");
    // std::map iterates ids in ascending order, so strict > keeps the
    // smallest id among ties.
    if (!best || score > best_score) {
      best = &id;
      best_score = score;
    }
  }
  return *best;
}

std::string model_name(const std::string& family, Role role, const MixRecipe& recipe,
                       const std::string& generator_family) {
  std::string id = family + "-" + std::string(to_string(role)) + "-";
  if (recipe.is_baseline()) return id + "bl";
  id += "syn-" + recipe.label;
  if (!generator_family.empty()) id += "-" + generator_family;
  return id;
}

std::vector<RunDescriptor> expand_switch_plan(
    const std::vector<std::pair<std::string, std::string>>& switch_pairs,
    const std::vector<MixRecipe>& recipes, const std::string& pivot_family) {
  if (switch_pairs.empty()) throw ValidationError("switch plan has no model pairs");
  if (recipes.empty()) throw ValidationError("switch plan has no recipes");
  for (const auto& [f, b] : switch_pairs) {
    if (f != pivot_family && b != pivot_family) {
      throw ValidationError("model pair (forward " + f + ", backward " + b + ") does not include " +
                            pivot_family + " in either direction");
    }
  }
  std::vector<RunDescriptor> out;
  std::set<std::string> seen;
  for (const auto& [f, b] : switch_pairs) {
    for (const auto& recipe : recipes) {
      recipe.validate();
      RunDescriptor d;
      d.family = f;
      d.generator_family = recipe.is_baseline() ? "" : b;
      d.generator_model = recipe.is_baseline() ? "" : b + "-backward-bl";
      d.role = Role::kForward;
      d.recipe = recipe;
      d.model_id = model_name(f, Role::kForward, recipe, d.generator_family);
      if (seen.insert(d.model_id).second) out.push_back(std::move(d));
    }
  }
  return out;
}

}  // namespace forge::augment
