#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "forge/augment/mix.hpp"
#include "forge/backends/translator.hpp"
#include "forge/corpus/types.hpp"

namespace forge::augment {

struct TrainRequest {
  std::string model_id;
  std::string family;
  Direction direction;
  std::filesystem::path train_corpus;
  std::filesystem::path dev_corpus;
  int epochs = 3;
  double learning_rate = 1e-4;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;

  nlohmann::json to_json() const;
};

// Fine-tunes a model and reports how to load it. Paths in the returned
// spec may be relative to `out_dir`.
class TrainHook {
 public:
  virtual ~TrainHook() = default;
  virtual backends::BackendSpec train(const TrainRequest& request) = 0;
};

// Runs a shell command with the request JSON on stdin; the command prints a
// backend spec JSON on stdout. Nonzero exit throws BackendError.
class CommandTrainHook : public TrainHook {
 public:
  explicit CommandTrainHook(std::string command,
                            std::chrono::milliseconds timeout = std::chrono::hours(72))
      : command_(std::move(command)), timeout_(timeout) {}
  backends::BackendSpec train(const TrainRequest& request) override;

 private:
  std::string command_;
  std::chrono::milliseconds timeout_;
};

// Learns a toy dictionary from the training corpus: tokens of pairs with
// equal token counts are aligned by position, and each source token maps to
// its most frequent target (ties to the smallest string). Writes
// `<model_id>.lexicon.tsv` into out_dir.
class ToyTrainHook : public TrainHook {
 public:
  backends::BackendSpec train(const TrainRequest& request) override;
};

backends::Lexicon learn_lexicon(const std::vector<corpus::SentencePair>& pairs, Direction direction);

struct ExperimentPlan {
  std::string pivot_model = "nllb";
  std::string family = "nllb";  // family fine-tuned by the iterative loop
  std::vector<std::pair<std::string, std::string>> switch_pairs;
  std::vector<MixRecipe> recipes;
  int max_iterations = 2;
  std::string train_hook = "toy";  // "toy" or a shell command
  std::map<std::string, int> epochs;
  double learning_rate = 1e-4;
  std::uint64_t seed = 0;
  std::size_t synth_pool_size = 1000;
  std::size_t checkpoint_every = 1000;
  std::filesystem::path gold;      // yue-en training corpus (TSV + sidecar)
  std::filesystem::path dev;       // yue-en dev corpus
  std::filesystem::path mono_yue;
  std::filesystem::path mono_en;
  std::filesystem::path run_dir;
  std::optional<backends::BackendSpec> baseline;  // FM0; trained on gold when absent

  int epochs_for(const std::string& family) const;  // 3, or 10 for opus
  void validate() const;

  // Relative paths resolve against `base`.
  static ExperimentPlan from_json(const nlohmann::json& j, const std::filesystem::path& base = {});
  static ExperimentPlan load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

struct IterationState {
  int iteration = 0;
  Role role = Role::kBackward;  // role of the models trained next
  backends::BackendSpec current_model;  // generator for the next round
  std::optional<corpus::CorpusManifest> synthetic_pool;
  std::map<std::string, double> dev_scores;
  std::vector<std::string> best_models;
  bool stopped = false;

  nlohmann::json to_json() const;
  static IterationState from_json(const nlohmann::json& j);
};

class Orchestrator {
 public:
  Orchestrator(ExperimentPlan plan, std::shared_ptr<TrainHook> hook = nullptr);

  const ExperimentPlan& plan() const { return plan_; }
  std::filesystem::path runs_dir() const { return plan_.run_dir / "runs"; }
  std::filesystem::path state_path() const { return plan_.run_dir / "state.json"; }

  // State saved in run_dir, or a fresh one whose generator is the baseline
  // forward model (trained and scored when the plan has none).
  IterationState initial_state();

  // One round: generate synthetic data with the current model, mix every
  // recipe, train and score each model, keep the best. Returns the state
  // unchanged once stopped or at max_iterations. Saves the new state.
  IterationState run_iteration(const IterationState& state);

  // Rounds until stopped or max_iterations.
  IterationState run();

  // One forward model per (switch pair, recipe), each trained on synthetic
  // data from the other family's backward baseline. Returns model_id to
  // dev score and writes switch.json.
  std::map<std::string, double> run_switch();

  // "<family>-<role>-bl" trained on all gold in that direction, cached.
  backends::BackendSpec baseline(const std::string& family, Role role);

 private:
  struct Trained {
    backends::BackendSpec spec;
    double dev_score = 0.0;
  };

  const corpus::Corpus& gold(Role role);
  const corpus::Corpus& dev(Role role);
  const mono::MonoCorpus& mono_for(Role role);
  corpus::Corpus synthesize(const backends::BackendSpec& generator, Role role,
                            const std::string& tag, std::uint64_t seed);
  Trained train_and_score(const std::string& model_id, const std::string& family, Role role,
                          const MixRecipe& recipe, const corpus::Corpus& train,
                          const std::string& generator, std::uint64_t seed, int iteration);
  double score(const backends::BackendSpec& spec, Role role);
  void save_state(const IterationState& state) const;
  std::string rel(const std::filesystem::path& p) const;

  ExperimentPlan plan_;
  std::shared_ptr<TrainHook> hook_;
  std::map<Role, corpus::Corpus> gold_;
  std::map<Role, corpus::Corpus> dev_;
  std::map<Role, mono::MonoCorpus> mono_;
};

// The run manifest stored as runs/<model_id>.json.
nlohmann::json read_run_manifest(const std::filesystem::path& run_dir, const std::string& model_id);

}  // namespace forge::augment
