#include "forge/augment/orchestrator.hpp"

#include <algorithm>
#include <cmath>

#include "forge/backends/batch.hpp"
#include "forge/backends/translator.hpp"
#include "forge/common/error.hpp"
#include "forge/common/rng.hpp"
#include "forge/common/text.hpp"
#include "forge/corpus/io.hpp"
#include "forge/metrics/metrics.hpp"

namespace forge::augment {

namespace fs = std::filesystem;
using backends::BackendSpec;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

BackendSpec with_base(BackendSpec spec, const fs::path& dir) {
  if (!spec.params.count("base_dir")) {
    spec.params["base_dir"] = fs::absolute(dir).lexically_normal().string();
  }
  return spec;
}

nlohmann::json manifest_ref(const corpus::CorpusManifest& m) {
  return {{"name", m.name}, {"checksum", m.checksum}, {"count", m.count}};
}

nlohmann::json recipe_json(const MixRecipe& r) {
  return {{"label", r.label},
          {"gold_fraction", r.gold_fraction.str()},
          {"synth_ratio", r.synth_ratio.str()}};
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace

int ExperimentPlan::epochs_for(const std::string& fam) const {
  const auto it = epochs.find(fam);
  if (it != epochs.end()) return it->second;
  return fam == "opus" ? 10 : 3;
}

void ExperimentPlan::validate() const {
  auto check_family = [](const std::string& f) {
    if (f.empty() || f.find('-') != std::string::npos) {
      throw ValidationError("model family '" + f + "' must be non-empty and contain no '-'");
    }
  };
  check_family(family);
  check_family(pivot_model);
  if (recipes.empty()) throw ValidationError("plan lists no recipes");
  for (const auto& r : recipes) r.validate();
  if (max_iterations < 0) throw ValidationError("max_iterations must be >= 0");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  for (const auto& [f, n] : epochs) {
    if (n < 1) throw ValidationError("epochs for " + f + " must be >= 1");
  }
  for (const auto& [f, b] : switch_pairs) {
    check_family(f);
    check_family(b);
    if (f != pivot_model && b != pivot_model) {
      throw ValidationError("model pair (forward " + f + ", backward " + b +
                            ") does not include " + pivot_model + " in either direction");
    }
  }
  if (gold.empty()) throw ValidationError("plan has no gold corpus");
  if (dev.empty()) throw ValidationError("configuration error: plan has no dev set");
  if (run_dir.empty()) throw ValidationError("plan has no run_dir");
  if (synth_pool_size == 0) throw ValidationError("synth_pool_size must be positive");
  if (checkpoint_every == 0) throw ValidationError("checkpoint_every must be positive");
}

ExperimentPlan ExperimentPlan::from_json(const nlohmann::json& j, const fs::path& base) {
  ExperimentPlan p;
  try {
    p.pivot_model = j.value("pivot_model", p.pivot_model);
    p.family = j.value("family", p.pivot_model);
    for (const auto& pair : j.value("switch_pairs", nlohmann::json::array())) {
      if (!pair.is_array() || pair.size() != 2) {
        throw ParseError("switch_pairs entries must be [forward_family, backward_family]");
      }
      p.switch_pairs.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
    }
    for (const auto& label : j.at("recipes")) p.recipes.push_back(MixRecipe::parse(label.get<std::string>()));
    p.max_iterations = j.value("max_iterations", p.max_iterations);
    p.train_hook = j.value("train_hook", p.train_hook);
    p.epochs = j.value("epochs", p.epochs);
    p.learning_rate = j.value("learning_rate", p.learning_rate);
    p.seed = j.value("seed", p.seed);
    p.synth_pool_size = j.value("synth_pool_size", p.synth_pool_size);
    p.checkpoint_every = j.value("checkpoint_every", p.checkpoint_every);
    p.gold = resolve(base, j.value("gold", ""));
    p.dev = resolve(base, j.value("dev", ""));
    p.mono_yue = resolve(base, j.value("mono_yue", ""));
    p.mono_en = resolve(base, j.value("mono_en", ""));
    p.run_dir = resolve(base, j.value("run_dir", ""));
    if (j.contains("baseline") && !j.at("baseline").is_null()) {
      BackendSpec spec = BackendSpec::from_json(j.at("baseline"));
      if (!base.empty()) spec = with_base(std::move(spec), base);
      p.baseline = std::move(spec);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad experiment plan: ") + e.what());
  }
  return p;
}

ExperimentPlan ExperimentPlan::load(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return from_json(j, fs::absolute(path).parent_path());
}

nlohmann::json ExperimentPlan::to_json() const {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [f, b] : switch_pairs) pairs.push_back({f, b});
  nlohmann::json labels = nlohmann::json::array();
  for (const auto& r : recipes) labels.push_back(r.label);
  nlohmann::json j = {{"pivot_model", pivot_model},
                      {"family", family},
                      {"switch_pairs", pairs},
                      {"recipes", labels},
                      {"max_iterations", max_iterations},
                      {"train_hook", train_hook},
                      {"epochs", epochs},
                      {"learning_rate", learning_rate},
                      {"seed", seed},
                      {"synth_pool_size", synth_pool_size},
                      {"checkpoint_every", checkpoint_every},
                      {"gold", gold.string()},
                      {"dev", dev.string()},
                      {"mono_yue", mono_yue.string()},
                      {"mono_en", mono_en.string()},
                      {"run_dir", run_dir.string()}};
  if (baseline) j["baseline"] = baseline->to_json();
  return j;
}

nlohmann::json IterationState::to_json() const {
  return {{"iteration", iteration},
          {"role", to_string(role)},
          {"current_model", current_model.to_json()},
          {"synthetic_pool", synthetic_pool ? synthetic_pool->to_json() : nlohmann::json(nullptr)},
          {"dev_scores", dev_scores},
          {"best_models", best_models},
          {"stopped", stopped}};
}

IterationState IterationState::from_json(const nlohmann::json& j) {
  IterationState s;
  try {
    s.iteration = j.at("iteration").get<int>();
    s.role = parse_role(j.at("role").get<std::string>());
    s.current_model = BackendSpec::from_json(j.at("current_model"));
    if (!j.at("synthetic_pool").is_null()) {
      s.synthetic_pool = corpus::CorpusManifest::from_json(j.at("synthetic_pool"));
    }
    s.dev_scores = j.at("dev_scores").get<std::map<std::string, double>>();
    s.best_models = j.at("best_models").get<std::vector<std::string>>();
    s.stopped = j.at("stopped").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad iteration state: ") + e.what());
  }
  return s;
}

Orchestrator::Orchestrator(ExperimentPlan plan, std::shared_ptr<TrainHook> hook)
    : plan_(std::move(plan)), hook_(std::move(hook)) {
  plan_.validate();
  if (!fs::exists(plan_.dev)) {
    throw ValidationError("configuration error: dev set " + plan_.dev.string() + " does not exist");
  }
  if (!hook_) {
    if (plan_.train_hook == "toy") {
      hook_ = std::make_shared<ToyTrainHook>();
    } else {
      hook_ = std::make_shared<CommandTrainHook>(plan_.train_hook);
    }
  }
  fs::create_directories(runs_dir());
  fs::create_directories(plan_.run_dir / "corpora");
  fs::create_directories(plan_.run_dir / "rounds");
  fs::create_directories(plan_.run_dir / "synth");
}

std::string Orchestrator::rel(const fs::path& p) const {
  return fs::absolute(p).lexically_normal().lexically_relative(
      fs::absolute(plan_.run_dir).lexically_normal()).generic_string();
}

const corpus::Corpus& Orchestrator::gold(Role role) {
  auto it = gold_.find(role);
  if (it != gold_.end()) return it->second;
  corpus::Corpus g = corpus::read_corpus(plan_.gold);
  if (!g.manifest.direction.is_forward()) {
    throw ValidationError("gold corpus " + plan_.gold.string() + " must be yue-en");
  }
  if (role == Role::kBackward) g = corpus::reversed(g, g.manifest.name + ".reversed");
  return gold_.emplace(role, std::move(g)).first->second;
}

const corpus::Corpus& Orchestrator::dev(Role role) {
  auto it = dev_.find(role);
  if (it != dev_.end()) return it->second;
  corpus::Corpus d = corpus::read_corpus(plan_.dev);
  if (d.manifest.split != corpus::Split::kDev) {
    throw ValidationError("configuration error: " + plan_.dev.string() + " is not a dev split");
  }
  if (!d.manifest.direction.is_forward()) {
    throw ValidationError("dev corpus " + plan_.dev.string() + " must be yue-en");
  }
  if (role == Role::kBackward) {
    d = corpus::reversed(d, d.manifest.name + ".reversed");
    d.manifest.split = corpus::Split::kDev;
  }
  corpus::write_corpus(plan_.run_dir / "corpora" / ("dev." + std::string(to_string(role)) + ".tsv"), d);
  return dev_.emplace(role, std::move(d)).first->second;
}

const mono::MonoCorpus& Orchestrator::mono_for(Role role) {
  auto it = mono_.find(role);
  if (it != mono_.end()) return it->second;
  // The real side of a synthetic pair is the target of the model trained.
  const Lang lang = direction_of(role).tgt;
  const fs::path& path = lang == Lang::kYue ? plan_.mono_yue : plan_.mono_en;
  if (path.empty()) {
    throw ValidationError("plan has no " + std::string(to_string(lang)) + " monolingual corpus");
  }
  return mono_.emplace(role, mono::read_mono(path, lang)).first->second;
}

double Orchestrator::score(const BackendSpec& spec, Role role) {
  const corpus::Corpus& d = dev(role);
  auto translator = backends::load_backend(with_base(spec, runs_dir()));
  std::vector<std::string> srcs;
  std::vector<std::string> refs;
  for (const auto& p : d.pairs) {
    srcs.push_back(p.src);
    refs.push_back(p.tgt);
  }
  const auto hyps = translator->translate(srcs);
  if (hyps.size() != srcs.size()) {
    throw ProtocolError("model '" + spec.model_id + "' returned " + std::to_string(hyps.size()) +
                        " translations for " + std::to_string(srcs.size()) + " dev sentences");
  }
  return metrics::corpus_bleu(hyps, refs);
}

corpus::Corpus Orchestrator::synthesize(const BackendSpec& generator, Role role,
                                        const std::string& tag, std::uint64_t seed) {
  if (generator.direction != direction_of(role).reversed()) {
    throw ValidationError("generator '" + generator.model_id + "' translates " +
                          generator.direction.str() + " but " + std::string(to_string(role)) +
                          " training needs " + direction_of(role).reversed().str());
  }
  const mono::MonoCorpus sample = backends::sample_mono(mono_for(role), plan_.synth_pool_size, seed);
  auto translator = backends::load_backend(with_base(generator, runs_dir()));
  backends::BatchJob job;
  job.inputs.reserve(sample.sentences.size());
  for (const auto& s : sample.sentences) job.inputs.push_back(s);
  job.input_checksum = sample.manifest.checksum + ":" + generator.model_id;
  job.output = plan_.run_dir / "synth" / (tag + ".txt");
  job.checkpoint_every = plan_.checkpoint_every;
  const auto translations = backends::translate_batch(job, *translator);
  corpus::Corpus pool = corpus::make_corpus(tag, orient_synthetic(sample, translations, role),
                                            corpus::Split::kTrain, seed, direction_of(role));
  pool.manifest.attributes = {{"generator_model", generator.model_id},
                              {"sample", sample.manifest.name},
                              {"sample_checksum", sample.manifest.checksum},
                              {"sample_seed", seed},
                              {"mono_checksum", mono_for(role).manifest.checksum}};
  corpus::write_corpus(plan_.run_dir / "corpora" / (tag + ".tsv"), pool);
  return pool;
}

Orchestrator::Trained Orchestrator::train_and_score(const std::string& model_id,
                                                    const std::string& family, Role role,
                                                    const MixRecipe& recipe,
                                                    const corpus::Corpus& train,
                                                    const std::string& generator,
                                                    std::uint64_t seed, int iteration) {
  const fs::path manifest_file = runs_dir() / (model_id + ".json");
  const int epochs = plan_.epochs_for(family);
  // A finished run with the same inputs is reused, so an aborted round
  // resumes without retraining.
  if (fs::exists(manifest_file)) {
    const auto j = nlohmann::json::parse(read_file(manifest_file));
    if (j.at("train_corpus").at("checksum") == train.manifest.checksum &&
        j.at("epochs") == epochs && j.at("learning_rate") == plan_.learning_rate) {
      return {BackendSpec::from_json(j.at("backend")), j.at("dev_score").get<double>()};
    }
  }
  const fs::path train_file = plan_.run_dir / "corpora" / (model_id + ".train.tsv");
  corpus::write_corpus(train_file, train);
  const corpus::Corpus& d = dev(role);
  TrainRequest req;
  req.model_id = model_id;
  req.family = family;
  req.direction = direction_of(role);
  req.train_corpus = fs::absolute(train_file);
  req.dev_corpus = fs::absolute(plan_.run_dir / "corpora" / ("dev." + std::string(to_string(role)) + ".tsv"));
  req.epochs = epochs;
  req.learning_rate = plan_.learning_rate;
  req.seed = seed;
  req.out_dir = fs::absolute(runs_dir());
  BackendSpec spec = hook_->train(req);
  if (spec.model_id.empty()) spec.model_id = model_id;
  if (spec.model_id != model_id || spec.direction != req.direction) {
    throw BackendError("train hook returned '" + spec.model_id + "' (" + spec.direction.str() +
                       ") for request '" + model_id + "' (" + req.direction.str() + ")");
  }
  spec.validate();
  const double dev_score = score(spec, role);

  const auto& attrs = train.manifest.attributes;
  nlohmann::json j = {
      {"model_id", model_id},
      {"family", family},
      {"role", to_string(role)},
      {"direction", req.direction.str()},
      {"iteration", iteration},
      {"recipe", recipe_json(recipe)},
      {"train_corpus", {{"path", rel(train_file)},
                        {"name", train.manifest.name},
                        {"checksum", train.manifest.checksum},
                        {"count", train.manifest.count}}},
      {"gold_manifest", attrs.contains("gold_manifest") ? attrs.at("gold_manifest")
                                                        : manifest_ref(train.manifest)},
      {"synth_manifest", attrs.contains("synth_manifest") ? attrs.at("synth_manifest")
                                                          : nlohmann::json(nullptr)},
      {"generator_model", generator.empty() ? nlohmann::json(nullptr) : nlohmann::json(generator)},
      {"seed", seed},
      {"dev_corpus", {{"path", rel(plan_.run_dir / "corpora" /
                                   ("dev." + std::string(to_string(role)) + ".tsv"))},
                      {"checksum", d.manifest.checksum},
                      {"count", d.manifest.count}}},
      {"dev_score", dev_score},
      {"metric", "sacrebleu"},
      {"epochs", epochs},
      {"learning_rate", plan_.learning_rate},
      {"backend", spec.to_json()},
      {"assumptions",
       {{"gold", "backward models train on the same gold training corpus as forward models, "
                 "with sides swapped"}}}};
  write_file_atomic(manifest_file, dump(j));
  return {spec, dev_score};
}

BackendSpec Orchestrator::baseline(const std::string& family, Role role) {
  const MixRecipe bl = MixRecipe::parse("1:0");
  const std::string id = model_name(family, role, bl);
  corpus::Corpus g = gold(role);
  g.manifest.attributes["gold_manifest"] = manifest_ref(g.manifest);
  return train_and_score(id, family, role, bl, g, "", plan_.seed, 0).spec;
}

IterationState Orchestrator::initial_state() {
  if (fs::exists(state_path())) {
    return IterationState::from_json(nlohmann::json::parse(read_file(state_path())));
  }
  IterationState s;
  s.role = Role::kBackward;
  if (plan_.baseline) {
    if (!plan_.baseline->direction.is_forward()) {
      throw ValidationError("baseline model '" + plan_.baseline->model_id + "' must be yue-en");
    }
    s.current_model = *plan_.baseline;
    s.dev_scores[s.current_model.model_id] = score(s.current_model, Role::kForward);
  } else {
    s.current_model = baseline(plan_.family, Role::kForward);
    s.dev_scores[s.current_model.model_id] =
        read_run_manifest(plan_.run_dir, s.current_model.model_id).at("dev_score").get<double>();
  }
  s.best_models.push_back(s.current_model.model_id);
  save_state(s);
  return s;
}

void Orchestrator::save_state(const IterationState& state) const {
  write_file_atomic(state_path(), dump(state.to_json()));
}

IterationState Orchestrator::run_iteration(const IterationState& state) {
  if (state.stopped || state.iteration >= plan_.max_iterations) return state;
  const int k = state.iteration + 1;
  const Role role = state.role;
  const std::string round = "i" + std::to_string(k);
  const std::string tag = (role == Role::kBackward ? "canto-syn-" : "eng-syn-") + round;
  const std::uint64_t sample_seed = derive_seed(plan_.seed, "sample:" + round);
  const corpus::Corpus pool = synthesize(state.current_model, role, tag, sample_seed);

  std::map<std::string, double> scores;
  std::map<std::string, BackendSpec> specs;
  std::map<std::string, MixRecipe> recipe_of;
  nlohmann::json models = nlohmann::json::array();
  for (const auto& recipe : plan_.recipes) {
    std::string id;
    if (recipe.is_baseline()) {
      id = baseline(plan_.family, role).model_id;
    } else {
      id = model_name(plan_.family, role, recipe) + "-" + round;
      const std::uint64_t mix_seed = derive_seed(plan_.seed, "mix:" + id);
      const corpus::Corpus mixed = mix(gold(role), pool, recipe, mix_seed);
      train_and_score(id, plan_.family, role, recipe, mixed, state.current_model.model_id,
                      mix_seed, k);
    }
    const auto manifest = read_run_manifest(plan_.run_dir, id);
    scores[id] = manifest.at("dev_score").get<double>();
    specs[id] = BackendSpec::from_json(manifest.at("backend"));
    recipe_of[id] = recipe;
    models.push_back({{"model_id", id},
                      {"recipe", recipe.label},
                      {"dev_score", scores[id]},
                      {"manifest", "runs/" + id + ".json"}});
  }
  const std::string best = select_best(scores);

  IterationState next = state;
  next.iteration = k;
  next.role = role == Role::kForward ? Role::kBackward : Role::kForward;
  next.current_model = specs.at(best);
  next.synthetic_pool = pool.manifest;
  for (const auto& [id, s] : scores) next.dev_scores[id] = s;
  next.best_models.push_back(best);
  next.stopped = recipe_of.at(best).is_baseline();

  const nlohmann::json round_manifest = {
      {"iteration", k},
      {"role", to_string(role)},
      {"generator_model", state.current_model.model_id},
      {"synthetic_pool", {{"name", pool.manifest.name},
                          {"path", "corpora/" + tag + ".tsv"},
                          {"checksum", pool.manifest.checksum},
                          {"count", pool.manifest.count},
                          {"sample_seed", sample_seed}}},
      {"models", models},
      {"best_model", best},
      {"tie_break", "lexicographically smallest model_id"},
      {"stopped", next.stopped}};
  write_file_atomic(plan_.run_dir / "rounds" / (round + ".json"), dump(round_manifest));
  save_state(next);
  return next;
}

IterationState Orchestrator::run() {
  IterationState s = initial_state();
  while (!s.stopped && s.iteration < plan_.max_iterations) s = run_iteration(s);
  return s;
}

std::map<std::string, double> Orchestrator::run_switch() {
  const auto descriptors = expand_switch_plan(plan_.switch_pairs, plan_.recipes, plan_.pivot_model);
  std::map<std::string, corpus::Corpus> pools;
  std::map<std::string, double> scores;
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& d : descriptors) {
    std::string generator;
    if (d.recipe.is_baseline()) {
      baseline(d.family, Role::kForward);
    } else {
      generator = baseline(d.generator_family, Role::kBackward).model_id;
      auto it = pools.find(d.generator_family);
      if (it == pools.end()) {
        const BackendSpec gen = with_base(
            BackendSpec::from_json(read_run_manifest(plan_.run_dir, generator).at("backend")),
            runs_dir());
        const std::string tag = "eng-syn-" + d.generator_family;
        it = pools.emplace(d.generator_family,
                           synthesize(gen, Role::kForward, tag,
                                      derive_seed(plan_.seed, "sample:" + d.generator_family)))
                 .first;
      }
      const std::uint64_t mix_seed = derive_seed(plan_.seed, "mix:" + d.model_id);
      train_and_score(d.model_id, d.family, Role::kForward, d.recipe,
                      mix(gold(Role::kForward), it->second, d.recipe, mix_seed), generator,
                      mix_seed, 0);
    }
    scores[d.model_id] = read_run_manifest(plan_.run_dir, d.model_id).at("dev_score").get<double>();
    runs.push_back({{"model_id", d.model_id},
                    {"family", d.family},
                    {"generator_model", generator.empty() ? nlohmann::json(nullptr)
                                                          : nlohmann::json(generator)},
                    {"recipe", d.recipe.label},
                    {"dev_score", scores[d.model_id]},
                    {"manifest", "runs/" + d.model_id + ".json"}});
  }
  write_file_atomic(plan_.run_dir / "switch.json",
                    dump({{"pivot_model", plan_.pivot_model},
                          {"runs", runs},
                          {"best_model", select_best(scores)},
                          {"tie_break", "lexicographically smallest model_id"}}));
  return scores;
}

nlohmann::json read_run_manifest(const fs::path& run_dir, const std::string& model_id) {
  const fs::path file = run_dir / "runs" / (model_id + ".json");
  if (!fs::exists(file)) throw NotFoundError("no run manifest for model '" + model_id + "'");
  try {
    return nlohmann::json::parse(read_file(file));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

}  // namespace forge::augment
