#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>
#include <unordered_set>

#include "forge/augment/mix.hpp"
#include "forge/augment/orchestrator.hpp"
#include "forge/common/error.hpp"
#include "forge/common/hash.hpp"
#include "forge/common/text.hpp"
#include "forge/corpus/io.hpp"
#include "support/bt_world.hpp"
#include "support/fixtures.hpp"

using namespace forge;
using namespace forge::augment;
namespace fs = std::filesystem;

namespace {

corpus::Corpus gold_corpus(std::size_t n, std::uint64_t seed = 1) {
  return corpus::make_corpus("gold", fixtures::make_pairs(corpus::Origin::kWordsHk, n, seed),
                             corpus::Split::kTrain, seed);
}

corpus::Corpus synth_pool(std::size_t n) {
  auto pairs = fixtures::make_pairs(corpus::Origin::kSynthetic, n, 99);
  return corpus::make_corpus("pool", std::move(pairs), corpus::Split::kTrain, 99);
}

std::size_t count_origin(const corpus::Corpus& c, bool gold) {
  std::size_t n = 0;
  for (const auto& p : c.pairs) n += p.is_gold() == gold;
  return n;
}

}  // namespace

TEST(MixRecipe, ParsesLabels) {
  const auto r13 = MixRecipe::parse("1:3");
  EXPECT_EQ(r13.gold_fraction, (Rational{1, 1}));
  EXPECT_EQ(r13.synth_ratio, (Rational{3, 1}));
  const auto hh = MixRecipe::parse("h:h");
  EXPECT_EQ(hh.gold_fraction, (Rational{1, 2}));
  EXPECT_EQ(hh.synth_count(hh.gold_count(100)), 50u);
  EXPECT_TRUE(MixRecipe::parse("1:0").is_baseline());
  EXPECT_NO_THROW(MixRecipe::parse("1:2").validate());
  for (const char* bad : {"2:1", "1:", "h:1", "1:x", "", "1:-1"}) {
    EXPECT_THROW(MixRecipe::parse(bad), ParseError) << bad;
  }
  MixRecipe inconsistent = MixRecipe::parse("h:h");
  inconsistent.synth_ratio = {2, 1};
  EXPECT_THROW(inconsistent.validate(), ValidationError);
}

TEST(MixRecipe, GoldCountRoundsUp) {
  const auto hh = MixRecipe::parse("h:h");
  EXPECT_EQ(hh.gold_count(101), 51u);
  EXPECT_EQ(hh.synth_count(51), 51u);
  EXPECT_EQ(MixRecipe::parse("1:5").synth_count(7), 35u);
}

TEST(Mix, SizesPerRecipe) {
  const auto gold = gold_corpus(100);
  const auto pool = synth_pool(600);
  const std::pair<const char*, std::size_t> expected[] = {
      {"1:1", 200}, {"1:3", 400}, {"1:5", 600}, {"h:h", 100}, {"1:0", 100}, {"1:2", 300}};
  for (const auto& [label, total] : expected) {
    const auto out = mix(gold, pool, MixRecipe::parse(label), 5);
    EXPECT_EQ(out.size(), total) << label;
    EXPECT_EQ(out.manifest.count, total) << label;
    EXPECT_EQ(out.manifest.attributes.at("recipe"), label);
  }
  const auto hh = mix(gold, pool, MixRecipe::parse("h:h"), 5);
  EXPECT_EQ(count_origin(hh, true), 50u);
  EXPECT_EQ(count_origin(hh, false), 50u);
}

TEST(Mix, GoldPreservedExactlyOnce) {
  const auto gold = gold_corpus(100);
  const auto pool = synth_pool(600);
  for (const char* label : {"1:0", "1:1", "1:3", "1:5"}) {
    const auto out = mix(gold, pool, MixRecipe::parse(label), 17);
    std::map<std::uint64_t, int> seen;
    for (const auto& p : out.pairs) {
      if (p.is_gold()) ++seen[p.id()];
    }
    ASSERT_EQ(seen.size(), gold.size()) << label;
    for (const auto& p : gold.pairs) EXPECT_EQ(seen[p.id()], 1) << label;
    // Gold comes first, in its original order.
    for (std::size_t i = 0; i < gold.size(); ++i) EXPECT_EQ(out.pairs[i], gold.pairs[i]);
  }
}

TEST(Mix, SyntheticSampledWithoutReplacement) {
  const auto gold = gold_corpus(100);
  const auto pool = synth_pool(600);
  const auto out = mix(gold, pool, MixRecipe::parse("1:5"), 3);
  std::set<std::uint64_t> ids;
  for (std::size_t i = 100; i < out.size(); ++i) ids.insert(out.pairs[i].id());
  EXPECT_EQ(ids.size(), 500u);
}

TEST(Mix, DeterministicUnderSeed) {
  const auto gold = gold_corpus(100);
  const auto pool = synth_pool(600);
  const auto a = mix(gold, pool, MixRecipe::parse("h:h"), 42);
  const auto b = mix(gold, pool, MixRecipe::parse("h:h"), 42);
  const auto c = mix(gold, pool, MixRecipe::parse("h:h"), 43);
  EXPECT_EQ(a.pairs, b.pairs);
  EXPECT_EQ(a.manifest.checksum, b.manifest.checksum);
  EXPECT_NE(a.pairs, c.pairs);
}

TEST(Mix, ShortfallNamesCounts) {
  const auto gold = gold_corpus(100);
  const auto pool = synth_pool(400);
  try {
    mix(gold, pool, MixRecipe::parse("1:5"), 1);
    FAIL() << "expected shortfall";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("needs 500"), std::string::npos) << msg;
    EXPECT_NE(msg.find("only 400"), std::string::npos) << msg;
    EXPECT_NE(msg.find("short by 100"), std::string::npos) << msg;
  }
}

TEST(Mix, RefusesHeldOutGoldAndDirectionMismatch) {
  auto dev = gold_corpus(50);
  dev.manifest.split = corpus::Split::kDev;
  EXPECT_THROW(mix(dev, synth_pool(100), MixRecipe::parse("1:1"), 1), ContaminationError);
  const auto rev = corpus::reversed(synth_pool(100), "pool.rev");
  EXPECT_THROW(mix(gold_corpus(50), rev, MixRecipe::parse("1:1"), 1), ValidationError);
  EXPECT_NO_THROW(mix(gold_corpus(50), rev, MixRecipe::parse("1:0"), 1));
}

TEST(Orient, BackwardPairsKeepRealCantoneseOnTarget) {
  std::vector<mono::MonoSentence> sents;
  for (const char* s : {"我去街", "佢食飯", "好熱"}) sents.push_back({s, Lang::kYue, mono::MonoSource::kLihkgCsv});
  const auto mono = mono::dedup_shuffle(sents, 1, "m");
  std::vector<std::string> hyps;
  for (const auto& s : mono.sentences) hyps.push_back("en:" + s);
  const auto pairs = orient_synthetic(mono, hyps, Role::kBackward);
  ASSERT_EQ(pairs.size(), 3u);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(pairs[i].tgt, mono.sentences[i]);
    EXPECT_EQ(pairs[i].src, hyps[i]);
    EXPECT_FALSE(pairs[i].is_gold());
  }
  EXPECT_THROW(orient_synthetic(mono, hyps, Role::kForward), ValidationError);
  hyps.pop_back();
  EXPECT_THROW(orient_synthetic(mono, hyps, Role::kBackward), ValidationError);
  EXPECT_TRUE(orient_synthetic(mono::MonoCorpus{}, {}, Role::kForward).empty());
}

// Hash join of synthetic targets against the monolingual sentences.
TEST(Orient, TargetsJoinBackToMonolingualSource) {
  std::vector<mono::MonoSentence> sents;
  for (int i = 0; i < 300; ++i) {
    sents.push_back({"w" + std::to_string(i) + " w" + std::to_string(i * 7 % 13), Lang::kEn,
                     mono::MonoSource::kWmtNews});
  }
  const auto mono = mono::dedup_shuffle(sents, 4, "en");
  std::vector<std::string> hyps(mono.sentences.size(), "假");
  const auto pairs = orient_synthetic(mono, hyps, Role::kForward);
  std::unordered_set<std::uint64_t> index;
  for (const auto& s : mono.sentences) index.insert(fnv1a64(s));
  for (const auto& p : pairs) {
    ASSERT_TRUE(index.count(fnv1a64(p.tgt))) << p.tgt;
    EXPECT_EQ(p.origin, corpus::Origin::kSynthetic);
  }
}

TEST(SelectBest, ArgmaxWithTieBreak) {
  EXPECT_EQ(select_best({{"a", 16.5}, {"b", 15.9}}), "a");
  EXPECT_EQ(select_best({{"a", 15.9}, {"b", 16.5}}), "b");
  EXPECT_EQ(select_best({{"b", 16.0}, {"a", 16.0}}), "a");
  EXPECT_EQ(select_best({{"z", -1.0}}), "z");
  EXPECT_THROW(select_best({}), ValidationError);
  EXPECT_THROW(select_best({{"a", 1.0}, {"b", std::numeric_limits<double>::quiet_NaN()}}),
               ValidationError);
}

TEST(SwitchPlan, FourPairsTwoRecipes) {
  const std::vector<std::pair<std::string, std::string>> pairs = {
      {"nllb", "opus"}, {"nllb", "mbart"}, {"opus", "nllb"}, {"mbart", "nllb"}};
  const auto ds = expand_switch_plan(pairs, {MixRecipe::parse("1:1"), MixRecipe::parse("1:3")}, "nllb");
  ASSERT_EQ(ds.size(), 8u);
  std::set<std::string> ids;
  for (const auto& d : ds) ids.insert(d.model_id);
  EXPECT_EQ(ids.size(), 8u);
  EXPECT_TRUE(ids.count("nllb-forward-syn-1:1-mbart"));
  EXPECT_TRUE(ids.count("opus-forward-syn-1:3-nllb"));
  for (const auto& d : ds) {
    EXPECT_NE(d.family, d.generator_family);
    EXPECT_EQ(d.generator_model, d.generator_family + "-backward-bl");
    EXPECT_EQ(d.role, Role::kForward);
  }
}

TEST(SwitchPlan, PivotRuleAndBaselineDedup) {
  EXPECT_THROW(expand_switch_plan({{"mbart", "opus"}}, {MixRecipe::parse("1:1")}, "nllb"),
               ValidationError);
  EXPECT_THROW(expand_switch_plan({}, {MixRecipe::parse("1:1")}, "nllb"), ValidationError);
  const auto ds = expand_switch_plan({{"nllb", "opus"}, {"nllb", "mbart"}},
                                     {MixRecipe::parse("1:0"), MixRecipe::parse("1:1")}, "nllb");
  ASSERT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds[0].model_id, "nllb-forward-bl");
  EXPECT_TRUE(ds[0].generator_model.empty());
}

TEST(LearnLexicon, PositionalArgmaxWithSmallestTie) {
  const std::vector<corpus::SentencePair> pairs = {
      {"我去", "i go", corpus::Origin::kWordsHk},
      {"我食", "i eat", corpus::Origin::kWordsHk},
      {"我", "me", corpus::Origin::kWordsHk},
      {"去街", "go", corpus::Origin::kWordsHk},  // length mismatch, ignored
      {"街", "street", corpus::Origin::kWordsHk},
      {"街", "road", corpus::Origin::kWordsHk}};
  const auto lex = learn_lexicon(pairs, Direction::forward());
  EXPECT_EQ(lex.at("我"), "i");
  EXPECT_EQ(lex.at("去"), "go");
  EXPECT_EQ(lex.at("街"), "road");
  EXPECT_EQ(lex.size(), 4u);
}

TEST(ExperimentPlan, JsonAndDefaults) {
  const auto plan = ExperimentPlan::from_json(
      nlohmann::json::parse(R"({"recipes":["1:1","h:h"],"gold":"g.tsv","dev":"/abs/d.tsv",
        "run_dir":"run","switch_pairs":[["nllb","opus"]],"epochs":{"mbart":4}})"),
      "/base");
  EXPECT_EQ(plan.gold, fs::path("/base/g.tsv"));
  EXPECT_EQ(plan.dev, fs::path("/abs/d.tsv"));
  EXPECT_EQ(plan.epochs_for("nllb"), 3);
  EXPECT_EQ(plan.epochs_for("opus"), 10);
  EXPECT_EQ(plan.epochs_for("mbart"), 4);
  EXPECT_DOUBLE_EQ(plan.learning_rate, 1e-4);
  EXPECT_NO_THROW(plan.validate());
  auto bad = plan;
  bad.switch_pairs = {{"mbart", "opus"}};
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = plan;
  bad.dev.clear();
  EXPECT_THROW(bad.validate(), ValidationError);
  EXPECT_THROW(ExperimentPlan::from_json(nlohmann::json::parse(R"({"recipes":["2:2"]})")), ParseError);
}

TEST(Orchestrator, MissingDevIsConfigurationError) {
  const auto dir = fixtures::temp_dir("bt_nodev");
  auto plan = fixtures::BtWorld{}.write(dir);
  plan.dev = dir / "absent.tsv";
  EXPECT_THROW(Orchestrator{plan}, ValidationError);
}

namespace {

// Walks every run manifest back through its generator chain.
void check_closure(const fs::path& run_dir, const std::string& model_id, int depth = 0) {
  ASSERT_LT(depth, 20) << "generator cycle at " << model_id;
  const auto m = read_run_manifest(run_dir, model_id);
  const auto train = corpus::read_corpus(run_dir / m.at("train_corpus").at("path").get<std::string>());
  EXPECT_EQ(train.manifest.checksum, m.at("train_corpus").at("checksum"));
  EXPECT_EQ(train.manifest.direction.str(), m.at("direction"));
  EXPECT_TRUE(m.contains("seed"));
  EXPECT_TRUE(m.contains("epochs"));
  EXPECT_TRUE(m.contains("learning_rate"));
  EXPECT_FALSE(m.at("gold_manifest").is_null());
  if (m.at("recipe").at("synth_ratio") == "0") {
    EXPECT_TRUE(m.at("generator_model").is_null());
    EXPECT_TRUE(m.at("synth_manifest").is_null());
  } else {
    check_closure(run_dir, m.at("generator_model").get<std::string>(), depth + 1);
  }
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[e.path().lexically_relative(dir).string()] = read_file(e.path());
  }
  return out;
}

}  // namespace

TEST(Orchestrator, OneRoundTrainsEachRecipe) {
  const auto dir = fixtures::temp_dir("bt_round");
  auto plan = fixtures::BtWorld{}.write(dir);
  plan.max_iterations = 1;
  Orchestrator orch(plan);
  const auto s0 = orch.initial_state();
  EXPECT_EQ(s0.current_model.model_id, "nllb-forward-bl");
  EXPECT_EQ(s0.role, Role::kBackward);
  const auto s1 = orch.run_iteration(s0);
  EXPECT_EQ(s1.iteration, 1);
  EXPECT_EQ(s1.role, Role::kForward);
  EXPECT_EQ(s1.current_model.direction, Direction::backward());

  const auto round = nlohmann::json::parse(read_file(plan.run_dir / "rounds" / "i1.json"));
  ASSERT_EQ(round.at("models").size(), 2u);
  std::set<std::string> ids;
  for (const auto& m : round.at("models")) {
    ids.insert(m.at("model_id").get<std::string>());
    EXPECT_TRUE(m.at("dev_score").is_number());
    check_closure(plan.run_dir, m.at("model_id").get<std::string>());
  }
  EXPECT_EQ(ids, (std::set<std::string>{"nllb-backward-syn-1:1-i1", "nllb-backward-syn-1:3-i1"}));
  EXPECT_TRUE(ids.count(round.at("best_model").get<std::string>()));
  EXPECT_EQ(round.at("generator_model"), "nllb-forward-bl");
  EXPECT_EQ(round.at("synthetic_pool").at("count"), 800);

  // Synthetic targets are real Cantonese monolingual sentences.
  const auto mono = mono::read_mono(plan.mono_yue, Lang::kYue);
  std::unordered_set<std::string> real(mono.sentences.begin(), mono.sentences.end());
  const auto pool = corpus::read_corpus(plan.run_dir / "corpora" / "canto-syn-i1.tsv");
  EXPECT_EQ(pool.manifest.direction, Direction::backward());
  for (const auto& p : pool.pairs) ASSERT_TRUE(real.count(p.tgt));

  // At max_iterations the state is returned unchanged.
  const auto s2 = orch.run_iteration(s1);
  EXPECT_EQ(s2.to_json(), s1.to_json());
  // Registry picks up every trained model.
  const auto reg = backends::BackendRegistry::load_dir(plan.run_dir / "runs");
  EXPECT_EQ(reg.size(), 3u);
}

TEST(Orchestrator, ZeroIterationsLeavesStateUnchanged) {
  const auto dir = fixtures::temp_dir("bt_zero");
  auto plan = fixtures::BtWorld{}.write(dir);
  plan.max_iterations = 0;
  Orchestrator orch(plan);
  const auto s0 = orch.initial_state();
  EXPECT_EQ(orch.run_iteration(s0).to_json(), s0.to_json());
  EXPECT_FALSE(fs::exists(plan.run_dir / "rounds" / "i1.json"));
}

TEST(Orchestrator, RerunIsByteIdentical) {
  const auto dir = fixtures::temp_dir("bt_det");
  const fixtures::BtWorld world;
  auto plan_a = world.write(dir / "a");
  auto plan_b = world.write(dir / "b");
  const auto sa = Orchestrator(plan_a).run();
  const auto sb = Orchestrator(plan_b).run();
  EXPECT_EQ(sa.iteration, 2);
  EXPECT_EQ(sa.to_json(), sb.to_json());
  const auto a = snapshot(plan_a.run_dir);
  const auto b = snapshot(plan_b.run_dir);
  EXPECT_EQ(a.size(), b.size());
  for (const auto& [name, content] : a) {
    ASSERT_TRUE(b.count(name)) << name;
    EXPECT_EQ(content, b.at(name)) << name;
  }
  // Models trained on different mixes do not all score the same.
  std::set<double> scores;
  for (const auto& [id, s] : sa.dev_scores) scores.insert(s);
  EXPECT_GT(scores.size(), 1u);
}

namespace {

// Toy training, except synthetic-data backward models learn nothing.
class SabotagedHook : public TrainHook {
 public:
  backends::BackendSpec train(const TrainRequest& r) override {
    ++calls;
    if (r.model_id == fail_on) throw BackendError("hook crashed on " + r.model_id);
    auto spec = toy_.train(r);
    if (!r.direction.is_forward() && r.model_id.find("-syn-") != std::string::npos) {
      write_file_atomic(r.out_dir / (r.model_id + ".lexicon.tsv"), "");
    }
    return spec;
  }
  int calls = 0;
  std::string fail_on;

 private:
  ToyTrainHook toy_;
};

}  // namespace

TEST(Orchestrator, EarlyStopWhenBaselineWins) {
  const auto dir = fixtures::temp_dir("bt_stop");
  auto plan = fixtures::BtWorld{}.write(dir);
  plan.recipes = {MixRecipe::parse("1:0"), MixRecipe::parse("1:1")};
  plan.max_iterations = 5;
  auto hook = std::make_shared<SabotagedHook>();
  Orchestrator orch(plan, hook);
  const auto s = orch.run();
  EXPECT_TRUE(s.stopped);
  EXPECT_EQ(s.iteration, 1);
  EXPECT_EQ(s.best_models.back(), "nllb-backward-bl");
  const auto round = nlohmann::json::parse(read_file(plan.run_dir / "rounds" / "i1.json"));
  EXPECT_TRUE(round.at("stopped").get<bool>());
  EXPECT_EQ(orch.run_iteration(s).to_json(), s.to_json());
}

TEST(Orchestrator, HookFailureKeepsPriorArtifactsAndResumes) {
  const auto dir = fixtures::temp_dir("bt_fail");
  auto plan = fixtures::BtWorld{}.write(dir);
  plan.max_iterations = 1;
  auto hook = std::make_shared<SabotagedHook>();
  hook->fail_on = "nllb-backward-syn-1:3-i1";
  {
    Orchestrator orch(plan, hook);
    const auto s0 = orch.initial_state();
    EXPECT_THROW(orch.run_iteration(s0), BackendError);
  }
  EXPECT_TRUE(fs::exists(plan.run_dir / "runs" / "nllb-backward-syn-1:1-i1.json"));
  EXPECT_FALSE(fs::exists(plan.run_dir / "rounds" / "i1.json"));
  const auto saved = nlohmann::json::parse(read_file(plan.run_dir / "state.json"));
  EXPECT_EQ(saved.at("iteration"), 0);

  hook->fail_on.clear();
  hook->calls = 0;
  Orchestrator orch(plan, hook);
  const auto s = orch.run();
  EXPECT_EQ(s.iteration, 1);
  EXPECT_EQ(hook->calls, 1);  // only the failed model is retrained
}

TEST(Orchestrator, SwitchRunsUseOtherFamilyAsGenerator) {
  const auto dir = fixtures::temp_dir("bt_switch");
  auto plan = fixtures::BtWorld{}.write(dir);
  plan.switch_pairs = {{"nllb", "opus"}, {"opus", "nllb"}};
  plan.recipes = {MixRecipe::parse("1:0"), MixRecipe::parse("1:1")};
  Orchestrator orch(plan);
  const auto scores = orch.run_switch();
  EXPECT_EQ(scores.size(), 4u);
  EXPECT_TRUE(scores.count("nllb-forward-syn-1:1-opus"));
  EXPECT_TRUE(scores.count("opus-forward-bl"));
  const auto m = read_run_manifest(plan.run_dir, "nllb-forward-syn-1:1-opus");
  EXPECT_EQ(m.at("generator_model"), "opus-backward-bl");
  EXPECT_EQ(read_run_manifest(plan.run_dir, "opus-forward-bl").at("epochs"), 10);
  check_closure(plan.run_dir, "nllb-forward-syn-1:1-opus");
}

TEST(CommandTrainHook, ParsesSpecAndReportsFailure) {
  const auto dir = fixtures::temp_dir("bt_hook");
  TrainRequest req;
  req.model_id = "nllb-forward-bl";
  req.out_dir = dir;
  CommandTrainHook ok(
      R"(cat > /dev/null; echo '{"kind":"toy_dictionary","direction":"yue-en","model_id":"nllb-forward-bl","params":{"lexicon":"x.tsv"}}')");
  const auto spec = ok.train(req);
  EXPECT_EQ(spec.param("lexicon"), "x.tsv");
  CommandTrainHook fails("cat > /dev/null; exit 2");
  EXPECT_THROW(fails.train(req), BackendError);
  CommandTrainHook garbage("cat > /dev/null; echo nope");
  EXPECT_THROW(garbage.train(req), BackendError);
  // The request reaches the hook on stdin.
  CommandTrainHook echo(R"(python3 -c 'import json,sys; r=json.load(sys.stdin); print(json.dumps({"kind":"toy_dictionary","direction":r["direction"],"model_id":r["model_id"],"params":{"lexicon":str(r["epochs"])}}))')");
  req.epochs = 7;
  EXPECT_EQ(echo.train(req).param("lexicon"), "7");
}
