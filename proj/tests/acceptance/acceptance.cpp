// Runs every primary acceptance criterion and prints one PASS/FAIL line per
// criterion. Exit status is nonzero when any criterion fails.

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <list>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "forge/augment/mix.hpp"
#include "forge/augment/orchestrator.hpp"
#include "forge/common/error.hpp"
#include "forge/common/rng.hpp"
#include "forge/common/text.hpp"
#include "forge/common/utf8.hpp"
#include "forge/corpus/io.hpp"
#include "forge/corpus/parsers.hpp"
#include "forge/corpus/splits.hpp"
#include "forge/hopes/hopes.hpp"
#include "forge/metrics/metrics.hpp"
#include "forge/server/service.hpp"
#include "oracles/kappa_oracle.hpp"
#include "oracles/metric_oracles.hpp"
#include "support/bt_world.hpp"
#include "support/fixtures.hpp"

using namespace forge;
namespace fs = std::filesystem;

namespace {

constexpr double kBleuTolerance = 1e-9;
constexpr double kHleporTolerance = 1e-9;
constexpr double kKappaTolerance = 1e-12;
constexpr double kMetricBudgetMs = 5000;
constexpr double kPipelineBudgetMs = 60000;

// Collects the first few failed expectations of a criterion.
struct Check {
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: got %.15g want %.15g", what.c_str(), got, want);
    expect(std::fabs(got - want) <= tol, buf);
  }
};

struct Criterion {
  const char* name;
  double budget_ms;  // 0 = no runtime bound
  std::function<void(Check&)> body;
};

std::string random_sentence(std::mt19937_64& rng, std::size_t max_len, std::size_t vocab) {
  static const char* kWords[] = {"the", "cat", "sat", "on", "mat", "a", "dog", "ran",
                                 "to", "it", "is", "big", "red", "one"};
  const std::size_t len = rng() % (max_len + 1);
  std::string s;
  for (std::size_t k = 0; k < len; ++k) {
    if (k) s += ' ';
    s += kWords[rng() % vocab];
  }
  return s;
}

void metric_correctness(Check& c) {
  std::mt19937_64 rng(20240601);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 20;
    const std::size_t vocab = 3 + rng() % 10;
    std::vector<std::string> hyps;
    std::vector<std::string> refs;
    for (std::size_t i = 0; i < n; ++i) {
      hyps.push_back(random_sentence(rng, 12, vocab));
      refs.push_back(random_sentence(rng, 12, vocab));
    }
    for (bool smooth : {false, true}) {
      c.near(metrics::corpus_bleu(hyps, refs, 4, smooth ? metrics::Smoothing::kExponential
                                                        : metrics::Smoothing::kNone),
             oracle::bleu(hyps, refs, 4, smooth), kBleuTolerance,
             "corpus " + std::to_string(trial) + (smooth ? " smoothed" : " unsmoothed"));
    }
    std::vector<std::string> nonempty;
    for (const auto& h : hyps) nonempty.push_back(h.empty() ? "x" : h);
    c.expect(metrics::corpus_bleu(nonempty, nonempty) == 100.0, "bleu(x, x) != 100");
  }
  const double hand = metrics::corpus_bleu({"the the the the"}, {"the cat"}, 1, metrics::Smoothing::kNone);
  c.expect(hand == 25.0, "hand case is " + std::to_string(hand) + ", not exactly 25.0");
}

void hlepor_correctness(Check& c) {
  c.expect(metrics::sentence_hlepor("the cat sat on the mat", "the cat sat on the mat") == 1.0,
           "identical sentence does not score 1.0");
  c.expect(metrics::sentence_hlepor("a b c", "d e f") == 0.0, "zero overlap does not score 0.0");
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 50; ++trial) {
    const auto h = oracle::words(random_sentence(rng, 8, 5));
    const auto r = oracle::words(random_sentence(rng, 8, 5));
    const auto got = metrics::hlepor_parts(h, r);
    const auto want = oracle::hlepor(h, r);
    const std::string at = "pair " + std::to_string(trial);
    c.expect(got.matches == want.matches, at + " matches differ");
    c.near(got.lp, want.lp, kHleporTolerance, at + " LP");
    c.near(got.npd, want.npd, kHleporTolerance, at + " NPD");
    c.near(got.hpr, want.hpr, kHleporTolerance, at + " HPR");
    c.near(got.score, want.score, kHleporTolerance, at + " score");
  }
}

void kappa_correctness(Check& c) {
  std::mt19937_64 rng(777);
  int compared = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 40;
    std::vector<int> a(n);
    std::vector<int> b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<int>(rng() % 11);
      b[i] = rng() % 3 == 0 ? a[i] : static_cast<int>(rng() % 11);
    }
    const auto got = hopes::weighted_kappa(a, b, 0, 10);
    const auto want = oracle::weighted_kappa(a, b, 0, 10);
    c.expect(got.has_value() == want.has_value(), "definedness differs at vector " + std::to_string(trial));
    if (got && want) {
      c.near(*got, *want, kKappaTolerance, "vector " + std::to_string(trial));
      ++compared;
    }
  }
  c.expect(compared > 190, "too few defined kappas compared");
  c.expect(hopes::weighted_kappa({0, 3, 7, 10}, {0, 3, 7, 10}, 0, 10) == 1.0, "perfect agreement != 1.0");
  c.expect(hopes::weighted_kappa({0, 2}, {2, 0}, 0, 10) == -1.0, "a=[0,2], b=[2,0] != -1.0");
}

void hopes_bookkeeping(Check& c) {
  c.expect(hopes::classify_error(0) == hopes::ErrorClass::kNoError, "0 is not NoError");
  c.expect(hopes::classify_error(1) == hopes::ErrorClass::kMinor, "1 is not Minor");
  c.expect(hopes::classify_error(15) == hopes::ErrorClass::kMinor, "15 is not Minor");
  c.expect(hopes::classify_error(16) == hopes::ErrorClass::kMajor, "16 is not Major");

  const auto test = corpus::make_corpus("test", fixtures::make_pairs(corpus::Origin::kWordsHk, 400, 4),
                                        corpus::Split::kTest);
  std::vector<hopes::SystemOutput> systems;
  for (const char* id : {"nllb-forward-bl", "nllb-forward-syn-1:1-mbart", "gpt"}) {
    hopes::SystemOutput so{id, {}};
    for (const auto& p : test.pairs) so.hyps.push_back(p.tgt + " " + id);
    systems.push_back(std::move(so));
  }
  for (std::size_t k : {2u, 3u, 5u}) {
    for (std::size_t n : {1u, 50u, 200u}) {
      std::vector<std::string> annotators;
      for (std::size_t a = 0; a < k; ++a) annotators.push_back("ann" + std::to_string(a));
      const auto s = hopes::sample_for_annotation(test, systems, annotators, n, k * 1000 + n);
      std::mt19937_64 rng(n + k);
      std::vector<hopes::HopesRecord> records;
      for (std::size_t sys = 0; sys < s.plan.systems.size(); ++sys) {
        for (std::size_t i = 0; i < s.plan.sentence_ids.size(); ++i) {
          for (std::size_t a : s.plan.raters(i, sys)) {
            hopes::HopesRecord r{s.plan.sentence_ids[i], s.plan.systems[sys], s.plan.annotators[a]};
            const int scale = static_cast<int>(rng() % 3);
            for (int* v : {&r.mis, &r.term, &r.style, &r.gram}) {
              *v = scale == 0 ? 0 : static_cast<int>(rng() % (scale == 1 ? 4 : 11));
            }
            records.push_back(r);
          }
        }
      }
      hopes::check_complete(records, s.plan);
      for (const auto& agg : hopes::aggregate(records, s.plan)) {
        c.expect(agg.no_error + agg.minor + agg.major == n * 2,
                 agg.system_id + ": class counts " +
                     std::to_string(agg.no_error + agg.minor + agg.major) + " != " + std::to_string(n * 2));
      }
    }
  }
}

void mixer_exactness(Check& c) {
  const auto gold = corpus::make_corpus("gold", fixtures::make_pairs(corpus::Origin::kWordsHk, 100, 1),
                                        corpus::Split::kTrain);
  const auto pool = corpus::make_corpus("pool", fixtures::make_pairs(corpus::Origin::kSynthetic, 600, 2),
                                        corpus::Split::kTrain);
  const std::pair<const char*, std::size_t> expected[] = {{"1:1", 200}, {"1:3", 400}, {"1:5", 600}, {"h:h", 100}};
  for (const auto& [label, size] : expected) {
    const auto recipe = augment::MixRecipe::parse(label);
    const auto out = augment::mix(gold, pool, recipe, 9);
    c.expect(out.size() == size, std::string(label) + " size " + std::to_string(out.size()));
    c.expect(augment::mix(gold, pool, recipe, 9).manifest.checksum == out.manifest.checksum,
             std::string(label) + " not deterministic");
    if (recipe.gold_fraction == augment::Rational{1, 1}) {
      std::map<std::uint64_t, int> seen;
      for (const auto& p : out.pairs) {
        if (p.is_gold()) ++seen[p.id()];
      }
      bool once = seen.size() == 100;
      for (const auto& p : gold.pairs) once = once && seen[p.id()] == 1;
      c.expect(once, std::string(label) + " does not hold every gold id exactly once");
    }
  }
  const auto small = corpus::make_corpus("small", fixtures::make_pairs(corpus::Origin::kSynthetic, 400, 3),
                                         corpus::Split::kTrain);
  bool threw = false;
  try {
    augment::mix(gold, small, augment::MixRecipe::parse("1:5"), 9);
  } catch (const ValidationError& e) {
    threw = std::string(e.what()).find("short by 100") != std::string::npos;
  }
  c.expect(threw, "1:5 against a 400-pool did not report the shortfall");
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[e.path().lexically_relative(dir).string()] = read_file(e.path());
  }
  return out;
}

void trace_model(Check& c, const fs::path& run_dir, const std::string& id, std::set<std::string>& path) {
  if (!path.insert(id).second) {
    c.expect(false, "generator cycle through " + id);
    return;
  }
  const auto m = augment::read_run_manifest(run_dir, id);
  for (const char* key : {"recipe", "seed", "generator_model", "gold_manifest", "synth_manifest",
                          "dev_score", "epochs", "learning_rate", "train_corpus", "backend"}) {
    c.expect(m.contains(key), id + " lacks " + key);
  }
  const auto train = corpus::read_corpus(run_dir / m.at("train_corpus").at("path").get<std::string>());
  c.expect(train.manifest.checksum == m.at("train_corpus").at("checksum"), id + " train corpus checksum");
  if (!m.at("generator_model").is_null()) {
    const auto pool_name = m.at("synth_manifest").at("name").get<std::string>();
    const auto pool = corpus::read_corpus(run_dir / "corpora" / (pool_name + ".tsv"));
    c.expect(pool.manifest.checksum == m.at("synth_manifest").at("checksum"), id + " synthetic pool checksum");
    c.expect(pool.manifest.attributes.at("generator_model") == m.at("generator_model"),
             id + " pool generated by a different model");
    trace_model(c, run_dir, m.at("generator_model").get<std::string>(), path);
  } else {
    c.expect(m.at("recipe").at("synth_ratio") == "0", id + " has synthetic data but no generator");
  }
}

void pipeline_end_to_end(Check& c) {
  const auto dir = fixtures::temp_dir("acceptance_bt");
  fixtures::BtWorld world;
  world.gold_n = 200;
  world.mono_n = 1200;
  auto run = [&](const std::string& name) {
    auto plan = world.write(dir / name);
    plan.synth_pool_size = 1000;
    plan.max_iterations = 2;  // backward round then forward round
    augment::Orchestrator(plan).run();
    return plan.run_dir;
  };
  const fs::path a = run("a");
  for (const char* round : {"i1", "i2"}) {
    const auto r = nlohmann::json::parse(read_file(a / "rounds" / (std::string(round) + ".json")));
    c.expect(r.at("models").size() == 2, std::string(round) + ": expected 2 trained models");
    c.expect(r.at("synthetic_pool").at("count") == 1000, std::string(round) + ": pool is not 1,000");
    std::string best;
    double best_score = -1;
    for (const auto& m : r.at("models")) {
      const double s = m.at("dev_score").get<double>();
      const auto id = m.at("model_id").get<std::string>();
      c.expect(augment::read_run_manifest(a, id).at("dev_score") == s, id + ": score mismatch");
      if (s > best_score || (s == best_score && id < best)) {
        best = id;
        best_score = s;
      }
      std::set<std::string> path;
      trace_model(c, a, id, path);
    }
    c.expect(r.at("best_model") == best, std::string(round) + ": best is not the dev argmax");
  }
  const fs::path b = run("b");
  const auto sa = snapshot(a);
  const auto sb = snapshot(b);
  c.expect(sa.size() == sb.size(), "reruns produced different file sets");
  for (const auto& [name, content] : sa) {
    c.expect(sb.count(name) && sb.at(name) == content, "rerun differs in " + name);
  }
  fs::remove_all(dir);
}

std::string cjk_text(std::mt19937_64& rng, std::size_t len) {
  const auto& v = fixtures::cjk_vocab();
  std::string s;
  for (std::size_t k = 0; k < len; ++k) s += v[rng() % v.size()];
  return s;
}

void ingestion_counts(Check& c) {
  constexpr std::size_t kWenlin = 14476;
  constexpr std::size_t kWordsHk = 44045;
  constexpr std::size_t kOpus = 9588;
  std::mt19937_64 rng(68109);
  auto long_or_short = [&](std::size_t i) { return i % 3 == 0 ? 3 + rng() % 6 : 12 + rng() % 20; };

  std::string words = "id,headword,entry,variants,warning\n";
  for (std::size_t i = 0; i < kWordsHk; ++i) {
    words += std::to_string(100000 + i) + ",字,\"(pos:名詞)\n<explanation>\nyue:解釋\neng:gloss\n<eg>\nyue:" +
             cjk_text(rng, long_or_short(i)) + " (jat1 go3)\neng:words example " + std::to_string(i) + "\",,\n";
  }
  std::string wenlin = "<?xml version=\"1.0\"?>\n<dict>\n";
  for (std::size_t i = 0; i < kWenlin; ++i) {
    wenlin += "<entry><WL><yue>" + cjk_text(rng, long_or_short(i)) + "</yue><eng>wenlin example " +
              std::to_string(i) + "</eng></WL></entry>\n";
  }
  wenlin += "</dict>\n";
  std::string opus_src;
  std::string opus_tgt;
  for (std::size_t i = 0; i < kOpus; ++i) {
    opus_src += cjk_text(rng, long_or_short(i)) + "\n";
    opus_tgt += "opus line " + std::to_string(i) + "\n";
  }

  Diagnostics diag;
  const corpus::CleaningRuleSet rules;
  const auto wh = corpus::make_corpus("wordshk", corpus::parse_wordshk(corpus::read_wordshk_csv(words, diag), rules, diag));
  const auto wl = corpus::make_corpus("wenlin", corpus::parse_wenlin(wenlin, rules, diag));
  const auto op = corpus::make_corpus("opus", corpus::parse_aligned(std::string_view(opus_src), std::string_view(opus_tgt)));
  c.expect(diag.empty(), "parsers reported warnings on clean fixtures");
  c.expect(wh.size() == kWordsHk, "words.hk pairs " + std::to_string(wh.size()));
  c.expect(wl.size() == kWenlin, "wenlin pairs " + std::to_string(wl.size()));
  c.expect(op.size() == kOpus, "aligned pairs " + std::to_string(op.size()));
  const auto all = corpus::merge_corpora({wl, wh, op}, "all");
  c.expect(all.manifest.count == 68109, "merged total " + std::to_string(all.manifest.count));
  c.expect(all.manifest.source_counts.at("wenlin") == kWenlin && all.manifest.source_counts.at("wordshk") == kWordsHk &&
               all.manifest.source_counts.at("opus") == kOpus,
           "per-source counts differ");

  corpus::SplitOptions opt;
  opt.dev_n = 3000;
  opt.test_n = 3000;
  opt.seed = 7;
  const auto s = corpus::make_splits(wh, opt);
  c.expect(s.train.size() == 38045, "train after dev/test " + std::to_string(s.train.size()));
  c.expect(s.dev.size() == 3000 && s.test.size() == 3000, "dev/test sizes");
  try {
    corpus::check_disjoint({&s.train, &s.dev, &s.test});
  } catch (const ContaminationError& e) {
    c.expect(false, e.what());
  }

  std::vector<corpus::SentencePair> thousand;
  for (std::size_t i = 0; i < 1000; ++i) {
    thousand.push_back({cjk_text(rng, 1 + rng() % 20), "s" + std::to_string(i), corpus::Origin::kWordsHk});
  }
  const auto sl = corpus::split_short_long(thousand, 10);
  c.expect(sl.short_pairs.size() + sl.long_pairs.size() == 1000, "partition is not exhaustive");
  std::unordered_set<std::uint64_t> short_ids;
  for (const auto& p : sl.short_pairs) {
    short_ids.insert(p.id());
    c.expect(utf8::length(p.src) <= 10, "short pair longer than 10");
  }
  for (const auto& p : sl.long_pairs) {
    c.expect(!short_ids.count(p.id()), "pair on both sides");
    c.expect(utf8::length(p.src) > 10, "long pair of 10 or fewer");
  }
}

void degeneration_detector(Check& c) {
  const auto d = metrics::detect_degeneration(
      "He walked out with a pair of handwritten handwritten handwritten.");
  c.expect(d.flag && d.unit == "handwritten" && d.run == 3, "handwritten x3 not flagged");
  std::mt19937_64 rng(31337);
  const char* vocab[] = {"a", "b", "c", "d", "e"};
  std::size_t generated = 0;
  while (generated < 1000) {
    std::vector<std::string> toks(rng() % 20);
    for (auto& t : toks) t = vocab[rng() % 5];
    if (oracle::max_run(toks) >= 3) continue;  // keep only strings below the threshold
    std::string text;
    for (const auto& t : toks) text += t + " ";
    c.expect(!metrics::detect_degeneration(text).flag, "false positive: " + text);
    ++generated;
  }
}

std::unique_ptr<backends::Translator> scripted_loader(const backends::BackendSpec& spec) {
  backends::Lexicon lex = {{"a", spec.model_id + "-A"}, {"b", spec.model_id + "-B"}};
  return std::make_unique<backends::ToyTranslator>(spec, lex);
}

void server_lru(Check& c) {
  for (std::size_t cap : {1u, 2u, 3u}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      SeededRng rng(seed * 7 + cap);
      server::ModelManager m(cap, scripted_loader);
      std::list<std::string> ref;
      std::vector<std::string> ref_evictions;
      for (int i = 0; i < 50; ++i) {
        backends::BackendSpec spec;
        spec.model_id = "m" + std::to_string(rng.below(5));
        spec.params["lexicon"] = "unused";
        m.translate(spec, {"a"});
        auto it = std::find(ref.begin(), ref.end(), spec.model_id);
        if (it != ref.end()) {
          ref.erase(it);
        } else if (ref.size() == cap) {
          ref_evictions.push_back(ref.back());
          ref.pop_back();
        }
        ref.push_front(spec.model_id);
        c.expect(m.resident().size() <= cap, "resident set above capacity");
      }
      c.expect(m.evictions() == ref_evictions,
               "eviction order differs from reference LRU (capacity " + std::to_string(cap) + ")");
      c.expect(m.resident() == std::vector<std::string>(ref.begin(), ref.end()), "resident order differs");
    }
  }

  // Concurrent clients over HTTP against toy backends.
  const auto dir = fixtures::temp_dir("acceptance_server");
  const std::vector<std::string> ids = {"nllb-forward-bl", "nllb-forward-syn-1:1-mbart",
                                        "opus-forward-bl", "mbart-forward-bl"};
  std::map<std::string, backends::Lexicon> lexicons;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    backends::Lexicon lex;
    for (std::size_t t = 0; t < fixtures::cjk_vocab().size(); ++t) {
      lex[fixtures::cjk_vocab()[t]] = fixtures::en_vocab()[(t + k) % fixtures::en_vocab().size()];
    }
    lexicons[ids[k]] = lex;
    write_file_atomic(dir / (ids[k] + ".tsv"), backends::format_lexicon(lex));
    backends::BackendSpec spec;
    spec.model_id = ids[k];
    spec.params["lexicon"] = ids[k] + ".tsv";
    write_file_atomic(dir / (ids[k] + ".json"), spec.to_json().dump());
  }
  server::TranslateService service(dir, 2);
  server::HttpServer http(service);
  const int port = http.start();
  constexpr int kClients = 8;
  constexpr int kRequests = 500;
  std::atomic<int> mismatches{0};
  std::atomic<int> failures{0};
  std::vector<std::thread> clients;
  for (int t = 0; t < kClients; ++t) {
    clients.emplace_back([&, t] {
      httplib::Client client("127.0.0.1", port);
      std::mt19937_64 rng(500 + t);
      for (int i = 0; i < kRequests; ++i) {
        const std::string& id = ids[rng() % ids.size()];
        const std::string text = cjk_text(rng, 1 + rng() % 12);
        const std::string want = backends::toy_translate(text, lexicons.at(id), Direction::forward());
        backends::BackendSpec probe;
        probe.model_id = id;
        nlohmann::json body = {{"model_type", probe.model_type()}, {"training_variant", probe.training_variant()},
                               {"src_lang", "yue"}, {"tgt_lang", "en"}, {"text", text}};
        auto res = client.Post("/translate", body.dump(), "application/json");
        if (!res || res->status != 200) {
          ++failures;
          continue;
        }
        const auto reply = nlohmann::json::parse(res->body);
        if (reply.at("translation") != want || reply.at("model_id") != id) ++mismatches;
      }
    });
  }
  for (auto& t : clients) t.join();
  http.stop();
  c.expect(failures == 0, std::to_string(failures.load()) + " requests failed");
  c.expect(mismatches == 0, std::to_string(mismatches.load()) + " outputs differ from the single-threaded oracle");
  c.expect(service.models().peak_resident() <= 2, "more than 2 models resident");
  c.expect(service.models().loads() > 4, "stress run did not exercise eviction");
  fs::remove_all(dir);
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"Metric correctness", kMetricBudgetMs, metric_correctness},
      {"hLEPOR correctness", kMetricBudgetMs, hlepor_correctness},
      {"Kappa correctness", 0, kappa_correctness},
      {"HOPES bookkeeping", 0, hopes_bookkeeping},
      {"Mixer exactness", 0, mixer_exactness},
      {"Pipeline end-to-end (toy scale)", kPipelineBudgetMs, pipeline_end_to_end},
      {"Ingestion counts", 0, ingestion_counts},
      {"Degeneration detector", 0, degeneration_detector},
      {"Server LRU", 0, server_lru},
  };
  int failed = 0;
  for (const auto& crit : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      crit.body(check);
    } catch (const std::exception& e) {
      check.failures.push_back(std::string("exception: ") + e.what());
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (crit.budget_ms > 0 && ms > crit.budget_ms) {
      check.failures.push_back("took " + std::to_string(ms) + " ms, budget " + std::to_string(crit.budget_ms) + " ms");
    }
    const bool pass = check.failures.empty();
    failed += !pass;
    std::printf("%s  %-34s %9.1f ms\n", pass ? "PASS" : "FAIL", crit.name, ms);
    for (const auto& f : check.failures) std::printf("        %s\n", f.c_str());
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
