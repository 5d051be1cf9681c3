#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <iostream>

#include "forge/augment/mix.hpp"
#include "forge/augment/orchestrator.hpp"
#include "forge/backends/batch.hpp"
#include "forge/backends/translator.hpp"
#include "forge/common/error.hpp"
#include "forge/common/text.hpp"
#include "forge/corpus/cleaning.hpp"
#include "forge/corpus/io.hpp"
#include "forge/corpus/parsers.hpp"
#include "forge/corpus/splits.hpp"
#include "forge/hopes/hopes.hpp"
#include "forge/metrics/metrics.hpp"
#include "forge/mono/mono.hpp"
#include "forge/server/service.hpp"

namespace fs = std::filesystem;
using namespace forge;

namespace {

void report_warnings(const Diagnostics& diag, std::size_t shown = 10) {
  for (std::size_t i = 0; i < diag.warnings.size() && i < shown; ++i) {
    std::cerr << "warning: " << diag.warnings[i] << "\n";
  }
  if (diag.warnings.size() > shown) {
    std::cerr << "warning: ... " << diag.warnings.size() - shown << " more\n";
  }
}

void print_manifest(const fs::path& path, const corpus::Corpus& c) {
  std::printf("%s: %zu pairs (%s", path.string().c_str(), c.size(), c.manifest.direction.str().c_str());
  for (const auto& [src, n] : c.manifest.source_counts) std::printf(", %s %zu", src.c_str(), n);
  std::printf(") checksum %s\n", c.manifest.checksum.c_str());
}

// ---- corpus ----

struct IngestArgs {
  std::string format;
  std::vector<std::string> inputs;
  std::string out;
  std::string name;
  std::string wenlin_mode = "structural";
  bool keep_hashtags = false;
  bool all_translations = false;
  int short_threshold = 10;
};

int cmd_ingest(const IngestArgs& a) {
  corpus::CleaningRuleSet rules;
  rules.strip_hashtags = !a.keep_hashtags;
  rules.take_first_translation = !a.all_translations;
  rules.short_threshold = a.short_threshold;
  rules.validate();
  Diagnostics diag;
  std::vector<corpus::SentencePair> pairs;
  if (a.format == "wordshk") {
    for (const auto& in : a.inputs) {
      auto got = corpus::parse_wordshk(corpus::read_wordshk_csv(read_file(in), diag), rules, diag);
      pairs.insert(pairs.end(), got.begin(), got.end());
    }
  } else if (a.format == "wenlin") {
    const auto mode = a.wenlin_mode == "pattern" ? corpus::WenlinMode::kPattern : corpus::WenlinMode::kStructural;
    for (const auto& in : a.inputs) {
      auto got = corpus::parse_wenlin(read_file(in), rules, diag, mode);
      pairs.insert(pairs.end(), got.begin(), got.end());
    }
  } else {
    if (a.inputs.size() != 2) throw ValidationError("aligned input needs --in SRC --in TGT");
    for (auto& p : corpus::parse_aligned(fs::path(a.inputs[0]), fs::path(a.inputs[1]))) {
      if (auto cleaned = corpus::clean_pair(p, rules)) {
        pairs.push_back(std::move(*cleaned));
      } else {
        diag.warn("aligned pair empty after cleaning, skipped");
      }
    }
  }
  report_warnings(diag);
  const std::string name = a.name.empty() ? fs::path(a.out).stem().string() : a.name;
  const auto c = corpus::make_corpus(name, std::move(pairs));
  corpus::write_corpus(a.out, c);
  print_manifest(a.out, c);
  return 0;
}

struct SplitArgs {
  std::string in;
  std::string out_dir;
  std::size_t dev = 3000;
  std::size_t test = 3000;
  std::uint64_t seed = 0;
  std::string pool = "long";
  int threshold = 10;
};

int cmd_split(const SplitArgs& a) {
  const auto c = corpus::read_corpus(a.in);
  corpus::SplitOptions opts;
  opts.dev_n = a.dev;
  opts.test_n = a.test;
  opts.seed = a.seed;
  opts.pool = a.pool == "all" ? corpus::SplitPool::kAll : corpus::SplitPool::kLong;
  opts.short_threshold = a.threshold;
  const auto r = corpus::make_splits(c, opts);
  const fs::path dir = a.out_dir.empty() ? fs::path(a.in).parent_path() : fs::path(a.out_dir);
  fs::create_directories(dir);
  if (r.duplicates_dropped) std::fprintf(stderr, "dropped %zu duplicate pairs\n", r.duplicates_dropped);
  for (const corpus::Corpus* part : {&r.train, &r.dev, &r.test}) {
    const fs::path out = dir / (part->manifest.name + ".tsv");
    corpus::write_corpus(out, *part);
    print_manifest(out, *part);
  }
  return 0;
}

int cmd_merge(const std::vector<std::string>& inputs, const std::string& out, std::string name) {
  std::vector<corpus::Corpus> parts;
  for (const auto& in : inputs) parts.push_back(corpus::read_corpus(in));
  if (name.empty()) name = fs::path(out).stem().string();
  const auto merged = corpus::merge_corpora(parts, name);
  corpus::write_corpus(out, merged);
  print_manifest(out, merged);
  return 0;
}

// ---- monolingual / translation ----

struct MonoArgs {
  std::string format = "forum_csv";
  std::string lang = "yue";
  std::string in;
  std::string out;
  std::string name;
  std::string text_column = "text";
  std::string segmentation = "newline";
  int min_cjk = 10;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

int cmd_mono(const MonoArgs& a) {
  mono::PipelineOptions opts;
  opts.format = a.format == "plain" ? mono::MonoFormat::kPlain : mono::MonoFormat::kForumCsv;
  opts.lang = parse_lang(a.lang);
  opts.min_cjk = a.min_cjk;
  opts.seed = a.seed;
  opts.csv.text_column = a.text_column;
  opts.csv.segmentation = a.segmentation == "punctuation" ? mono::Segmentation::kPunctuation
                                                           : mono::Segmentation::kNewline;
  opts.name = a.name.empty() ? fs::path(a.out).stem().string() : a.name;
  opts.threads = a.threads;
  Diagnostics diag;
  const auto corpus = mono::run_pipeline(read_file(a.in), opts, diag);
  report_warnings(diag);
  mono::write_mono(a.out, corpus);
  std::printf("%s: %zu sentences", a.out.c_str(), corpus.manifest.count);
  for (const auto& [stage, n] : corpus.manifest.stage_counts) std::printf(", %s %zu", stage.c_str(), n);
  std::printf("\n");
  return 0;
}

int cmd_sample(const std::string& in, const std::string& out, std::size_t n, std::uint64_t seed,
               const std::string& lang) {
  const auto sample = backends::sample_mono(mono::read_mono(in, parse_lang(lang)), n, seed);
  mono::write_mono(out, sample);
  std::printf("%s: %zu of %s\n", out.c_str(), sample.manifest.count, in.c_str());
  return 0;
}

backends::BackendSpec pick_backend(const std::string& spec_file, const std::string& registry,
                                   const std::string& model) {
  if (!spec_file.empty()) {
    auto spec = backends::BackendSpec::from_json(nlohmann::json::parse(read_file(spec_file)));
    if (!spec.params.count("base_dir")) {
      spec.params["base_dir"] = fs::absolute(spec_file).parent_path().string();
    }
    return spec;
  }
  if (registry.empty() || model.empty()) throw ValidationError("give --backend FILE or --registry DIR --model ID");
  return backends::BackendRegistry::load_dir(registry).get(model);
}

int cmd_translate(const std::string& spec_file, const std::string& registry, const std::string& model,
                  const std::string& in, const std::string& out, std::size_t every) {
  const auto spec = pick_backend(spec_file, registry, model);
  auto translator = backends::load_backend(spec);
  backends::BatchJob job;
  job.inputs = read_lines(in);
  job.input_checksum = mono::mono_checksum(job.inputs) + ":" + spec.model_id;
  job.output = out;
  job.checkpoint_every = every;
  const auto total = job.inputs.size();
  backends::translate_batch(job, *translator, [total](std::size_t done) {
    std::fprintf(stderr, "\r%zu/%zu", done, total);
  });
  std::fprintf(stderr, "\n");
  std::printf("%s: %zu translations with %s\n", out.c_str(), total, spec.model_id.c_str());
  return 0;
}

int cmd_mix(const std::string& gold, const std::string& pool, const std::string& recipe,
            std::uint64_t seed, const std::string& out) {
  const auto mixed = augment::mix(corpus::read_corpus(gold), corpus::read_corpus(pool, corpus::Origin::kSynthetic),
                                  augment::MixRecipe::parse(recipe), seed);
  corpus::write_corpus(out, mixed);
  print_manifest(out, mixed);
  return 0;
}

// ---- back-translation ----

void print_state(const augment::IterationState& s) {
  std::printf("iteration %d, next role %s, current model %s%s\n", s.iteration,
              std::string(augment::to_string(s.role)).c_str(), s.current_model.model_id.c_str(),
              s.stopped ? " (stopped: best model used no synthetic data)" : "");
  for (const auto& [id, score] : s.dev_scores) std::printf("  %-40s %8.2f\n", id.c_str(), score);
}

int cmd_bt(const std::string& action, const std::string& plan_file, int iterations) {
  auto plan = augment::ExperimentPlan::load(plan_file);
  if (action == "expand") {
    for (const auto& d : augment::expand_switch_plan(plan.switch_pairs, plan.recipes, plan.pivot_model)) {
      std::printf("%s\tgenerator=%s\trecipe=%s\tepochs=%d\n", d.model_id.c_str(),
                  d.generator_model.empty() ? "-" : d.generator_model.c_str(), d.recipe.label.c_str(),
                  plan.epochs_for(d.family));
    }
    return 0;
  }
  if (action == "status") {
    const fs::path state = plan.run_dir / "state.json";
    if (!fs::exists(state)) {
      std::printf("no runs yet in %s\n", plan.run_dir.string().c_str());
      return 0;
    }
    print_state(augment::IterationState::from_json(nlohmann::json::parse(read_file(state))));
    return 0;
  }
  augment::Orchestrator orch(plan);
  if (action == "switch") {
    for (const auto& [id, score] : orch.run_switch()) std::printf("%-40s %8.2f\n", id.c_str(), score);
    return 0;
  }
  auto s = orch.initial_state();
  for (int i = 0; (iterations < 0 || i < iterations) && !s.stopped && s.iteration < plan.max_iterations; ++i) {
    s = orch.run_iteration(s);
    std::printf("round %d: best %s\n", s.iteration, s.best_models.back().c_str());
  }
  print_state(s);
  return 0;
}

// ---- evaluation ----

struct EvalArgs {
  std::vector<std::string> hyps;
  std::vector<std::string> systems;
  std::string ref;
  std::string src;
  std::string plugin;
  std::string out;
};

int cmd_eval(const EvalArgs& a) {
  if (!a.systems.empty() && a.systems.size() != a.hyps.size()) {
    throw ValidationError("--system must be given once per --hyp");
  }
  const auto refs = read_lines(a.ref);
  const auto srcs = a.src.empty() ? std::vector<std::string>{} : read_lines(a.src);
  std::vector<metrics::MetricReport> reports;
  for (std::size_t i = 0; i < a.hyps.size(); ++i) {
    const std::string id = a.systems.empty() ? fs::path(a.hyps[i]).stem().string() : a.systems[i];
    reports.push_back(metrics::evaluate(id, read_lines(a.hyps[i]), refs, srcs, a.plugin));
  }
  std::cout << metrics::format_table(reports);
  if (!a.out.empty()) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : reports) j.push_back(r.to_json());
    write_file_atomic(a.out, j.dump(2) + "\n");
  }
  return 0;
}

int cmd_degen(const std::string& in, int min_repeats) {
  const auto lines = read_lines(in);
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto d = metrics::detect_degeneration(lines[i], min_repeats);
    if (!d.flag) continue;
    ++flagged;
    std::printf("%zu\t\"%s\" x%zu\t%s\n", i + 1, d.unit.c_str(), d.run, lines[i].c_str());
  }
  std::printf("%zu of %zu lines degenerate\n", flagged, lines.size());
  return 0;
}

int cmd_hopes_sample(const std::string& test, const std::vector<std::string>& system_args,
                     const std::vector<std::string>& annotators, std::size_t n, std::uint64_t seed,
                     const std::string& out_dir) {
  const auto corpus = corpus::read_corpus(test);
  std::vector<hopes::SystemOutput> systems;
  for (const auto& arg : system_args) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos) throw ValidationError("--system expects ID=FILE, got '" + arg + "'");
    systems.push_back({arg.substr(0, eq), read_lines(arg.substr(eq + 1))});
  }
  const auto sampling = hopes::sample_for_annotation(corpus, systems, annotators, n, seed);
  hopes::write_sampling(out_dir, sampling);
  std::printf("%zu sentences x %zu systems -> %zu sheets in %s\n", sampling.plan.sentence_ids.size(),
              systems.size(), sampling.sheets.size(), out_dir.c_str());
  return 0;
}

int cmd_hopes_report(const std::string& dir, const std::string& out) {
  hopes::SamplingPlan plan;
  const auto records = hopes::read_annotations(dir, plan);
  hopes::check_complete(records, plan);
  const auto aggregates = hopes::aggregate(records, plan);
  const auto kappas = hopes::kappa_reports(records, plan);
  std::cout << hopes::format_report(kappas, aggregates);
  if (!out.empty()) {
    nlohmann::json j = {{"aggregates", nlohmann::json::array()}, {"kappa", nlohmann::json::array()}};
    for (const auto& a : aggregates) {
      j["aggregates"].push_back({{"system_id", a.system_id}, {"ratings", a.ratings},
                                 {"category_means", a.category_means}, {"total_mean", a.total_mean},
                                 {"sentence_total_mean", a.sentence_total_mean},
                                 {"no_error", a.no_error}, {"minor", a.minor}, {"major", a.major}});
    }
    for (const auto& k : kappas) {
      nlohmann::json cats = nlohmann::json::object();
      for (const auto& [c, v] : k.per_category) cats[c] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
      j["kappa"].push_back({{"system_id", k.system_id}, {"per_category", cats},
                            {"overall", k.overall ? nlohmann::json(*k.overall) : nlohmann::json(nullptr)}});
    }
    write_file_atomic(out, j.dump(2) + "\n");
  }
  return 0;
}

server::HttpServer* g_server = nullptr;

int cmd_serve(const std::string& registry, std::size_t capacity, const std::string& host, int port,
              const std::string& origin) {
  server::TranslateService service(fs::path(registry), capacity);
  server::ServerOptions opts;
  opts.host = host;
  opts.port = port;
  opts.cors_origin = origin;
  server::HttpServer http(service, opts);
  g_server = &http;
  std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
  std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
  std::fprintf(stderr, "serving %s on %s:%d (capacity %zu)\n", registry.c_str(), host.c_str(), port, capacity);
  http.run();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forge: Cantonese-English low-resource MT toolkit"};
  app.require_subcommand(1);
  int rc = 0;
  std::function<int()> action;

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Parse a bilingual source into a cleaned corpus");
  c_ingest->add_option("--format", ingest.format, "Source format")->required()
      ->check(CLI::IsMember({"wordshk", "wenlin", "aligned"}));
  c_ingest->add_option("--in", ingest.inputs, "Input file(s); aligned takes SRC then TGT")->required();
  c_ingest->add_option("--out", ingest.out, "Output TSV")->required();
  c_ingest->add_option("--name", ingest.name, "Corpus name (default: output stem)");
  c_ingest->add_option("--wenlin-mode", ingest.wenlin_mode)->check(CLI::IsMember({"structural", "pattern"}));
  c_ingest->add_flag("--keep-hashtags", ingest.keep_hashtags);
  c_ingest->add_flag("--all-translations", ingest.all_translations, "Keep every English alternative");
  c_ingest->add_option("--short-threshold", ingest.short_threshold);
  c_ingest->callback([&] { action = [&] { return cmd_ingest(ingest); }; });

  SplitArgs split;
  auto* c_split = app.add_subcommand("split", "Draw dev/test splits from a corpus");
  c_split->add_option("--in", split.in)->required();
  c_split->add_option("--out-dir", split.out_dir);
  c_split->add_option("--dev", split.dev);
  c_split->add_option("--test", split.test);
  c_split->add_option("--seed", split.seed);
  c_split->add_option("--pool", split.pool, "Draw dev/test from long pairs or all")->check(CLI::IsMember({"long", "all"}));
  c_split->add_option("--threshold", split.threshold, "Short/long threshold in code points");
  c_split->callback([&] { action = [&] { return cmd_split(split); }; });

  std::vector<std::string> merge_in;
  std::string merge_out, merge_name;
  auto* c_merge = app.add_subcommand("merge", "Concatenate training corpora without duplicates");
  c_merge->add_option("--in", merge_in)->required();
  c_merge->add_option("--out", merge_out)->required();
  c_merge->add_option("--name", merge_name);
  c_merge->callback([&] { action = [&] { return cmd_merge(merge_in, merge_out, merge_name); }; });

  MonoArgs mono_args;
  auto* c_mono = app.add_subcommand("mono", "Clean, filter and deduplicate monolingual text");
  c_mono->add_option("--format", mono_args.format)->check(CLI::IsMember({"forum_csv", "plain"}));
  c_mono->add_option("--lang", mono_args.lang)->check(CLI::IsMember({"yue", "en"}));
  c_mono->add_option("--in", mono_args.in)->required();
  c_mono->add_option("--out", mono_args.out)->required();
  c_mono->add_option("--name", mono_args.name);
  c_mono->add_option("--text-column", mono_args.text_column);
  c_mono->add_option("--segment", mono_args.segmentation)->check(CLI::IsMember({"newline", "punctuation"}));
  c_mono->add_option("--min-cjk", mono_args.min_cjk);
  c_mono->add_option("--seed", mono_args.seed);
  c_mono->add_option("--threads", mono_args.threads);
  c_mono->callback([&] { action = [&] { return cmd_mono(mono_args); }; });

  std::string sample_in, sample_out, sample_lang = "en";
  std::size_t sample_n = 0;
  std::uint64_t sample_seed = 0;
  auto* c_sample = app.add_subcommand("sample", "Sample a monolingual corpus without replacement");
  c_sample->add_option("--in", sample_in)->required();
  c_sample->add_option("--out", sample_out)->required();
  c_sample->add_option("--n", sample_n)->required();
  c_sample->add_option("--seed", sample_seed);
  c_sample->add_option("--lang", sample_lang, "Language when the input has no manifest");
  c_sample->callback([&] { action = [&] { return cmd_sample(sample_in, sample_out, sample_n, sample_seed, sample_lang); }; });

  std::string tr_spec, tr_registry, tr_model, tr_in, tr_out;
  std::size_t tr_every = backends::kDefaultCheckpointEvery;
  auto* c_tr = app.add_subcommand("translate", "Translate a file with checkpoint/resume");
  c_tr->add_option("--backend", tr_spec, "Backend spec JSON");
  c_tr->add_option("--registry", tr_registry, "Directory of backend specs");
  c_tr->add_option("--model", tr_model, "Model id within --registry");
  c_tr->add_option("--in", tr_in)->required();
  c_tr->add_option("--out", tr_out)->required();
  c_tr->add_option("--checkpoint-every", tr_every);
  c_tr->callback([&] { action = [&] { return cmd_translate(tr_spec, tr_registry, tr_model, tr_in, tr_out, tr_every); }; });

  std::string mix_gold, mix_pool, mix_recipe, mix_out;
  std::uint64_t mix_seed = 0;
  auto* c_mix = app.add_subcommand("mix", "Combine gold and synthetic pairs by recipe");
  c_mix->add_option("--gold", mix_gold)->required();
  c_mix->add_option("--pool", mix_pool, "Synthetic pool TSV")->required();
  c_mix->add_option("--recipe", mix_recipe, "1:k or h:h")->required();
  c_mix->add_option("--seed", mix_seed);
  c_mix->add_option("--out", mix_out)->required();
  c_mix->callback([&] { action = [&] { return cmd_mix(mix_gold, mix_pool, mix_recipe, mix_seed, mix_out); }; });

  std::string bt_plan;
  int bt_iterations = -1;
  auto* c_bt = app.add_subcommand("bt", "Iterative back-translation");
  c_bt->require_subcommand(1);
  for (const char* name : {"run", "status", "expand", "switch"}) {
    auto* sub = c_bt->add_subcommand(name);
    sub->add_option("--plan", bt_plan, "Experiment plan JSON")->required();
    if (std::string(name) == "run") sub->add_option("--iterations", bt_iterations, "Rounds to run now");
    sub->callback([&, name] { action = [&, name] { return cmd_bt(name, bt_plan, bt_iterations); }; });
  }
  c_bt->get_subcommand("run")->description("Run rounds until stopped or max_iterations");
  c_bt->get_subcommand("status")->description("Show the saved iteration state");
  c_bt->get_subcommand("expand")->description("List model-switch run descriptors");
  c_bt->get_subcommand("switch")->description("Train every model-switch descriptor");

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Score system outputs against references");
  c_eval->add_option("--hyp", eval.hyps)->required();
  c_eval->add_option("--system", eval.systems, "System id per --hyp");
  c_eval->add_option("--ref", eval.ref)->required();
  c_eval->add_option("--src", eval.src);
  c_eval->add_option("--plugin", eval.plugin, "External scorer command");
  c_eval->add_option("--out", eval.out, "Write reports as JSON");
  c_eval->callback([&] { action = [&] { return cmd_eval(eval); }; });

  std::string degen_in;
  int degen_min = 3;
  auto* c_degen = app.add_subcommand("degen", "Flag repetitive output lines");
  c_degen->add_option("--in", degen_in)->required();
  c_degen->add_option("--min-repeats", degen_min);
  c_degen->callback([&] { action = [&] { return cmd_degen(degen_in, degen_min); }; });

  std::string h_test, h_dir, h_out;
  std::vector<std::string> h_systems, h_annotators;
  std::size_t h_n = 200;
  std::uint64_t h_seed = 0;
  auto* c_hopes = app.add_subcommand("hopes", "Human evaluation sheets and reports");
  c_hopes->require_subcommand(1);
  auto* c_hs = c_hopes->add_subcommand("sample", "Write annotation sheets");
  c_hs->add_option("--test", h_test)->required();
  c_hs->add_option("--system", h_systems, "ID=FILE of outputs aligned with the test set")->required();
  c_hs->add_option("--annotator", h_annotators)->required();
  c_hs->add_option("--n", h_n);
  c_hs->add_option("--seed", h_seed);
  c_hs->add_option("--out-dir", h_dir)->required();
  c_hs->callback([&] { action = [&] { return cmd_hopes_sample(h_test, h_systems, h_annotators, h_n, h_seed, h_dir); }; });
  auto* c_hr = c_hopes->add_subcommand("report", "Aggregate filled sheets");
  c_hr->add_option("--dir", h_dir)->required();
  c_hr->add_option("--out", h_out, "Write the report as JSON");
  c_hr->callback([&] { action = [&] { return cmd_hopes_report(h_dir, h_out); }; });

  std::string s_registry, s_host = "127.0.0.1", s_origin = "*";
  std::size_t s_capacity = server::kDefaultCapacity;
  int s_port = 8080;
  auto* c_serve = app.add_subcommand("serve", "HTTP translation server");
  c_serve->add_option("--registry", s_registry, "Directory of backend specs or run manifests")->required();
  c_serve->add_option("--capacity", s_capacity, "Resident models");
  c_serve->add_option("--host", s_host);
  c_serve->add_option("--port", s_port);
  c_serve->add_option("--cors-origin", s_origin);
  c_serve->callback([&] { action = [&] { return cmd_serve(s_registry, s_capacity, s_host, s_port, s_origin); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    rc = action ? action() : 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "forge: error: %s\n", e.what());
    return 1;
  }
  return rc;
}
