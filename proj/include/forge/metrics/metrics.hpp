#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace forge::metrics {

// Tokenizer version recorded in every report.
inline constexpr std::string_view kTokenizerVersion = "forge-tok-1";

// Whitespace split, then every punctuation character and every CJK
// ideograph becomes a token of its own.
std::vector<std::string> tokenize_standard(std::string_view text);

enum class Smoothing { kNone, kExponential };

struct BleuStats {
  std::vector<std::size_t> correct;  // clipped matches per order
  std::vector<std::size_t> total;    // hypothesis n-grams per order
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
};

BleuStats bleu_stats(const std::vector<std::string>& hyps,
                     const std::vector<std::string>& refs, int max_n = 4);
double bleu_from_stats(const BleuStats& stats, Smoothing smoothing);

// Corpus BLEU on the 0-100 scale. Orders for which the hypothesis has no
// n-grams at all are left out of the geometric mean; a corpus with no
// matching unigram scores 0 whatever the smoothing.
double corpus_bleu(const std::vector<std::string>& hyps,
                   const std::vector<std::string>& refs, int max_n = 4,
                   Smoothing smoothing = Smoothing::kExponential);

struct HleporParams {
  double alpha = 9.0;  // recall weight
  double beta = 1.0;   // precision weight
  int max_n = 2;       // context window for the alignment
  double w_lp = 2.0;
  double w_pos = 1.0;
  double w_pr = 7.0;

  void validate() const;
};

struct HleporParts {
  double lp = 1.0;
  double npd = 0.0;
  double pos_penalty = 1.0;
  double precision = 0.0;
  double recall = 0.0;
  double hpr = 0.0;
  double score = 0.0;
  std::size_t matches = 0;
  // alignment[i] = 0-based reference position of hypothesis token i, or -1.
  std::vector<long> alignment;
};

HleporParts hlepor_parts(const std::vector<std::string>& hyp,
                         const std::vector<std::string>& ref,
                         const HleporParams& params = {});
double sentence_hlepor(std::string_view hyp, std::string_view ref,
                       const HleporParams& params = {});
double corpus_hlepor(const std::vector<std::string>& hyps,
                     const std::vector<std::string>& refs,
                     const HleporParams& params = {});

struct Degeneration {
  bool flag = false;
  std::size_t begin = 0;  // token range [begin, end)
  std::size_t end = 0;
  std::size_t run = 0;    // consecutive copies of `unit`
  std::string unit;       // tokens joined by single spaces
};

// Looks for a 1- to 3-token unit repeated back to back at least
// `min_repeats` times. The reported run covers the most tokens; ties go to
// the leftmost start, then the shorter unit.
Degeneration detect_degeneration(std::string_view text, int min_repeats = 3);

// Runs a scorer plugin: TSV `src<TAB>hyp<TAB>ref` lines on stdin; one real
// per line followed by `CORPUS<TAB>name<TAB>value` lines on stdout. An empty
// command returns an empty map. Protocol violations throw ProtocolError.
std::map<std::string, double> external_score(
    const std::string& plugin, const std::vector<std::string>& hyps,
    const std::vector<std::string>& refs, const std::vector<std::string>& srcs,
    std::chrono::milliseconds timeout = std::chrono::minutes(30));

struct MetricReport {
  std::string system_id;
  double sacrebleu = 0.0;
  double hlepor = 0.0;
  std::map<std::string, double> external_scores;
  std::size_t n_sentences = 0;
  std::string tokenizer = std::string(kTokenizerVersion);

  nlohmann::json to_json() const;
  static MetricReport from_json(const nlohmann::json& j);
};

MetricReport evaluate(std::string system_id, const std::vector<std::string>& hyps,
                      const std::vector<std::string>& refs,
                      const std::vector<std::string>& srcs = {},
                      const std::string& plugin = "");

// Aligned text table: System, SacreBLEU, hLEPOR, then BERTscore and COMET
// when any report has them, then other external scores by name.
std::string format_table(const std::vector<MetricReport>& reports);

}  // namespace forge::metrics
