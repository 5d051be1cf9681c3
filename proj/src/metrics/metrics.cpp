#include "forge/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>
#include <unordered_map>

#include "forge/common/error.hpp"
#include "forge/common/subprocess.hpp"
#include "forge/common/text.hpp"
#include "forge/common/utf8.hpp"

namespace forge::metrics {

std::vector<std::string> tokenize_standard(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (const auto& u : utf8::units(text)) {
    if (utf8::is_space(u.cp)) {
      flush();
    } else if (utf8::is_punctuation(u.cp) || utf8::is_cjk_ideograph(u.cp)) {
      flush();
      tokens.emplace_back(text.substr(u.offset, u.size));
    } else {
      current.append(text.substr(u.offset, u.size));
    }
  }
  flush();
  return tokens;
}

namespace {

void check_lengths(std::size_t hyps, std::size_t refs) {
  if (hyps != refs) {
    throw ValidationError("hypotheses and references differ in length: " +
                          std::to_string(hyps) + " vs " + std::to_string(refs));
  }
  if (hyps == 0) throw ValidationError("cannot score an empty corpus");
}

using NgramCounts = std::unordered_map<std::string, std::size_t>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, int n) {
  NgramCounts counts;
  const auto un = static_cast<std::size_t>(n);
  for (std::size_t s = 0; s + un <= tokens.size(); ++s) {
    std::string key = tokens[s];
    for (std::size_t k = 1; k < un; ++k) {
      key += '\x1f';
      key += tokens[s + k];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

BleuStats bleu_stats(const std::vector<std::string>& hyps,
                     const std::vector<std::string>& refs, int max_n) {
  check_lengths(hyps.size(), refs.size());
  if (max_n < 1) throw ValidationError("BLEU max_n must be >= 1");
  BleuStats st;
  st.correct.assign(static_cast<std::size_t>(max_n), 0);
  st.total.assign(static_cast<std::size_t>(max_n), 0);
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const auto h = tokenize_standard(hyps[i]);
    const auto r = tokenize_standard(refs[i]);
    st.hyp_len += h.size();
    st.ref_len += r.size();
    for (int n = 1; n <= max_n; ++n) {
      const auto hc = count_ngrams(h, n);
      const auto rc = count_ngrams(r, n);
      auto& correct = st.correct[static_cast<std::size_t>(n - 1)];
      for (const auto& [gram, count] : hc) {
        const auto it = rc.find(gram);
        if (it != rc.end()) correct += std::min(count, it->second);
      }
      if (h.size() >= static_cast<std::size_t>(n)) {
        st.total[static_cast<std::size_t>(n - 1)] += h.size() - static_cast<std::size_t>(n) + 1;
      }
    }
  }
  return st;
}

double bleu_from_stats(const BleuStats& st, Smoothing smoothing) {
  if (st.hyp_len == 0) return st.ref_len == 0 ? 100.0 : 0.0;
  if (st.correct.empty() || st.correct[0] == 0) return 0.0;
  double product = 1.0;
  double smooth = 1.0;
  int order = 0;
  for (std::size_t n = 0; n < st.total.size(); ++n) {
    if (st.total[n] == 0) break;
    ++order;
    if (st.correct[n] == 0) {
      if (smoothing == Smoothing::kNone) return 0.0;
      smooth *= 2.0;
      product *= 1.0 / (smooth * static_cast<double>(st.total[n]));
    } else {
      product *= static_cast<double>(st.correct[n]) / static_cast<double>(st.total[n]);
    }
  }
  const double c = static_cast<double>(st.hyp_len);
  const double r = static_cast<double>(st.ref_len);
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return 100.0 * bp * std::pow(product, 1.0 / order);
}

double corpus_bleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs,
                   int max_n, Smoothing smoothing) {
  return bleu_from_stats(bleu_stats(hyps, refs, max_n), smoothing);
}

void HleporParams::validate() const {
  if (!(alpha > 0 && beta > 0 && w_lp > 0 && w_pos > 0 && w_pr > 0) || max_n < 1) {
    throw ValidationError("hLEPOR weights must be > 0 and max_n >= 1");
  }
}

HleporParts hlepor_parts(const std::vector<std::string>& hyp,
                         const std::vector<std::string>& ref, const HleporParams& params) {
  params.validate();
  HleporParts p;
  const std::size_t c = hyp.size();
  const std::size_t r = ref.size();
  p.alignment.assign(c, -1);
  if (c == 0 || r == 0) {
    const bool both = c == 0 && r == 0;
    p.score = both ? 1.0 : 0.0;
    p.precision = p.recall = p.hpr = p.score;
    if (!both) p.lp = 0.0;
    return p;
  }
  const double dc = static_cast<double>(c);
  const double dr = static_cast<double>(r);
  p.lp = c < r ? std::exp(1.0 - dr / dc) : c > r ? std::exp(1.0 - dc / dr) : 1.0;

  const long w = params.max_n - 1;
  auto neighbour = [&](long a, long b) {
    const bool a_in = a >= 0 && a < static_cast<long>(c);
    const bool b_in = b >= 0 && b < static_cast<long>(r);
    if (!a_in && !b_in) return true;
    return a_in && b_in && hyp[static_cast<std::size_t>(a)] == ref[static_cast<std::size_t>(b)];
  };
  auto context = [&](long i, long j) {
    bool left = true;
    bool right = true;
    for (long k = 1; k <= w; ++k) {
      left = left && neighbour(i - k, j - k);
      right = right && neighbour(i + k, j + k);
    }
    return left || right;
  };

  std::vector<bool> used(r, false);
  double npd_sum = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    long best = -1;
    bool best_ctx = false;
    std::size_t best_dist = 0;
    for (std::size_t j = 0; j < r; ++j) {
      if (used[j] || ref[j] != hyp[i]) continue;
      const bool ctx = context(static_cast<long>(i), static_cast<long>(j));
      // |(i+1)/c - (j+1)/r| scaled by c*r, compared exactly.
      const std::size_t a = (i + 1) * r;
      const std::size_t b = (j + 1) * c;
      const std::size_t dist = a > b ? a - b : b - a;
      if (best < 0 || (ctx && !best_ctx) || (ctx == best_ctx && dist < best_dist)) {
        best = static_cast<long>(j);
        best_ctx = ctx;
        best_dist = dist;
      }
    }
    if (best < 0) continue;
    used[static_cast<std::size_t>(best)] = true;
    p.alignment[i] = best;
    ++p.matches;
    npd_sum += std::fabs(static_cast<double>(i + 1) / dc - static_cast<double>(best + 1) / dr);
  }
  p.npd = npd_sum / dc;
  p.pos_penalty = std::exp(-p.npd);
  if (p.matches == 0) {
    p.score = 0.0;
    return p;
  }
  const double m = static_cast<double>(p.matches);
  p.precision = m / dc;
  p.recall = m / dr;
  p.hpr = (params.alpha + params.beta) * p.precision * p.recall /
          (params.alpha * p.precision + params.beta * p.recall);
  p.score = (params.w_lp + params.w_pos + params.w_pr) /
            (params.w_lp / p.lp + params.w_pos / p.pos_penalty + params.w_pr / p.hpr);
  return p;
}

double sentence_hlepor(std::string_view hyp, std::string_view ref, const HleporParams& params) {
  return hlepor_parts(tokenize_standard(hyp), tokenize_standard(ref), params).score;
}

double corpus_hlepor(const std::vector<std::string>& hyps, const std::vector<std::string>& refs,
                     const HleporParams& params) {
  check_lengths(hyps.size(), refs.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < hyps.size(); ++i) sum += sentence_hlepor(hyps[i], refs[i], params);
  return sum / static_cast<double>(hyps.size());
}

Degeneration detect_degeneration(std::string_view text, int min_repeats) {
  if (min_repeats < 2) {
    throw ValidationError("min_repeats must be >= 2, got " + std::to_string(min_repeats));
  }
  const auto tokens = tokenize_standard(text);
  const std::size_t t = tokens.size();
  auto same = [&](std::size_t a, std::size_t b, std::size_t n) {
    return std::equal(tokens.begin() + static_cast<std::ptrdiff_t>(a),
                      tokens.begin() + static_cast<std::ptrdiff_t>(a + n),
                      tokens.begin() + static_cast<std::ptrdiff_t>(b));
  };
  Degeneration best;
  std::size_t best_n = 0;
  for (std::size_t n = 1; n <= 3; ++n) {
    for (std::size_t s = 0; s + n <= t; ++s) {
      // A run that continues one from s - n is never the leftmost longest.
      if (s >= n && same(s - n, s, n)) continue;
      std::size_t run = 1;
      while (s + (run + 1) * n <= t && same(s, s + run * n, n)) ++run;
      if (run < static_cast<std::size_t>(min_repeats)) continue;
      const std::size_t span = run * n;
      const std::size_t best_span = best.end - best.begin;
      const bool better = !best.flag || span > best_span ||
                          (span == best_span && (s < best.begin || (s == best.begin && n < best_n)));
      if (!better) continue;
      best.flag = true;
      best.begin = s;
      best.end = s + span;
      best.run = run;
      best_n = n;
    }
  }
  if (best.flag) {
    for (std::size_t k = 0; k < best_n; ++k) {
      if (k) best.unit += ' ';
      best.unit += tokens[best.begin + k];
    }
  }
  return best;
}

namespace {

std::string tsv_field(std::string_view s) {
  std::string out = single_line(s);
  std::replace(out.begin(), out.end(), '\t', ' ');
  return out;
}

bool parse_real(std::string_view s, double& value) {
  const std::string tmp(trim(s));
  if (tmp.empty()) return false;
  char* end = nullptr;
  value = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size();
}

}  // namespace

std::map<std::string, double> external_score(const std::string& plugin,
                                             const std::vector<std::string>& hyps,
                                             const std::vector<std::string>& refs,
                                             const std::vector<std::string>& srcs,
                                             std::chrono::milliseconds timeout) {
  if (plugin.empty()) return {};
  check_lengths(hyps.size(), refs.size());
  if (!srcs.empty() && srcs.size() != hyps.size()) {
    throw ValidationError("sources differ in length from hypotheses: " +
                          std::to_string(srcs.size()) + " vs " + std::to_string(hyps.size()));
  }
  std::string input;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    input += tsv_field(srcs.empty() ? std::string_view{} : std::string_view(srcs[i]));
    input += '\t';
    input += tsv_field(hyps[i]);
    input += '\t';
    input += tsv_field(refs[i]);
    input += '\n';
  }
  const auto result = run_command(plugin, input, timeout);
  if (result.exit_code != 0) {
    throw ProtocolError("scorer plugin exited with status " + std::to_string(result.exit_code));
  }
  auto lines = split_lines(result.out);
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  std::size_t sentence_scores = 0;
  std::size_t k = 0;
  double v = 0.0;
  for (; k < lines.size() && !starts_with(lines[k], "CORPUS\t"); ++k) {
    if (!parse_real(lines[k], v)) {
      throw ProtocolError("scorer plugin line " + std::to_string(k + 1) + " is not a number: '" +
                          lines[k] + "'");
    }
    ++sentence_scores;
  }
  if (sentence_scores != hyps.size()) {
    throw ProtocolError("scorer plugin emitted " + std::to_string(sentence_scores) +
                        " sentence scores for " + std::to_string(hyps.size()) + " inputs");
  }
  std::map<std::string, double> scores;
  for (; k < lines.size(); ++k) {
    const auto fields = split(lines[k], '\t');
    if (fields.size() != 3 || fields[0] != "CORPUS" || fields[1].empty() ||
        !parse_real(fields[2], v)) {
      throw ProtocolError("scorer plugin line " + std::to_string(k + 1) +
                          " is not 'CORPUS<TAB>name<TAB>value': '" + lines[k] + "'");
    }
    scores[fields[1]] = v;
  }
  if (scores.empty()) throw ProtocolError("scorer plugin reported no CORPUS line");
  return scores;
}

nlohmann::json MetricReport::to_json() const {
  return {{"system_id", system_id},
          {"sacrebleu", sacrebleu},
          {"hlepor", hlepor},
          {"external_scores", external_scores},
          {"n_sentences", n_sentences},
          {"tokenizer", tokenizer}};
}

MetricReport MetricReport::from_json(const nlohmann::json& j) {
  try {
    MetricReport r;
    r.system_id = j.at("system_id").get<std::string>();
    r.sacrebleu = j.at("sacrebleu").get<double>();
    r.hlepor = j.at("hlepor").get<double>();
    r.external_scores = j.value("external_scores", std::map<std::string, double>{});
    r.n_sentences = j.at("n_sentences").get<std::size_t>();
    r.tokenizer = j.value("tokenizer", std::string(kTokenizerVersion));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad metric report: ") + e.what());
  }
}

MetricReport evaluate(std::string system_id, const std::vector<std::string>& hyps,
                      const std::vector<std::string>& refs, const std::vector<std::string>& srcs,
                      const std::string& plugin) {
  MetricReport r;
  r.system_id = std::move(system_id);
  r.sacrebleu = corpus_bleu(hyps, refs);
  r.hlepor = corpus_hlepor(hyps, refs);
  r.external_scores = external_score(plugin, hyps, refs, srcs);
  r.n_sentences = hyps.size();
  return r;
}

std::string format_table(const std::vector<MetricReport>& reports) {
  std::vector<std::string> extra;
  std::set<std::string> others;
  for (const char* known : {"bertscore", "comet"}) {
    for (const auto& r : reports) {
      if (r.external_scores.count(known)) {
        extra.emplace_back(known);
        break;
      }
    }
  }
  for (const auto& r : reports) {
    for (const auto& [name, _] : r.external_scores) {
      if (name != "bertscore" && name != "comet") others.insert(name);
    }
  }
  extra.insert(extra.end(), others.begin(), others.end());

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header = {"System", "SacreBLEU", "hLEPOR"};
  for (const auto& e : extra) {
    header.push_back(e == "bertscore" ? "BERTscore" : e == "comet" ? "COMET" : e);
  }
  rows.push_back(header);
  char buf[64];
  for (const auto& r : reports) {
    std::vector<std::string> row = {r.system_id};
    std::snprintf(buf, sizeof buf, "%.2f", r.sacrebleu);
    row.emplace_back(buf);
    std::snprintf(buf, sizeof buf, "%.4f", r.hlepor);
    row.emplace_back(buf);
    for (const auto& e : extra) {
      const auto it = r.external_scores.find(e);
      if (it == r.external_scores.end()) {
        row.emplace_back("-");
      } else {
        std::snprintf(buf, sizeof buf, "%.4f", it->second);
        row.emplace_back(buf);
      }
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) width[k] = std::max(width[k], utf8::length(row[k]));
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      const std::size_t pad = width[k] - utf8::length(row[k]);
      if (k == 0) {
        out << row[k] << std::string(pad, ' ');
      } else {
        out << "  " << std::string(pad, ' ') << row[k];
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace forge::metrics
