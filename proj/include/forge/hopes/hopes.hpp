#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "forge/corpus/types.hpp"

namespace forge::hopes {

inline constexpr int kDefaultMaxScore = 10;

enum class Category { kMis, kTerm, kStyle, kGram };
inline constexpr std::array<Category, 4> kCategories = {Category::kMis, Category::kTerm,
                                                        Category::kStyle, Category::kGram};
std::string_view to_string(Category c);  // "MIS", "TERM", "STYLE", "GRAM"

struct HopesRecord {
  std::size_t sentence_id = 0;
  std::string system_id;
  std::string annotator_id;
  int mis = 0;
  int term = 0;
  int style = 0;
  int gram = 0;

  int score(Category c) const;
  int total() const { return mis + term + style + gram; }
  // Throws ValidationError unless every category is within [0, max_score].
  void validate(int max_score = kDefaultMaxScore) const;
};

enum class ErrorClass { kNoError, kMinor, kMajor };
std::string_view to_string(ErrorClass c);

// 0 -> NoError, 1..15 -> Minor, above 15 -> Major.
ErrorClass classify_error(int total);

struct SheetRow {
  std::size_t sentence_id = 0;
  std::string src;
  std::string hyp;
};

// The rows one annotator scores for one system.
struct AnnotationSheet {
  std::string system_id;
  std::string annotator_id;
  std::vector<SheetRow> rows;
  bool completed = false;
};

struct SystemOutput {
  std::string system_id;
  std::vector<std::string> hyps;  // aligned with the test corpus
};

// Who rates what. Unit u enumerates (sentence, system) with systems varying
// fastest; it goes to annotators 2u mod k and (2u+1) mod k, so loads differ
// by at most one unit's worth across the pool.
struct SamplingPlan {
  std::vector<std::size_t> sentence_ids;  // indices into the test corpus
  std::vector<std::string> systems;
  std::vector<std::string> annotators;
  std::uint64_t seed = 0;
  std::string test_checksum;
  int max_score = kDefaultMaxScore;

  std::size_t units() const { return sentence_ids.size() * systems.size(); }
  // The two annotator indices for (sentence position, system position).
  std::array<std::size_t, 2> raters(std::size_t sentence_pos, std::size_t system_pos) const;

  nlohmann::json to_json() const;
  static SamplingPlan from_json(const nlohmann::json& j);
};

struct Sampling {
  SamplingPlan plan;
  std::vector<AnnotationSheet> sheets;
};

// Draws n test sentences (the same ones for every system) and builds one
// sheet per (system, annotator) that has work.
Sampling sample_for_annotation(const corpus::Corpus& test,
                               const std::vector<SystemOutput>& systems,
                               const std::vector<std::string>& annotators,
                               std::size_t n = 200, std::uint64_t seed = 0,
                               int max_score = kDefaultMaxScore);

// `<system>__<annotator>.csv` inside `dir`.
std::filesystem::path sheet_path(const std::filesystem::path& dir, std::string_view system_id,
                                 std::string_view annotator_id);

// CSV `sentence_id,src,hyp,mis,term,style,gram`; score cells are empty
// until filled in.
std::string format_sheet(const AnnotationSheet& sheet);
void write_sampling(const std::filesystem::path& dir, const Sampling& sampling);

// Parses a filled sheet. Throws ValidationError on blank or out-of-range
// scores, naming the line.
std::vector<HopesRecord> read_sheet(std::string_view csv, const std::string& system_id,
                                    const std::string& annotator_id,
                                    int max_score = kDefaultMaxScore);

// Reads `plan.json` and every sheet the plan expects from `dir`.
std::vector<HopesRecord> read_annotations(const std::filesystem::path& dir,
                                          SamplingPlan& plan_out);

struct SystemAggregate {
  std::string system_id;
  std::size_t ratings = 0;
  std::map<std::string, double> category_means;  // over all ratings
  double total_mean = 0.0;                       // over all ratings
  double sentence_total_mean = 0.0;              // per-sentence average first
  std::size_t no_error = 0;
  std::size_t minor = 0;
  std::size_t major = 0;
};

// Throws ValidationError listing missing or unexpected ratings.
void check_complete(const std::vector<HopesRecord>& records, const SamplingPlan& plan);

std::vector<SystemAggregate> aggregate(const std::vector<HopesRecord>& records,
                                       const SamplingPlan& plan);

// Quadratic-weighted Cohen's kappa over integer ratings in [min, max].
// nullopt when the chance disagreement is zero (agreement undefined).
std::optional<double> weighted_kappa(const std::vector<int>& a, const std::vector<int>& b,
                                     int min, int max);

struct KappaReport {
  std::string system_id;  // "all" for the pooled report
  std::map<std::string, std::optional<double>> per_category;
  std::optional<double> overall;  // on totals, range [0, 4 * max_score]
};

// Per system plus a pooled "all" entry. Rater A is each unit's first slot.
std::vector<KappaReport> kappa_reports(const std::vector<HopesRecord>& records,
                                       const SamplingPlan& plan);

// Text tables: agreement, average scores, error counts.
std::string format_report(const std::vector<KappaReport>& kappas,
                          const std::vector<SystemAggregate>& aggregates);

}  // namespace forge::hopes
