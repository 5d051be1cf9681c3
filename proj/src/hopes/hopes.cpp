#include "forge/hopes/hopes.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <tuple>

#include "forge/common/csv.hpp"
#include "forge/common/error.hpp"
#include "forge/common/rng.hpp"
#include "forge/common/text.hpp"

namespace forge::hopes {

std::string_view to_string(Category c) {
  switch (c) {
    case Category::kMis: return "MIS";
    case Category::kTerm: return "TERM";
    case Category::kStyle: return "STYLE";
    case Category::kGram: return "GRAM";
  }
  return "?";
}

int HopesRecord::score(Category c) const {
  switch (c) {
    case Category::kMis: return mis;
    case Category::kTerm: return term;
    case Category::kStyle: return style;
    case Category::kGram: return gram;
  }
  return 0;
}

void HopesRecord::validate(int max_score) const {
  for (Category c : kCategories) {
    const int v = score(c);
    if (v < 0 || v > max_score) {
      throw ValidationError(std::string(to_string(c)) + " score " + std::to_string(v) +
                            " for sentence " + std::to_string(sentence_id) + " (" + system_id +
                            ", " + annotator_id + ") is outside [0, " +
                            std::to_string(max_score) + "]");
    }
  }
}

std::string_view to_string(ErrorClass c) {
  switch (c) {
    case ErrorClass::kNoError: return "NoError";
    case ErrorClass::kMinor: return "Minor";
    case ErrorClass::kMajor: return "Major";
  }
  return "?";
}

ErrorClass classify_error(int total) {
  if (total < 0) throw ValidationError("negative HOPES total " + std::to_string(total));
  if (total == 0) return ErrorClass::kNoError;
  return total > 15 ? ErrorClass::kMajor : ErrorClass::kMinor;
}

std::array<std::size_t, 2> SamplingPlan::raters(std::size_t sentence_pos,
                                                std::size_t system_pos) const {
  const std::size_t u = sentence_pos * systems.size() + system_pos;
  const std::size_t k = annotators.size();
  return {(2 * u) % k, (2 * u + 1) % k};
}

nlohmann::json SamplingPlan::to_json() const {
  return {{"sentence_ids", sentence_ids}, {"systems", systems},   {"annotators", annotators},
          {"seed", seed},                 {"test_checksum", test_checksum},
          {"max_score", max_score},       {"assignment", "round-robin-pairs"}};
}

SamplingPlan SamplingPlan::from_json(const nlohmann::json& j) {
  try {
    SamplingPlan p;
    p.sentence_ids = j.at("sentence_ids").get<std::vector<std::size_t>>();
    p.systems = j.at("systems").get<std::vector<std::string>>();
    p.annotators = j.at("annotators").get<std::vector<std::string>>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.test_checksum = j.value("test_checksum", "");
    p.max_score = j.value("max_score", kDefaultMaxScore);
    if (p.annotators.size() < 2) throw ValidationError("plan lists fewer than 2 annotators");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad sampling plan: ") + e.what());
  }
}

Sampling sample_for_annotation(const corpus::Corpus& test, const std::vector<SystemOutput>& systems,
                               const std::vector<std::string>& annotators, std::size_t n,
                               std::uint64_t seed, int max_score) {
  if (annotators.size() < 2) {
    throw ValidationError("HOPES needs at least 2 annotators, got " +
                          std::to_string(annotators.size()));
  }
  if (std::set<std::string>(annotators.begin(), annotators.end()).size() != annotators.size()) {
    throw ValidationError("annotator ids must be distinct");
  }
  if (systems.empty()) throw ValidationError("no systems to sample");
  if (n > test.size()) {
    throw ValidationError("cannot sample " + std::to_string(n) + " sentences from a test set of " +
                          std::to_string(test.size()));
  }
  if (max_score < 1) throw ValidationError("max_score must be >= 1");
  for (const auto& s : systems) {
    if (s.hyps.size() != test.size()) {
      throw ValidationError("system '" + s.system_id + "' has " + std::to_string(s.hyps.size()) +
                            " outputs for a test set of " + std::to_string(test.size()));
    }
  }
  Sampling out;
  auto& plan = out.plan;
  plan.sentence_ids = sample_indices(test.size(), n, seed);
  std::sort(plan.sentence_ids.begin(), plan.sentence_ids.end());
  for (const auto& s : systems) plan.systems.push_back(s.system_id);
  plan.annotators = annotators;
  plan.seed = seed;
  plan.test_checksum = test.manifest.checksum;
  plan.max_score = max_score;

  for (std::size_t s = 0; s < systems.size(); ++s) {
    std::vector<AnnotationSheet> per_annotator(annotators.size());
    for (std::size_t i = 0; i < plan.sentence_ids.size(); ++i) {
      const std::size_t sid = plan.sentence_ids[i];
      for (std::size_t a : plan.raters(i, s)) {
        per_annotator[a].rows.push_back({sid, test.pairs[sid].src, systems[s].hyps[sid]});
      }
    }
    for (std::size_t a = 0; a < annotators.size(); ++a) {
      if (per_annotator[a].rows.empty()) continue;
      per_annotator[a].system_id = systems[s].system_id;
      per_annotator[a].annotator_id = annotators[a];
      out.sheets.push_back(std::move(per_annotator[a]));
    }
  }
  return out;
}

std::filesystem::path sheet_path(const std::filesystem::path& dir, std::string_view system_id,
                                 std::string_view annotator_id) {
  return dir / (std::string(system_id) + "__" + std::string(annotator_id) + ".csv");
}

namespace {

const csv::Row kHeader = {"sentence_id", "src", "hyp", "mis", "term", "style", "gram"};

bool parse_int(std::string_view s, long long& out) {
  s = trim(s);
  if (s.empty()) return false;
  std::size_t k = 0;
  bool neg = false;
  if (s[0] == '-' || s[0] == '+') {
    neg = s[0] == '-';
    k = 1;
  }
  if (k == s.size()) return false;
  long long v = 0;
  for (; k < s.size(); ++k) {
    if (s[k] < '0' || s[k] > '9') return false;
    v = v * 10 + (s[k] - '0');
    if (v > 1'000'000'000'000LL) return false;
  }
  out = neg ? -v : v;
  return true;
}

}  // namespace

std::string format_sheet(const AnnotationSheet& sheet) {
  std::string out = csv::format_row(kHeader) + "\n";
  for (const auto& row : sheet.rows) {
    out += csv::format_row({std::to_string(row.sentence_id), row.src, row.hyp, "", "", "", ""});
    out += "\n";
  }
  return out;
}

void write_sampling(const std::filesystem::path& dir, const Sampling& sampling) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "plan.json", sampling.plan.to_json().dump(2) + "\n");
  for (const auto& sheet : sampling.sheets) {
    write_file_atomic(sheet_path(dir, sheet.system_id, sheet.annotator_id), format_sheet(sheet));
  }
}

std::vector<HopesRecord> read_sheet(std::string_view content, const std::string& system_id,
                                    const std::string& annotator_id, int max_score) {
  if (starts_with(content, "\xEF\xBB\xBF")) content.remove_prefix(3);
  csv::Reader reader(content);
  const auto header = reader.next();
  if (!header) throw SchemaError("annotation sheet is empty");
  csv::Row normalized;
  for (const auto& h : *header) normalized.emplace_back(trim(h));
  if (normalized != kHeader) {
    throw SchemaError("annotation sheet header must be sentence_id,src,hyp,mis,term,style,gram");
  }
  std::vector<HopesRecord> out;
  while (auto row = reader.next()) {
    const std::string where = system_id + "/" + annotator_id + " line " + std::to_string(reader.line());
    if (row->size() == 1 && trim((*row)[0]).empty()) continue;
    if (reader.malformed() || row->size() != kHeader.size()) {
      throw ValidationError(where + ": expected 7 fields, got " + std::to_string(row->size()));
    }
    long long sid = 0;
    if (!parse_int((*row)[0], sid) || sid < 0) {
      throw ValidationError(where + ": bad sentence_id '" + (*row)[0] + "'");
    }
    HopesRecord rec;
    rec.sentence_id = static_cast<std::size_t>(sid);
    rec.system_id = system_id;
    rec.annotator_id = annotator_id;
    int* slots[] = {&rec.mis, &rec.term, &rec.style, &rec.gram};
    for (std::size_t k = 0; k < 4; ++k) {
      long long v = 0;
      const std::string& cell = (*row)[3 + k];
      if (trim(cell).empty()) {
        throw ValidationError(where + ": missing " + std::string(to_string(kCategories[k])) +
                              " score");
      }
      if (!parse_int(cell, v) || v < 0 || v > max_score) {
        throw ValidationError(where + ": " + std::string(to_string(kCategories[k])) + " score '" +
                              cell + "' is not an integer in [0, " + std::to_string(max_score) +
                              "]");
      }
      *slots[k] = static_cast<int>(v);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<HopesRecord> read_annotations(const std::filesystem::path& dir,
                                          SamplingPlan& plan_out) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(dir / "plan.json"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError((dir / "plan.json").string() + ": " + e.what());
  }
  plan_out = SamplingPlan::from_json(j);
  std::set<std::pair<std::size_t, std::size_t>> expected;  // (system, annotator)
  for (std::size_t s = 0; s < plan_out.systems.size(); ++s) {
    for (std::size_t i = 0; i < plan_out.sentence_ids.size(); ++i) {
      for (std::size_t a : plan_out.raters(i, s)) expected.insert({s, a});
    }
  }
  std::vector<HopesRecord> records;
  for (const auto& [s, a] : expected) {
    const auto path = sheet_path(dir, plan_out.systems[s], plan_out.annotators[a]);
    auto recs = read_sheet(read_file(path), plan_out.systems[s], plan_out.annotators[a],
                           plan_out.max_score);
    records.insert(records.end(), std::make_move_iterator(recs.begin()),
                   std::make_move_iterator(recs.end()));
  }
  return records;
}

void check_complete(const std::vector<HopesRecord>& records, const SamplingPlan& plan) {
  using Key = std::tuple<std::size_t, std::string, std::string>;
  std::set<Key> expected;
  for (std::size_t s = 0; s < plan.systems.size(); ++s) {
    for (std::size_t i = 0; i < plan.sentence_ids.size(); ++i) {
      for (std::size_t a : plan.raters(i, s)) {
        expected.insert({plan.sentence_ids[i], plan.systems[s], plan.annotators[a]});
      }
    }
  }
  std::set<Key> seen;
  std::vector<std::string> problems;
  auto describe = [](const Key& k) {
    return "sentence " + std::to_string(std::get<0>(k)) + " / " + std::get<1>(k) + " / " +
           std::get<2>(k);
  };
  for (const auto& r : records) {
    r.validate(plan.max_score);
    const Key k{r.sentence_id, r.system_id, r.annotator_id};
    if (!expected.count(k)) {
      problems.push_back("unexpected rating " + describe(k));
    } else if (!seen.insert(k).second) {
      problems.push_back("duplicate rating " + describe(k));
    }
  }
  std::size_t missing = 0;
  for (const auto& k : expected) {
    if (seen.count(k)) continue;
    if (++missing <= 10) problems.push_back("missing rating " + describe(k));
  }
  if (problems.empty()) return;
  std::string msg = "annotations incomplete (" + std::to_string(missing) + " missing):";
  for (const auto& p : problems) msg += "\n  " + p;
  if (missing > 10) msg += "\n  ... and " + std::to_string(missing - 10) + " more missing";
  throw ValidationError(msg);
}

std::vector<SystemAggregate> aggregate(const std::vector<HopesRecord>& records,
                                       const SamplingPlan& plan) {
  check_complete(records, plan);
  std::vector<SystemAggregate> out;
  for (const auto& system : plan.systems) {
    SystemAggregate agg;
    agg.system_id = system;
    std::map<std::string, double> sums;
    double total_sum = 0.0;
    std::map<std::size_t, std::pair<double, std::size_t>> per_sentence;
    for (const auto& r : records) {
      if (r.system_id != system) continue;
      ++agg.ratings;
      for (Category c : kCategories) sums[std::string(to_string(c))] += r.score(c);
      total_sum += r.total();
      auto& ps = per_sentence[r.sentence_id];
      ps.first += r.total();
      ++ps.second;
      switch (classify_error(r.total())) {
        case ErrorClass::kNoError: ++agg.no_error; break;
        case ErrorClass::kMinor: ++agg.minor; break;
        case ErrorClass::kMajor: ++agg.major; break;
      }
    }
    if (agg.ratings > 0) {
      const double n = static_cast<double>(agg.ratings);
      for (Category c : kCategories) {
        const std::string key(to_string(c));
        agg.category_means[key] = sums[key] / n;
      }
      agg.total_mean = total_sum / n;
      double acc = 0.0;
      for (const auto& [_, ps] : per_sentence) acc += ps.first / static_cast<double>(ps.second);
      agg.sentence_total_mean = acc / static_cast<double>(per_sentence.size());
    }
    out.push_back(std::move(agg));
  }
  return out;
}

std::optional<double> weighted_kappa(const std::vector<int>& a, const std::vector<int>& b,
                                     int min, int max) {
  if (a.size() != b.size()) {
    throw ValidationError("rating vectors differ in length: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  }
  if (a.empty()) throw ValidationError("weighted_kappa needs at least one rating pair");
  if (min > max) throw ValidationError("weighted_kappa: min > max");
  const std::size_t k = static_cast<std::size_t>(max - min) + 1;
  std::vector<long long> row(k, 0);
  std::vector<long long> col(k, 0);
  long long observed = 0;  // sum of squared differences over items
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (int v : {a[i], b[i]}) {
      if (v < min || v > max) {
        throw ValidationError("rating " + std::to_string(v) + " outside [" + std::to_string(min) +
                              ", " + std::to_string(max) + "]");
      }
    }
    const long long d = a[i] - b[i];
    observed += d * d;
    ++row[static_cast<std::size_t>(a[i] - min)];
    ++col[static_cast<std::size_t>(b[i] - min)];
  }
  // Weights (i-j)^2/(max-min)^2 cancel in the ratio; with E = r c^T / N the
  // kappa is 1 - N * sum(d^2 O) / sum(d^2 r_i c_j), all in integers.
  long long expected = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!row[i]) continue;
    for (std::size_t j = 0; j < k; ++j) {
      const long long d = static_cast<long long>(i) - static_cast<long long>(j);
      expected += d * d * row[i] * col[j];
    }
  }
  if (expected == 0) return std::nullopt;
  const long long n = static_cast<long long>(a.size());
  return 1.0 - static_cast<double>(n * observed) / static_cast<double>(expected);
}

std::vector<KappaReport> kappa_reports(const std::vector<HopesRecord>& records,
                                       const SamplingPlan& plan) {
  check_complete(records, plan);
  std::map<std::tuple<std::size_t, std::string, std::string>, const HopesRecord*> index;
  for (const auto& r : records) index[{r.sentence_id, r.system_id, r.annotator_id}] = &r;

  struct Vectors {
    std::map<std::string, std::pair<std::vector<int>, std::vector<int>>> cat;
    std::pair<std::vector<int>, std::vector<int>> total;
  };
  std::vector<Vectors> per_system(plan.systems.size());
  Vectors pooled;
  for (std::size_t s = 0; s < plan.systems.size(); ++s) {
    for (std::size_t i = 0; i < plan.sentence_ids.size(); ++i) {
      const auto slots = plan.raters(i, s);
      const HopesRecord* ra = index.at({plan.sentence_ids[i], plan.systems[s], plan.annotators[slots[0]]});
      const HopesRecord* rb = index.at({plan.sentence_ids[i], plan.systems[s], plan.annotators[slots[1]]});
      for (Vectors* v : {&per_system[s], &pooled}) {
        for (Category c : kCategories) {
          auto& pr = v->cat[std::string(to_string(c))];
          pr.first.push_back(ra->score(c));
          pr.second.push_back(rb->score(c));
        }
        v->total.first.push_back(ra->total());
        v->total.second.push_back(rb->total());
      }
    }
  }
  auto build = [&](const std::string& id, const Vectors& v) {
    KappaReport rep;
    rep.system_id = id;
    for (Category c : kCategories) {
      const std::string key(to_string(c));
      const auto it = v.cat.find(key);
      rep.per_category[key] = it == v.cat.end() || it->second.first.empty()
                                  ? std::nullopt
                                  : weighted_kappa(it->second.first, it->second.second, 0,
                                                   plan.max_score);
    }
    rep.overall = v.total.first.empty()
                      ? std::nullopt
                      : weighted_kappa(v.total.first, v.total.second, 0, 4 * plan.max_score);
    return rep;
  };
  std::vector<KappaReport> out;
  for (std::size_t s = 0; s < plan.systems.size(); ++s) {
    out.push_back(build(plan.systems[s], per_system[s]));
  }
  out.push_back(build("all", pooled));
  return out;
}

namespace {

std::string fmt(double v, const char* spec = "%.2f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v, "%.3f") : "undef"; }

void table(std::ostringstream& out, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t k = 0; k < r.size(); ++k) width[k] = std::max(width[k], r[k].size());
  }
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) {
      const std::string pad(width[k] - r[k].size(), ' ');
      out << (k == 0 ? r[k] + pad : "  " + pad + r[k]);
    }
    out << '\n';
  }
}

}  // namespace

std::string format_report(const std::vector<KappaReport>& kappas,
                          const std::vector<SystemAggregate>& aggregates) {
  std::ostringstream out;
  out << "Inter-annotator agreement (quadratic-weighted kappa)\n";
  std::vector<std::vector<std::string>> rows = {{"System", "MIS", "TERM", "STYLE", "GRAM", "Overall"}};
  for (const auto& k : kappas) {
    rows.push_back({k.system_id, fmt(k.per_category.at("MIS")), fmt(k.per_category.at("TERM")),
                    fmt(k.per_category.at("STYLE")), fmt(k.per_category.at("GRAM")),
                    fmt(k.overall)});
  }
  table(out, rows);

  out << "\nAverage scores (per rating; sentence-level average in last column)\n";
  rows = {{"System", "MIS", "TERM", "STYLE", "GRAM", "Total", "Total/sent"}};
  for (const auto& a : aggregates) {
    rows.push_back({a.system_id, fmt(a.category_means.at("MIS")), fmt(a.category_means.at("TERM")),
                    fmt(a.category_means.at("STYLE")), fmt(a.category_means.at("GRAM")),
                    fmt(a.total_mean), fmt(a.sentence_total_mean)});
  }
  table(out, rows);

  out << "\nTranslation errors\n";
  rows = {{"System", "No Error", "Minor", "Major", "Ratings"}};
  for (const auto& a : aggregates) {
    rows.push_back({a.system_id, std::to_string(a.no_error), std::to_string(a.minor),
                    std::to_string(a.major), std::to_string(a.ratings)});
  }
  table(out, rows);
  return out.str();
}

}  // namespace forge::hopes
