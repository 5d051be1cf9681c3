#include "forge/corpus/parsers.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "forge/common/csv.hpp"
#include "forge/common/error.hpp"
#include "forge/common/text.hpp"
#include "forge/common/utf8.hpp"
#include "forge/corpus/xml.hpp"

namespace forge::corpus {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

// Drops a trailing "(jau5 jat1 ...)" romanisation: ASCII letters, tone
// digits 1-6, spaces and light punctuation, with at least one tone digit.
std::string strip_romanisation(std::string_view text) {
  std::string_view t = trim(text);
  if (t.empty() || t.back() != ')') return std::string(t);
  const std::size_t open = t.rfind('(');
  if (open == std::string_view::npos) return std::string(t);
  const std::string_view inner = t.substr(open + 1, t.size() - open - 2);
  bool tone = false;
  for (char c : inner) {
    const auto u = static_cast<unsigned char>(c);
    if (c >= '1' && c <= '6') {
      tone = true;
    } else if (!(std::isalpha(u) || c == ' ' || c == ',' || c == '.' ||
                 c == '?' || c == '!' || c == '\'' || c == '-')) {
      return std::string(t);
    }
  }
  if (!tone) return std::string(t);
  return std::string(trim(t.substr(0, open)));
}

struct ExampleBlock {
  std::vector<std::string> yue;
  std::vector<std::string> eng;
  std::size_t ordinal = 0;
};

void emit_pairs(const std::vector<std::string>& yue,
                const std::vector<std::string>& eng, Origin origin,
                const CleaningRuleSet& rules, const std::string& where,
                std::vector<SentencePair>& out, Diagnostics& diag) {
  if (yue.empty() || eng.empty()) {
    diag.warn(where + ": example lacks " +
              std::string(yue.empty() ? "a Cantonese" : "an English") +
              " side, skipped");
    return;
  }
  const std::size_t alternatives = rules.take_first_translation ? 1 : eng.size();
  for (const auto& y : yue) {
    for (std::size_t k = 0; k < alternatives; ++k) {
      auto cleaned = clean_pair({y, eng[k], origin}, rules);
      if (!cleaned) {
        diag.warn(where + ": empty after cleaning, skipped");
        continue;
      }
      out.push_back(std::move(*cleaned));
    }
  }
}

}  // namespace

std::vector<WordsHkRecord> read_wordshk_csv(std::string_view content,
                                            Diagnostics& diag) {
  // Skip leading comment lines.
  std::size_t skipped_lines = 0;
  while (!content.empty() && content.front() == '#') {
    const std::size_t nl = content.find('\n');
    content = nl == std::string_view::npos ? std::string_view{} : content.substr(nl + 1);
    ++skipped_lines;
  }
  std::vector<WordsHkRecord> records;
  csv::Reader reader(content);
  bool first = true;
  while (auto row = reader.next()) {
    const std::size_t line = reader.line() + skipped_lines;
    const bool was_first = first;
    first = false;
    if (row->size() == 1 && trim((*row)[0]).empty()) continue;
    if (reader.malformed()) {
      diag.warn("words.hk line " + std::to_string(line) + ": unterminated quoted field, skipped");
      continue;
    }
    if (row->size() < 3) {
      diag.warn("words.hk line " + std::to_string(line) + ": expected id,headword,entry, got " +
                std::to_string(row->size()) + " fields, skipped");
      continue;
    }
    if (!all_digits(trim((*row)[0]))) {
      if (!was_first) {
        diag.warn("words.hk line " + std::to_string(line) + ": non-numeric id '" +
                  (*row)[0] + "', skipped");
      }
      continue;
    }
    records.push_back({std::string(trim((*row)[0])), (*row)[1], (*row)[2], line});
  }
  return records;
}

std::vector<SentencePair> parse_wordshk(const std::vector<WordsHkRecord>& records,
                                        const CleaningRuleSet& rules,
                                        Diagnostics& diag) {
  std::vector<SentencePair> out;
  for (const auto& rec : records) {
    enum class Block { kNone, kExplanation, kExample } block = Block::kNone;
    ExampleBlock eg;
    std::size_t ordinal = 0;
    auto flush = [&] {
      if (block == Block::kExample) {
        emit_pairs(eg.yue, eg.eng, Origin::kWordsHk, rules,
                   "words.hk entry " + rec.id + " example " + std::to_string(eg.ordinal),
                   out, diag);
      }
      eg = {};
    };
    for (const auto& raw : split_lines(rec.entry)) {
      const std::string_view line = trim(raw);
      if (line.empty()) continue;
      if (line == "<eg>") {
        flush();
        block = Block::kExample;
        eg.ordinal = ++ordinal;
        continue;
      }
      if (line == "<explanation>") {
        flush();
        block = Block::kExplanation;
        continue;
      }
      if (starts_with(line, "----")) {
        flush();
        block = Block::kNone;
        continue;
      }
      if (block != Block::kExample) continue;
      if (starts_with(line, "yue:")) {
        eg.yue.push_back(strip_romanisation(line.substr(4)));
      } else if (starts_with(line, "eng:")) {
        eg.eng.emplace_back(trim(line.substr(4)));
      }
    }
    flush();
  }
  return out;
}

namespace {

bool is_yue_tag(std::string_view name) {
  return name == "yue" || name == "can" || name == "hz" || name == "zh";
}

bool is_eng_tag(std::string_view name) {
  return name == "eng" || name == "en" || name == "english";
}

bool is_cjk_text_char(char32_t cp) {
  return utf8::is_cjk_ideograph(cp) || (cp >= 0x3000 && cp <= 0x303F) ||
         (cp >= 0xFF00 && cp <= 0xFFEF);
}

// Splits free text into the Cantonese prefix and the English remainder.
void split_by_script(std::string_view text, std::vector<std::string>& yue,
                     std::vector<std::string>& eng) {
  std::size_t cut = 0;
  bool any = false;
  for (const auto& u : utf8::units(text)) {
    if (is_cjk_text_char(u.cp)) {
      cut = u.offset + u.size;
      any = true;
    }
  }
  if (!any) {
    if (!trim(text).empty()) eng.emplace_back(trim(text));
    return;
  }
  const std::string_view y = trim(text.substr(0, cut));
  const std::string_view e = trim(text.substr(cut));
  if (!y.empty()) yue.emplace_back(y);
  if (!e.empty()) eng.emplace_back(e);
}

void collect_wl(const xml::Node& node, std::vector<const xml::Node*>& out) {
  for (const auto& child : node.children) {
    if (!child.is_element()) continue;
    if (child.name == "WL") {
      out.push_back(&child);
    } else {
      collect_wl(child, out);
    }
  }
}

std::string strip_tags(std::string_view raw) {
  std::string out;
  bool in_tag = false;
  for (char c : raw) {
    if (c == '<') in_tag = true;
    if (!in_tag) out.push_back(c);
    if (c == '>') in_tag = false;
  }
  // Character references are rare inside WL; decode the predefined ones.
  static const std::pair<const char*, const char*> kEntities[] = {
      {"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""}, {"&apos;", "'"}, {"&amp;", "&"}};
  for (const auto& [from, to] : kEntities) {
    std::size_t p = 0;
    const std::string f(from);
    while ((p = out.find(f, p)) != std::string::npos) {
      out.replace(p, f.size(), to);
      p += 1;
    }
  }
  return out;
}

std::vector<SentencePair> parse_wenlin_structural(std::string_view doc,
                                                  const CleaningRuleSet& rules,
                                                  Diagnostics& diag) {
  const xml::Node root = xml::parse(doc);
  std::vector<const xml::Node*> blocks;
  collect_wl(root, blocks);
  std::vector<SentencePair> out;
  for (const xml::Node* wl : blocks) {
    std::vector<std::string> yue;
    std::vector<std::string> eng;
    bool structured = false;
    for (const auto& child : wl->children) {
      if (!child.is_element()) continue;
      if (is_yue_tag(child.name)) {
        structured = true;
        yue.push_back(xml::inner_text(child));
      } else if (is_eng_tag(child.name)) {
        structured = true;
        eng.push_back(xml::inner_text(child));
      }
    }
    if (!structured) split_by_script(xml::inner_text(*wl), yue, eng);
    emit_pairs(yue, eng, Origin::kWenlin, rules,
               "wenlin WL at byte " + std::to_string(wl->offset), out, diag);
  }
  return out;
}

std::vector<SentencePair> parse_wenlin_pattern(std::string_view raw_doc,
                                               const CleaningRuleSet& rules,
                                               Diagnostics& diag) {
  static const std::regex kChild(R"(<(yue|can|hz|zh|eng|en|english)(\s[^>]*)?>([\s\S]*?)</\1\s*>)");
  // Blank out comments (keeping offsets) so commented markup is ignored.
  std::string text(raw_doc);
  for (std::size_t c = text.find("<!--"); c != std::string::npos; c = text.find("<!--", c)) {
    const std::size_t end = text.find("-->", c + 4);
    if (end == std::string::npos) throw xml::XmlError("unterminated comment", c);
    std::fill(text.begin() + static_cast<std::ptrdiff_t>(c),
              text.begin() + static_cast<std::ptrdiff_t>(end + 3), ' ');
    c = end + 3;
  }
  const std::string_view doc = text;
  std::vector<SentencePair> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t open = doc.find("<WL", pos);
    while (open != std::string_view::npos && open + 3 < doc.size() &&
           doc[open + 3] != '>' && doc[open + 3] != ' ' && doc[open + 3] != '\t' &&
           doc[open + 3] != '\n') {
      open = doc.find("<WL", open + 3);
    }
    if (open == std::string_view::npos) break;
    const std::size_t body = doc.find('>', open);
    if (body == std::string_view::npos) {
      throw xml::XmlError("unterminated <WL> start tag", open);
    }
    const std::size_t close = doc.find("</WL>", body);
    if (close == std::string_view::npos) {
      throw xml::XmlError("<WL> block is never closed", open);
    }
    const std::string inner(doc.substr(body + 1, close - body - 1));
    std::vector<std::string> yue;
    std::vector<std::string> eng;
    bool structured = false;
    for (std::sregex_iterator it(inner.begin(), inner.end(), kChild), end; it != end; ++it) {
      structured = true;
      const std::string tag = (*it)[1].str();
      (is_yue_tag(tag) ? yue : eng).push_back(strip_tags((*it)[3].str()));
    }
    if (!structured) split_by_script(strip_tags(inner), yue, eng);
    emit_pairs(yue, eng, Origin::kWenlin, rules,
               "wenlin WL at byte " + std::to_string(open), out, diag);
    pos = close + 5;
  }
  return out;
}

}  // namespace

std::vector<SentencePair> parse_wenlin(std::string_view xml_document,
                                       const CleaningRuleSet& rules,
                                       Diagnostics& diag, WenlinMode mode) {
  return mode == WenlinMode::kStructural
             ? parse_wenlin_structural(xml_document, rules, diag)
             : parse_wenlin_pattern(xml_document, rules, diag);
}

std::vector<SentencePair> parse_aligned(std::string_view src_content,
                                        std::string_view tgt_content) {
  const auto src = split_lines(src_content);
  const auto tgt = split_lines(tgt_content);
  if (src.size() != tgt.size()) {
    throw ValidationError("aligned files differ in length: source has " +
                          std::to_string(src.size()) + " lines, target has " +
                          std::to_string(tgt.size()));
  }
  std::vector<SentencePair> out;
  out.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    out.push_back({src[i], tgt[i], Origin::kOpus});
  }
  return out;
}

std::vector<SentencePair> parse_aligned(const std::filesystem::path& src_file,
                                        const std::filesystem::path& tgt_file) {
  const std::string src = read_file(src_file);
  const std::string tgt = read_file(tgt_file);
  return parse_aligned(std::string_view(src), std::string_view(tgt));
}

}  // namespace forge::corpus
