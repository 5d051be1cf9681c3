#include "forge/common/csv.hpp"

namespace forge::csv {

std::optional<Row> Reader::next() {
  malformed_ = false;
  if (pos_ >= content_.size()) return std::nullopt;
  row_line_ = line_;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool quoted_field = false;
  while (pos_ < content_.size()) {
    const char c = content_[pos_];
    if (in_quotes) {
      if (c == '"') {
        if (pos_ + 1 < content_.size() && content_[pos_ + 1] == '"') {
          field.push_back('"');
          pos_ += 2;
          continue;
        }
        in_quotes = false;
        ++pos_;
        continue;
      }
      if (c == '\n') ++line_;
      field.push_back(c);
      ++pos_;
      continue;
    }
    if (c == '"' && field.empty() && !quoted_field) {
      in_quotes = true;
      quoted_field = true;
      ++pos_;
      continue;
    }
    if (c == sep_) {
      row.push_back(std::move(field));
      field.clear();
      quoted_field = false;
      ++pos_;
      continue;
    }
    if (c == '\r' && pos_ + 1 < content_.size() && content_[pos_ + 1] == '\n') {
      ++pos_;
      continue;
    }
    if (c == '\n') {
      ++pos_;
      ++line_;
      row.push_back(std::move(field));
      return row;
    }
    // Text after a closing quote is kept verbatim (lenient).
    field.push_back(c);
    ++pos_;
  }
  if (in_quotes) malformed_ = true;
  row.push_back(std::move(field));
  return row;
}

std::string escape(std::string_view field, char sep) {
  const bool needs = field.find_first_of(std::string{sep, '"', '\n', '\r'}) !=
                     std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_row(const Row& row, char sep) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out.push_back(sep);
    out += escape(row[i], sep);
  }
  return out;
}

}  // namespace forge::csv
