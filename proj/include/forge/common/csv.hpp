#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace forge::csv {

using Row = std::vector<std::string>;

// RFC 4180 reader: quoted fields may contain separators, doubled quotes and
// newlines. Reports rows one at a time so huge scrapes stream.
class Reader {
 public:
  explicit Reader(std::string_view content, char sep = ',')
      : content_(content), sep_(sep) {}
  // The reader keeps a view; refuse temporaries.
  Reader(std::string&&, char = ',') = delete;
  explicit Reader(const char* content, char sep = ',')
      : Reader(std::string_view(content), sep) {}

  // Next row, or nullopt at end of input. A row with an unterminated quoted
  // field sets `malformed()` and is still returned with what was read.
  std::optional<Row> next();

  bool malformed() const { return malformed_; }
  // 1-based line number where the last returned row started.
  std::size_t line() const { return row_line_; }

 private:
  std::string_view content_;
  char sep_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t row_line_ = 0;
  bool malformed_ = false;
};

std::string escape(std::string_view field, char sep = ',');
std::string format_row(const Row& row, char sep = ',');

}  // namespace forge::csv
