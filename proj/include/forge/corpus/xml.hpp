#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "forge/common/error.hpp"

namespace forge::xml {

class XmlError : public ParseError {
 public:
  XmlError(const std::string& what, std::size_t offset)
      : ParseError(what + " at byte " + std::to_string(offset)),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct Node {
  enum class Kind { kElement, kText };

  Kind kind = Kind::kElement;
  std::string name;  // element name; empty for text
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;  // decoded character data for text nodes
  std::vector<Node> children;
  std::size_t offset = 0;  // byte offset of the node in the document

  bool is_element() const { return kind == Kind::kElement; }
};

// Non-validating parser for scraped dumps. Accepts several top-level
// elements (the scrape concatenates pages), skips the XML declaration,
// processing instructions, comments and DOCTYPE, and decodes the predefined
// and numeric character references. Unknown entity references are kept
// verbatim. Mismatched or unterminated markup throws an
// XmlError naming the byte offset.
Node parse(std::string_view document);

// Concatenated character data of `node` and its descendants.
std::string inner_text(const Node& node);

}  // namespace forge::xml
