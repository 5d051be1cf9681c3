#include "forge/corpus/xml.hpp"

#include <cctype>

#include "forge/common/utf8.hpp"

namespace forge::xml {

namespace {

bool is_name_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) || c == '_' || c == '-' || c == '.' ||
         c == ':';
}

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

// Decodes character references in `raw`. `base` is the document offset of
// raw[0], used for error positions.
std::string decode_entities(std::string_view raw, std::size_t base) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] != '&') {
      out.push_back(raw[i]);
      continue;
    }
    const std::size_t semi = raw.find(';', i);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back('&');
      continue;
    }
    const std::string_view ent = raw.substr(i + 1, semi - i - 1);
    if (ent == "lt") {
      out.push_back('<');
    } else if (ent == "gt") {
      out.push_back('>');
    } else if (ent == "amp") {
      out.push_back('&');
    } else if (ent == "quot") {
      out.push_back('"');
    } else if (ent == "apos") {
      out.push_back('\'');
    } else if (!ent.empty() && ent[0] == '#') {
      char32_t cp = 0;
      const bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
      const std::string_view digits = ent.substr(hex ? 2 : 1);
      if (digits.empty()) throw XmlError("empty character reference", base + i);
      for (char d : digits) {
        int v;
        if (d >= '0' && d <= '9') {
          v = d - '0';
        } else if (hex && d >= 'a' && d <= 'f') {
          v = d - 'a' + 10;
        } else if (hex && d >= 'A' && d <= 'F') {
          v = d - 'A' + 10;
        } else {
          throw XmlError("bad character reference", base + i);
        }
        cp = cp * (hex ? 16 : 10) + static_cast<char32_t>(v);
        if (cp > 0x10FFFF) throw XmlError("character reference out of range", base + i);
      }
      utf8::append(out, cp);
    } else {
      out.append(raw.substr(i, semi - i + 1));
    }
    i = semi;
  }
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view doc) : doc_(doc) {}

  Node run() {
    Node root;
    root.name = "#document";
    std::vector<Node*> stack{&root};
    while (pos_ < doc_.size()) {
      if (doc_[pos_] != '<') {
        const std::size_t start = pos_;
        const std::size_t lt = doc_.find('<', pos_);
        pos_ = lt == std::string_view::npos ? doc_.size() : lt;
        add_text(*stack.back(), doc_.substr(start, pos_ - start), start);
        continue;
      }
      const std::size_t start = pos_;
      if (doc_.compare(pos_, 4, "<!--") == 0) {
        skip_past("-->", "unterminated comment", start);
      } else if (doc_.compare(pos_, 9, "<![CDATA[") == 0) {
        const std::size_t end = doc_.find("]]>", pos_ + 9);
        if (end == std::string_view::npos) throw XmlError("unterminated CDATA", start);
        Node text;
        text.kind = Node::Kind::kText;
        text.text = std::string(doc_.substr(pos_ + 9, end - pos_ - 9));
        text.offset = start;
        stack.back()->children.push_back(std::move(text));
        pos_ = end + 3;
      } else if (doc_.compare(pos_, 2, "<?") == 0) {
        skip_past("?>", "unterminated processing instruction", start);
      } else if (doc_.compare(pos_, 2, "<!") == 0) {
        skip_declaration(start);
      } else if (doc_.compare(pos_, 2, "</") == 0) {
        pos_ += 2;
        const std::string name = read_name();
        skip_ws();
        if (pos_ >= doc_.size() || doc_[pos_] != '>') {
          throw XmlError("unterminated end tag </" + name, start);
        }
        ++pos_;
        if (stack.size() == 1) throw XmlError("unexpected end tag </" + name + ">", start);
        if (stack.back()->name != name) {
          throw XmlError("end tag </" + name + "> does not match <" +
                             stack.back()->name + ">",
                         start);
        }
        stack.pop_back();
      } else {
        ++pos_;
        Node el;
        el.offset = start;
        el.name = read_name();
        if (el.name.empty()) throw XmlError("expected element name", start);
        const bool self_closing = read_attributes(el, start);
        Node& parent = *stack.back();
        parent.children.push_back(std::move(el));
        if (!self_closing) stack.push_back(&parent.children.back());
      }
    }
    if (stack.size() > 1) {
      throw XmlError("document truncated inside <" + stack.back()->name + ">",
                     doc_.size());
    }
    return root;
  }

 private:
  void add_text(Node& parent, std::string_view raw, std::size_t offset) {
    Node text;
    text.kind = Node::Kind::kText;
    text.text = decode_entities(raw, offset);
    text.offset = offset;
    parent.children.push_back(std::move(text));
  }

  void skip_past(std::string_view terminator, const char* error,
                 std::size_t start) {
    const std::size_t end = doc_.find(terminator, pos_);
    if (end == std::string_view::npos) throw XmlError(error, start);
    pos_ = end + terminator.size();
  }

  // <!DOCTYPE ...> with an optional [internal subset].
  void skip_declaration(std::size_t start) {
    int depth = 0;
    for (; pos_ < doc_.size(); ++pos_) {
      const char c = doc_[pos_];
      if (c == '[') ++depth;
      if (c == ']') --depth;
      if (c == '>' && depth <= 0) {
        ++pos_;
        return;
      }
    }
    throw XmlError("unterminated declaration", start);
  }

  void skip_ws() {
    while (pos_ < doc_.size() && is_ws(doc_[pos_])) ++pos_;
  }

  std::string read_name() {
    const std::size_t start = pos_;
    while (pos_ < doc_.size() && is_name_char(doc_[pos_])) ++pos_;
    return std::string(doc_.substr(start, pos_ - start));
  }

  // Returns true for `/>`.
  bool read_attributes(Node& el, std::size_t start) {
    while (true) {
      skip_ws();
      if (pos_ >= doc_.size()) throw XmlError("unterminated start tag <" + el.name, start);
      if (doc_[pos_] == '>') {
        ++pos_;
        return false;
      }
      if (doc_.compare(pos_, 2, "/>") == 0) {
        pos_ += 2;
        return true;
      }
      const std::size_t attr_start = pos_;
      std::string name = read_name();
      if (name.empty()) throw XmlError("bad attribute in <" + el.name, attr_start);
      skip_ws();
      if (pos_ >= doc_.size() || doc_[pos_] != '=') {
        throw XmlError("attribute " + name + " lacks a value", attr_start);
      }
      ++pos_;
      skip_ws();
      if (pos_ >= doc_.size() || (doc_[pos_] != '"' && doc_[pos_] != '\'')) {
        throw XmlError("attribute " + name + " value must be quoted", attr_start);
      }
      const char quote = doc_[pos_++];
      const std::size_t end = doc_.find(quote, pos_);
      if (end == std::string_view::npos) {
        throw XmlError("unterminated attribute value", attr_start);
      }
      el.attributes.emplace_back(std::move(name),
                                 decode_entities(doc_.substr(pos_, end - pos_), pos_));
      pos_ = end + 1;
    }
  }

  std::string_view doc_;
  std::size_t pos_ = 0;
};

void collect_text(const Node& node, std::string& out) {
  if (node.kind == Node::Kind::kText) {
    out += node.text;
    return;
  }
  for (const auto& c : node.children) collect_text(c, out);
}

}  // namespace

Node parse(std::string_view document) { return Parser(document).run(); }

std::string inner_text(const Node& node) {
  std::string out;
  collect_text(node, out);
  return out;
}

}  // namespace forge::xml
