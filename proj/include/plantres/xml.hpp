#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace plantres::xml {

// Minimal DOM for well-formed XML 1.0 documents. Attributes and text are
// kept; comments, processing instructions and the doctype are skipped.
struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;  // concatenated character data of direct children
  std::vector<std::unique_ptr<Element>> children;
  int line = 0;

  const Element* child(std::string_view name) const;
  std::vector<const Element*> children_named(std::string_view name) const;
};

// Throws Error(kParse) with "line L, column C" on malformed input.
std::unique_ptr<Element> parse(std::string_view content);

// Escapes &, <, >, " and ' for use in text or attribute values.
std::string escape(std::string_view text);

}  // namespace plantres::xml
