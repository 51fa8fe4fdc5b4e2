#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace argmine::csv {

struct Row {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// RFC 4180 records: quoted fields may contain separators, doubled quotes and
// line breaks. CRLF and LF both end records. A leading UTF-8 BOM is skipped.
std::vector<Row> parse(std::string_view text);

// Quotes a field when it needs it.
std::string escape(std::string_view field);

}  // namespace argmine::csv
