#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace argmine {

// Half-open byte range [begin, end) into some text.
struct CharRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return end <= begin; }
  friend bool operator==(const CharRange&, const CharRange&) = default;
};

using Token = CharRange;

// Byte length of the Unicode whitespace code point starting at `pos` in
// UTF-8 `text`, or 0 when the code point there is not whitespace.
std::size_t whitespace_length(std::string_view text, std::size_t pos);

// Every maximal run of non-whitespace becomes one token.
std::vector<Token> tokenize(std::string_view text);

// Whitespace runs collapsed to a single ASCII space, ends trimmed.
std::string collapse_whitespace(std::string_view text);

bool is_blank(std::string_view text);

}  // namespace argmine
