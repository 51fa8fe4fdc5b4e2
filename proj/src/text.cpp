#include "argmine/text.hpp"

namespace argmine {

std::size_t whitespace_length(std::string_view text, std::size_t pos) {
  const auto byte = [&](std::size_t k) -> unsigned {
    return pos + k < text.size() ? static_cast<unsigned char>(text[pos + k]) : 0u;
  };
  const unsigned c0 = byte(0);
  if (c0 == ' ' || (c0 >= 0x09 && c0 <= 0x0d)) return 1;
  if (c0 == 0xc2) {
    // U+0085 NEL, U+00A0 NBSP
    const unsigned c1 = byte(1);
    return (c1 == 0x85 || c1 == 0xa0) ? 2 : 0;
  }
  if (c0 == 0xe1) {
    // U+1680 OGHAM SPACE MARK
    return (byte(1) == 0x9a && byte(2) == 0x80) ? 3 : 0;
  }
  if (c0 == 0xe2) {
    const unsigned c1 = byte(1);
    const unsigned c2 = byte(2);
    if (c1 == 0x80) {
      // U+2000..U+200A, U+2028, U+2029, U+202F
      if ((c2 >= 0x80 && c2 <= 0x8a) || c2 == 0xa8 || c2 == 0xa9 || c2 == 0xaf) return 3;
    }
    // U+205F
    if (c1 == 0x81 && c2 == 0x9f) return 3;
    return 0;
  }
  if (c0 == 0xe3) {
    // U+3000 IDEOGRAPHIC SPACE
    return (byte(1) == 0x80 && byte(2) == 0x80) ? 3 : 0;
  }
  return 0;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (std::size_t ws = whitespace_length(text, pos)) {
      pos += ws;
      continue;
    }
    const std::size_t begin = pos;
    while (pos < text.size() && whitespace_length(text, pos) == 0) ++pos;
    tokens.push_back({begin, pos});
  }
  return tokens;
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const Token& t : tokenize(text)) {
    if (!out.empty()) out.push_back(' ');
    out.append(text.substr(t.begin, t.size()));
  }
  return out;
}

bool is_blank(std::string_view text) {
  return tokenize(text).empty();
}

}  // namespace argmine
