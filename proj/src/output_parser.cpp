#include "argmine/output_parser.hpp"

#include <cctype>
#include <memory>

#include <nlohmann/json.hpp>

#include "argmine/alignment.hpp"
#include "argmine/text.hpp"

namespace argmine {

std::string_view to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::kFormat: return "FormatError";
    case ParseErrorKind::kKey: return "KeyError";
    case ParseErrorKind::kLabel: return "LabelError";
    case ParseErrorKind::kArity: return "ArityError";
    case ParseErrorKind::kAlignment: return "AlignmentReject";
  }
  return "?";
}

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto tokens = tokenize(s);
  if (tokens.empty()) return {};
  return std::string(s.substr(tokens.front().begin, tokens.back().end - tokens.front().begin));
}

std::string upper_collapsed(std::string_view s) {
  std::string out = collapse_whitespace(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string_view expected_key(TaskKind task) {
  switch (task) {
    case TaskKind::kTypeOnly: return "TYPE";
    case TaskKind::kQualityOnly: return "QUALITY";
    case TaskKind::kTypeAndQuality: return "TYPE AND QUALITY";
    case TaskKind::kSegmentation: break;
  }
  throw ConfigError("segmentation has no label object");
}

// End (exclusive) of the balanced region opening at raw[open], honouring JSON
// string literals; npos when unbalanced.
std::size_t balanced_end(std::string_view raw, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < raw.size(); ++i) {
    const char c = raw[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

LabelAnswer labels_from_strings(const std::vector<std::string>& values, TaskKind task) {
  const std::size_t arity = task == TaskKind::kTypeAndQuality ? 2 : 1;
  if (values.size() != arity) {
    throw ParseError(ParseErrorKind::kArity, "expected " + std::to_string(arity) +
                                                 " label(s), got " + std::to_string(values.size()));
  }
  LabelAnswer answer;
  auto type = [&](const std::string& v) {
    auto t = try_parse_arg_type(v);
    if (!t) throw ParseError(ParseErrorKind::kLabel, "unknown argument type '" + v + "'");
    return *t;
  };
  auto quality = [&](const std::string& v) {
    auto q = try_parse_quality(v);
    if (!q) throw ParseError(ParseErrorKind::kLabel, "unknown quality label '" + v + "'");
    return *q;
  };
  switch (task) {
    case TaskKind::kTypeOnly: answer.type = type(values[0]); break;
    case TaskKind::kQualityOnly: answer.quality = quality(values[0]); break;
    case TaskKind::kTypeAndQuality:
      answer.type = type(values[0]);
      answer.quality = quality(values[1]);
      break;
    case TaskKind::kSegmentation: break;
  }
  return answer;
}

// "<" optional-space "SEP" optional-space ">" at `pos`; returns its length or 0.
std::size_t sep_marker_length(std::string_view text, std::size_t pos) {
  if (text[pos] != '<') return 0;
  std::size_t i = pos + 1;
  auto skip_space = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  skip_space();
  static constexpr std::string_view kWord = "sep";
  for (char expected : kWord) {
    if (i >= text.size() || std::tolower(static_cast<unsigned char>(text[i])) != expected) return 0;
    ++i;
  }
  skip_space();
  if (i >= text.size() || text[i] != '>') return 0;
  return i + 1 - pos;
}

}  // namespace

LabelAnswer parse_label_object(std::string_view raw, TaskKind task) {
  const std::string key = std::string(expected_key(task));
  std::optional<json> object;
  for (std::size_t open = raw.find('{'); open != std::string_view::npos;
       open = raw.find('{', open + 1)) {
    const std::size_t end = balanced_end(raw, open);
    if (end == std::string_view::npos) break;
    json parsed = json::parse(raw.substr(open, end - open), nullptr, /*allow_exceptions=*/false);
    if (parsed.is_object()) {
      object = std::move(parsed);
      break;
    }
  }
  if (!object) throw ParseError(ParseErrorKind::kFormat, "no JSON object in output");

  const json* value = nullptr;
  for (auto it = object->begin(); it != object->end(); ++it) {
    if (upper_collapsed(it.key()) == key) {
      value = &it.value();
      break;
    }
  }
  if (value == nullptr) {
    std::string found;
    for (auto it = object->begin(); it != object->end(); ++it) found += " '" + it.key() + "'";
    throw ParseError(ParseErrorKind::kKey, "expected key '" + key + "', found" +
                                               (found.empty() ? std::string(" none") : found));
  }

  std::vector<std::string> values;
  if (value->is_string()) {
    values.push_back(value->get<std::string>());
  } else if (value->is_array()) {
    for (const json& v : *value) {
      if (!v.is_string()) throw ParseError(ParseErrorKind::kLabel, "non-string label " + v.dump());
      values.push_back(v.get<std::string>());
    }
  } else {
    throw ParseError(ParseErrorKind::kArity, "label value is neither a list nor a string");
  }
  return labels_from_strings(values, task);
}

InterleavedParse parse_interleaved(std::string_view raw, TaskKind task,
                                   std::optional<std::size_t> expected_segments) {
  if (task == TaskKind::kSegmentation) throw ConfigError("segmentation output is not interleaved");
  InterleavedParse out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = raw.find('<', pos);
    if (open == std::string_view::npos) break;
    const std::size_t close = raw.find_first_of("<>", open + 1);
    if (close == std::string_view::npos || raw[close] != '>') {
      throw ParseError(ParseErrorKind::kFormat, "unterminated marker at offset " + std::to_string(open));
    }
    const std::string segment = trim(raw.substr(pos, open - pos));
    if (segment.empty()) {
      throw ParseError(ParseErrorKind::kFormat, "empty segment before marker at offset " +
                                                    std::to_string(open));
    }
    const std::string_view content = raw.substr(open + 1, close - open - 1);
    std::vector<std::string> values;
    if (task == TaskKind::kTypeAndQuality) {
      const std::size_t comma = content.find(',');
      if (comma == std::string_view::npos) {
        values.emplace_back(content);
      } else {
        values.emplace_back(content.substr(0, comma));
        values.emplace_back(content.substr(comma + 1));
      }
    } else {
      values.emplace_back(content);
    }
    LabelAnswer label;
    try {
      label = labels_from_strings(values, task);
    } catch (const ParseError& e) {
      throw ParseError(ParseErrorKind::kLabel,
                       "marker <" + std::string(content) + ">: " + e.what());
    }
    out.push_back({segment, label});
    pos = close + 1;
  }
  if (out.empty()) throw ParseError(ParseErrorKind::kFormat, "no label markers in output");
  if (!is_blank(raw.substr(pos))) {
    throw ParseError(ParseErrorKind::kFormat, "text after the final marker");
  }
  if (expected_segments && out.size() != *expected_segments) {
    throw ParseError(ParseErrorKind::kFormat, "expected " + std::to_string(*expected_segments) +
                                                  " labelled segments, got " +
                                                  std::to_string(out.size()));
  }
  return out;
}

std::vector<std::string> RawSegmentation::segments() const {
  std::vector<std::string> out;
  std::size_t begin = 0;
  auto emit = [&](std::size_t end) {
    std::string s;
    for (std::size_t k = begin; k < end; ++k) {
      if (!s.empty()) s.push_back(' ');
      s += tokens[k];
    }
    out.push_back(std::move(s));
    begin = end;
  };
  for (std::size_t p : marker_positions) {
    if (p > begin) emit(p);
  }
  if (begin < tokens.size()) emit(tokens.size());
  return out;
}

RawSegmentation parse_raw_segmentation(std::string_view text) {
  RawSegmentation raw;
  raw.text = std::string(text);
  std::size_t piece_begin = 0;
  auto flush = [&](std::size_t end) {
    const std::string_view piece = text.substr(piece_begin, end - piece_begin);
    for (const Token& t : tokenize(piece)) raw.tokens.emplace_back(piece.substr(t.begin, t.size()));
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '<') continue;
    if (std::size_t len = sep_marker_length(text, i)) {
      flush(i);
      raw.marker_positions.push_back(raw.tokens.size());
      i += len - 1;
      piece_begin = i + 1;
    }
  }
  flush(text.size());
  return raw;
}

std::vector<TokenRange> PredictedSegmentation::spans() const {
  std::vector<TokenRange> out;
  out.reserve(ends.size());
  std::size_t begin = 0;
  for (std::size_t end : ends) {
    out.push_back({begin, end});
    begin = end;
  }
  return out;
}

PredictedSegmentation segmentation_from_spans(std::string essay_id, std::size_t token_count,
                                              const std::vector<TokenRange>& spans) {
  PredictedSegmentation seg;
  seg.essay_id = std::move(essay_id);
  seg.token_count = token_count;
  for (const TokenRange& s : spans) {
    if (s.end > 0 && s.end < token_count && (seg.ends.empty() || s.end > seg.ends.back())) {
      seg.ends.push_back(s.end);
    }
  }
  if (token_count > 0) seg.ends.push_back(token_count);
  return seg;
}

PredictedSegmentation align_segmentation(const Essay& original, const RawSegmentation& raw) {
  if (raw.marker_positions.empty()) {
    throw ParseError(ParseErrorKind::kFormat, "no <SEP> markers in output");
  }
  const std::size_t n = original.token_count();
  if (n == 0) throw ParseError(ParseErrorKind::kAlignment, "original essay has no tokens");

  const std::vector<std::string_view> source = original.token_texts();
  std::vector<std::string_view> target(raw.tokens.begin(), raw.tokens.end());
  const TokenAlignment alignment = align_tokens(source, target);
  // distance / n > 0.4, in integers.
  if (alignment.distance * 5 > n * 2) {
    throw ParseError(ParseErrorKind::kAlignment,
                     "output differs from the essay by " + std::to_string(alignment.distance) +
                         " edits over " + std::to_string(n) + " tokens");
  }

  PredictedSegmentation seg;
  seg.essay_id = original.id;
  seg.token_count = n;
  for (std::size_t j : raw.marker_positions) {
    const std::size_t cut = alignment.target_to_source.at(j);
    if (cut == 0 || cut >= n) continue;
    if (seg.ends.empty() || cut > seg.ends.back()) seg.ends.push_back(cut);
  }
  seg.ends.push_back(n);
  return seg;
}

OutputValidator make_validator(TaskKind task, PromptMode mode, const Essay& original,
                               std::optional<std::size_t> expected_segments) {
  if (task == TaskKind::kSegmentation) {
    auto essay = std::make_shared<const Essay>(original);
    return [essay](std::string_view raw) {
      try {
        return ValidatorResult<ParsedOutput>(ParsedOutput(align_segmentation(*essay, parse_raw_segmentation(raw))));
      } catch (const ParseError& e) {
        return ValidatorResult<ParsedOutput>(std::string(to_string(e.kind())) + ": " + e.what());
      }
    };
  }
  if (mode == PromptMode::kFineTuned) {
    return [task, expected_segments](std::string_view raw) {
      try {
        return ValidatorResult<ParsedOutput>(ParsedOutput(parse_interleaved(raw, task, expected_segments)));
      } catch (const ParseError& e) {
        return ValidatorResult<ParsedOutput>(std::string(to_string(e.kind())) + ": " + e.what());
      }
    };
  }
  return [task](std::string_view raw) {
    try {
      return ValidatorResult<ParsedOutput>(ParsedOutput(parse_label_object(raw, task)));
    } catch (const ParseError& e) {
      return ValidatorResult<ParsedOutput>(std::string(to_string(e.kind())) + ": " + e.what());
    }
  };
}

}  // namespace argmine
