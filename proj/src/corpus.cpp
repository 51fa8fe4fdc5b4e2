#include "argmine/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "argmine/alignment.hpp"
#include "argmine/csv.hpp"

namespace argmine {
namespace fs = std::filesystem;

std::string_view Essay::token_text(std::size_t index) const {
  const Token& t = tokens.at(index);
  return std::string_view(normalized_text).substr(t.begin, t.size());
}

std::vector<std::string_view> Essay::token_texts() const {
  std::vector<std::string_view> out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) out.push_back(token_text(i));
  return out;
}

std::string_view Essay::text_of(TokenRange range) const {
  if (range.empty()) return {};
  const std::size_t begin = tokens.at(range.begin).begin;
  const std::size_t end = tokens.at(range.end - 1).end;
  return std::string_view(normalized_text).substr(begin, end - begin);
}

Essay make_essay(std::string id, std::string text) {
  Essay essay;
  essay.id = std::move(id);
  essay.raw_text = text;
  essay.normalized_text = std::move(text);
  essay.tokens = tokenize(essay.normalized_text);
  return essay;
}

std::vector<TokenRange> AnnotatedEssay::span_ranges() const {
  std::vector<TokenRange> out;
  out.reserve(spans.size());
  for (const GoldSpan& s : spans) out.push_back(s.tokens);
  return out;
}

std::string_view to_string(SplitName split) {
  switch (split) {
    case SplitName::kTrain: return "train";
    case SplitName::kValidation: return "validation";
    case SplitName::kTest: return "test";
  }
  return "?";
}

std::optional<SplitName> try_parse_split(std::string_view text) {
  if (text == "train") return SplitName::kTrain;
  if (text == "validation" || text == "valid" || text == "dev") return SplitName::kValidation;
  if (text == "test") return SplitName::kTest;
  return std::nullopt;
}

std::size_t CorpusSplit::span_count() const {
  std::size_t n = 0;
  for (const auto& e : essays) n += e.spans.size();
  return n;
}

const AnnotatedEssay* CorpusSplit::find(std::string_view essay_id) const {
  for (const auto& e : essays) {
    if (e.essay.id == essay_id) return &e;
  }
  return nullptr;
}

const CorpusSplit* LoadedCorpus::split(SplitName name) const {
  for (const auto& s : splits) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

CharRange locate_span(std::string_view haystack, std::string_view needle,
                      std::size_t search_from) {
  const std::string pattern = collapse_whitespace(needle);
  if (pattern.empty()) throw NotLocated("empty discourse text");

  // Collapsed haystack with the source byte offset of every byte.
  std::string collapsed;
  std::vector<std::size_t> origin;
  collapsed.reserve(haystack.size());
  origin.reserve(haystack.size());
  for (const Token& t : tokenize(haystack)) {
    if (!collapsed.empty()) {
      collapsed.push_back(' ');
      origin.push_back(t.begin - 1);
    }
    for (std::size_t k = t.begin; k < t.end; ++k) {
      collapsed.push_back(haystack[k]);
      origin.push_back(k);
    }
  }

  const std::size_t start =
      std::lower_bound(origin.begin(), origin.end(), search_from) - origin.begin();
  const std::size_t hit = collapsed.find(pattern, start);
  if (hit == std::string::npos) {
    throw NotLocated("discourse text not found after offset " + std::to_string(search_from));
  }
  return {origin[hit], origin[hit + pattern.size() - 1] + 1};
}

TokenRange tokens_covering(const std::vector<Token>& tokens, CharRange chars) {
  auto first = std::partition_point(tokens.begin(), tokens.end(),
                                    [&](const Token& t) { return t.end <= chars.begin; });
  auto last = std::partition_point(first, tokens.end(),
                                   [&](const Token& t) { return t.begin < chars.end; });
  return {static_cast<std::size_t>(first - tokens.begin()),
          static_cast<std::size_t>(last - tokens.begin())};
}

std::string identity_normalizer(const std::string& text) { return text; }

NormalizedEssay normalize_essay(const std::string& essay_id, const std::string& raw,
                                const TextNormalizer& normalizer,
                                const std::vector<GoldSpan>& gold) {
  NormalizedEssay out;
  out.essay.id = essay_id;
  out.essay.raw_text = raw;
  out.essay.normalized_text = raw;
  if (normalizer) {
    try {
      out.essay.normalized_text = normalizer(raw);
    } catch (const std::exception& e) {
      out.warnings.push_back("essay " + essay_id + ": normalizer failed (" + e.what() +
                             "), using original text");
      out.essay.normalized_text = raw;
    }
  }
  out.essay.tokens = tokenize(out.essay.normalized_text);

  if (out.essay.normalized_text == raw) {
    out.spans = gold;
    return out;
  }

  const std::vector<Token> raw_tokens = tokenize(raw);
  std::vector<std::string_view> source;
  source.reserve(raw_tokens.size());
  for (const Token& t : raw_tokens) source.push_back(std::string_view(raw).substr(t.begin, t.size()));
  const std::vector<std::string_view> target = out.essay.token_texts();
  const TokenAlignment alignment = align_tokens(source, target);

  for (const GoldSpan& span : gold) {
    GoldSpan projected = span;
    projected.tokens = {alignment.source_to_target.at(span.tokens.begin),
                        alignment.source_to_target.at(span.tokens.end)};
    if (projected.tokens.empty()) {
      out.warnings.push_back("essay " + essay_id + ": span " + span.discourse_id +
                             " vanished after normalization, excluded");
      out.degenerate.push_back(span);
      continue;
    }
    out.spans.push_back(std::move(projected));
  }
  for (std::size_t k = 0; k < out.spans.size(); ++k) out.spans[k].index = k;
  return out;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct PendingRow {
  std::size_t line;
  std::string discourse_id;
  std::string text;
  ArgType type;
  QualityLabel quality;
};

}  // namespace

LoadedCorpus load_corpus(const LoadOptions& options) {
  LoadedCorpus corpus;
  LoadReport& report = corpus.report;

  std::vector<csv::Row> rows;
  try {
    rows = csv::parse(read_file(options.annotations));
  } catch (const csv::ParseError& e) {
    throw CorpusError(options.annotations.string() + ": " + e.what());
  }
  if (rows.empty()) throw CorpusError(options.annotations.string() + ": missing header row");

  const std::vector<std::string> required = {"discourse_id", "essay_id", "discourse_text",
                                             "discourse_type", "discourse_effectiveness"};
  std::map<std::string, std::size_t> column;
  for (std::size_t k = 0; k < rows[0].fields.size(); ++k) column[rows[0].fields[k]] = k;
  std::vector<std::size_t> idx;
  for (const auto& name : required) {
    auto it = column.find(name);
    if (it == column.end()) {
      throw CorpusError(options.annotations.string() + ": missing column '" + name + "'");
    }
    idx.push_back(it->second);
  }
  const std::size_t width = *std::max_element(idx.begin(), idx.end()) + 1;

  // Rows grouped per essay, keeping file order.
  std::vector<std::string> essay_order;
  std::unordered_map<std::string, std::vector<PendingRow>> by_essay;
  std::unordered_set<std::string> discourse_ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const csv::Row& row = rows[r];
    ++report.annotation_rows;
    if (row.fields.size() < width) {
      report.row_errors.push_back({row.line, "", "", "too few columns"});
      continue;
    }
    const std::string& discourse_id = row.fields[idx[0]];
    const std::string& essay_id = row.fields[idx[1]];
    LoadIssue issue{row.line, essay_id, discourse_id, ""};
    if (!discourse_ids.insert(discourse_id).second) {
      issue.message = "duplicate discourse_id";
      report.row_errors.push_back(issue);
      continue;
    }
    auto type = try_parse_arg_type(row.fields[idx[3]]);
    auto quality = try_parse_quality(row.fields[idx[4]]);
    if (!type || !quality) {
      issue.message = !type ? "unknown discourse_type '" + row.fields[idx[3]] + "'"
                            : "unknown discourse_effectiveness '" + row.fields[idx[4]] + "'";
      report.row_errors.push_back(issue);
      continue;
    }
    auto [it, inserted] = by_essay.try_emplace(essay_id);
    if (inserted) essay_order.push_back(essay_id);
    it->second.push_back({row.line, discourse_id, row.fields[idx[2]], *type, *quality});
  }

  std::unordered_map<std::string, SplitName> manifest;
  if (options.split_manifest) {
    std::vector<csv::Row> split_rows;
    try {
      split_rows = csv::parse(read_file(*options.split_manifest));
    } catch (const csv::ParseError& e) {
      throw CorpusError(options.split_manifest->string() + ": " + e.what());
    }
    for (const csv::Row& row : split_rows) {
      if (row.fields.size() < 2) continue;
      auto split = try_parse_split(row.fields[1]);
      if (!split) continue;  // header or unknown split name
      manifest[row.fields[0]] = *split;
    }
  }

  std::map<SplitName, std::vector<AnnotatedEssay>> grouped;
  for (const std::string& essay_id : essay_order) {
    const auto& pending = by_essay[essay_id];
    const fs::path file = options.essay_dir / (essay_id + ".txt");
    std::error_code ec;
    if (!fs::is_regular_file(file, ec)) {
      report.essay_errors.push_back({0, essay_id, "", "missing essay file " + file.string()});
      for (const auto& p : pending) {
        report.orphaned.push_back({p.line, essay_id, p.discourse_id, "essay file missing"});
      }
      continue;
    }

    SplitName split = options.default_split;
    if (options.split_manifest) {
      auto it = manifest.find(essay_id);
      if (it == manifest.end()) {
        report.unassigned.push_back(essay_id);
        continue;
      }
      split = it->second;
    }

    const std::string raw = read_file(file);
    const std::vector<Token> raw_tokens = tokenize(raw);
    std::vector<GoldSpan> spans;
    std::size_t cursor = 0;
    for (const PendingRow& p : pending) {
      LoadIssue issue{p.line, essay_id, p.discourse_id, ""};
      CharRange chars;
      try {
        chars = locate_span(raw, p.text, cursor);
      } catch (const NotLocated&) {
        // Out-of-order annotation rows: retry from the top and rely on the
        // overlap check below.
        try {
          chars = locate_span(raw, p.text, 0);
        } catch (const NotLocated& e) {
          issue.message = e.what();
          report.unlocated.push_back(issue);
          continue;
        }
      }
      TokenRange range = tokens_covering(raw_tokens, chars);
      // A shared token with an earlier span (text glued across the boundary)
      // goes to the earlier span.
      bool overlaps = false;
      for (const GoldSpan& s : spans) {
        if (range.begin < s.tokens.end && s.tokens.begin < range.end) {
          if (range.begin >= s.tokens.begin && range.begin + 1 == s.tokens.end) {
            range.begin = s.tokens.end;
          } else {
            overlaps = true;
          }
        }
      }
      if (overlaps || range.empty()) {
        issue.message = "span overlaps an earlier span of the same essay";
        report.row_errors.push_back(issue);
        continue;
      }
      cursor = std::max(cursor, chars.end);
      GoldSpan span;
      span.essay_id = essay_id;
      span.discourse_id = p.discourse_id;
      span.tokens = range;
      span.arg_type = p.type;
      span.quality = p.quality;
      spans.push_back(std::move(span));
      ++report.located_rows;
    }
    std::sort(spans.begin(), spans.end(),
              [](const GoldSpan& a, const GoldSpan& b) { return a.tokens.begin < b.tokens.begin; });
    for (std::size_t k = 0; k < spans.size(); ++k) spans[k].index = k;

    NormalizedEssay normalized = normalize_essay(essay_id, raw, options.normalizer, spans);
    for (auto& w : normalized.warnings) report.warnings.push_back(std::move(w));
    for (const GoldSpan& d : normalized.degenerate) {
      report.row_errors.push_back({0, essay_id, d.discourse_id, "span empty after normalization"});
    }
    if (normalized.spans.empty()) {
      report.essay_errors.push_back({0, essay_id, "", "no located spans"});
      continue;
    }
    grouped[split].push_back({std::move(normalized.essay), std::move(normalized.spans)});
  }

  for (auto& [name, essays] : grouped) {
    std::sort(essays.begin(), essays.end(), [](const AnnotatedEssay& a, const AnnotatedEssay& b) {
      return a.essay.id < b.essay.id;
    });
    corpus.splits.push_back({name, std::move(essays)});
  }
  return corpus;
}

namespace {

using nlohmann::json;

json issues_to_json(const std::vector<LoadIssue>& issues) {
  json out = json::array();
  for (const auto& i : issues) {
    out.push_back({{"line", i.line}, {"essay_id", i.essay_id},
                   {"discourse_id", i.discourse_id}, {"message", i.message}});
  }
  return out;
}

std::vector<LoadIssue> issues_from_json(const json& in) {
  std::vector<LoadIssue> out;
  for (const auto& j : in) {
    out.push_back({j.at("line").get<std::size_t>(), j.at("essay_id").get<std::string>(),
                   j.at("discourse_id").get<std::string>(), j.at("message").get<std::string>()});
  }
  return out;
}

}  // namespace

void save_corpus_bundle(const LoadedCorpus& corpus, const fs::path& path) {
  json splits = json::array();
  for (const CorpusSplit& split : corpus.splits) {
    json essays = json::array();
    for (const AnnotatedEssay& ae : split.essays) {
      json spans = json::array();
      for (const GoldSpan& s : ae.spans) {
        spans.push_back({{"discourse_id", s.discourse_id},
                         {"start_token", s.tokens.begin},
                         {"end_token", s.tokens.end},
                         {"type", to_string(s.arg_type)},
                         {"quality", to_string(s.quality)}});
      }
      essays.push_back({{"id", ae.essay.id},
                        {"raw_text", ae.essay.raw_text},
                        {"normalized_text", ae.essay.normalized_text},
                        {"spans", std::move(spans)}});
    }
    splits.push_back({{"name", to_string(split.name)}, {"essays", std::move(essays)}});
  }
  const LoadReport& r = corpus.report;
  json report = {{"annotation_rows", r.annotation_rows},
                 {"located_rows", r.located_rows},
                 {"orphaned", issues_to_json(r.orphaned)},
                 {"unlocated", issues_to_json(r.unlocated)},
                 {"row_errors", issues_to_json(r.row_errors)},
                 {"essay_errors", issues_to_json(r.essay_errors)},
                 {"warnings", r.warnings},
                 {"unassigned", r.unassigned}};
  json bundle = {{"format", "argmine-corpus"}, {"version", 1},
                 {"splits", std::move(splits)}, {"report", std::move(report)}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("cannot write " + path.string());
  out << bundle.dump() << '\n';
}

LoadedCorpus load_corpus_bundle(const fs::path& path) {
  json bundle;
  try {
    bundle = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw CorpusError(path.string() + ": " + e.what());
  }
  if (bundle.value("format", "") != "argmine-corpus") {
    throw CorpusError(path.string() + ": not a corpus bundle");
  }
  LoadedCorpus corpus;
  try {
    for (const json& js : bundle.at("splits")) {
      CorpusSplit split;
      auto name = try_parse_split(js.at("name").get<std::string>());
      if (!name) throw CorpusError("bad split name");
      split.name = *name;
      for (const json& je : js.at("essays")) {
        AnnotatedEssay ae;
        ae.essay.id = je.at("id").get<std::string>();
        ae.essay.raw_text = je.at("raw_text").get<std::string>();
        ae.essay.normalized_text = je.at("normalized_text").get<std::string>();
        ae.essay.tokens = tokenize(ae.essay.normalized_text);
        for (const json& jspan : je.at("spans")) {
          GoldSpan s;
          s.essay_id = ae.essay.id;
          s.discourse_id = jspan.at("discourse_id").get<std::string>();
          s.index = ae.spans.size();
          s.tokens = {jspan.at("start_token").get<std::size_t>(),
                      jspan.at("end_token").get<std::size_t>()};
          s.arg_type = parse_arg_type(jspan.at("type").get<std::string>());
          s.quality = parse_quality(jspan.at("quality").get<std::string>());
          if (s.tokens.empty() || s.tokens.end > ae.essay.token_count()) {
            throw CorpusError("span out of range in essay " + ae.essay.id);
          }
          ae.spans.push_back(std::move(s));
        }
        split.essays.push_back(std::move(ae));
      }
      corpus.splits.push_back(std::move(split));
    }
    const json& r = bundle.at("report");
    corpus.report.annotation_rows = r.at("annotation_rows").get<std::size_t>();
    corpus.report.located_rows = r.at("located_rows").get<std::size_t>();
    corpus.report.orphaned = issues_from_json(r.at("orphaned"));
    corpus.report.unlocated = issues_from_json(r.at("unlocated"));
    corpus.report.row_errors = issues_from_json(r.at("row_errors"));
    corpus.report.essay_errors = issues_from_json(r.at("essay_errors"));
    corpus.report.warnings = r.at("warnings").get<std::vector<std::string>>();
    corpus.report.unassigned = r.at("unassigned").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw CorpusError(path.string() + ": " + e.what());
  } catch (const LabelError& e) {
    throw CorpusError(path.string() + ": " + e.what());
  }
  return corpus;
}

LoadedCorpus open_corpus(const fs::path& path, SplitName default_split) {
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    LoadOptions options;
    options.essay_dir = path / "essays";
    options.annotations = path / "annotations.csv";
    if (fs::exists(path / "splits.csv", ec)) options.split_manifest = path / "splits.csv";
    options.default_split = default_split;
    return load_corpus(options);
  }
  return load_corpus_bundle(path);
}

}  // namespace argmine
