#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "argmine/labels.hpp"
#include "argmine/text.hpp"

namespace argmine {

// Half-open token range [begin, end).
struct TokenRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return end <= begin; }
  friend bool operator==(const TokenRange&, const TokenRange&) = default;
};

struct Essay {
  std::string id;
  std::string raw_text;
  std::string normalized_text;
  // Over normalized_text.
  std::vector<Token> tokens;

  std::size_t token_count() const { return tokens.size(); }
  std::string_view token_text(std::size_t index) const;
  std::vector<std::string_view> token_texts() const;
  // Text covered by a token range, from the first token's first byte to the
  // last token's last byte.
  std::string_view text_of(TokenRange range) const;

  friend bool operator==(const Essay&, const Essay&) = default;
};

// Builds an Essay whose raw and normalized text are both `text`.
Essay make_essay(std::string id, std::string text);

struct GoldSpan {
  std::string essay_id;
  std::string discourse_id;
  std::size_t index = 0;
  TokenRange tokens;
  ArgType arg_type = ArgType::kLead;
  QualityLabel quality = QualityLabel::kAdequate;

  friend bool operator==(const GoldSpan&, const GoldSpan&) = default;
};

struct AnnotatedEssay {
  Essay essay;
  std::vector<GoldSpan> spans;

  std::vector<TokenRange> span_ranges() const;
  friend bool operator==(const AnnotatedEssay&, const AnnotatedEssay&) = default;
};

enum class SplitName { kTrain, kValidation, kTest };

std::string_view to_string(SplitName split);
std::optional<SplitName> try_parse_split(std::string_view text);

struct CorpusSplit {
  SplitName name = SplitName::kTest;
  std::vector<AnnotatedEssay> essays;

  std::size_t span_count() const;
  const AnnotatedEssay* find(std::string_view essay_id) const;
  friend bool operator==(const CorpusSplit&, const CorpusSplit&) = default;
};

class NotLocated : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// First occurrence of `needle` in `haystack` at or after byte `search_from`,
// where any whitespace run in either string matches any whitespace run in the
// other and leading/trailing whitespace of `needle` is ignored. Throws
// NotLocated.
CharRange locate_span(std::string_view haystack, std::string_view needle,
                      std::size_t search_from);

// Tokens intersecting the byte range.
TokenRange tokens_covering(const std::vector<Token>& tokens, CharRange chars);

using TextNormalizer = std::function<std::string(const std::string&)>;

std::string identity_normalizer(const std::string& text);

// Posts the text as a plain-text body to `url` and returns the response body.
TextNormalizer http_normalizer(std::string url);

struct NormalizedEssay {
  Essay essay;
  std::vector<GoldSpan> spans;
  // Spans whose re-projection came out empty; excluded from `spans`.
  std::vector<GoldSpan> degenerate;
  std::vector<std::string> warnings;
};

// Runs the normalizer (falling back to identity if it throws) and re-projects
// gold spans given over the raw-text tokens onto the normalized tokens via
// token edit-distance alignment.
NormalizedEssay normalize_essay(const std::string& essay_id, const std::string& raw,
                                const TextNormalizer& normalizer,
                                const std::vector<GoldSpan>& gold);

struct LoadIssue {
  std::size_t line = 0;  // annotation table line, 0 for essay-level issues
  std::string essay_id;
  std::string discourse_id;
  std::string message;
};

struct LoadReport {
  std::size_t annotation_rows = 0;
  std::size_t located_rows = 0;
  // Rows whose essay file is missing.
  std::vector<LoadIssue> orphaned;
  // Rows whose discourse_text was not found in the essay.
  std::vector<LoadIssue> unlocated;
  // Malformed rows: unknown labels, duplicate ids, overlaps.
  std::vector<LoadIssue> row_errors;
  std::vector<LoadIssue> essay_errors;
  std::vector<std::string> warnings;
  // Essays without a split assignment when a manifest is used.
  std::vector<std::string> unassigned;
};

struct LoadOptions {
  std::filesystem::path essay_dir;
  std::filesystem::path annotations;
  std::optional<std::filesystem::path> split_manifest;
  // Split used for every essay when no manifest is given.
  SplitName default_split = SplitName::kTest;
  TextNormalizer normalizer;
};

struct LoadedCorpus {
  std::vector<CorpusSplit> splits;  // train, validation, test order; empty ones omitted
  LoadReport report;

  const CorpusSplit* split(SplitName name) const;
};

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws CorpusError when the annotation table itself is unreadable or lacks
// a required column. Per-row problems go to the report.
LoadedCorpus load_corpus(const LoadOptions& options);

// Cached corpus bundle (JSON) written by `argmine ingest`.
void save_corpus_bundle(const LoadedCorpus& corpus, const std::filesystem::path& path);
LoadedCorpus load_corpus_bundle(const std::filesystem::path& path);

// Accepts either a bundle file or a directory laid out as essays/*.txt,
// annotations.csv and optional splits.csv.
LoadedCorpus open_corpus(const std::filesystem::path& path,
                         SplitName default_split = SplitName::kTest);

}  // namespace argmine
