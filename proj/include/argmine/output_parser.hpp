#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "argmine/corpus.hpp"
#include "argmine/inference_client.hpp"
#include "argmine/labels.hpp"
#include "argmine/prompt_builder.hpp"

namespace argmine {

enum class ParseErrorKind { kFormat, kKey, kLabel, kArity, kAlignment };

std::string_view to_string(ParseErrorKind kind);

// Every model-output rejection. All kinds are retryable.
class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ParseErrorKind kind() const { return kind_; }

 private:
  ParseErrorKind kind_;
};

struct LabelAnswer {
  std::optional<ArgType> type;
  std::optional<QualityLabel> quality;

  friend bool operator==(const LabelAnswer&, const LabelAnswer&) = default;
};

// Finds the first balanced {...} region in `raw` that parses as a JSON object
// and reads the key the task asks for: TYPE, QUALITY or "TYPE AND QUALITY".
LabelAnswer parse_label_object(std::string_view raw, TaskKind task);

struct InterleavedSegment {
  std::string text;
  LabelAnswer label;
};

using InterleavedParse = std::vector<InterleavedSegment>;

// Label-interleaved output of a fine-tuned model: "text <Claim, Adequate> text
// <Evidence, Effective>". With `expected_segments`, a different marker count
// is a format error.
InterleavedParse parse_interleaved(std::string_view raw, TaskKind task,
                                   std::optional<std::size_t> expected_segments = std::nullopt);

// Model output with "<SEP>" markers (matched case- and space-insensitively)
// tokenized with the markers taken out.
struct RawSegmentation {
  std::string text;
  std::vector<std::string> tokens;
  // Number of output tokens preceding each marker.
  std::vector<std::size_t> marker_positions;

  std::vector<std::string> segments() const;
};

RawSegmentation parse_raw_segmentation(std::string_view text);

struct PredictedSegmentation {
  std::string essay_id;
  std::size_t token_count = 0;
  // Strictly increasing segment end indices; the last one is token_count.
  std::vector<std::size_t> ends;

  std::vector<TokenRange> spans() const;
  friend bool operator==(const PredictedSegmentation&, const PredictedSegmentation&) = default;
};

PredictedSegmentation segmentation_from_spans(std::string essay_id, std::size_t token_count,
                                              const std::vector<TokenRange>& spans);

// Edit budget for reproductions of the essay: distance / token_count.
inline constexpr double kMaxAlignmentCostRatio = 0.4;

// Projects every marker onto the original tokens through a minimum edit
// distance alignment. Throws ParseError (kFormat without markers, kAlignment
// when the edit distance exceeds 40% of the essay's tokens).
PredictedSegmentation align_segmentation(const Essay& original, const RawSegmentation& raw);

using ParsedOutput = std::variant<LabelAnswer, InterleavedParse, PredictedSegmentation>;

using OutputValidator = Validator<ParsedOutput>;

// The checker the retry loop runs on every completion. `expected_segments`
// applies to fine-tuned classification (marker count must match).
OutputValidator make_validator(TaskKind task, PromptMode mode, const Essay& original,
                               std::optional<std::size_t> expected_segments = std::nullopt);

}  // namespace argmine
