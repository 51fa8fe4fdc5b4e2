#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "argmine/corpus.hpp"
#include "argmine/labels.hpp"

namespace argmine {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

enum class PromptMode { kFewShot, kFineTuned };

std::string_view to_string(PromptMode mode);
PromptMode parse_prompt_mode(std::string_view text);

inline constexpr std::size_t kMaxShots = 4;

// Wire format shared by the renderers and the output parser.
namespace format {

inline constexpr std::string_view kSep = "<SEP>";

// "<Lead>", "<Adequate>" or "<Lead, Adequate>".
std::string type_marker(ArgType type);
std::string quality_marker(QualityLabel quality);
std::string joint_marker(ArgType type, QualityLabel quality);

// Inserts " " + markers[k] right after the last character of segment k.
// Segments must partition the essay's tokens; everything else in the text,
// including whitespace, is kept byte-for-byte.
std::string render_marked(const Essay& essay, std::span<const TokenRange> segments,
                          std::span<const std::string> markers);

// Segment texts between "<SEP>" markers (whitespace-trimmed). Text after the
// last marker counts as a segment only when it is not blank.
std::vector<std::string> split_segments(std::string_view segmented);

std::size_t count_separators(std::string_view text);

}  // namespace format

// Partition of the essay induced by gold spans: segment k ends where gold
// span k ends, the last segment runs to the end of the essay. Unannotated
// gaps attach to the following span.
std::vector<TokenRange> gold_partition(const AnnotatedEssay& essay);

// The essay with a "<SEP>" after each segment.
std::string render_segmented(const Essay& essay, std::span<const TokenRange> segments);

struct ShotExample {
  TaskKind task = TaskKind::kSegmentation;
  std::size_t marker_count = 0;
  std::string text;
};

ShotExample render_shot_example(const AnnotatedEssay& essay, TaskKind task);

struct Prompt {
  TaskKind task = TaskKind::kSegmentation;
  PromptMode mode = PromptMode::kFewShot;
  std::size_t shot_count = 0;
  std::string body;
  std::optional<std::size_t> target_argument_index;
};

// Examples, essay, query, output requirement. Throws ConfigError for more
// than four shots or shots rendered for another task.
Prompt build_segmentation_prompt(const Essay& essay, std::span<const ShotExample> shots);

// Examples, segmented essay, query, output requirement, target argument.
// Throws IndexError when the target is beyond the segment count.
Prompt build_classification_prompt(std::string_view segmented_essay, std::size_t target_index,
                                   TaskKind task, std::span<const ShotExample> shots);

// Bare input for a fine-tuned model: the essay for segmentation, the
// "<SEP>"-segmented essay for the classification tasks.
std::string render_finetuned_input(std::string_view text, TaskKind task);
Prompt build_finetuned_prompt(std::string_view text, TaskKind task);

// Verbatim template assets.
namespace templates {
std::string_view segmentation_query();
std::string_view segmentation_output();
std::string_view type_query();
std::string_view quality_query();
std::string_view output_requirement(TaskKind task);
std::string_view query(TaskKind task);
}  // namespace templates

}  // namespace argmine
