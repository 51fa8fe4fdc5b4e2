#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "argmine/corpus.hpp"
#include "argmine/eval_metrics.hpp"
#include "argmine/labels.hpp"
#include "argmine/prompt_builder.hpp"

namespace argmine {

enum class Setup { kIndividual, kJoint };

std::string_view to_string(Setup setup);
Setup parse_setup(std::string_view text);

// What was run; travels with every predictions file and report.
struct EvalContext {
  std::string experiment = "default";
  std::string model;
  PromptMode mode = PromptMode::kFewShot;
  std::size_t shots = 0;
  Setup setup = Setup::kJoint;
  SegmentationSource segmentation = SegmentationSource::kGold;
  bool type = true;
  bool quality = true;
  SplitName split = SplitName::kTest;

  friend bool operator==(const EvalContext&, const EvalContext&) = default;
};

struct SpanPrediction {
  TokenRange tokens;
  std::optional<ArgType> type;
  std::optional<QualityLabel> quality;
  // Completions spent on this span and how many of its calls were discarded.
  std::size_t attempts = 0;
  std::size_t discards = 0;

  friend bool operator==(const SpanPrediction&, const SpanPrediction&) = default;
};

enum class EssayStatus {
  kOk,
  kDiscarded,  // segmentation failed five times
  kFailed,     // transport failure
};

std::string_view to_string(EssayStatus status);

struct EssayPrediction {
  std::string essay_id;
  EssayStatus status = EssayStatus::kOk;
  std::size_t segmentation_attempts = 0;
  // Discarded whole-essay classification calls (fine-tuned mode).
  std::size_t classification_discards = 0;
  std::string error;
  std::vector<SpanPrediction> spans;

  // Discarded outcomes attributable to this essay.
  std::size_t discard_events() const;
  friend bool operator==(const EssayPrediction&, const EssayPrediction&) = default;
};

class PredictionsFormatError : public std::runtime_error {
 public:
  PredictionsFormatError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct PredictionsFile {
  EvalContext context;
  std::size_t run_index = 0;
  // Hash of the run configuration that produced the file, if known.
  std::string config_hash;
  std::vector<EssayPrediction> essays;
};

// Line-delimited JSON: one header object, then one object per essay.
void write_predictions(std::ostream& out, const PredictionsFile& file);
void write_predictions(const std::filesystem::path& path, const PredictionsFile& file);
// Throws PredictionsFormatError naming the offending line.
PredictionsFile read_predictions(std::istream& in);
PredictionsFile read_predictions(const std::filesystem::path& path);

}  // namespace argmine
