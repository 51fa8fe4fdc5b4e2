#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "argmine/corpus.hpp"
#include "argmine/evaluation.hpp"
#include "argmine/inference_client.hpp"
#include "argmine/output_parser.hpp"
#include "argmine/predictions.hpp"
#include "argmine/prompt_builder.hpp"

namespace argmine {

// One cell of the experiment matrix.
struct ExperimentConfig {
  std::string name = "default";
  Setup setup = Setup::kJoint;
  // Which labels to predict. The joint setup needs both.
  bool type = true;
  bool quality = true;
  SegmentationSource segmentation = SegmentationSource::kGold;
  PromptMode mode = PromptMode::kFewShot;
  std::size_t shots = 0;
  ModelConfig model;
  // Segmenter, when it differs from the classifier.
  std::optional<ModelConfig> segmentation_model;
  std::size_t runs = 3;
  // Concurrent model calls per essay.
  std::size_t parallelism = 4;
  SplitName split = SplitName::kTest;

  // Throws ConfigError when the combination is not constructible.
  void validate() const;
  EvalContext context() const;
  // TypeAndQuality for joint; TypeOnly and/or QualityOnly otherwise.
  std::vector<TaskKind> classification_tasks() const;
  const ModelConfig& segmenter() const { return segmentation_model ? *segmentation_model : model; }
};

// Rendered few-shot examples per task, reused for every essay and span.
struct ShotSet {
  std::vector<ShotExample> segmentation;
  std::vector<ShotExample> type;
  std::vector<ShotExample> quality;
  std::vector<ShotExample> joint;

  const std::vector<ShotExample>& for_task(TaskKind task) const;
};

// The first `count` essays of `source` in id order. Throws ConfigError when
// there are fewer.
ShotSet select_shots(const CorpusSplit* source, std::size_t count);

struct SegmentationOutcome {
  OutcomeStatus status = OutcomeStatus::kDiscarded;
  std::optional<PredictedSegmentation> segmentation;
  std::size_t attempts = 0;
  std::string error;

  bool ok() const { return status == OutcomeStatus::kValid; }
};

struct ClassificationOutcome {
  // One per segment, in segment order; labels are absent where discarded.
  std::vector<SpanPrediction> spans;
  std::size_t essay_discards = 0;  // whole-essay fine-tuned calls
  bool transport_failed = false;
  std::string error;
};

class ExperimentFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runs the model calls of one configuration. Thread-safe for concurrent
// essays when the completer is.
class Pipeline {
 public:
  Pipeline(ExperimentConfig config, Completer& completer, ShotSet shots = {});

  SegmentationOutcome run_segmentation(const Essay& essay) const;

  // `segments` must partition the essay. Few-shot mode sends one prompt per
  // segment and task; fine-tuned mode one interleaved call per task.
  ClassificationOutcome run_classification(const Essay& essay,
                                           std::span<const TokenRange> segments) const;

  // Segmentation (unless gold) then classification. In gold mode the
  // predicted spans are the gold spans.
  EssayPrediction predict(const AnnotatedEssay& essay) const;

  std::vector<EssayPrediction> predict_split(const CorpusSplit& split) const;

  const ExperimentConfig& config() const { return config_; }
  const OutcomeLog& log() const { return log_; }

 private:
  ExperimentConfig config_;
  Completer& completer_;
  ShotSet shots_;
  mutable OutcomeLog log_;
};

struct ExperimentResult {
  std::vector<PredictionsFile> predictions;  // one per run
  std::vector<EvalReport> reports;           // one per run
  AggregateReport aggregate;
  // Discarded outcomes seen by the inference client across all runs.
  std::size_t client_discards = 0;
};

// Repeats the configuration `runs` times over `split`. A fixed model seed is
// offset by the run index. Throws ExperimentFailed when a run processes no
// essay successfully.
ExperimentResult run_experiment(const CorpusSplit& split, const ExperimentConfig& config,
                                Completer& completer, const CorpusSplit* shot_source = nullptr);

class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct AnalysisSegment {
  CharRange chars;  // on AnalysisResult::text
  TokenRange tokens;
  std::optional<ArgType> type;
  std::optional<QualityLabel> quality;
  bool discarded = false;  // some label was requested but not obtained
};

struct AnalysisResult {
  std::string text;  // normalized essay
  // "ok", "partial" (some labels discarded), "segmentation_discarded" or
  // "failed" (transport).
  std::string status = "ok";
  std::string error;
  std::vector<AnalysisSegment> segments;  // tile [0, text.size())
};

struct AnalyzeOptions {
  ExperimentConfig config;  // segmentation is always inferred here
  TextNormalizer normalizer;
};

// Segments and classifies free text. Throws InputError for blank text before
// any model call.
AnalysisResult analyze(const std::string& text, const AnalyzeOptions& options,
                       Completer& completer, const ShotSet& shots = {});

nlohmann::json to_json(const AnalysisResult& result);

}  // namespace argmine
