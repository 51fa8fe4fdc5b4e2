#include <gtest/gtest.h>

#include <map>
#include <set>

#include "argmine/pipeline.hpp"
#include "support/mocks.hpp"

namespace argmine {
namespace {

using testing::GoldCompleter;
using testing::mock_model;
using testing::ScriptedCompleter;
using testing::synthetic_split;

ExperimentConfig base_config() {
  ExperimentConfig c;
  c.model = mock_model();
  c.runs = 1;
  return c;
}

double metric(const EvalReport& r, std::string_view group, std::string_view metric_name) {
  for (const Quantity& q : flatten(r)) {
    if (q.group == group && q.label.empty() && q.metric == metric_name) return q.value;
  }
  ADD_FAILURE() << "missing " << group << "." << metric_name;
  return -1;
}

std::size_t discard_events(const std::vector<EssayPrediction>& essays) {
  std::size_t n = 0;
  for (const auto& e : essays) n += e.discard_events();
  return n;
}

const CorpusSplit& isaac_split() {
  static const LoadedCorpus corpus = open_corpus(testing::data_dir() + "/isaac");
  return *corpus.split(SplitName::kTest);
}

// Fails every classification of the span at `bad_index`.
class FailingSpanCompleter : public GoldCompleter {
 public:
  FailingSpanCompleter(const CorpusSplit& split, std::size_t bad_index) : GoldCompleter(split), bad_(bad_index) {}

 protected:
  std::string respond(const Prompt& prompt, const ModelConfig& config) override {
    if (prompt.task != TaskKind::kSegmentation && prompt.target_argument_index == bad_) return "I cannot decide.";
    return GoldCompleter::respond(prompt, config);
  }

 private:
  std::size_t bad_;
};

// Picks a type from the model seed and the span index.
class SeededTypeCompleter : public Completer {
 public:
  std::string complete(const Prompt& prompt, const ModelConfig& config) override {
    const auto seed = static_cast<std::size_t>(config.seed.value_or(0));
    {
      std::lock_guard lock(mutex_);
      seeds_.insert(seed);
    }
    const std::size_t pick = (seed * 31 + prompt.target_argument_index.value_or(0) * 7) % kAllArgTypes.size();
    return "{\"TYPE\": [\"" + std::string(to_string(kAllArgTypes[pick])) + "\"]}";
  }
  std::set<std::size_t> seeds() const {
    std::lock_guard lock(mutex_);
    return seeds_;
  }

 private:
  mutable std::mutex mutex_;
  std::set<std::size_t> seeds_;
};

TEST(Pipeline, GoldSegmentationWithGoldAnswersIsPerfect) {
  const CorpusSplit& split = synthetic_split(SplitName::kTest);
  GoldCompleter mock(split);
  const ExperimentResult result = run_experiment(split, base_config(), mock);
  ASSERT_EQ(result.reports.size(), 1u);
  const EvalReport& r = result.reports[0];
  EXPECT_DOUBLE_EQ(metric(r, "type", "macro_f1"), 100.0);
  EXPECT_DOUBLE_EQ(metric(r, "quality", "macro_f1"), 100.0);
  EXPECT_FALSE(r.segmentation.has_value());
  EXPECT_EQ(r.discards.total_discard_events(), 0u);
  EXPECT_EQ(result.client_discards, 0u);
}

TEST(Pipeline, GoldModeNeverCallsTheSegmenter) {
  const CorpusSplit& split = synthetic_split(SplitName::kTest);
  GoldCompleter mock(split);
  ExperimentConfig c = base_config();
  c.setup = Setup::kIndividual;
  (void)run_experiment(split, c, mock);
  EXPECT_EQ(mock.count(TaskKind::kSegmentation), 0u);
  // Individual setup: one type and one quality call per span.
  EXPECT_EQ(mock.count(TaskKind::kTypeOnly), split.span_count());
  EXPECT_EQ(mock.count(TaskKind::kQualityOnly), split.span_count());
  EXPECT_EQ(mock.count(TaskKind::kTypeAndQuality), 0u);
}

TEST(Pipeline, GoldModeReportsTheGoldSpans) {
  const CorpusSplit& split = synthetic_split(SplitName::kTest);
  GoldCompleter mock(split);
  Pipeline pipeline(base_config(), mock);
  for (const AnnotatedEssay& e : split.essays) {
    const EssayPrediction p = pipeline.predict(e);
    ASSERT_EQ(p.spans.size(), e.spans.size());
    for (std::size_t k = 0; k < e.spans.size(); ++k) {
      EXPECT_EQ(p.spans[k].tokens, e.spans[k].tokens);
      EXPECT_EQ(p.spans[k].type, e.spans[k].arg_type);
      EXPECT_EQ(p.spans[k].quality, e.spans[k].quality);
    }
  }
}

TEST(Pipeline, InferredEchoIsPerfect) {
  const CorpusSplit& split = synthetic_split(SplitName::kTest);
  GoldCompleter mock(split);
  ExperimentConfig c = base_config();
  c.segmentation = SegmentationSource::kInferred;
  const ExperimentResult result = run_experiment(split, c, mock);
  const EvalReport& r = result.reports[0];
  EXPECT_DOUBLE_EQ(metric(r, "segmentation", "macro_f1"), 100.0);
  EXPECT_DOUBLE_EQ(metric(r, "overlap", "overlap_percent"), 100.0);
  // No gold span goes unmatched, so Echec stays out of the average.
  EXPECT_DOUBLE_EQ(metric(r, "type", "macro_f1"), 100.0);
  EXPECT_DOUBLE_EQ(metric(r, "quality", "macro_f1"), 100.0);
  EXPECT_FALSE(r.type->echec_counted);
  for (const LabelScore& s : r.type->labels) {
    if (s.label != "Echec") EXPECT_DOUBLE_EQ(s.score.f1, 100.0) << s.label;
  }
  EXPECT_EQ(r.discards.total_discard_events(), 0u);
  EXPECT_EQ(mock.count(TaskKind::kSegmentation), split.essays.size());
}

TEST(Pipeline, FewShotPromptsStillResolve) {
  const CorpusSplit& split = synthetic_split(SplitName::kTest);
  GoldCompleter mock(split);
  ExperimentConfig c = base_config();
  c.segmentation = SegmentationSource::kInferred;
  c.shots = 3;
  const ExperimentResult result = run_experiment(split, c, mock, &synthetic_split(SplitName::kTrain));
  EXPECT_DOUBLE_EQ(metric(result.reports[0], "segmentation", "macro_f1"), 100.0);
}

TEST(Pipeline, FineTunedModeIsPerfectToo) {
  const CorpusSplit& split = synthetic_split(SplitName::kTest);
  for (argmine::Setup setup : {argmine::Setup::kJoint, argmine::Setup::kIndividual}) {
    GoldCompleter mock(split);
    ExperimentConfig c = base_config();
    c.mode = PromptMode::kFineTuned;
    c.segmentation = SegmentationSource::kInferred;
    c.setup = setup;
    const ExperimentResult result = run_experiment(split, c, mock);
    const EvalReport& r = result.reports[0];
    EXPECT_DOUBLE_EQ(metric(r, "segmentation", "macro_f1"), 100.0);
    EXPECT_DOUBLE_EQ(metric(r, "type", "macro_f1"), 100.0);
    EXPECT_DOUBLE_EQ(metric(r, "quality", "macro_f1"), 100.0);
    // One interleaved call per essay and task.
    const std::size_t per_essay = setup == Setup::kJoint ? 1 : 2;
    EXPECT_EQ(mock.calls().size(), split.essays.size() * (1 + per_essay));
  }
}

TEST(Pipeline, ConstantQualityAnswer) {
  const CorpusSplit& split = synthetic_split(SplitName::kTest);
  ScriptedCompleter mock([](const Prompt&, std::size_t) { return std::string(R"({"QUALITY": ["Adequate"]})"); });
  ExperimentConfig c = base_config();
  c.setup = Setup::kIndividual;
  c.type = false;
  const ExperimentResult result = run_experiment(split, c, mock);
  const EvalReport& r = result.reports[0];
  EXPECT_FALSE(r.type.has_value());

  std::size_t adequate = 0;
  for (const auto& e : split.essays) {
    for (const auto& s : e.spans) adequate += s.quality == QualityLabel::kAdequate;
  }
  const double n = static_cast<double>(split.span_count());
  const double f1 = 100.0 * 2 * adequate / (adequate + n);  // P = a/n, R = 1
  EXPECT_NEAR(metric(r, "quality", "macro_f1"), f1 / 3, 1e-9);
  EXPECT_NEAR(r.quality->labels[static_cast<int>(QualityLabel::kAdequate)].score.f1, f1, 1e-9);
}

TEST(Pipeline, FailingSpanIsDiscardedAlone) {
  const CorpusSplit& split = synthetic_split(SplitName::kTest);
  FailingSpanCompleter mock(split, 3);
  Pipeline pipeline(base_config(), mock);
  const auto preds = pipeline.predict_split(split);
  std::size_t expected = 0;
  for (std::size_t e = 0; e < preds.size(); ++e) {
    EXPECT_EQ(preds[e].status, EssayStatus::kOk);
    for (std::size_t k = 0; k < preds[e].spans.size(); ++k) {
      const SpanPrediction& s = preds[e].spans[k];
      if (k == 3) {
        ++expected;
        EXPECT_FALSE(s.type.has_value());
        EXPECT_EQ(s.discards, 1u);
        EXPECT_EQ(s.attempts, kMaxAttempts);
      } else {
        EXPECT_EQ(s.type, split.essays[e].spans[k].arg_type);
        EXPECT_EQ(s.attempts, 1u);
      }
    }
  }
  ASSERT_GT(expected, 0u);
  EXPECT_EQ(discard_events(preds), expected);
  EXPECT_EQ(pipeline.log().discarded(), expected);
  const EvalReport r = evaluate(split, preds, pipeline.config().context());
  EXPECT_EQ(r.discards.span_discards, expected);
  EXPECT_LT(metric(r, "type", "macro_f1"), 100.0);
}

TEST(Pipeline, DiscardsAreConservedUnderRandomRejection) {
  const CorpusSplit& split = synthetic_split(SplitName::kTest);
  // Rejects a deterministic pseudo-random subset of calls.
  class Flaky : public GoldCompleter {
   public:
    using GoldCompleter::GoldCompleter;

   protected:
    std::string respond(const Prompt& prompt, const ModelConfig& config) override {
      const std::size_t h = std::hash<std::string>{}(prompt.body) % 5;
      if (h == 0) return "???";
      return GoldCompleter::respond(prompt, config);
    }
  } mock(split);
  ExperimentConfig c = base_config();
  c.segmentation = SegmentationSource::kInferred;
  c.setup = Setup::kIndividual;
  Pipeline pipeline(c, mock);
  const auto preds = pipeline.predict_split(split);
  const EvalReport r = evaluate(split, preds, c.context());
  EXPECT_GT(pipeline.log().discarded(), 0u);
  EXPECT_EQ(discard_events(preds), pipeline.log().discarded());
  EXPECT_EQ(r.discards.total_discard_events(), pipeline.log().discarded());
}

TEST(Pipeline, ParallelismDoesNotChangeResults) {
  const CorpusSplit& split = synthetic_split(SplitName::kTest);
  std::vector<nlohmann::json> reports;
  std::vector<std::vector<EssayPrediction>> predictions;
  for (std::size_t p : {1, 8}) {
    FailingSpanCompleter mock(split, 2);
    ExperimentConfig c = base_config();
    c.segmentation = SegmentationSource::kInferred;
    c.setup = Setup::kIndividual;
    c.parallelism = p;
    const ExperimentResult result = run_experiment(split, c, mock);
    predictions.push_back(result.predictions[0].essays);
    reports.push_back(to_json(result.reports[0]));
  }
  EXPECT_EQ(predictions[0], predictions[1]);
  EXPECT_EQ(reports[0].dump(), reports[1].dump());
}

TEST(Pipeline, RunsUseOffsetSeedsAndReportSpread) {
  const CorpusSplit& split = synthetic_split(SplitName::kTest);
  SeededTypeCompleter mock;
  ExperimentConfig c = base_config();
  c.setup = Setup::kIndividual;
  c.quality = false;
  c.runs = 3;
  c.model.seed = 100;
  const ExperimentResult result = run_experiment(split, c, mock);
  EXPECT_EQ(mock.seeds(), (std::set<std::size_t>{100, 101, 102}));
  ASSERT_EQ(result.reports.size(), 3u);
  EXPECT_EQ(result.aggregate.runs, 3u);
  EXPECT_TRUE(result.aggregate.std_defined);
  const AggregateQuantity* q = result.aggregate.find("type", "", "macro_f1");
  ASSERT_NE(q, nullptr);
  EXPECT_GT(q->std, 0.0);
}

TEST(Pipeline, TransportOutageFailsTheExperiment) {
  const CorpusSplit& split = synthetic_split(SplitName::kTest);
  ScriptedCompleter mock([](const Prompt&, std::size_t) -> std::string {
    throw TransportError(TransportErrorKind::kConnection, "connection refused");
  });
  ExperimentConfig c = base_config();
  c.segmentation = SegmentationSource::kInferred;
  EXPECT_THROW(run_experiment(split, c, mock), ExperimentFailed);
}

TEST(Pipeline, TransportFailureMarksOnlyThatEssay) {
  const CorpusSplit& split = synthetic_split(SplitName::kTest);
  const std::string victim = split.essays[4].essay.normalized_text;
  class Partial : public GoldCompleter {
   public:
    Partial(const CorpusSplit& s, std::string v) : GoldCompleter(s), victim_(std::move(v)) {}

   protected:
    std::string respond(const Prompt& prompt, const ModelConfig& config) override {
      if (prompt.body.find(victim_) != std::string::npos) {
        throw TransportError(TransportErrorKind::kTimeout, "timed out");
      }
      return GoldCompleter::respond(prompt, config);
    }

   private:
    std::string victim_;
  } mock(split, victim);
  ExperimentConfig c = base_config();
  c.segmentation = SegmentationSource::kInferred;
  const ExperimentResult result = run_experiment(split, c, mock);
  const auto& essays = result.predictions[0].essays;
  for (std::size_t k = 0; k < essays.size(); ++k) {
    EXPECT_EQ(essays[k].status, k == 4 ? EssayStatus::kFailed : EssayStatus::kOk) << k;
  }
  EXPECT_EQ(result.reports[0].discards.essays_failed, 1u);
}

TEST(Pipeline, ConfigurationErrors) {
  ExperimentConfig c = base_config();
  c.shots = 5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = base_config();
  c.mode = PromptMode::kFineTuned;
  c.shots = 2;
  EXPECT_THROW(c.validate(), ConfigError);
  c = base_config();
  c.type = false;
  EXPECT_THROW(c.validate(), ConfigError);  // joint needs both
  c.setup = Setup::kIndividual;
  EXPECT_NO_THROW(c.validate());
  c.quality = false;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(select_shots(&synthetic_split(SplitName::kValidation), 3), ConfigError);
  EXPECT_THROW(select_shots(nullptr, 1), ConfigError);
}

TEST(Pipeline, ShotsComeFromTheFirstEssaysById) {
  const ShotSet shots = select_shots(&synthetic_split(SplitName::kTrain), 2);
  ASSERT_EQ(shots.joint.size(), 2u);
  const auto& train = synthetic_split(SplitName::kTrain).essays;
  std::vector<std::string> ids;
  for (const auto& e : train) ids.push_back(e.essay.id);
  std::sort(ids.begin(), ids.end());
  for (std::size_t k = 0; k < 2; ++k) {
    const AnnotatedEssay* e = synthetic_split(SplitName::kTrain).find(ids[k]);
    EXPECT_EQ(shots.segmentation[k].text, render_shot_example(*e, TaskKind::kSegmentation).text);
  }
}

TEST(Analyze, LabelsTheSampleEssay) {
  const CorpusSplit& split = isaac_split();
  GoldCompleter mock(split);
  AnalyzeOptions options;
  options.config = base_config();
  const AnalysisResult r = analyze(split.essays[0].essay.raw_text, options, mock);
  EXPECT_EQ(r.status, "ok");
  ASSERT_EQ(r.segments.size(), split.essays[0].spans.size());
  EXPECT_EQ(r.segments[0].type, ArgType::kLead);
  EXPECT_EQ(r.segments[0].quality, QualityLabel::kAdequate);
  EXPECT_EQ(r.segments.back().type, ArgType::kConcludingStatement);

  std::size_t at = 0;
  for (const AnalysisSegment& s : r.segments) {
    EXPECT_EQ(s.chars.begin, at);
    at = s.chars.end;
  }
  EXPECT_EQ(at, r.text.size());
  const nlohmann::json j = to_json(r);
  EXPECT_EQ(j["segments"][0]["type"], "Lead");
}

TEST(Analyze, BlankInputIsRejectedBeforeAnyCall) {
  ScriptedCompleter mock([](const Prompt&, std::size_t) { return std::string(); });
  AnalyzeOptions options;
  options.config = base_config();
  EXPECT_THROW(analyze("", options, mock), InputError);
  EXPECT_THROW(analyze(" \n\t ", options, mock), InputError);
  EXPECT_TRUE(mock.calls().empty());
}

TEST(Analyze, SegmentationDiscardStillTilesTheText) {
  ScriptedCompleter mock([](const Prompt&, std::size_t) { return std::string("no"); });
  AnalyzeOptions options;
  options.config = base_config();
  const AnalysisResult r = analyze("  One two three.  Four five.", options, mock);
  EXPECT_EQ(r.status, "segmentation_discarded");
  ASSERT_EQ(r.segments.size(), 1u);
  EXPECT_TRUE(r.segments[0].discarded);
  EXPECT_EQ(r.segments[0].chars.begin, 0u);
  EXPECT_EQ(r.segments[0].chars.end, r.text.size());
  EXPECT_EQ(mock.calls().size(), kMaxAttempts);
}

}  // namespace
}  // namespace argmine
