#include "argmine/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "argmine/text.hpp"

namespace argmine {

namespace {

// Calls fn(0..n-1) on up to `limit` threads. Each index runs exactly once;
// callers store results by index, so completion order never matters.
template <class Fn>
void parallel_for(std::size_t n, std::size_t limit, Fn&& fn) {
  const std::size_t workers = std::min(n, std::max<std::size_t>(limit, 1));
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) {
        try {
          fn(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (shots > kMaxShots) {
    throw ConfigError("shots must be 0.." + std::to_string(kMaxShots) + ", got " + std::to_string(shots));
  }
  if (mode == PromptMode::kFineTuned && shots != 0) {
    throw ConfigError("fine-tuned mode takes no shots");
  }
  if (!type && !quality) throw ConfigError("no classification task selected");
  if (setup == Setup::kJoint && !(type && quality)) {
    throw ConfigError("the joint setup predicts type and quality together");
  }
  if (runs == 0) throw ConfigError("runs must be positive");
  if (parallelism == 0) throw ConfigError("parallelism must be positive");
  model.validate();
  if (segmentation_model) segmentation_model->validate();
}

EvalContext ExperimentConfig::context() const {
  EvalContext c;
  c.experiment = name;
  c.model = model.model;
  c.mode = mode;
  c.shots = shots;
  c.setup = setup;
  c.segmentation = segmentation;
  c.type = type;
  c.quality = quality;
  c.split = split;
  return c;
}

std::vector<TaskKind> ExperimentConfig::classification_tasks() const {
  if (setup == Setup::kJoint) return {TaskKind::kTypeAndQuality};
  std::vector<TaskKind> tasks;
  if (type) tasks.push_back(TaskKind::kTypeOnly);
  if (quality) tasks.push_back(TaskKind::kQualityOnly);
  return tasks;
}

const std::vector<ShotExample>& ShotSet::for_task(TaskKind task) const {
  switch (task) {
    case TaskKind::kSegmentation: return segmentation;
    case TaskKind::kTypeOnly: return type;
    case TaskKind::kQualityOnly: return quality;
    case TaskKind::kTypeAndQuality: return joint;
  }
  return segmentation;
}

ShotSet select_shots(const CorpusSplit* source, std::size_t count) {
  ShotSet set;
  if (count == 0) return set;
  if (count > kMaxShots) throw ConfigError("at most " + std::to_string(kMaxShots) + " shots");
  if (source == nullptr || source->essays.size() < count) {
    throw ConfigError(std::to_string(count) + " shots need as many training essays");
  }
  std::vector<const AnnotatedEssay*> essays;
  for (const auto& e : source->essays) essays.push_back(&e);
  std::sort(essays.begin(), essays.end(),
            [](const AnnotatedEssay* a, const AnnotatedEssay* b) { return a->essay.id < b->essay.id; });
  for (std::size_t k = 0; k < count; ++k) {
    set.segmentation.push_back(render_shot_example(*essays[k], TaskKind::kSegmentation));
    set.type.push_back(render_shot_example(*essays[k], TaskKind::kTypeOnly));
    set.quality.push_back(render_shot_example(*essays[k], TaskKind::kQualityOnly));
    set.joint.push_back(render_shot_example(*essays[k], TaskKind::kTypeAndQuality));
  }
  return set;
}

Pipeline::Pipeline(ExperimentConfig config, Completer& completer, ShotSet shots)
    : config_(std::move(config)), completer_(completer), shots_(std::move(shots)) {
  config_.validate();
  if (config_.mode == PromptMode::kFewShot && config_.shots > 0) {
    for (TaskKind task : {TaskKind::kSegmentation, TaskKind::kTypeOnly, TaskKind::kQualityOnly,
                          TaskKind::kTypeAndQuality}) {
      if (shots_.for_task(task).size() < config_.shots) {
        throw ConfigError("fewer rendered shots than configured");
      }
    }
  }
}

SegmentationOutcome Pipeline::run_segmentation(const Essay& essay) const {
  Prompt prompt;
  if (config_.mode == PromptMode::kFineTuned) {
    prompt = build_finetuned_prompt(essay.normalized_text, TaskKind::kSegmentation);
  } else {
    const auto& pool = shots_.segmentation;
    prompt = build_segmentation_prompt(
        essay, std::span(pool).first(std::min(config_.shots, pool.size())));
  }
  const OutputValidator validator = make_validator(TaskKind::kSegmentation, config_.mode, essay);
  auto outcome = complete_validated(completer_, prompt, validator, config_.segmenter(), &log_);

  SegmentationOutcome out;
  out.status = outcome.status;
  out.attempts = outcome.attempts;
  out.error = outcome.error;
  if (outcome.ok()) out.segmentation = std::get<PredictedSegmentation>(std::move(*outcome.value));
  return out;
}

namespace {

void apply_label(SpanPrediction& span, const LabelAnswer& answer) {
  if (answer.type) span.type = answer.type;
  if (answer.quality) span.quality = answer.quality;
}

}  // namespace

ClassificationOutcome Pipeline::run_classification(const Essay& essay,
                                                   std::span<const TokenRange> segments) const {
  check_partition(essay.token_count(), segments);
  ClassificationOutcome out;
  out.spans.resize(segments.size());
  for (std::size_t k = 0; k < segments.size(); ++k) out.spans[k].tokens = segments[k];
  const std::string segmented = render_segmented(essay, segments);
  const std::vector<TaskKind> tasks = config_.classification_tasks();

  if (config_.mode == PromptMode::kFineTuned) {
    for (TaskKind task : tasks) {
      const Prompt prompt = build_finetuned_prompt(segmented, task);
      const OutputValidator validator =
          make_validator(task, PromptMode::kFineTuned, essay, segments.size());
      auto outcome = complete_validated(completer_, prompt, validator, config_.model, &log_);
      if (outcome.status == OutcomeStatus::kTransportFailed) {
        out.transport_failed = true;
        out.error = outcome.error;
        return out;
      }
      if (!outcome.ok()) {
        ++out.essay_discards;
        out.error = outcome.error;
        continue;
      }
      const auto& parsed = std::get<InterleavedParse>(*outcome.value);
      for (std::size_t k = 0; k < segments.size(); ++k) apply_label(out.spans[k], parsed[k].label);
    }
    return out;
  }

  // One job per (span, task); results land in fixed slots.
  struct Job {
    std::size_t span = 0;
    TaskKind task = TaskKind::kTypeOnly;
    CompletionOutcome<ParsedOutput> outcome;
  };
  std::vector<Job> jobs;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    for (TaskKind task : tasks) jobs.push_back({k, task, {}});
  }
  const std::size_t shots = config_.shots;
  parallel_for(jobs.size(), config_.parallelism, [&](std::size_t j) {
    Job& job = jobs[j];
    const auto& pool = shots_.for_task(job.task);
    const Prompt prompt = build_classification_prompt(
        segmented, job.span, job.task, std::span(pool).first(std::min(shots, pool.size())));
    const OutputValidator validator = make_validator(job.task, PromptMode::kFewShot, essay);
    job.outcome = complete_validated(completer_, prompt, validator, config_.model, &log_);
  });
  for (const Job& job : jobs) {
    SpanPrediction& span = out.spans[job.span];
    span.attempts += job.outcome.attempts;
    switch (job.outcome.status) {
      case OutcomeStatus::kValid:
        apply_label(span, std::get<LabelAnswer>(*job.outcome.value));
        break;
      case OutcomeStatus::kDiscarded:
        ++span.discards;
        break;
      case OutcomeStatus::kTransportFailed:
        out.transport_failed = true;
        if (out.error.empty()) out.error = job.outcome.error;
        break;
    }
  }
  return out;
}

EssayPrediction Pipeline::predict(const AnnotatedEssay& annotated) const {
  const Essay& essay = annotated.essay;
  EssayPrediction pred;
  pred.essay_id = essay.id;

  std::vector<TokenRange> segments;
  std::vector<TokenRange> reported;
  if (config_.segmentation == SegmentationSource::kGold) {
    segments = gold_partition(annotated);
    reported = annotated.span_ranges();
  } else {
    SegmentationOutcome seg = run_segmentation(essay);
    pred.segmentation_attempts = seg.attempts;
    if (seg.status != OutcomeStatus::kValid) {
      pred.status = seg.status == OutcomeStatus::kDiscarded ? EssayStatus::kDiscarded
                                                             : EssayStatus::kFailed;
      pred.error = seg.error;
      return pred;
    }
    segments = seg.segmentation->spans();
    reported = segments;
  }
  if (segments.empty()) return pred;  // an essay without tokens

  ClassificationOutcome cls = run_classification(essay, segments);
  pred.classification_discards = cls.essay_discards;
  pred.error = cls.error;
  if (cls.transport_failed) pred.status = EssayStatus::kFailed;
  for (std::size_t k = 0; k < cls.spans.size(); ++k) cls.spans[k].tokens = reported[k];
  pred.spans = std::move(cls.spans);
  return pred;
}

std::vector<EssayPrediction> Pipeline::predict_split(const CorpusSplit& split) const {
  std::vector<EssayPrediction> out(split.essays.size());
  parallel_for(split.essays.size(), config_.parallelism,
               [&](std::size_t k) { out[k] = predict(split.essays[k]); });
  return out;
}

ExperimentResult run_experiment(const CorpusSplit& split, const ExperimentConfig& config,
                                Completer& completer, const CorpusSplit* shot_source) {
  config.validate();
  const ShotSet shots =
      config.mode == PromptMode::kFewShot ? select_shots(shot_source, config.shots) : ShotSet{};
  ExperimentResult result;
  for (std::size_t run = 0; run < config.runs; ++run) {
    ExperimentConfig run_config = config;
    if (run_config.model.seed) *run_config.model.seed += static_cast<std::int64_t>(run);
    if (run_config.segmentation_model && run_config.segmentation_model->seed) {
      *run_config.segmentation_model->seed += static_cast<std::int64_t>(run);
    }
    Pipeline pipeline(run_config, completer, shots);
    PredictionsFile file;
    file.context = config.context();
    file.run_index = run;
    file.essays = pipeline.predict_split(split);
    const bool any_ok = std::any_of(file.essays.begin(), file.essays.end(),
                                    [](const EssayPrediction& e) { return e.status == EssayStatus::kOk; });
    if (!any_ok) {
      std::string why = file.essays.empty() ? "the split is empty" : file.essays.front().error;
      throw ExperimentFailed("run " + std::to_string(run) + " of '" + config.name +
                             "' processed no essay successfully" + (why.empty() ? "" : ": " + why));
    }
    result.reports.push_back(evaluate(split, file.essays, file.context));
    result.client_discards += pipeline.log().discarded();
    result.predictions.push_back(std::move(file));
  }
  result.aggregate = aggregate_runs(result.reports);
  return result;
}

AnalysisResult analyze(const std::string& text, const AnalyzeOptions& options, Completer& completer,
                       const ShotSet& shots) {
  if (is_blank(text)) throw InputError("essay text is empty");
  ExperimentConfig config = options.config;
  config.segmentation = SegmentationSource::kInferred;
  config.runs = 1;

  NormalizedEssay normalized =
      normalize_essay("draft", text, options.normalizer ? options.normalizer : identity_normalizer, {});
  const Essay& essay = normalized.essay;
  AnalysisResult result;
  result.text = essay.normalized_text;

  // Segment k starts where its first token starts (0 for the first) and ends
  // where the next one starts, so segments tile the text.
  auto add_segments = [&](const std::vector<TokenRange>& ranges) {
    for (std::size_t k = 0; k < ranges.size(); ++k) {
      AnalysisSegment s;
      s.tokens = ranges[k];
      s.chars.begin = k == 0 ? 0 : essay.tokens[ranges[k].begin].begin;
      s.chars.end = k + 1 < ranges.size() ? essay.tokens[ranges[k + 1].begin].begin
                                          : essay.normalized_text.size();
      result.segments.push_back(s);
    }
  };

  Pipeline pipeline(config, completer, shots);
  SegmentationOutcome seg = pipeline.run_segmentation(essay);
  if (!seg.ok()) {
    result.status = seg.status == OutcomeStatus::kDiscarded ? "segmentation_discarded" : "failed";
    result.error = seg.error;
    add_segments({TokenRange{0, essay.token_count()}});
    result.segments.front().discarded = true;
    return result;
  }
  const std::vector<TokenRange> ranges = seg.segmentation->spans();
  add_segments(ranges);
  ClassificationOutcome cls = pipeline.run_classification(essay, ranges);
  bool any_missing = cls.transport_failed;
  for (std::size_t k = 0; k < ranges.size(); ++k) {
    AnalysisSegment& s = result.segments[k];
    s.type = cls.spans[k].type;
    s.quality = cls.spans[k].quality;
    s.discarded = (config.type && !s.type) || (config.quality && !s.quality);
    any_missing = any_missing || s.discarded;
  }
  if (cls.transport_failed) {
    result.status = "failed";
  } else if (any_missing) {
    result.status = "partial";
  }
  result.error = cls.error;
  return result;
}

nlohmann::json to_json(const AnalysisResult& r) {
  nlohmann::json segments = nlohmann::json::array();
  for (const AnalysisSegment& s : r.segments) {
    segments.push_back({{"start", s.chars.begin},
                        {"end", s.chars.end},
                        {"token_start", s.tokens.begin},
                        {"token_end", s.tokens.end},
                        {"text", r.text.substr(s.chars.begin, s.chars.size())},
                        {"type", s.type ? nlohmann::json(to_string(*s.type)) : nlohmann::json(nullptr)},
                        {"quality", s.quality ? nlohmann::json(to_string(*s.quality)) : nlohmann::json(nullptr)},
                        {"discarded", s.discarded}});
  }
  return {{"text", r.text}, {"status", r.status}, {"error", r.error}, {"segments", std::move(segments)}};
}

}  // namespace argmine
