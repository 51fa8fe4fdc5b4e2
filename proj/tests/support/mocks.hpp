#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "argmine/corpus.hpp"
#include "argmine/inference_client.hpp"
#include "argmine/prompt_builder.hpp"

namespace argmine::testing {

inline std::string data_dir() { return ARGMINE_TEST_DATA_DIR; }
inline std::string golden_dir() { return ARGMINE_TEST_GOLDEN_DIR; }

struct Call {
  TaskKind task;
  PromptMode mode;
  std::optional<std::size_t> target;
};

// Records calls; subclasses produce the text.
class LoggingCompleter : public Completer {
 public:
  std::string complete(const Prompt& prompt, const ModelConfig& config) final {
    {
      std::lock_guard lock(mutex_);
      calls_.push_back({prompt.task, prompt.mode, prompt.target_argument_index});
    }
    return respond(prompt, config);
  }

  std::vector<Call> calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
  }
  std::size_t count(TaskKind task) const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const Call& c : calls_) n += c.task == task;
    return n;
  }

 protected:
  virtual std::string respond(const Prompt& prompt, const ModelConfig& config) = 0;

 private:
  mutable std::mutex mutex_;
  std::vector<Call> calls_;
};

// Answers every prompt with the gold annotation of the essay it contains:
// the "<SEP>" rendering for segmentation, a JSON label object for few-shot
// classification, the interleaved rendering for fine-tuned classification.
// The split must outlive the completer.
class GoldCompleter : public LoggingCompleter {
 public:
  explicit GoldCompleter(const CorpusSplit& split) {
    for (const AnnotatedEssay& e : split.essays) {
      const std::vector<TokenRange> parts = gold_partition(e);
      essays_.push_back({&e, e.essay.normalized_text, render_segmented(e.essay, parts)});
    }
  }

 protected:
  std::string respond(const Prompt& prompt, const ModelConfig&) override {
    const Entry& e = find(prompt);
    if (prompt.task == TaskKind::kSegmentation) return e.segmented;
    if (prompt.mode == PromptMode::kFineTuned) {
      std::vector<std::string> markers;
      for (const GoldSpan& s : e.essay->spans) markers.push_back(marker(prompt.task, s));
      return format::render_marked(e.essay->essay, gold_partition(*e.essay), markers);
    }
    const GoldSpan& s = e.essay->spans.at(prompt.target_argument_index.value());
    return label_json(prompt.task, s);
  }

  static std::string marker(TaskKind task, const GoldSpan& s) {
    switch (task) {
      case TaskKind::kTypeOnly: return format::type_marker(s.arg_type);
      case TaskKind::kQualityOnly: return format::quality_marker(s.quality);
      default: return format::joint_marker(s.arg_type, s.quality);
    }
  }

  static std::string label_json(TaskKind task, const GoldSpan& s) {
    const std::string type(to_string(s.arg_type));
    const std::string quality(to_string(s.quality));
    switch (task) {
      case TaskKind::kTypeOnly: return "{\"TYPE\": [\"" + type + "\"]}";
      case TaskKind::kQualityOnly: return "{\"QUALITY\": [\"" + quality + "\"]}";
      default: return "{\"TYPE AND QUALITY\": [\"" + type + "\", \"" + quality + "\"]}";
    }
  }

  struct Entry {
    const AnnotatedEssay* essay;
    std::string text;
    std::string segmented;
  };

  const Entry& find(const Prompt& prompt) const {
    for (const Entry& e : essays_) {
      const std::string& needle = prompt.task == TaskKind::kSegmentation ? e.text : e.segmented;
      if (prompt.mode == PromptMode::kFineTuned ? prompt.body == needle
                                                : prompt.body.find("#ESSAY:\n" + needle + "\n\n") !=
                                                      std::string::npos) {
        return e;
      }
    }
    throw std::runtime_error("mock: prompt for an unknown essay");
  }

  std::vector<Entry> essays_;
};

// Delegates to a function of the prompt and the 0-based call number.
class ScriptedCompleter : public LoggingCompleter {
 public:
  using Script = std::function<std::string(const Prompt&, std::size_t)>;
  explicit ScriptedCompleter(Script script) : script_(std::move(script)) {}

 protected:
  std::string respond(const Prompt& prompt, const ModelConfig&) override {
    return script_(prompt, next_++);
  }

 private:
  Script script_;
  std::atomic<std::size_t> next_{0};
};

inline ModelConfig mock_model() {
  ModelConfig m;
  m.model = "mock";
  m.endpoint = "http://127.0.0.1:9";
  return m;
}

inline const CorpusSplit& synthetic_split(SplitName name) {
  static const LoadedCorpus corpus = open_corpus(data_dir() + "/synthetic");
  const CorpusSplit* split = corpus.split(name);
  if (split == nullptr) throw std::runtime_error("synthetic corpus lacks a split");
  return *split;
}

}  // namespace argmine::testing
