#pragma once

// Fixture builders shared by the unit suites and the acceptance runner.

#include <fstream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "argmine/output_parser.hpp"
#include "argmine/pipeline.hpp"
#include "argmine/prompt_builder.hpp"
#include "support/mocks.hpp"

namespace argmine::testing {

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing " + path);
  return {std::istreambuf_iterator<char>(in), {}};
}

inline const AnnotatedEssay& isaac() {
  static const LoadedCorpus corpus = open_corpus(data_dir() + "/isaac");
  return corpus.splits.at(0).essays.at(0);
}

inline const char* task_file_name(TaskKind task) {
  switch (task) {
    case TaskKind::kSegmentation: return "segmentation";
    case TaskKind::kTypeOnly: return "type";
    case TaskKind::kQualityOnly: return "quality";
    case TaskKind::kTypeAndQuality: return "type_and_quality";
  }
  return "";
}

inline constexpr TaskKind kAllTasks[] = {TaskKind::kSegmentation, TaskKind::kTypeOnly, TaskKind::kQualityOnly,
                                         TaskKind::kTypeAndQuality};

inline std::string golden_name(TaskKind task, PromptMode mode, std::size_t shots) {
  return std::string(task_file_name(task)) +
         (mode == PromptMode::kFineTuned ? std::string("_finetuned") : "_fewshot_" + std::to_string(shots)) + ".txt";
}

// The golden prompt family: the sample essay as target, shots from the
// synthetic train split in id order, classification aimed at argument 1.
inline Prompt render_golden(TaskKind task, PromptMode mode, std::size_t shots) {
  const AnnotatedEssay& target = isaac();
  const std::string segmented = render_segmented(target.essay, gold_partition(target));
  if (mode == PromptMode::kFineTuned) {
    return build_finetuned_prompt(task == TaskKind::kSegmentation ? target.essay.normalized_text : segmented, task);
  }
  const ShotSet set = select_shots(&synthetic_split(SplitName::kTrain), kMaxShots);
  const auto& pool = set.for_task(task);
  const std::span<const ShotExample> chosen(pool.data(), shots);
  if (task == TaskKind::kSegmentation) return build_segmentation_prompt(target.essay, chosen);
  return build_classification_prompt(segmented, 1, task, chosen);
}

// A model reproduction of `essay` with "<SEP>" after every gold segment,
// then up to `max_edits` single-token insertions or deletions kept at least
// two tokens away from every marker. Insertions reuse the essay's own words.
struct PerturbedOutput {
  RawSegmentation raw;
  std::vector<std::size_t> expected_ends;
  std::size_t edits = 0;
};

inline PerturbedOutput perturb(const AnnotatedEssay& essay, std::mt19937& rng, std::size_t max_edits) {
  PerturbedOutput out;
  const std::vector<TokenRange> parts = gold_partition(essay);
  for (const TokenRange& r : parts) out.expected_ends.push_back(r.end);
  out.raw = parse_raw_segmentation(render_segmented(essay.essay, parts));
  auto& tokens = out.raw.tokens;
  auto& markers = out.raw.marker_positions;
  const std::vector<std::string_view> vocabulary = essay.essay.token_texts();

  auto clear_of_markers = [&](std::size_t lo, std::size_t hi) {  // positions [lo, hi] vs markers
    for (std::size_t p : markers) {
      if (p + 2 > lo && p < hi + 2) return false;
    }
    return true;
  };
  for (std::size_t attempt = 0; attempt < 50 && out.edits < max_edits; ++attempt) {
    const bool insert = rng() % 2 == 0;
    std::uniform_int_distribution<std::size_t> where(0, tokens.size());
    const std::size_t i = where(rng);
    if (insert) {
      // New token lands at index i, between old tokens i-1 and i.
      if (!clear_of_markers(i, i)) continue;
      tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                    std::string(vocabulary[rng() % vocabulary.size()]));
      for (std::size_t& p : markers) p += p > i ? 1 : 0;
    } else {
      if (i >= tokens.size() || !clear_of_markers(i, i + 1)) continue;
      tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(i));
      for (std::size_t& p : markers) p -= p > i ? 1 : 0;
    }
    ++out.edits;
  }
  return out;
}

}  // namespace argmine::testing
