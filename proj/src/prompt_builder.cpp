#include "argmine/prompt_builder.hpp"

#include <algorithm>

#include "argmine/text.hpp"
#include "prompt_assets.inc"

namespace argmine {

std::string_view to_string(PromptMode mode) {
  return mode == PromptMode::kFewShot ? "few-shot" : "fine-tuned";
}

PromptMode parse_prompt_mode(std::string_view text) {
  if (text == "few-shot" || text == "few_shot" || text == "fewshot") return PromptMode::kFewShot;
  if (text == "fine-tuned" || text == "fine_tuned" || text == "finetuned") return PromptMode::kFineTuned;
  throw std::invalid_argument("unknown mode '" + std::string(text) + "'");
}

namespace format {

std::string type_marker(ArgType type) { return "<" + std::string(to_string(type)) + ">"; }

std::string quality_marker(QualityLabel quality) {
  return "<" + std::string(to_string(quality)) + ">";
}

std::string joint_marker(ArgType type, QualityLabel quality) {
  return "<" + std::string(to_string(type)) + ", " + std::string(to_string(quality)) + ">";
}

std::string render_marked(const Essay& essay, std::span<const TokenRange> segments,
                          std::span<const std::string> markers) {
  const std::string& text = essay.normalized_text;
  std::string out;
  out.reserve(text.size() + 24 * markers.size());
  std::size_t copied = 0;
  for (std::size_t k = 0; k < segments.size() && k < markers.size(); ++k) {
    if (segments[k].empty()) continue;
    const std::size_t cut = essay.tokens.at(segments[k].end - 1).end;
    out.append(text, copied, cut - copied);
    out.push_back(' ');
    out.append(markers[k]);
    copied = cut;
  }
  out.append(text, copied, std::string::npos);
  return out;
}

std::vector<std::string> split_segments(std::string_view segmented) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = segmented.find(kSep, pos);
    const std::string_view piece =
        segmented.substr(pos, hit == std::string_view::npos ? std::string_view::npos : hit - pos);
    std::string trimmed = std::string(piece);
    const auto tokens = tokenize(trimmed);
    if (!tokens.empty()) {
      trimmed = trimmed.substr(tokens.front().begin, tokens.back().end - tokens.front().begin);
    } else {
      trimmed.clear();
    }
    if (hit == std::string_view::npos) {
      if (!trimmed.empty()) out.push_back(std::move(trimmed));
      break;
    }
    out.push_back(std::move(trimmed));
    pos = hit + kSep.size();
  }
  return out;
}

std::size_t count_separators(std::string_view text) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(kSep); pos != std::string_view::npos;
       pos = text.find(kSep, pos + kSep.size())) {
    ++n;
  }
  return n;
}

}  // namespace format

std::vector<TokenRange> gold_partition(const AnnotatedEssay& essay) {
  std::vector<TokenRange> out;
  const std::size_t n = essay.essay.token_count();
  std::size_t begin = 0;
  for (std::size_t k = 0; k < essay.spans.size(); ++k) {
    const bool last = k + 1 == essay.spans.size();
    const std::size_t end = last ? n : essay.spans[k].tokens.end;
    out.push_back({begin, end});
    begin = end;
  }
  return out;
}

std::string render_segmented(const Essay& essay, std::span<const TokenRange> segments) {
  const std::vector<std::string> markers(segments.size(), std::string(format::kSep));
  return format::render_marked(essay, segments, markers);
}

ShotExample render_shot_example(const AnnotatedEssay& essay, TaskKind task) {
  std::vector<std::string> markers;
  for (const GoldSpan& span : essay.spans) {
    switch (task) {
      case TaskKind::kSegmentation: markers.emplace_back(format::kSep); break;
      case TaskKind::kTypeOnly: markers.push_back(format::type_marker(span.arg_type)); break;
      case TaskKind::kQualityOnly: markers.push_back(format::quality_marker(span.quality)); break;
      case TaskKind::kTypeAndQuality:
        markers.push_back(format::joint_marker(span.arg_type, span.quality));
        break;
    }
  }
  const std::vector<TokenRange> segments = gold_partition(essay);
  return {task, markers.size(), format::render_marked(essay.essay, segments, markers)};
}

namespace templates {

std::string_view segmentation_query() { return assets::kSegmentationQuery; }
std::string_view segmentation_output() { return assets::kSegmentationOutput; }
std::string_view type_query() { return assets::kTypeQuery; }
std::string_view quality_query() { return assets::kQualityQuery; }

std::string_view query(TaskKind task) {
  static const std::string joint =
      std::string(assets::kTypeQuery) + "\n\n" + std::string(assets::kQualityQuery);
  switch (task) {
    case TaskKind::kSegmentation: return assets::kSegmentationQuery;
    case TaskKind::kTypeOnly: return assets::kTypeQuery;
    case TaskKind::kQualityOnly: return assets::kQualityQuery;
    case TaskKind::kTypeAndQuality: return joint;
  }
  return {};
}

std::string_view output_requirement(TaskKind task) {
  switch (task) {
    case TaskKind::kSegmentation: return assets::kSegmentationOutput;
    case TaskKind::kTypeOnly: return assets::kTypeOutput;
    case TaskKind::kQualityOnly: return assets::kQualityOutput;
    case TaskKind::kTypeAndQuality: return assets::kTypeAndQualityOutput;
  }
  return {};
}

}  // namespace templates

namespace {

void check_shots(std::span<const ShotExample> shots, TaskKind task) {
  if (shots.size() > kMaxShots) {
    throw ConfigError("at most " + std::to_string(kMaxShots) + " shots are supported, got " +
                      std::to_string(shots.size()));
  }
  for (const ShotExample& shot : shots) {
    if (shot.task != task) {
      throw ConfigError("shot example rendered for task '" + std::string(to_string(shot.task)) +
                        "' used in a '" + std::string(to_string(task)) + "' prompt");
    }
  }
}

void append_shots(std::string& body, std::span<const ShotExample> shots) {
  for (std::size_t k = 0; k < shots.size(); ++k) {
    body += "#EXAMPLE " + std::to_string(k + 1) + ":\n";
    body += shots[k].text;
    body += "\n\n";
  }
}

}  // namespace

Prompt build_segmentation_prompt(const Essay& essay, std::span<const ShotExample> shots) {
  check_shots(shots, TaskKind::kSegmentation);
  Prompt prompt;
  prompt.task = TaskKind::kSegmentation;
  prompt.mode = PromptMode::kFewShot;
  prompt.shot_count = shots.size();
  std::string& body = prompt.body;
  append_shots(body, shots);
  body += "#ESSAY:\n";
  body += essay.normalized_text;
  body += "\n\n";
  body += templates::segmentation_query();
  body += "\n\n#OUTPUT: ";
  body += templates::segmentation_output();
  body += "\n";
  return prompt;
}

Prompt build_classification_prompt(std::string_view segmented_essay, std::size_t target_index,
                                   TaskKind task, std::span<const ShotExample> shots) {
  if (task == TaskKind::kSegmentation) {
    throw ConfigError("classification prompt requested for the segmentation task");
  }
  check_shots(shots, task);
  const std::vector<std::string> segments = format::split_segments(segmented_essay);
  if (target_index >= segments.size()) {
    throw IndexError("target argument " + std::to_string(target_index) + " out of range (" +
                     std::to_string(segments.size()) + " segments)");
  }
  Prompt prompt;
  prompt.task = task;
  prompt.mode = PromptMode::kFewShot;
  prompt.shot_count = shots.size();
  prompt.target_argument_index = target_index;
  std::string& body = prompt.body;
  append_shots(body, shots);
  body += "#ESSAY:\n";
  body += segmented_essay;
  body += "\n\n#QUERY: ";
  body += templates::query(task);
  body += "\n\n#OUTPUT: ";
  body += templates::output_requirement(task);
  body += "\n\n#ARGUMENT: \"";
  body += segments[target_index];
  body += "\"\n";
  return prompt;
}

std::string render_finetuned_input(std::string_view text, TaskKind /*task*/) {
  return std::string(text);
}

Prompt build_finetuned_prompt(std::string_view text, TaskKind task) {
  Prompt prompt;
  prompt.task = task;
  prompt.mode = PromptMode::kFineTuned;
  prompt.body = render_finetuned_input(text, task);
  return prompt;
}

}  // namespace argmine
