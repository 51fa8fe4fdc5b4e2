#include "argmine/labels.hpp"

#include <cctype>

namespace argmine {
namespace {

// Lowercase with all whitespace removed.
std::string fold(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (unsigned char c : text) {
    if (std::isspace(c)) continue;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

}  // namespace

std::string_view to_string(ArgType type) {
  switch (type) {
    case ArgType::kLead: return "Lead";
    case ArgType::kPosition: return "Position";
    case ArgType::kClaim: return "Claim";
    case ArgType::kCounterclaim: return "Counterclaim";
    case ArgType::kRebuttal: return "Rebuttal";
    case ArgType::kEvidence: return "Evidence";
    case ArgType::kConcludingStatement: return "Concluding Statement";
  }
  return "?";
}

std::string_view to_string(QualityLabel quality) {
  switch (quality) {
    case QualityLabel::kIneffective: return "Ineffective";
    case QualityLabel::kAdequate: return "Adequate";
    case QualityLabel::kEffective: return "Effective";
  }
  return "?";
}

std::optional<ArgType> try_parse_arg_type(std::string_view text) {
  const std::string key = fold(text);
  if (key.empty()) return std::nullopt;
  for (ArgType t : kAllArgTypes) {
    if (fold(to_string(t)) == key) return t;
  }
  return std::nullopt;
}

std::optional<QualityLabel> try_parse_quality(std::string_view text) {
  const std::string key = fold(text);
  if (key.empty()) return std::nullopt;
  for (QualityLabel q : kAllQualityLabels) {
    if (fold(to_string(q)) == key) return q;
  }
  return std::nullopt;
}

ArgType parse_arg_type(std::string_view text) {
  if (auto t = try_parse_arg_type(text)) return *t;
  throw LabelError("unknown argument type '" + std::string(text) + "'");
}

QualityLabel parse_quality(std::string_view text) {
  if (auto q = try_parse_quality(text)) return *q;
  throw LabelError("unknown quality label '" + std::string(text) + "'");
}

std::string_view to_string(TaskKind task) {
  switch (task) {
    case TaskKind::kSegmentation: return "segmentation";
    case TaskKind::kTypeOnly: return "type";
    case TaskKind::kQualityOnly: return "quality";
    case TaskKind::kTypeAndQuality: return "type_and_quality";
  }
  return "?";
}

TaskKind parse_task_kind(std::string_view text) {
  const std::string key = fold(text);
  if (key == "segmentation") return TaskKind::kSegmentation;
  if (key == "type") return TaskKind::kTypeOnly;
  if (key == "quality") return TaskKind::kQualityOnly;
  if (key == "type_and_quality" || key == "typeandquality" || key == "joint") {
    return TaskKind::kTypeAndQuality;
  }
  throw std::invalid_argument("unknown task '" + std::string(text) + "'");
}

}  // namespace argmine
