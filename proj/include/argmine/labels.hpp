#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace argmine {

// The seven discourse element types of the Feedback Prize corpus.
enum class ArgType {
  kLead,
  kPosition,
  kClaim,
  kCounterclaim,
  kRebuttal,
  kEvidence,
  kConcludingStatement,
};

enum class QualityLabel {
  kIneffective,
  kAdequate,
  kEffective,
};

inline constexpr std::array<ArgType, 7> kAllArgTypes = {
    ArgType::kLead,     ArgType::kPosition,     ArgType::kClaim,
    ArgType::kCounterclaim, ArgType::kRebuttal, ArgType::kEvidence,
    ArgType::kConcludingStatement};

inline constexpr std::array<QualityLabel, 3> kAllQualityLabels = {
    QualityLabel::kIneffective, QualityLabel::kAdequate,
    QualityLabel::kEffective};

// Pseudo-label for spans that fail the overlap match.
inline constexpr std::string_view kEchec = "Echec";

class LabelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Canonical names, e.g. "Concluding Statement".
std::string_view to_string(ArgType type);
std::string_view to_string(QualityLabel quality);

// Case-insensitive; internal whitespace runs are ignored, so "concluding
// statement", "ConcludingStatement" and " Concluding  Statement " all parse.
std::optional<ArgType> try_parse_arg_type(std::string_view text);
std::optional<QualityLabel> try_parse_quality(std::string_view text);

// Throwing variants.
ArgType parse_arg_type(std::string_view text);
QualityLabel parse_quality(std::string_view text);

enum class TaskKind { kSegmentation, kTypeOnly, kQualityOnly, kTypeAndQuality };

std::string_view to_string(TaskKind task);
TaskKind parse_task_kind(std::string_view text);

}  // namespace argmine
