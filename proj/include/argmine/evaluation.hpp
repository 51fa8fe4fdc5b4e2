#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "argmine/corpus.hpp"
#include "argmine/eval_metrics.hpp"
#include "argmine/predictions.hpp"

namespace argmine {

struct DiscardStats {
  std::size_t essays = 0;
  std::size_t essays_discarded = 0;
  std::size_t essays_failed = 0;
  std::size_t spans = 0;
  // Discarded outcomes: per-span calls plus essay-level classification calls.
  std::size_t span_discards = 0;
  std::size_t classification_discards = 0;

  std::size_t total_discard_events() const {
    return essays_discarded + span_discards + classification_discards;
  }
};

struct EvalReport {
  EvalContext context;
  // Present under inferred segmentation.
  std::optional<BioReport> segmentation;
  std::optional<OverlapStats> overlap;
  std::optional<LabelReport> type;
  std::optional<ConfusionMatrix> type_confusion;
  std::optional<LabelReport> quality;
  std::optional<ConfusionMatrix> quality_confusion;
  DiscardStats discards;
};

// Scores predictions against the gold split. Essays that were discarded or
// failed keep their gold spans and contribute them as unmatched (Echec);
// spans without a label are dropped before matching. Throws ContractError for
// an essay id missing from the split.
EvalReport evaluate(const CorpusSplit& gold, std::span<const EssayPrediction> predictions,
                    const EvalContext& context);

// Every scalar in a report, in a fixed order.
struct Quantity {
  std::string group;   // "segmentation", "type", "quality", "overlap", "discards"
  std::string label;   // "B", "Lead", "Echec", ... or "" for report-level values
  std::string metric;  // "precision", "f1", "macro_f1", "confusion:Claim", ...
  double value = 0;
};

std::vector<Quantity> flatten(const EvalReport& report);

struct AggregateQuantity {
  std::string group;
  std::string label;
  std::string metric;
  double mean = 0;
  double std = 0;
};

struct AggregateReport {
  EvalContext context;
  std::size_t runs = 0;
  // False for a single run, where std is reported as 0.
  bool std_defined = false;
  std::vector<AggregateQuantity> quantities;

  const AggregateQuantity* find(std::string_view group, std::string_view label,
                                std::string_view metric) const;
};

// Element-wise mean and sample standard deviation. Throws ContractError for
// an empty list or reports from different configurations.
AggregateReport aggregate_runs(std::span<const EvalReport> reports);

nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const AggregateReport& report);

// Aligned human-readable tables, two decimals, "mean ± std" for aggregates.
std::string format_text(const AggregateReport& report);

// Flat plotting table: experiment, model, mode, setup, segmentation, label,
// metric, value, std.
std::string report_table_header();
std::string report_table_rows(const AggregateReport& report);

}  // namespace argmine
