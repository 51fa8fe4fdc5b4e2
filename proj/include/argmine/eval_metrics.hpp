#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "argmine/corpus.hpp"

namespace argmine {

class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class SegmentationSource { kGold, kInferred };

std::string_view to_string(SegmentationSource source);
SegmentationSource parse_segmentation_source(std::string_view text);

// Spans tile the essay, so O never appears in derived sequences.
enum class BioTag : std::uint8_t { kB, kI, kO };

// Throws ContractError unless `spans` partition [0, token_count).
void check_partition(std::size_t token_count, std::span<const TokenRange> spans);

// Throws ContractError when spans overlap or are unsorted.
void check_disjoint(std::span<const TokenRange> spans);

std::vector<BioTag> bio_tags(std::size_t token_count, std::span<const TokenRange> spans);

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const Counts&, const Counts&) = default;
};

// Precision, recall and F1 in percent. F1 is 0 when P + R is 0.
struct Score {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

Score score(const Counts& counts);

struct BioCounts {
  Counts b;
  Counts i;

  BioCounts& operator+=(const BioCounts& o) {
    b += o.b;
    i += o.i;
    return *this;
  }
};

struct BioReport {
  BioCounts counts;
  Score b;
  Score i;
  // Mean of the B and I F1 over the tags that occur in either sequence.
  double macro_f1 = 0;
};

// Token-wise counts per tag. Throws ContractError on a length mismatch.
BioCounts bio_counts(std::span<const BioTag> gold, std::span<const BioTag> pred);
BioReport bio_report(const BioCounts& counts);
BioReport bio_f1(std::span<const BioTag> gold, std::span<const BioTag> pred);

struct MatchCandidate {
  std::size_t gold_index = 0;
  std::size_t pred_index = 0;
  std::size_t intersection = 0;
  double o_gold = 0;
  double o_pred = 0;
};

// Integer form of min(|g ∩ p| / |g|, |g ∩ p| / |p|) > 0.5.
bool is_match(std::size_t intersection, std::size_t gold_size, std::size_t pred_size);

std::size_t intersection_size(TokenRange a, TokenRange b);

struct SpanMatching {
  std::vector<MatchCandidate> matches;  // sorted by gold index
  std::vector<std::size_t> unmatched_gold;
  std::vector<std::size_t> unmatched_pred;
};

// Each list must be sorted and internally disjoint (ContractError otherwise).
// Disjointness makes the pairing one-to-one.
SpanMatching match_spans(std::span<const TokenRange> gold, std::span<const TokenRange> pred);

struct LabelScore {
  std::string label;
  Counts counts;
  std::size_t support = 0;  // gold spans with this label
  Score score;
};

struct LabelReport {
  // One entry per label in the universe; under inferred segmentation the last
  // entry is Echec with F1 fixed at 0.
  std::vector<LabelScore> labels;
  double macro_f1 = 0;
  // Echec is a realized class (some gold span went unmatched) and sits in
  // the macro average.
  bool echec_counted = false;
};

// Mean of the per-label F1 values, with an extra Echec class at F1 = 0 when
// `with_echec` is set.
double macro_f1(std::span<const double> label_f1, bool with_echec);

// Gold rows, predicted columns; both indexed by label with Echec last. The
// Echec row stays zero because Echec never occurs in gold.
struct ConfusionMatrix {
  std::vector<std::string> labels;  // universe + Echec
  std::vector<std::vector<std::size_t>> cells;

  explicit ConfusionMatrix(std::vector<std::string> universe = {});
  std::size_t echec() const { return labels.size() - 1; }
  std::size_t row_sum(std::size_t row) const;
};

// Accumulates label scores and the confusion matrix over essays. Labels are
// indices into `universe`.
class LabelTally {
 public:
  explicit LabelTally(std::vector<std::string> universe);

  // gold_labels[k] labels gold span k, pred_labels[k] predicted span k, as
  // in the matching. Throws LabelError for an index outside the universe.
  void add(const SpanMatching& matching, std::span<const int> gold_labels,
           std::span<const int> pred_labels);

  LabelReport report(SegmentationSource source) const;
  const ConfusionMatrix& confusion() const { return confusion_; }
  const std::vector<Counts>& counts() const { return counts_; }
  const std::vector<std::size_t>& support() const { return support_; }

 private:
  std::vector<std::string> universe_;
  std::vector<Counts> counts_;
  std::vector<std::size_t> support_;
  ConfusionMatrix confusion_;
};

// Single-instance conveniences over LabelTally.
LabelReport label_scores(const SpanMatching& matching, std::span<const int> gold_labels,
                         std::span<const int> pred_labels, std::vector<std::string> universe,
                         SegmentationSource source);
ConfusionMatrix confusion_matrix(const SpanMatching& matching, std::span<const int> gold_labels,
                                 std::span<const int> pred_labels, std::vector<std::string> universe);

std::vector<std::string> arg_type_universe();
std::vector<std::string> quality_universe();

struct OverlapStats {
  double overlap_percent = 0;
  double avg_arguments_per_essay = 0;
};

// Matched-span intersection tokens over all tokens, and mean predicted span
// count, accumulated across essays.
class OverlapTally {
 public:
  void add(std::span<const TokenRange> gold, std::span<const TokenRange> pred,
           std::size_t token_count);
  OverlapStats stats() const;

 private:
  std::size_t intersection_ = 0;
  std::size_t tokens_ = 0;
  std::size_t predicted_ = 0;
  std::size_t essays_ = 0;
};

OverlapStats overlap_stats(std::span<const TokenRange> gold, std::span<const TokenRange> pred,
                           std::size_t token_count);

// Half-up rounding to `decimals` places, for presentation.
double round_half_up(double value, int decimals = 2);

}  // namespace argmine
