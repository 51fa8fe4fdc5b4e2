#include "argmine/eval_metrics.hpp"

#include <cmath>
#include <numeric>

namespace argmine {

std::string_view to_string(SegmentationSource source) {
  return source == SegmentationSource::kGold ? "gold" : "inferred";
}

SegmentationSource parse_segmentation_source(std::string_view text) {
  if (text == "gold") return SegmentationSource::kGold;
  if (text == "inferred") return SegmentationSource::kInferred;
  throw std::invalid_argument("unknown segmentation source '" + std::string(text) + "'");
}

void check_partition(std::size_t token_count, std::span<const TokenRange> spans) {
  std::size_t expected = 0;
  for (const TokenRange& s : spans) {
    if (s.begin != expected || s.end <= s.begin) {
      throw ContractError("spans do not partition the token range at token " +
                          std::to_string(expected));
    }
    expected = s.end;
  }
  if (expected != token_count) {
    throw ContractError("spans cover " + std::to_string(expected) + " of " +
                        std::to_string(token_count) + " tokens");
  }
}

void check_disjoint(std::span<const TokenRange> spans) {
  std::size_t floor = 0;
  for (const TokenRange& s : spans) {
    if (s.empty()) throw ContractError("empty span");
    if (s.begin < floor) throw ContractError("spans overlap or are unsorted");
    floor = s.end;
  }
}

std::vector<BioTag> bio_tags(std::size_t token_count, std::span<const TokenRange> spans) {
  check_partition(token_count, spans);
  std::vector<BioTag> tags(token_count, BioTag::kI);
  for (const TokenRange& s : spans) tags[s.begin] = BioTag::kB;
  return tags;
}

Score score(const Counts& c) {
  Score s;
  if (c.tp + c.fp > 0) s.precision = 100.0 * static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) s.recall = 100.0 * static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (s.precision + s.recall > 0) s.f1 = 2 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

BioCounts bio_counts(std::span<const BioTag> gold, std::span<const BioTag> pred) {
  if (gold.size() != pred.size()) {
    throw ContractError("tag sequences differ in length: " + std::to_string(gold.size()) + " vs " +
                        std::to_string(pred.size()));
  }
  BioCounts c;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    const BioTag g = gold[k];
    const BioTag p = pred[k];
    for (auto [tag, counts] : {std::pair{BioTag::kB, &c.b}, std::pair{BioTag::kI, &c.i}}) {
      if (g == tag && p == tag) ++counts->tp;
      else if (p == tag) ++counts->fp;
      else if (g == tag) ++counts->fn;
    }
  }
  return c;
}

BioReport bio_report(const BioCounts& counts) {
  BioReport r;
  r.counts = counts;
  r.b = score(counts.b);
  r.i = score(counts.i);
  // A tag absent from both sequences (I, when every span is one token) has
  // nothing to score and stays out of the mean.
  const auto present = [](const Counts& c) { return c.tp + c.fp + c.fn > 0; };
  double sum = 0;
  int tags = 0;
  if (present(counts.b)) sum += r.b.f1, ++tags;
  if (present(counts.i)) sum += r.i.f1, ++tags;
  r.macro_f1 = tags ? sum / tags : 0.0;
  return r;
}

BioReport bio_f1(std::span<const BioTag> gold, std::span<const BioTag> pred) {
  return bio_report(bio_counts(gold, pred));
}

bool is_match(std::size_t intersection, std::size_t gold_size, std::size_t pred_size) {
  return 2 * intersection > gold_size && 2 * intersection > pred_size;
}

std::size_t intersection_size(TokenRange a, TokenRange b) {
  const std::size_t lo = std::max(a.begin, b.begin);
  const std::size_t hi = std::min(a.end, b.end);
  return hi > lo ? hi - lo : 0;
}

SpanMatching match_spans(std::span<const TokenRange> gold, std::span<const TokenRange> pred) {
  check_disjoint(gold);
  check_disjoint(pred);
  SpanMatching m;
  std::vector<bool> pred_matched(pred.size(), false);
  std::size_t p = 0;
  for (std::size_t g = 0; g < gold.size(); ++g) {
    while (p < pred.size() && pred[p].end <= gold[g].begin) ++p;
    bool matched = false;
    for (std::size_t q = p; q < pred.size() && pred[q].begin < gold[g].end; ++q) {
      const std::size_t inter = intersection_size(gold[g], pred[q]);
      if (!matched && is_match(inter, gold[g].size(), pred[q].size())) {
        m.matches.push_back({g, q, inter, static_cast<double>(inter) / gold[g].size(),
                             static_cast<double>(inter) / pred[q].size()});
        pred_matched[q] = true;
        matched = true;
      }
    }
    if (!matched) m.unmatched_gold.push_back(g);
  }
  for (std::size_t q = 0; q < pred.size(); ++q) {
    if (!pred_matched[q]) m.unmatched_pred.push_back(q);
  }
  return m;
}

double macro_f1(std::span<const double> label_f1, bool with_echec) {
  const double sum = std::accumulate(label_f1.begin(), label_f1.end(), 0.0);
  const std::size_t n = label_f1.size() + (with_echec ? 1 : 0);
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> universe) : labels(std::move(universe)) {
  labels.emplace_back(kEchec);
  cells.assign(labels.size(), std::vector<std::size_t>(labels.size(), 0));
}

std::size_t ConfusionMatrix::row_sum(std::size_t row) const {
  return std::accumulate(cells.at(row).begin(), cells.at(row).end(), std::size_t{0});
}

LabelTally::LabelTally(std::vector<std::string> universe)
    : universe_(universe),
      counts_(universe.size()),
      support_(universe.size(), 0),
      confusion_(std::move(universe)) {}

void LabelTally::add(const SpanMatching& matching, std::span<const int> gold_labels,
                     std::span<const int> pred_labels) {
  const int k = static_cast<int>(universe_.size());
  auto check = [k](int label) {
    if (label < 0 || label >= k) throw LabelError("label index " + std::to_string(label) + " outside the universe");
    return static_cast<std::size_t>(label);
  };
  const std::size_t echec = confusion_.echec();
  for (const MatchCandidate& m : matching.matches) {
    const std::size_t g = check(gold_labels[m.gold_index]);
    const std::size_t p = check(pred_labels[m.pred_index]);
    ++support_[g];
    ++confusion_.cells[g][p];
    if (g == p) {
      ++counts_[g].tp;
    } else {
      ++counts_[g].fn;
      ++counts_[p].fp;
    }
  }
  for (std::size_t gi : matching.unmatched_gold) {
    const std::size_t g = check(gold_labels[gi]);
    ++support_[g];
    ++counts_[g].fn;
    ++confusion_.cells[g][echec];
  }
  for (std::size_t pi : matching.unmatched_pred) {
    ++counts_[check(pred_labels[pi])].fp;
  }
}

LabelReport LabelTally::report(SegmentationSource source) const {
  LabelReport r;
  std::vector<double> f1;
  for (std::size_t k = 0; k < universe_.size(); ++k) {
    LabelScore s{universe_[k], counts_[k], support_[k], score(counts_[k])};
    f1.push_back(s.score.f1);
    r.labels.push_back(std::move(s));
  }
  if (source == SegmentationSource::kInferred) {
    r.labels.push_back({std::string(kEchec), {}, 0, {}});
    std::size_t unmatched = 0;
    for (std::size_t row = 0; row < universe_.size(); ++row) unmatched += confusion_.cells[row][confusion_.echec()];
    r.echec_counted = unmatched > 0;
  }
  r.macro_f1 = macro_f1(f1, r.echec_counted);
  return r;
}

LabelReport label_scores(const SpanMatching& matching, std::span<const int> gold_labels,
                         std::span<const int> pred_labels, std::vector<std::string> universe,
                         SegmentationSource source) {
  LabelTally tally(std::move(universe));
  tally.add(matching, gold_labels, pred_labels);
  return tally.report(source);
}

ConfusionMatrix confusion_matrix(const SpanMatching& matching, std::span<const int> gold_labels,
                                 std::span<const int> pred_labels, std::vector<std::string> universe) {
  LabelTally tally(std::move(universe));
  tally.add(matching, gold_labels, pred_labels);
  return tally.confusion();
}

std::vector<std::string> arg_type_universe() {
  std::vector<std::string> out;
  for (ArgType t : kAllArgTypes) out.emplace_back(to_string(t));
  return out;
}

std::vector<std::string> quality_universe() {
  std::vector<std::string> out;
  for (QualityLabel q : kAllQualityLabels) out.emplace_back(to_string(q));
  return out;
}

void OverlapTally::add(std::span<const TokenRange> gold, std::span<const TokenRange> pred,
                       std::size_t token_count) {
  const SpanMatching m = match_spans(gold, pred);
  for (const MatchCandidate& c : m.matches) intersection_ += c.intersection;
  tokens_ += token_count;
  predicted_ += pred.size();
  ++essays_;
}

OverlapStats OverlapTally::stats() const {
  OverlapStats s;
  if (tokens_ > 0) s.overlap_percent = 100.0 * static_cast<double>(intersection_) / static_cast<double>(tokens_);
  if (essays_ > 0) s.avg_arguments_per_essay = static_cast<double>(predicted_) / static_cast<double>(essays_);
  return s;
}

OverlapStats overlap_stats(std::span<const TokenRange> gold, std::span<const TokenRange> pred,
                           std::size_t token_count) {
  OverlapTally tally;
  tally.add(gold, pred, token_count);
  return tally.stats();
}

double round_half_up(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  // The epsilon keeps values like 51.44875 (stored as 51.448749999...) on
  // the intended side.
  return std::floor(value * scale + 0.5 + 1e-9) / scale;
}

}  // namespace argmine
