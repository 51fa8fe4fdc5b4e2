#pragma once

// Deliberately naive reference implementations. They share no code with the
// library: tags come from a per-token boundary lookup, matches from an
// exhaustive pair scan with floating ratios, label counts from a direct
// recount.

#include <algorithm>
#include <cstddef>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "argmine/corpus.hpp"

namespace argmine::oracle {

// 'B' or 'I' for every token; the spans tile [0, n).
inline std::vector<char> tags(std::size_t n, const std::vector<TokenRange>& spans) {
  std::set<std::size_t> starts;
  for (const TokenRange& s : spans) starts.insert(s.begin);
  std::vector<char> out;
  for (std::size_t t = 0; t < n; ++t) out.push_back(starts.count(t) ? 'B' : 'I');
  return out;
}

struct TagCounts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

inline TagCounts count_tag(const std::vector<char>& gold, const std::vector<char>& pred, char tag) {
  TagCounts c;
  for (std::size_t t = 0; t < gold.size(); ++t) {
    if (gold[t] == tag && pred[t] == tag) ++c.tp;
    if (gold[t] != tag && pred[t] == tag) ++c.fp;
    if (gold[t] == tag && pred[t] != tag) ++c.fn;
  }
  return c;
}

inline double f1_percent(const TagCounts& c) {
  const double p = c.tp + c.fp ? 100.0 * c.tp / (c.tp + c.fp) : 0.0;
  const double r = c.tp + c.fn ? 100.0 * c.tp / (c.tp + c.fn) : 0.0;
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

inline std::size_t overlap(TokenRange a, TokenRange b) {
  std::size_t n = 0;
  for (std::size_t t = a.begin; t < a.end; ++t) n += (t >= b.begin && t < b.end);
  return n;
}

// Every (gold, pred) index pair whose smaller overlap ratio exceeds one half.
inline std::vector<std::pair<std::size_t, std::size_t>> matches(const std::vector<TokenRange>& gold,
                                                                const std::vector<TokenRange>& pred) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t g = 0; g < gold.size(); ++g) {
    for (std::size_t p = 0; p < pred.size(); ++p) {
      const double inter = static_cast<double>(overlap(gold[g], pred[p]));
      const double o_gold = inter / static_cast<double>(gold[g].size());
      const double o_pred = inter / static_cast<double>(pred[p].size());
      if (std::min(o_gold, o_pred) > 0.5) out.emplace_back(g, p);
    }
  }
  return out;
}

struct LabelCounts {
  std::size_t tp = 0, fp = 0, fn = 0, support = 0;
};

// Per-label recount; index `labels` is the Echec column of `confusion`.
inline std::vector<LabelCounts> label_counts(const std::vector<TokenRange>& gold, const std::vector<int>& gold_labels,
                                             const std::vector<TokenRange>& pred, const std::vector<int>& pred_labels,
                                             int labels, std::vector<std::vector<std::size_t>>* confusion = nullptr) {
  const auto pairs = matches(gold, pred);
  std::vector<LabelCounts> c(labels);
  if (confusion) confusion->assign(labels + 1, std::vector<std::size_t>(labels + 1, 0));
  for (std::size_t g = 0; g < gold.size(); ++g) {
    ++c[gold_labels[g]].support;
    bool matched = false;
    for (const auto& [mg, mp] : pairs) {
      if (mg != g) continue;
      matched = true;
      if (confusion) ++(*confusion)[gold_labels[g]][pred_labels[mp]];
      if (gold_labels[g] == pred_labels[mp]) ++c[gold_labels[g]].tp;
      else ++c[gold_labels[g]].fn, ++c[pred_labels[mp]].fp;
    }
    if (!matched) {
      ++c[gold_labels[g]].fn;
      if (confusion) ++(*confusion)[gold_labels[g]][labels];
    }
  }
  for (std::size_t p = 0; p < pred.size(); ++p) {
    bool matched = false;
    for (const auto& pair : pairs) matched = matched || pair.second == p;
    if (!matched) ++c[pred_labels[p]].fp;
  }
  return c;
}

// A random tiling of [0, n) into at most `max_spans` pieces.
inline std::vector<TokenRange> random_partition(std::mt19937& rng, std::size_t n, std::size_t max_spans) {
  std::uniform_int_distribution<std::size_t> count(1, std::min(max_spans, n));
  std::vector<std::size_t> cuts(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) cuts[i] = i + 1;
  std::shuffle(cuts.begin(), cuts.end(), rng);
  cuts.resize(count(rng) - 1);
  std::sort(cuts.begin(), cuts.end());
  std::vector<TokenRange> out;
  std::size_t begin = 0;
  for (std::size_t c : cuts) out.push_back({begin, c}), begin = c;
  out.push_back({begin, n});
  return out;
}

// Up to `max_spans` disjoint, sorted spans with random gaps, inside [0, n).
inline std::vector<TokenRange> random_disjoint(std::mt19937& rng, std::size_t n, std::size_t max_spans) {
  std::vector<TokenRange> out;
  for (const TokenRange& r : random_partition(rng, n, max_spans)) {
    std::uniform_int_distribution<int> keep(0, 4);
    if (keep(rng) == 0) continue;  // leave a gap
    std::uniform_int_distribution<std::size_t> trim(0, r.size() - 1);
    const std::size_t cut = trim(rng);
    out.push_back(keep(rng) < 2 ? TokenRange{r.begin + cut, r.end} : TokenRange{r.begin, r.end - cut});
  }
  return out;
}

}  // namespace argmine::oracle
