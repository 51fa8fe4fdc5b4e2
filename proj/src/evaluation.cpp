#include "argmine/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "argmine/csv.hpp"

namespace argmine {

using nlohmann::json;

namespace {

int type_index(ArgType t) { return static_cast<int>(t); }
int quality_index(QualityLabel q) { return static_cast<int>(q); }

}  // namespace

EvalReport evaluate(const CorpusSplit& gold, std::span<const EssayPrediction> predictions,
                    const EvalContext& context) {
  EvalReport report;
  report.context = context;
  const bool inferred = context.segmentation == SegmentationSource::kInferred;

  BioCounts bio;
  OverlapTally overlap;
  LabelTally types(arg_type_universe());
  LabelTally qualities(quality_universe());

  for (const EssayPrediction& pred : predictions) {
    const AnnotatedEssay* ae = gold.find(pred.essay_id);
    if (ae == nullptr) {
      throw ContractError("essay '" + pred.essay_id + "' is not in the " +
                          std::string(to_string(gold.name)) + " split");
    }
    DiscardStats& d = report.discards;
    ++d.essays;
    if (pred.status == EssayStatus::kDiscarded) ++d.essays_discarded;
    if (pred.status == EssayStatus::kFailed) ++d.essays_failed;
    d.spans += pred.spans.size();
    for (const SpanPrediction& s : pred.spans) d.span_discards += s.discards;
    d.classification_discards += pred.classification_discards;

    const std::size_t n = ae->essay.token_count();
    // Under inferred segmentation every token belongs to some argument, so
    // the reference is the gold partition; otherwise the annotated spans.
    const std::vector<TokenRange> gold_spans = inferred ? gold_partition(*ae) : ae->span_ranges();
    const bool usable = pred.status == EssayStatus::kOk;

    std::vector<TokenRange> pred_spans;
    if (usable) {
      for (const SpanPrediction& s : pred.spans) pred_spans.push_back(s.tokens);
    }

    if (inferred) {
      const std::vector<TokenRange>& gold_cut = gold_spans;
      // An unusable essay is scored as one undivided span.
      const std::vector<TokenRange> pred_cut =
          usable ? pred_spans : std::vector<TokenRange>{TokenRange{0, n}};
      bio += bio_counts(bio_tags(n, gold_cut), bio_tags(n, pred_cut));
      overlap.add(gold_cut, pred_cut, n);
    } else {
      check_disjoint(pred_spans);
    }

    if (context.type) {
      std::vector<int> gold_labels;
      for (const GoldSpan& g : ae->spans) gold_labels.push_back(type_index(g.arg_type));
      std::vector<TokenRange> ranges;
      std::vector<int> labels;
      if (usable) {
        for (const SpanPrediction& s : pred.spans) {
          if (!s.type) continue;
          ranges.push_back(s.tokens);
          labels.push_back(type_index(*s.type));
        }
      }
      types.add(match_spans(gold_spans, ranges), gold_labels, labels);
    }
    if (context.quality) {
      std::vector<int> gold_labels;
      for (const GoldSpan& g : ae->spans) gold_labels.push_back(quality_index(g.quality));
      std::vector<TokenRange> ranges;
      std::vector<int> labels;
      if (usable) {
        for (const SpanPrediction& s : pred.spans) {
          if (!s.quality) continue;
          ranges.push_back(s.tokens);
          labels.push_back(quality_index(*s.quality));
        }
      }
      qualities.add(match_spans(gold_spans, ranges), gold_labels, labels);
    }
  }

  if (inferred) {
    report.segmentation = bio_report(bio);
    report.overlap = overlap.stats();
  }
  if (context.type) {
    report.type = types.report(context.segmentation);
    report.type_confusion = types.confusion();
  }
  if (context.quality) {
    report.quality = qualities.report(context.segmentation);
    report.quality_confusion = qualities.confusion();
  }
  return report;
}

namespace {

void flatten_labels(std::vector<Quantity>& out, const std::string& group, const LabelReport& r,
                    const std::optional<ConfusionMatrix>& confusion) {
  for (const LabelScore& s : r.labels) {
    out.push_back({group, s.label, "precision", s.score.precision});
    out.push_back({group, s.label, "recall", s.score.recall});
    out.push_back({group, s.label, "f1", s.score.f1});
    out.push_back({group, s.label, "support", static_cast<double>(s.support)});
  }
  out.push_back({group, "", "macro_f1", r.macro_f1});
  if (!confusion) return;
  const ConfusionMatrix& cm = *confusion;
  for (std::size_t row = 0; row < cm.labels.size(); ++row) {
    for (std::size_t col = 0; col < cm.labels.size(); ++col) {
      out.push_back({group + "_confusion", cm.labels[row], cm.labels[col],
                     static_cast<double>(cm.cells[row][col])});
    }
  }
}

}  // namespace

std::vector<Quantity> flatten(const EvalReport& report) {
  std::vector<Quantity> out;
  if (report.segmentation) {
    const BioReport& b = *report.segmentation;
    for (const auto& [label, s] : {std::pair{"B", b.b}, std::pair{"I", b.i}}) {
      out.push_back({"segmentation", label, "precision", s.precision});
      out.push_back({"segmentation", label, "recall", s.recall});
      out.push_back({"segmentation", label, "f1", s.f1});
    }
    out.push_back({"segmentation", "", "macro_f1", b.macro_f1});
  }
  if (report.overlap) {
    out.push_back({"overlap", "", "overlap_percent", report.overlap->overlap_percent});
    out.push_back({"overlap", "", "avg_arguments_per_essay", report.overlap->avg_arguments_per_essay});
  }
  if (report.type) flatten_labels(out, "type", *report.type, report.type_confusion);
  if (report.quality) flatten_labels(out, "quality", *report.quality, report.quality_confusion);
  const DiscardStats& d = report.discards;
  out.push_back({"discards", "", "essays", static_cast<double>(d.essays)});
  out.push_back({"discards", "", "essays_discarded", static_cast<double>(d.essays_discarded)});
  out.push_back({"discards", "", "essays_failed", static_cast<double>(d.essays_failed)});
  out.push_back({"discards", "", "spans", static_cast<double>(d.spans)});
  out.push_back({"discards", "", "span_discards", static_cast<double>(d.span_discards)});
  out.push_back({"discards", "", "classification_discards",
                 static_cast<double>(d.classification_discards)});
  return out;
}

const AggregateQuantity* AggregateReport::find(std::string_view group, std::string_view label,
                                               std::string_view metric) const {
  for (const auto& q : quantities) {
    if (q.group == group && q.label == label && q.metric == metric) return &q;
  }
  return nullptr;
}

AggregateReport aggregate_runs(std::span<const EvalReport> reports) {
  if (reports.empty()) throw ContractError("no reports to aggregate");
  AggregateReport agg;
  agg.context = reports.front().context;
  agg.runs = reports.size();
  agg.std_defined = reports.size() > 1;

  std::vector<std::vector<Quantity>> flat;
  for (const EvalReport& r : reports) {
    if (!(r.context == agg.context)) throw ContractError("reports come from different configurations");
    flat.push_back(flatten(r));
  }
  const std::size_t width = flat.front().size();
  for (const auto& f : flat) {
    if (f.size() != width) throw ContractError("reports carry different quantities");
  }
  for (std::size_t k = 0; k < width; ++k) {
    const Quantity& head = flat.front()[k];
    double sum = 0;
    for (const auto& f : flat) {
      if (f[k].group != head.group || f[k].label != head.label || f[k].metric != head.metric) {
        throw ContractError("reports carry different quantities");
      }
      sum += f[k].value;
    }
    const double mean = sum / static_cast<double>(flat.size());
    double var = 0;
    if (flat.size() > 1) {
      for (const auto& f : flat) var += (f[k].value - mean) * (f[k].value - mean);
      var /= static_cast<double>(flat.size() - 1);
    }
    agg.quantities.push_back({head.group, head.label, head.metric, mean, std::sqrt(var)});
  }
  return agg;
}

namespace {

json context_json(const EvalContext& c) {
  return {{"experiment", c.experiment},
          {"model", c.model},
          {"mode", to_string(c.mode)},
          {"shots", c.shots},
          {"setup", to_string(c.setup)},
          {"segmentation", to_string(c.segmentation)},
          {"type", c.type},
          {"quality", c.quality},
          {"split", to_string(c.split)}};
}

json score_json(const Score& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

json label_report_json(const LabelReport& r, const std::optional<ConfusionMatrix>& cm) {
  json labels = json::array();
  for (const LabelScore& s : r.labels) {
    json j = score_json(s.score);
    j["label"] = s.label;
    j["tp"] = s.counts.tp;
    j["fp"] = s.counts.fp;
    j["fn"] = s.counts.fn;
    j["support"] = s.support;
    labels.push_back(std::move(j));
  }
  json j = {{"labels", std::move(labels)}, {"macro_f1", r.macro_f1}, {"echec_counted", r.echec_counted}};
  if (cm) j["confusion"] = {{"labels", cm->labels}, {"cells", cm->cells}};
  return j;
}

}  // namespace

json to_json(const EvalReport& r) {
  json j = {{"context", context_json(r.context)}};
  if (r.segmentation) {
    const BioReport& b = *r.segmentation;
    j["segmentation"] = {
        {"B", score_json(b.b)},
        {"I", score_json(b.i)},
        {"macro_f1", b.macro_f1},
        {"counts", {{"B", {{"tp", b.counts.b.tp}, {"fp", b.counts.b.fp}, {"fn", b.counts.b.fn}}},
                    {"I", {{"tp", b.counts.i.tp}, {"fp", b.counts.i.fp}, {"fn", b.counts.i.fn}}}}}};
  }
  if (r.overlap) {
    j["overlap"] = {{"overlap_percent", r.overlap->overlap_percent},
                    {"avg_arguments_per_essay", r.overlap->avg_arguments_per_essay}};
  }
  if (r.type) j["type"] = label_report_json(*r.type, r.type_confusion);
  if (r.quality) j["quality"] = label_report_json(*r.quality, r.quality_confusion);
  const DiscardStats& d = r.discards;
  j["discards"] = {{"essays", d.essays},
                   {"essays_discarded", d.essays_discarded},
                   {"essays_failed", d.essays_failed},
                   {"spans", d.spans},
                   {"span_discards", d.span_discards},
                   {"classification_discards", d.classification_discards}};
  return j;
}

json to_json(const AggregateReport& r) {
  json quantities = json::array();
  for (const auto& q : r.quantities) {
    quantities.push_back({{"group", q.group}, {"label", q.label}, {"metric", q.metric},
                          {"mean", q.mean}, {"std", q.std}});
  }
  return {{"context", context_json(r.context)},
          {"runs", r.runs},
          {"std_defined", r.std_defined},
          {"quantities", std::move(quantities)}};
}

namespace {

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", round_half_up(v, 2));
  return buf;
}

std::string cell(const AggregateReport& r, const AggregateQuantity* q) {
  if (q == nullptr) return "-";
  if (!r.std_defined) return fixed2(q->mean);
  return fixed2(q->mean) + " ± " + fixed2(q->std);
}

std::string pad(const std::string& s, std::size_t width) {
  // "±" is two bytes but one column.
  std::size_t columns = 0;
  for (unsigned char c : s) columns += (c & 0xc0) != 0x80;
  return s + std::string(width > columns ? width - columns : 0, ' ');
}

void label_table(std::ostringstream& out, const AggregateReport& r, const std::string& group,
                 const std::vector<std::string>& labels, const std::vector<std::string>& metrics) {
  out << pad(group, 22);
  for (const auto& m : metrics) out << pad(m, 18);
  out << '\n';
  for (const auto& label : labels) {
    out << pad(label, 22);
    for (const auto& m : metrics) out << pad(cell(r, r.find(group, label, m)), 18);
    out << '\n';
  }
  out << pad("macro F1", 22) << cell(r, r.find(group, "", "macro_f1")) << "\n\n";
}

}  // namespace

std::string format_text(const AggregateReport& r) {
  std::ostringstream out;
  const EvalContext& c = r.context;
  out << "experiment: " << c.experiment << "\nmodel: " << c.model << "\nmode: " << to_string(c.mode)
      << " (shots " << c.shots << ")\nsetup: " << to_string(c.setup)
      << "\nsegmentation: " << to_string(c.segmentation) << "\nsplit: " << to_string(c.split)
      << "\nruns: " << r.runs << (r.std_defined ? "" : " (std undefined, reported as 0)") << "\n\n";

  const std::vector<std::string> prf = {"precision", "recall", "f1"};
  if (r.find("segmentation", "", "macro_f1")) label_table(out, r, "segmentation", {"B", "I"}, prf);
  if (r.find("overlap", "", "overlap_percent")) {
    out << pad("overlap %", 22) << cell(r, r.find("overlap", "", "overlap_percent")) << '\n';
    out << pad("arguments / essay", 22) << cell(r, r.find("overlap", "", "avg_arguments_per_essay"))
        << "\n\n";
  }
  for (const std::string group : {"type", "quality"}) {
    if (!r.find(group, "", "macro_f1")) continue;
    std::vector<std::string> labels = group == "type" ? arg_type_universe() : quality_universe();
    if (r.find(group, std::string(kEchec), "f1")) labels.emplace_back(kEchec);
    label_table(out, r, group, labels, prf);

    std::vector<std::string> columns = group == "type" ? arg_type_universe() : quality_universe();
    columns.emplace_back(kEchec);
    out << pad(group + " confusion", 22);
    for (const auto& col : columns) out << pad(col.substr(0, 12), 16);
    out << '\n';
    for (const auto& row : columns) {
      out << pad(row, 22);
      for (const auto& col : columns) {
        const auto* q = r.find(group + "_confusion", row, col);
        out << pad(q ? fixed2(q->mean) : "-", 16);
      }
      out << '\n';
    }
    out << '\n';
  }
  out << "discards:";
  for (const std::string m : {"essays", "essays_discarded", "essays_failed", "spans",
                              "span_discards", "classification_discards"}) {
    if (const auto* q = r.find("discards", "", m)) out << ' ' << m << '=' << fixed2(q->mean);
  }
  out << '\n';
  return out.str();
}

std::string report_table_header() {
  return "experiment,model,mode,setup,segmentation,label,metric,value,std\n";
}

std::string report_table_rows(const AggregateReport& r) {
  std::ostringstream out;
  const EvalContext& c = r.context;
  const std::string mode = std::string(to_string(c.mode)) + "-" + std::to_string(c.shots);
  for (const auto& q : r.quantities) {
    out << csv::escape(c.experiment) << ',' << csv::escape(c.model) << ',' << mode << ','
        << to_string(c.setup) << ',' << to_string(c.segmentation) << ',' << csv::escape(q.label)
        << ',' << csv::escape(q.group + "." + q.metric) << ',' << fixed2(q.mean) << ','
        << fixed2(q.std) << '\n';
  }
  return out.str();
}

}  // namespace argmine
