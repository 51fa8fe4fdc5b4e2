#include "argmine/predictions.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

namespace argmine {

using nlohmann::json;

std::string_view to_string(Setup setup) {
  return setup == Setup::kIndividual ? "individual" : "joint";
}

Setup parse_setup(std::string_view text) {
  if (text == "individual") return Setup::kIndividual;
  if (text == "joint") return Setup::kJoint;
  throw std::invalid_argument("unknown setup '" + std::string(text) + "'");
}

std::string_view to_string(EssayStatus status) {
  switch (status) {
    case EssayStatus::kOk: return "ok";
    case EssayStatus::kDiscarded: return "discarded";
    case EssayStatus::kFailed: return "failed";
  }
  return "?";
}

std::size_t EssayPrediction::discard_events() const {
  std::size_t n = classification_discards + (status == EssayStatus::kDiscarded ? 1 : 0);
  for (const SpanPrediction& s : spans) n += s.discards;
  return n;
}

namespace {

json context_to_json(const EvalContext& c) {
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

EvalContext context_from_json(const json& j) {
  EvalContext c;
  c.experiment = j.at("experiment").get<std::string>();
  c.model = j.at("model").get<std::string>();
  c.mode = parse_prompt_mode(j.at("mode").get<std::string>());
  c.shots = j.at("shots").get<std::size_t>();
  c.setup = parse_setup(j.at("setup").get<std::string>());
  c.segmentation = parse_segmentation_source(j.at("segmentation").get<std::string>());
  c.type = j.at("type").get<bool>();
  c.quality = j.at("quality").get<bool>();
  auto split = try_parse_split(j.at("split").get<std::string>());
  if (!split) throw std::invalid_argument("unknown split");
  c.split = *split;
  return c;
}

EssayStatus parse_status(const std::string& s) {
  if (s == "ok") return EssayStatus::kOk;
  if (s == "discarded") return EssayStatus::kDiscarded;
  if (s == "failed") return EssayStatus::kFailed;
  throw std::invalid_argument("unknown status '" + s + "'");
}

}  // namespace

void write_predictions(std::ostream& out, const PredictionsFile& file) {
  json header = {{"kind", "header"},
                 {"format", "argmine-predictions"},
                 {"version", 1},
                 {"run", file.run_index},
                 {"config_hash", file.config_hash},
                 {"context", context_to_json(file.context)}};
  out << header.dump() << '\n';
  for (const EssayPrediction& e : file.essays) {
    json spans = json::array();
    for (const SpanPrediction& s : e.spans) {
      spans.push_back({{"start", s.tokens.begin},
                       {"end", s.tokens.end},
                       {"type", s.type ? json(to_string(*s.type)) : json(nullptr)},
                       {"quality", s.quality ? json(to_string(*s.quality)) : json(nullptr)},
                       {"attempts", s.attempts},
                       {"discards", s.discards}});
    }
    json line = {{"kind", "essay"},
                 {"essay_id", e.essay_id},
                 {"status", to_string(e.status)},
                 {"segmentation_attempts", e.segmentation_attempts},
                 {"classification_discards", e.classification_discards},
                 {"error", e.error},
                 {"spans", std::move(spans)}};
    out << line.dump() << '\n';
  }
}

void write_predictions(const std::filesystem::path& path, const PredictionsFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_predictions(out, file);
}

PredictionsFile read_predictions(std::istream& in) {
  PredictionsFile file;
  std::string text;
  std::size_t line = 0;
  bool have_header = false;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw PredictionsFormatError(line, "not a JSON object");
    try {
      const std::string kind = j.at("kind").get<std::string>();
      if (!have_header) {
        if (kind != "header" || j.value("format", "") != "argmine-predictions") {
          throw PredictionsFormatError(line, "expected the predictions header");
        }
        file.run_index = j.at("run").get<std::size_t>();
        file.config_hash = j.value("config_hash", "");
        file.context = context_from_json(j.at("context"));
        have_header = true;
        continue;
      }
      if (kind != "essay") throw PredictionsFormatError(line, "unexpected record kind '" + kind + "'");
      EssayPrediction e;
      e.essay_id = j.at("essay_id").get<std::string>();
      e.status = parse_status(j.at("status").get<std::string>());
      e.segmentation_attempts = j.at("segmentation_attempts").get<std::size_t>();
      e.classification_discards = j.at("classification_discards").get<std::size_t>();
      e.error = j.at("error").get<std::string>();
      std::size_t floor = 0;
      for (const json& js : j.at("spans")) {
        SpanPrediction s;
        s.tokens = {js.at("start").get<std::size_t>(), js.at("end").get<std::size_t>()};
        if (s.tokens.empty() || s.tokens.begin < floor) {
          throw PredictionsFormatError(line, "spans must be nonempty, sorted and disjoint");
        }
        floor = s.tokens.end;
        if (!js.at("type").is_null()) s.type = parse_arg_type(js.at("type").get<std::string>());
        if (!js.at("quality").is_null()) s.quality = parse_quality(js.at("quality").get<std::string>());
        s.attempts = js.at("attempts").get<std::size_t>();
        s.discards = js.at("discards").get<std::size_t>();
        e.spans.push_back(s);
      }
      file.essays.push_back(std::move(e));
    } catch (const PredictionsFormatError&) {
      throw;
    } catch (const std::exception& ex) {
      throw PredictionsFormatError(line, ex.what());
    }
  }
  if (!have_header) throw PredictionsFormatError(line, "missing predictions header");
  return file;
}

PredictionsFile read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_predictions(in);
}

}  // namespace argmine
