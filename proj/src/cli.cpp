#include "argmine/cli.hpp"

#include <algorithm>
#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "argmine/corpus.hpp"
#include "argmine/evaluation.hpp"
#include "argmine/predictions.hpp"
#include "argmine/service.hpp"

namespace argmine::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << content;
}

// Hash of the corpus inputs: the bundle file, or the annotation table,
// manifest and essay files of a directory in name order.
std::string corpus_hash(const fs::path& path) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  if (!fs::is_directory(path)) return hex64(fnv1a(read_file(path), h));
  for (const char* name : {"annotations.csv", "splits.csv"}) {
    if (fs::exists(path / name)) h = fnv1a(read_file(path / name), h);
  }
  std::vector<fs::path> essays;
  if (fs::is_directory(path / "essays")) {
    for (const auto& entry : fs::directory_iterator(path / "essays")) essays.push_back(entry.path());
  }
  std::sort(essays.begin(), essays.end());
  for (const auto& e : essays) {
    h = fnv1a(e.filename().string(), h);
    h = fnv1a(read_file(e), h);
  }
  return hex64(h);
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// 3711 -> "3,711".
std::string thousands(std::size_t n) {
  std::string digits = std::to_string(n);
  for (int k = static_cast<int>(digits.size()) - 3; k > 0; k -= 3) digits.insert(k, ",");
  return digits;
}

SplitName split_from(const std::string& text) {
  auto split = try_parse_split(text);
  if (!split) throw ConfigError("unknown split '" + text + "'");
  return *split;
}

std::string report_file_json(const EvalReport& report, const std::string& hash) {
  json j = to_json(report);
  j["config_hash"] = hash;
  return j.dump(2) + "\n";
}

std::string aggregate_file_json(const AggregateReport& report, const std::string& hash) {
  json j = to_json(report);
  j["config_hash"] = hash;
  return j.dump(2) + "\n";
}

std::string table_header() {
  std::string h = report_table_header();
  h.pop_back();
  return h + ",config_hash\n";
}

std::string table_rows(const AggregateReport& report, const std::string& hash) {
  std::istringstream rows(report_table_rows(report));
  std::string out;
  for (std::string line; std::getline(rows, line);) out += line + "," + hash + "\n";
  return out;
}

std::string text_report(const AggregateReport& report, const std::string& hash) {
  return "config: " + hash + "\n" + format_text(report);
}

// Corpora loaded once per path within a command.
class CorpusCache {
 public:
  const LoadedCorpus& get(const std::string& path) {
    if (path.empty()) throw ConfigError("no corpus given (--corpus)");
    auto it = cache_.find(path);
    if (it == cache_.end()) {
      if (!fs::exists(path)) throw UsageError("corpus not found: " + path);
      it = cache_.emplace(path, open_corpus(path)).first;
    }
    return it->second;
  }

 private:
  std::map<std::string, LoadedCorpus> cache_;
};

std::unique_ptr<Completer> default_completer(const ExperimentConfig& config) {
  return std::make_unique<HttpCompleter>(config.parallelism);
}

struct RunOutcome {
  AggregateReport aggregate;
  std::string hash;
  bool partial = false;
};

// Executes one configuration and writes its artifacts under `out`.
RunOutcome execute_run(const RunSettings& settings, CorpusCache& corpora, Environment& env) {
  const ExperimentConfig config = settings.to_config();
  const std::string hash = config_hash(settings);
  const std::string started = timestamp();
  const LoadedCorpus& corpus = corpora.get(settings.corpus);
  const CorpusSplit* split = corpus.split(config.split);
  if (split == nullptr || split->essays.empty()) {
    throw UsageError("corpus has no essays in the " + settings.split + " split");
  }
  const CorpusSplit* shot_source = corpus.split(split_from(settings.shot_split));

  auto factory = env.completer ? env.completer : CompleterFactory(default_completer);
  std::unique_ptr<Completer> completer = factory(config);
  ExperimentResult result = run_experiment(*split, config, *completer, shot_source);

  RunOutcome outcome;
  outcome.aggregate = result.aggregate;
  outcome.hash = hash;
  for (const auto& file : result.predictions) {
    for (const auto& e : file.essays) outcome.partial |= e.status == EssayStatus::kFailed;
  }

  if (!settings.out.empty()) {
    const fs::path out = settings.out;
    json artifacts = json::array();
    for (std::size_t r = 0; r < result.predictions.size(); ++r) {
      PredictionsFile& file = result.predictions[r];
      file.config_hash = hash;
      const std::string stem = "run-" + std::to_string(r + 1);
      std::ostringstream jsonl;
      write_predictions(jsonl, file);
      write_file(out / (stem + ".predictions.jsonl"), jsonl.str());
      write_file(out / (stem + ".report.json"), report_file_json(result.reports[r], hash));
      artifacts.push_back(stem + ".predictions.jsonl");
      artifacts.push_back(stem + ".report.json");
    }
    write_file(out / "aggregate.json", aggregate_file_json(result.aggregate, hash));
    write_file(out / "report.txt", text_report(result.aggregate, hash));
    write_file(out / "table.csv", table_header() + table_rows(result.aggregate, hash));
    for (const char* name : {"aggregate.json", "report.txt", "table.csv"}) artifacts.push_back(name);

    json manifest = {{"tool", "argmine"},
                     {"version", ARGMINE_VERSION},
                     {"config", settings.to_json()},
                     {"config_hash", hash},
                     {"inputs", {{"corpus", settings.corpus}, {"corpus_hash", corpus_hash(settings.corpus)}}},
                     {"started", started},
                     {"finished", timestamp()},
                     {"client_discards", result.client_discards},
                     {"artifacts", std::move(artifacts)}};
    write_file(out / "manifest.json", manifest.dump(2) + "\n");
  }
  return outcome;
}

void add_run_flags(CLI::App* app, RunSettings& s, std::string& config_file) {
  app->add_option("--experiment", s.experiment, "Name recorded in reports");
  app->add_option("--corpus", s.corpus, "Corpus bundle or directory");
  app->add_option("--split", s.split, "Split to evaluate")->check(CLI::IsMember({"train", "validation", "test"}));
  app->add_option("--shot-split", s.shot_split, "Split few-shot examples come from")
      ->check(CLI::IsMember({"train", "validation", "test"}));
  app->add_option("--task", s.task, "Labels to predict")->check(CLI::IsMember({"type", "quality", "both"}));
  app->add_option("--setup", s.setup, "individual or joint")->check(CLI::IsMember({"individual", "joint"}));
  app->add_option("--segmentation", s.segmentation, "gold or inferred")->check(CLI::IsMember({"gold", "inferred"}));
  app->add_option("--mode", s.mode, "few-shot or fine-tuned")->check(CLI::IsMember({"few-shot", "fine-tuned"}));
  app->add_option("--shots", s.shots, "Few-shot examples, 0..4");
  app->add_option("--model", s.model, "Model name on the inference server");
  app->add_option("--segmentation-model", s.segmentation_model, "Separate segmentation model");
  app->add_option("--endpoint", s.endpoint, "Inference server URL (env ARGMINE_ENDPOINT)");
  app->add_option("--api", s.api, "ollama or openai")->check(CLI::IsMember({"ollama", "openai"}));
  app->add_option("--temperature", s.temperature, "Sampling temperature");
  app->add_option("--seed", s.seed, "Sampling seed; run k uses seed + k");
  app->add_option("--runs", s.runs, "Repetitions");
  app->add_option("--parallelism", s.parallelism, "Concurrent model calls");
  app->add_option("--transport-retries", s.transport_retries, "Retries after a connection failure");
  app->add_option("--timeout", s.timeout_seconds, "Per-request timeout in seconds");
  app->add_option("--out", s.out, "Output directory");
  app->add_option("--config", config_file, "TOML/INI file with any of these flags");
}

// Fills flags of `app` from a TOML/INI file. Flags given on the command line
// win. Keys use the flag names, with dashes or underscores; a section named
// after the subcommand is accepted.
void apply_config_file(CLI::App* app, const std::string& path) {
  if (path.empty()) return;
  for (const CLI::ConfigItem& item : CLI::ConfigTOML().from_file(path)) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == app->get_name())) {
      throw UsageError(path + ": unknown section '" + item.parents[0] + "'");
    }
    std::string flag = item.name;
    std::replace(flag.begin(), flag.end(), '_', '-');
    CLI::Option* option = flag == "config" ? nullptr : app->get_option_no_throw("--" + flag);
    if (option == nullptr) throw UsageError(path + ": unknown key '" + item.name + "'");
    if (option->count() > 0) continue;
    option->add_result(item.inputs);
    option->run_callback();
  }
}

void print_load_report(std::ostream& out, const LoadedCorpus& corpus) {
  for (const CorpusSplit& split : corpus.splits) {
    out << to_string(split.name) << ": " << thousands(split.essays.size()) << " essays / "
        << thousands(split.span_count()) << " arguments\n";
  }
  const LoadReport& r = corpus.report;
  out << "annotation rows: " << thousands(r.annotation_rows) << ", located: " << thousands(r.located_rows)
      << "\norphaned rows: " << r.orphaned.size() << ", unlocated rows: " << r.unlocated.size()
      << ", row errors: " << r.row_errors.size() << ", essay errors: " << r.essay_errors.size()
      << ", unassigned essays: " << r.unassigned.size() << '\n';
  auto list = [&out](const char* what, const std::vector<LoadIssue>& issues) {
    constexpr std::size_t kShown = 10;
    for (std::size_t k = 0; k < std::min(kShown, issues.size()); ++k) {
      const LoadIssue& i = issues[k];
      out << "  " << what;
      if (i.line) out << " line " << i.line;
      if (!i.essay_id.empty()) out << " essay " << i.essay_id;
      if (!i.discourse_id.empty()) out << " discourse " << i.discourse_id;
      out << ": " << i.message << '\n';
    }
    if (issues.size() > kShown) out << "  ... " << issues.size() - kShown << " more\n";
  };
  list("row error", r.row_errors);
  list("unlocated", r.unlocated);
  list("essay error", r.essay_errors);
  for (const auto& w : r.warnings) out << "  warning: " << w << '\n';
}

int cmd_ingest(const std::string& corpus_dir, const std::string& essays, const std::string& annotations,
               const std::string& manifest, const std::string& default_split, const std::string& normalizer_url,
               const std::string& out_path, Environment& env) {
  LoadOptions options;
  if (!corpus_dir.empty()) {
    options.essay_dir = fs::path(corpus_dir) / "essays";
    options.annotations = fs::path(corpus_dir) / "annotations.csv";
    if (fs::exists(fs::path(corpus_dir) / "splits.csv")) options.split_manifest = fs::path(corpus_dir) / "splits.csv";
    if (!fs::is_directory(corpus_dir)) throw UsageError("missing directory: " + corpus_dir);
  } else {
    if (essays.empty() || annotations.empty()) {
      throw UsageError("give --corpus, or --essays and --annotations");
    }
    options.essay_dir = essays;
    options.annotations = annotations;
  }
  if (!manifest.empty()) options.split_manifest = manifest;
  if (!fs::is_directory(options.essay_dir)) throw UsageError("missing directory: " + options.essay_dir.string());
  if (!fs::is_regular_file(options.annotations)) {
    throw UsageError("missing annotation table: " + options.annotations.string());
  }
  if (options.split_manifest && !fs::is_regular_file(*options.split_manifest)) {
    throw UsageError("missing split manifest: " + options.split_manifest->string());
  }
  options.default_split = split_from(default_split);
  if (!normalizer_url.empty()) options.normalizer = http_normalizer(normalizer_url);

  const LoadedCorpus corpus = load_corpus(options);
  print_load_report(*env.out, corpus);
  if (!out_path.empty()) {
    save_corpus_bundle(corpus, out_path);
    *env.out << "bundle written to " << out_path << '\n';
  }
  const LoadReport& r = corpus.report;
  const bool clean = r.orphaned.empty() && r.unlocated.empty() && r.row_errors.empty() &&
                     r.essay_errors.empty();
  return clean ? kExitOk : kExitPartial;
}

int cmd_run(const RunSettings& settings, Environment& env) {
  CorpusCache corpora;
  RunOutcome outcome = execute_run(settings, corpora, env);
  *env.out << text_report(outcome.aggregate, outcome.hash);
  if (!settings.out.empty()) *env.out << "artifacts in " << settings.out << '\n';
  return outcome.partial ? kExitPartial : kExitOk;
}

std::string report_name(const fs::path& predictions) {
  std::string name = predictions.filename().string();
  for (const std::string suffix : {".predictions.jsonl", ".jsonl"}) {
    if (name.size() > suffix.size() && name.ends_with(suffix)) {
      return name.substr(0, name.size() - suffix.size()) + ".report.json";
    }
  }
  return name + ".report.json";
}

int cmd_evaluate(const std::vector<std::string>& files, const std::string& corpus_path,
                 const std::string& split_override, const std::string& out_dir, Environment& env) {
  CorpusCache corpora;
  const LoadedCorpus& corpus = corpora.get(corpus_path);
  std::vector<EvalReport> reports;
  std::string hash;
  for (const std::string& path : files) {
    PredictionsFile file;
    try {
      file = read_predictions(fs::path(path));
    } catch (const PredictionsFormatError& e) {
      throw UsageError(path + ": " + e.what());
    } catch (const std::runtime_error& e) {
      throw UsageError(e.what());
    }
    const SplitName name = split_override.empty() ? file.context.split : split_from(split_override);
    const CorpusSplit* split = corpus.split(name);
    if (split == nullptr) throw UsageError("corpus has no " + std::string(to_string(name)) + " split");
    EvalReport report = evaluate(*split, file.essays, file.context);
    if (hash.empty()) hash = file.config_hash;
    if (!out_dir.empty()) {
      write_file(fs::path(out_dir) / report_name(path), report_file_json(report, file.config_hash));
    }
    reports.push_back(std::move(report));
  }
  const AggregateReport aggregate = aggregate_runs(reports);
  *env.out << text_report(aggregate, hash);
  if (!out_dir.empty()) {
    write_file(fs::path(out_dir) / "aggregate.json", aggregate_file_json(aggregate, hash));
    write_file(fs::path(out_dir) / "report.txt", text_report(aggregate, hash));
    write_file(fs::path(out_dir) / "table.csv", table_header() + table_rows(aggregate, hash));
  }
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_override, Environment& env) {
  const json sweep_file = json::parse(read_file(config_path), nullptr, false);
  if (sweep_file.is_discarded() || !sweep_file.is_object()) throw UsageError(config_path + ": not a JSON object");
  if (!sweep_file.contains("variants") || !sweep_file["variants"].is_array() || sweep_file["variants"].empty()) {
    throw UsageError(config_path + ": no variants to run");
  }
  RunSettings defaults;
  if (sweep_file.contains("defaults")) apply_json(defaults, sweep_file["defaults"]);
  const fs::path out = !out_override.empty() ? fs::path(out_override)
                                             : fs::path(sweep_file.value("out", defaults.out));
  if (out.empty()) throw UsageError("no output directory (--out or \"out\")");

  CorpusCache corpora;
  std::string table = table_header();
  json summary = json::array();
  std::size_t failed = 0;
  std::size_t index = 0;
  for (const json& variant : sweep_file["variants"]) {
    ++index;
    RunSettings s = defaults;
    std::string name = "variant-" + std::to_string(index);
    json entry;
    try {
      if (!variant.is_object()) throw ConfigError("variant is not an object");
      apply_json(s, variant);
      if (variant.contains("experiment")) name = s.experiment;
      else s.experiment = name;
      s.out = (out / name).string();
      RunOutcome outcome = execute_run(s, corpora, env);
      table += table_rows(outcome.aggregate, outcome.hash);
      entry = {{"experiment", name}, {"status", outcome.partial ? "partial" : "ok"},
               {"config_hash", outcome.hash}, {"out", s.out}};
      failed += outcome.partial ? 1 : 0;
      *env.out << "[" << name << "] " << (outcome.partial ? "partial" : "ok") << '\n';
    } catch (const std::exception& e) {
      ++failed;
      entry = {{"experiment", name}, {"status", "failed"}, {"error", e.what()}};
      *env.err << "[" << name << "] failed: " << e.what() << '\n';
    }
    summary.push_back(std::move(entry));
  }
  write_file(out / "table.csv", table);
  write_file(out / "sweep.json", json({{"variants", summary}}).dump(2) + "\n");
  *env.out << index - failed << " of " << index << " variants succeeded; table in "
           << (out / "table.csv").string() << '\n';
  return failed == 0 ? kExitOk : kExitPartial;
}

struct ServeSettings {
  RunSettings run;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir = "ui";
  std::vector<std::string> models;
  std::string normalizer_url;
};

int cmd_serve(ServeSettings s, Environment& env) {
  s.run.runs = 1;
  s.run.segmentation = "inferred";
  ExperimentConfig config = s.run.to_config();
  ShotSet shots;
  if (config.mode == PromptMode::kFewShot && config.shots > 0) {
    CorpusCache corpora;
    shots = select_shots(corpora.get(s.run.corpus).split(split_from(s.run.shot_split)), config.shots);
  }
  auto factory = env.completer ? env.completer : CompleterFactory(default_completer);
  std::unique_ptr<Completer> completer = factory(config);

  ServiceOptions options;
  options.host = s.host;
  options.port = s.port;
  options.static_dir = s.static_dir;
  options.models = s.models;
  options.analyze.config = config;
  if (!s.normalizer_url.empty()) options.analyze.normalizer = http_normalizer(s.normalizer_url);
  options.shots = std::move(shots);
  if (!probe_server(config.model)) {
    *env.err << "warning: model endpoint " << config.model.endpoint
             << " is unreachable; /api/health will report degraded\n";
  }
  Service service(std::move(options), *completer);
  const int port = service.bind();
  *env.out << "serving on http://" << s.host << ":" << port << std::endl;
  std::thread hook;
  if (env.on_serving) hook = std::thread([&] { env.on_serving(service, port); });
  service.listen();
  if (hook.joinable()) hook.join();
  return kExitOk;
}

}  // namespace

ExperimentConfig RunSettings::to_config() const {
  ExperimentConfig c;
  c.name = experiment;
  if (task == "type") {
    c.quality = false;
  } else if (task == "quality") {
    c.type = false;
  } else if (task != "both") {
    throw ConfigError("unknown task '" + task + "' (type, quality or both)");
  }
  c.setup = parse_setup(setup);
  c.segmentation = parse_segmentation_source(segmentation);
  c.mode = parse_prompt_mode(mode);
  c.shots = shots;
  c.model.model = model;
  c.model.endpoint = endpoint;
  c.model.api = parse_api_flavor(api);
  c.model.temperature = temperature;
  c.model.seed = seed;
  c.model.transport_retries = transport_retries;
  c.model.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(timeout_seconds * 1000));
  apply_environment(c.model);
  if (!segmentation_model.empty()) {
    c.segmentation_model = c.model;
    c.segmentation_model->model = segmentation_model;
  }
  c.runs = runs;
  c.parallelism = parallelism;
  c.split = split_from(split);
  c.validate();
  return c;
}

json RunSettings::to_json() const {
  return {{"experiment", experiment},
          {"corpus", corpus},
          {"split", split},
          {"shot_split", shot_split},
          {"task", task},
          {"setup", setup},
          {"segmentation", segmentation},
          {"mode", mode},
          {"shots", shots},
          {"model", model},
          {"segmentation_model", segmentation_model},
          {"endpoint", endpoint},
          {"api", api},
          {"temperature", temperature},
          {"seed", seed ? json(*seed) : json(nullptr)},
          {"runs", runs},
          {"parallelism", parallelism},
          {"transport_retries", transport_retries},
          {"timeout", timeout_seconds}};
}

void apply_json(RunSettings& s, const json& values) {
  if (!values.is_object()) throw ConfigError("settings must be a JSON object");
  for (const auto& [raw_key, v] : values.items()) {
    std::string key = raw_key;
    std::replace(key.begin(), key.end(), '-', '_');
    try {
      if (key == "experiment") s.experiment = v.get<std::string>();
      else if (key == "corpus") s.corpus = v.get<std::string>();
      else if (key == "split") s.split = v.get<std::string>();
      else if (key == "shot_split") s.shot_split = v.get<std::string>();
      else if (key == "task") s.task = v.get<std::string>();
      else if (key == "setup") s.setup = v.get<std::string>();
      else if (key == "segmentation") s.segmentation = v.get<std::string>();
      else if (key == "mode") s.mode = v.get<std::string>();
      else if (key == "shots") s.shots = v.get<std::size_t>();
      else if (key == "model") s.model = v.get<std::string>();
      else if (key == "segmentation_model") s.segmentation_model = v.get<std::string>();
      else if (key == "endpoint") s.endpoint = v.get<std::string>();
      else if (key == "api") s.api = v.get<std::string>();
      else if (key == "temperature") s.temperature = v.get<double>();
      else if (key == "seed") s.seed = v.is_null() ? std::nullopt : std::optional(v.get<std::int64_t>());
      else if (key == "runs") s.runs = v.get<std::size_t>();
      else if (key == "parallelism") s.parallelism = v.get<std::size_t>();
      else if (key == "transport_retries") s.transport_retries = v.get<std::size_t>();
      else if (key == "timeout") s.timeout_seconds = v.get<double>();
      else if (key == "out") s.out = v.get<std::string>();
      else throw ConfigError("unknown setting '" + raw_key + "'");
    } catch (const json::exception&) {
      throw ConfigError("setting '" + raw_key + "' has the wrong kind of value");
    }
  }
}

std::string config_hash(const RunSettings& settings) {
  return hex64(fnv1a(settings.to_json().dump()));
}

int main(int argc, const char* const* argv, Environment& env) {
  std::ostream& out = env.out ? *env.out : std::cout;
  std::ostream& err = env.err ? *env.err : std::cerr;
  env.out = &out;
  env.err = &err;

  CLI::App app{"Argument mining workbench: segment essays, classify argument type and quality "
               "with a local LLM, and score the results.",
               "argmine"};
  app.set_version_flag("--version", ARGMINE_VERSION);
  app.require_subcommand(1);

  std::string ingest_corpus, ingest_essays, ingest_annotations, ingest_manifest, ingest_out,
      ingest_split = "test", ingest_normalizer;
  auto* ingest = app.add_subcommand("ingest", "Load a corpus, report counts and write a bundle");
  ingest->add_option("--corpus", ingest_corpus, "Directory with essays/, annotations.csv, splits.csv");
  ingest->add_option("--essays", ingest_essays, "Directory of <essay_id>.txt files");
  ingest->add_option("--annotations", ingest_annotations, "Annotation table (CSV)");
  ingest->add_option("--manifest", ingest_manifest, "essay_id,split table");
  ingest->add_option("--default-split", ingest_split, "Split for essays when no manifest is given")
      ->check(CLI::IsMember({"train", "validation", "test"}));
  ingest->add_option("--normalizer-url", ingest_normalizer, "Spelling-correction service");
  ingest->add_option("--out", ingest_out, "Bundle file to write");

  RunSettings run_settings;
  std::string run_config;
  auto* run = app.add_subcommand("run", "Run one configuration and report");
  add_run_flags(run, run_settings, run_config);

  std::vector<std::string> eval_files;
  std::string eval_corpus, eval_split, eval_out;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score stored predictions without model calls");
  evaluate_cmd->add_option("predictions", eval_files, "Predictions files (one per run)")->required();
  evaluate_cmd->add_option("--corpus", eval_corpus, "Corpus bundle or directory")->required();
  evaluate_cmd->add_option("--split", eval_split, "Override the split named in the file")
      ->check(CLI::IsMember({"train", "validation", "test"}));
  evaluate_cmd->add_option("--out", eval_out, "Output directory");

  std::string sweep_config, sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Run every variant of a sweep file");
  sweep->add_option("--config", sweep_config, "Sweep file (JSON)")->required();
  sweep->add_option("--out", sweep_out, "Output directory");

  ServeSettings serve_settings;
  serve_settings.run.runs = 1;
  auto* serve = app.add_subcommand("serve", "Serve the analysis API and the browser client");
  std::string serve_config;
  add_run_flags(serve, serve_settings.run, serve_config);
  serve->add_option("--host", serve_settings.host, "Bind address");
  serve->add_option("--port", serve_settings.port, "Port (0 picks one)");
  serve->add_option("--static", serve_settings.static_dir, "Browser client directory");
  serve->add_option("--models", serve_settings.models, "Models offered to the client");
  serve->add_option("--normalizer-url", serve_settings.normalizer_url, "Spelling-correction service");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest) {
      return cmd_ingest(ingest_corpus, ingest_essays, ingest_annotations, ingest_manifest, ingest_split,
                        ingest_normalizer, ingest_out, env);
    }
    if (*run) {
      apply_config_file(run, run_config);
      return cmd_run(run_settings, env);
    }
    if (*evaluate_cmd) return cmd_evaluate(eval_files, eval_corpus, eval_split, eval_out, env);
    if (*sweep) return cmd_sweep(sweep_config, sweep_out, env);
    if (*serve) {
      apply_config_file(serve, serve_config);
      return cmd_serve(serve_settings, env);
    }
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ExperimentFailed& e) {
    err << "error: " << e.what() << '\n';
    return kExitPartial;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CorpusError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ServiceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitPartial;
  }
  return kExitUsage;
}

}  // namespace argmine::cli
