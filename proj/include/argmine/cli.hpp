#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "argmine/inference_client.hpp"
#include "argmine/pipeline.hpp"

namespace argmine {
class Service;
}

namespace argmine::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitUsage = 2;

// Everything `run` and each sweep variant accept. Field names match the
// flags with dashes turned into underscores.
struct RunSettings {
  std::string experiment = "default";
  std::string corpus;
  std::string split = "test";
  std::string shot_split = "train";
  std::string task = "both";  // type | quality | both
  std::string setup = "joint";
  std::string segmentation = "gold";
  std::string mode = "few-shot";
  std::size_t shots = 0;
  std::string model;
  std::string segmentation_model;
  std::string endpoint = "http://127.0.0.1:11434";
  std::string api = "ollama";
  double temperature = 0.0;
  std::optional<std::int64_t> seed;
  std::size_t runs = 3;
  std::size_t parallelism = 4;
  std::size_t transport_retries = 0;
  double timeout_seconds = 300;
  std::string out;

  // Throws ConfigError / std::invalid_argument on bad values.
  ExperimentConfig to_config() const;
  // Every field but `out`; the input to config_hash.
  nlohmann::json to_json() const;
};

// Overrides fields from a JSON object keyed like the flags. Throws
// ConfigError on an unknown key or a value of the wrong kind.
void apply_json(RunSettings& settings, const nlohmann::json& values);

// FNV-1a 64 over the canonical settings JSON, as 16 hex digits.
std::string config_hash(const RunSettings& settings);

using CompleterFactory = std::function<std::unique_ptr<Completer>(const ExperimentConfig&)>;

struct Environment {
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
  // Defaults to an HTTP client for the configured endpoint.
  CompleterFactory completer;
  // Called on a separate thread once `serve` has bound its port; stopping
  // the service ends the command.
  std::function<void(Service&, int port)> on_serving;
};

// Entry point behind the `argmine` executable. Returns the exit code:
// 0 success, 1 partial failure, 2 usage or input error.
int main(int argc, const char* const* argv, Environment& env);

}  // namespace argmine::cli
