#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "argmine/prompt_builder.hpp"

namespace argmine {

// Maximum completions per item before it is discarded.
inline constexpr std::size_t kMaxAttempts = 5;

enum class ApiFlavor {
  kOllama,  // POST /api/generate
  kOpenAI,  // POST /v1/chat/completions
};

std::string_view to_string(ApiFlavor api);
ApiFlavor parse_api_flavor(std::string_view text);

struct ModelConfig {
  std::string endpoint = "http://127.0.0.1:11434";
  std::string model;
  ApiFlavor api = ApiFlavor::kOllama;
  double temperature = 0.0;
  std::optional<std::int64_t> seed;
  int max_output_tokens = 4096;
  std::chrono::milliseconds timeout{std::chrono::minutes(5)};
  // Sent as "Authorization: Bearer <key>" when nonempty.
  std::string api_key;
  // Extra attempts after a transport failure; these never count against the
  // five format attempts.
  std::size_t transport_retries = 0;

  // Throws ConfigError on an empty model name or negative temperature.
  void validate() const;
};

// Environment overrides: ARGMINE_ENDPOINT, ARGMINE_API_KEY.
void apply_environment(ModelConfig& config);

enum class TransportErrorKind { kConnection, kTimeout, kStatus, kProtocol };

std::string_view to_string(TransportErrorKind kind);

class TransportError : public std::runtime_error {
 public:
  TransportError(TransportErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  TransportErrorKind kind() const { return kind_; }

 private:
  TransportErrorKind kind_;
};

// Anything that turns a prompt into raw model text. Implementations must be
// safe to call from several threads at once.
class Completer {
 public:
  virtual ~Completer() = default;
  // Throws TransportError.
  virtual std::string complete(const Prompt& prompt, const ModelConfig& config) = 0;
};

// HTTP client for a local inference server. At most `max_in_flight` requests
// are outstanding at any time; each call uses its own connection.
class HttpCompleter : public Completer {
 public:
  explicit HttpCompleter(std::size_t max_in_flight = 4);

  std::string complete(const Prompt& prompt, const ModelConfig& config) override;

 private:
  std::counting_semaphore<1024> slots_;
};

// True when the server answers HTTP at all.
bool probe_server(const ModelConfig& config);

enum class OutcomeStatus { kValid, kDiscarded, kTransportFailed };

std::string_view to_string(OutcomeStatus status);

template <class T>
struct CompletionOutcome {
  OutcomeStatus status = OutcomeStatus::kDiscarded;
  std::optional<T> value;
  // Completions consumed from the format budget, 1..5.
  std::size_t attempts = 0;
  std::string last_raw;
  std::string error;
  std::vector<std::string> rejections;

  bool ok() const { return status == OutcomeStatus::kValid; }
};

// Per-item verdict of a validator.
template <class T>
using ValidatorResult = std::variant<T, std::string>;  // parsed value or rejection

template <class T>
using Validator = std::function<ValidatorResult<T>(std::string_view)>;

// Thread-safe tally of outcomes, for discard accounting.
class OutcomeLog {
 public:
  void record(OutcomeStatus status, std::size_t attempts);
  std::size_t valid() const;
  std::size_t discarded() const;
  std::size_t transport_failed() const;
  std::size_t completions() const;

 private:
  mutable std::mutex mutex_;
  std::size_t valid_ = 0;
  std::size_t discarded_ = 0;
  std::size_t transport_failed_ = 0;
  std::size_t completions_ = 0;
};

// Re-sends the identical prompt until the validator accepts, at most five
// times. Transport failures are retried `config.transport_retries` times
// without consuming format attempts, then reported as kTransportFailed.
template <class T>
CompletionOutcome<T> complete_validated(Completer& completer, const Prompt& prompt,
                                        const Validator<T>& validator, const ModelConfig& config,
                                        OutcomeLog* log = nullptr) {
  CompletionOutcome<T> outcome;
  std::size_t transport_failures = 0;
  while (outcome.attempts < kMaxAttempts) {
    std::string raw;
    try {
      raw = completer.complete(prompt, config);
    } catch (const TransportError& e) {
      if (transport_failures++ < config.transport_retries) continue;
      outcome.status = OutcomeStatus::kTransportFailed;
      outcome.error = e.what();
      if (log) log->record(outcome.status, outcome.attempts);
      return outcome;
    }
    ++outcome.attempts;
    ValidatorResult<T> verdict = validator(raw);
    outcome.last_raw = std::move(raw);
    if (auto* value = std::get_if<T>(&verdict)) {
      outcome.status = OutcomeStatus::kValid;
      outcome.value = std::move(*value);
      if (log) log->record(outcome.status, outcome.attempts);
      return outcome;
    }
    outcome.rejections.push_back(std::get<std::string>(std::move(verdict)));
  }
  outcome.status = OutcomeStatus::kDiscarded;
  outcome.error = outcome.rejections.empty() ? std::string() : outcome.rejections.back();
  if (log) log->record(outcome.status, outcome.attempts);
  return outcome;
}

}  // namespace argmine
