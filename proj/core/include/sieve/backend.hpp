#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sieve/conversation.hpp"

// Model backends.
//
// A Backend turns a Conversation into a Completion. Three implementations:
//   ScriptedBackend  deterministic replies from substring-matched rules; the
//                    workhorse for tests and offline runs
//   HttpBackend      chat-completion over HTTP(S), OpenAI- or Gemini-style
//   RetryingBackend  wraps another backend with bounded exponential backoff
//                    on retryable failures
// Credentials never live in config files: the config names an environment
// variable and the key is read from the process environment.

namespace sieve::backend {

struct Completion {
  std::string text;
  long prompt_tokens = 0;
  long output_tokens = 0;
  double latency_ms = 0.0;
  int attempts = 1;
};

enum class ErrorKind {
  retryable,  // timeout, connection failure, 429, 5xx
  fatal,      // other 4xx, malformed response, unscripted call
};

class BackendError : public std::runtime_error {
public:
  BackendError(ErrorKind kind, const std::string& message, int http_status = 0)
      : std::runtime_error(message), kind(kind), http_status(http_status) {}

  ErrorKind kind;
  int http_status;  // 0 when no HTTP status applies
};

class Backend {
public:
  virtual ~Backend() = default;
  // Generation parameters travel inside the conversation. Throws
  // BackendError on failure.
  virtual Completion complete(const Conversation& conversation) = 0;
};

// Fallback token accounting when a reply carries no usage metadata:
// one token per four characters, rounded up.
long estimate_tokens(std::string_view text);

// ---------------------------------------------------------------------------
// Scripted backend

struct ScriptReply {
  std::string text;
  enum class Fail { none, transient, fatal } fail = Fail::none;
};

// Rules are checked in order; the first rule whose conditions all hold
// handles the call. `match` is a substring test on the last user turn (empty
// matches anything); `match_conversation` additionally tests the whole
// serialized conversation, letting replies depend on context that is no
// longer in the last turn. Each rule holds a reply sequence: its nth
// matching call consumes the nth reply, and once the sequence is exhausted
// the last reply repeats.
struct ScriptRule {
  std::string match;
  std::string match_conversation;
  std::vector<ScriptReply> replies;
};

class ScriptedBackend : public Backend {
public:
  explicit ScriptedBackend(std::vector<ScriptRule> rules);

  // Throws a fatal BackendError for a conversation no rule matches, so
  // fixtures fail loudly instead of hallucinating.
  Completion complete(const Conversation& conversation) override;

  int calls() const;

private:
  struct RuleState {
    ScriptRule rule;
    std::size_t cursor = 0;
  };
  mutable std::mutex mutex_;
  std::vector<RuleState> rules_;
  int calls_ = 0;
};

std::vector<ScriptRule> script_rules_from_json(std::string_view text);

// ---------------------------------------------------------------------------
// Retrying wrapper

struct RetryPolicy {
  int max_attempts = 4;
  double base_backoff_ms = 500.0;
  double jitter = 0.1;  // backoff is scaled by (1 + jitter * u), u in [0,1)
};

class RetryingBackend : public Backend {
public:
  // `sleep` is injectable so tests run without real waiting.
  RetryingBackend(std::shared_ptr<Backend> inner, RetryPolicy policy,
                  std::function<void(double ms)> sleep = {});

  Completion complete(const Conversation& conversation) override;

private:
  std::shared_ptr<Backend> inner_;
  RetryPolicy policy_;
  std::function<void(double)> sleep_;
  std::mutex mutex_;
  std::uint64_t jitter_state_;
};

// ---------------------------------------------------------------------------
// Configuration and factory

struct BackendConfig {
  std::string kind = "mock";  // "mock" or "http"

  // http backends
  std::string endpoint;        // e.g. https://api.example.com/v1/chat/completions
  std::string model;
  std::string api_style = "openai";  // "openai" or "gemini"
  std::string credential_env;        // name of the env var holding the API key
  double timeout_seconds = 120.0;
  int max_concurrency = 8;
  RetryPolicy retry;

  // mock backends
  std::vector<ScriptRule> script;
};

BackendConfig backend_config_from_json(std::string_view text);

// Builds the configured backend; http backends come wrapped in a
// RetryingBackend. Throws std::invalid_argument for bad config, including a
// named credential variable that is not set in the environment.
std::shared_ptr<Backend> make_backend(const BackendConfig& config);

// True when the backend (after unwrapping) is scripted; scripted runs pin
// record timestamps to zero so artifacts are byte-stable.
bool is_scripted(const BackendConfig& config);

// ---------------------------------------------------------------------------
// HTTP backend

class HttpBackend : public Backend {
public:
  explicit HttpBackend(BackendConfig config);

  Completion complete(const Conversation& conversation) override;

private:
  BackendConfig config_;
  std::string base_url_;
  std::string path_;
  std::string credential_;
};

}  // namespace sieve::backend
