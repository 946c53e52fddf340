#include "sieve/backend.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <json.hpp>

#include "sieve/rng.hpp"

namespace sieve::backend {

long estimate_tokens(std::string_view text) {
  return static_cast<long>((text.size() + 3) / 4);
}

// ---------------------------------------------------------------------------
// ScriptedBackend

ScriptedBackend::ScriptedBackend(std::vector<ScriptRule> rules) {
  for (auto& rule : rules) {
    if (rule.replies.empty())
      throw std::invalid_argument("scripted backend: rule with empty reply sequence");
    rules_.push_back({std::move(rule), 0});
  }
}

Completion ScriptedBackend::complete(const Conversation& conversation) {
  const std::string& last_user = conversation.last_user_text();
  std::string whole;
  for (const auto& turn : conversation.turns) {
    whole += turn.text;
    whole += '\n';
  }

  ScriptReply reply;
  bool matched = false;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    ++calls_;
    for (auto& state : rules_) {
      const auto& rule = state.rule;
      if (!rule.match.empty() && last_user.find(rule.match) == std::string::npos) continue;
      if (!rule.match_conversation.empty() &&
          whole.find(rule.match_conversation) == std::string::npos)
        continue;
      const std::size_t i = std::min(state.cursor, rule.replies.size() - 1);
      reply = rule.replies[i];
      ++state.cursor;
      matched = true;
      break;
    }
  }
  if (!matched)
    throw BackendError(ErrorKind::fatal,
                       "scripted backend: unscripted call; last user turn starts with \"" +
                           last_user.substr(0, 80) + "\"");
  if (reply.fail == ScriptReply::Fail::transient)
    throw BackendError(ErrorKind::retryable, "scripted backend: scripted transient failure");
  if (reply.fail == ScriptReply::Fail::fatal)
    throw BackendError(ErrorKind::fatal, "scripted backend: scripted fatal failure");

  Completion completion;
  completion.text = reply.text;
  long prompt_chars = 0;
  for (const auto& turn : conversation.turns) prompt_chars += static_cast<long>(turn.text.size());
  completion.prompt_tokens = (prompt_chars + 3) / 4;
  completion.output_tokens = estimate_tokens(completion.text);
  return completion;
}

int ScriptedBackend::calls() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return calls_;
}

std::vector<ScriptRule> script_rules_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("script rules: not valid JSON: ") + e.what());
  }
  if (!j.is_array()) throw std::invalid_argument("script rules: expected a JSON array");

  std::vector<ScriptRule> rules;
  for (const auto& entry : j) {
    ScriptRule rule;
    rule.match = entry.value("match", "");
    rule.match_conversation = entry.value("match_conversation", "");
    if (!entry.contains("replies"))
      throw std::invalid_argument("script rules: rule without replies");
    for (const auto& r : entry["replies"]) {
      ScriptReply reply;
      if (r.is_string()) {
        reply.text = r.get<std::string>();
      } else {
        reply.text = r.value("text", "");
        const std::string fail = r.value("fail", "");
        if (fail == "transient") reply.fail = ScriptReply::Fail::transient;
        else if (fail == "fatal") reply.fail = ScriptReply::Fail::fatal;
        else if (!fail.empty())
          throw std::invalid_argument("script rules: unknown fail kind \"" + fail + "\"");
      }
      rule.replies.push_back(std::move(reply));
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

// ---------------------------------------------------------------------------
// RetryingBackend

RetryingBackend::RetryingBackend(std::shared_ptr<Backend> inner, RetryPolicy policy,
                                 std::function<void(double)> sleep)
    : inner_(std::move(inner)),
      policy_(policy),
      sleep_(std::move(sleep)),
      jitter_state_(0x9e3779b97f4a7c15ULL) {
  if (!inner_) throw std::invalid_argument("retrying backend: null inner backend");
  if (policy_.max_attempts < 1)
    throw std::invalid_argument("retrying backend: max_attempts must be at least 1");
  if (!sleep_) {
    sleep_ = [](double ms) {
      if (ms > 0) std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
    };
  }
}

Completion RetryingBackend::complete(const Conversation& conversation) {
  for (int attempt = 1;; ++attempt) {
    try {
      Completion completion = inner_->complete(conversation);
      completion.attempts = attempt;
      return completion;
    } catch (const BackendError& e) {
      if (e.kind != ErrorKind::retryable || attempt >= policy_.max_attempts) throw;
      double u;
      {
        std::lock_guard<std::mutex> lock(mutex_);
        u = static_cast<double>(rng::splitmix64(jitter_state_) >> 11) * 0x1.0p-53;
      }
      const double backoff = policy_.base_backoff_ms *
                             static_cast<double>(1LL << (attempt - 1)) *
                             (1.0 + policy_.jitter * u);
      sleep_(backoff);
    }
  }
}

// ---------------------------------------------------------------------------
// Config and factory

BackendConfig backend_config_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("backend config: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("backend config: expected a JSON object");

  BackendConfig c;
  c.kind = j.value("kind", "mock");
  c.endpoint = j.value("endpoint", "");
  c.model = j.value("model", "");
  c.api_style = j.value("api_style", "openai");
  c.credential_env = j.value("credential_env", "");
  c.timeout_seconds = j.value("timeout_seconds", 120.0);
  c.max_concurrency = j.value("max_concurrency", 8);
  if (j.contains("retry")) {
    const auto& r = j["retry"];
    c.retry.max_attempts = r.value("max_attempts", 4);
    c.retry.base_backoff_ms = r.value("base_backoff_ms", 500.0);
    c.retry.jitter = r.value("jitter", 0.1);
  }
  if (j.contains("script")) c.script = script_rules_from_json(j["script"].dump());

  if (j.contains("api_key") || j.contains("credential") || j.contains("token"))
    throw std::invalid_argument(
        "backend config: credentials must not appear in config files; "
        "set credential_env to the name of an environment variable instead");
  if (c.kind != "mock" && c.kind != "http")
    throw std::invalid_argument("backend config: unknown kind \"" + c.kind + "\"");
  if (c.kind == "http" && c.endpoint.empty())
    throw std::invalid_argument("backend config: http backend requires an endpoint");
  if (c.max_concurrency < 1)
    throw std::invalid_argument("backend config: max_concurrency must be at least 1");
  return c;
}

std::shared_ptr<Backend> make_backend(const BackendConfig& config) {
  if (config.kind == "mock") {
    return std::make_shared<ScriptedBackend>(config.script);
  }
  auto http = std::make_shared<HttpBackend>(config);
  return std::make_shared<RetryingBackend>(std::move(http), config.retry);
}

bool is_scripted(const BackendConfig& config) { return config.kind == "mock"; }

}  // namespace sieve::backend
