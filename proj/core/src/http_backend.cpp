#include <chrono>
#include <cstdlib>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "sieve/backend.hpp"

namespace sieve::backend {

namespace {

// Splits scheme://host[:port]/path?query into the client base URL and the
// request path.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  const std::size_t scheme = endpoint.find("://");
  if (scheme == std::string::npos)
    throw std::invalid_argument("http backend: endpoint needs a scheme: " + endpoint);
  const std::size_t slash = endpoint.find('/', scheme + 3);
  if (slash == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, slash), endpoint.substr(slash)};
}

nlohmann::json openai_body(const BackendConfig& config, const Conversation& conversation) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& turn : conversation.turns) {
    messages.push_back({{"role", turn.role == Role::user ? "user" : "assistant"},
                        {"content", turn.text}});
  }
  return {{"model", config.model},
          {"messages", std::move(messages)},
          {"temperature", conversation.params.temperature},
          {"max_tokens", conversation.params.max_output_tokens}};
}

nlohmann::json gemini_body(const Conversation& conversation) {
  nlohmann::json contents = nlohmann::json::array();
  for (const auto& turn : conversation.turns) {
    contents.push_back({{"role", turn.role == Role::user ? "user" : "model"},
                        {"parts", nlohmann::json::array({{{"text", turn.text}}})}});
  }
  return {{"contents", std::move(contents)},
          {"generationConfig",
           {{"temperature", conversation.params.temperature},
            {"maxOutputTokens", conversation.params.max_output_tokens}}}};
}

}  // namespace

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {
  std::tie(base_url_, path_) = split_endpoint(config_.endpoint);
  if (config_.api_style != "openai" && config_.api_style != "gemini")
    throw std::invalid_argument("http backend: unknown api_style \"" + config_.api_style + "\"");
  if (!config_.credential_env.empty()) {
    const char* value = std::getenv(config_.credential_env.c_str());
    if (value == nullptr || *value == '\0')
      throw std::invalid_argument("http backend: environment variable " +
                                  config_.credential_env + " is not set");
    credential_ = value;
  }
}

Completion HttpBackend::complete(const Conversation& conversation) {
  httplib::Client client(base_url_);
  client.set_connection_timeout(std::chrono::duration<double>(config_.timeout_seconds));
  client.set_read_timeout(std::chrono::duration<double>(config_.timeout_seconds));
  client.set_write_timeout(std::chrono::duration<double>(config_.timeout_seconds));

  httplib::Headers headers;
  std::string path = path_;
  nlohmann::json body;
  if (config_.api_style == "openai") {
    if (!credential_.empty()) headers.emplace("Authorization", "Bearer " + credential_);
    body = openai_body(config_, conversation);
  } else {
    // Gemini keys travel as a query parameter on a per-model path.
    if (!config_.model.empty()) {
      if (path.back() != '/') path += '/';
      path += config_.model + ":generateContent";
    }
    if (!credential_.empty())
      path += (path.find('?') == std::string::npos ? "?key=" : "&key=") + credential_;
    body = gemini_body(conversation);
  }

  const auto start = std::chrono::steady_clock::now();
  httplib::Result result = client.Post(path, headers, body.dump(), "application/json");
  const auto elapsed = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();

  if (!result) {
    // Connection-level failures (refused, timeout, TLS) are all worth a retry.
    throw BackendError(ErrorKind::retryable,
                       "http backend: " + httplib::to_string(result.error()));
  }
  const int status = result->status;
  if (status == 429 || status >= 500) {
    throw BackendError(ErrorKind::retryable,
                       "http backend: status " + std::to_string(status), status);
  }
  if (status < 200 || status >= 300) {
    throw BackendError(ErrorKind::fatal,
                       "http backend: status " + std::to_string(status) + ": " +
                           result->body.substr(0, 200),
                       status);
  }

  nlohmann::json reply = nlohmann::json::parse(result->body, nullptr, false);
  if (reply.is_discarded())
    throw BackendError(ErrorKind::fatal, "http backend: response is not JSON");

  Completion completion;
  completion.latency_ms = elapsed;
  try {
    if (config_.api_style == "openai") {
      completion.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
      if (reply.contains("usage")) {
        completion.prompt_tokens = reply["usage"].value("prompt_tokens", 0L);
        completion.output_tokens = reply["usage"].value("completion_tokens", 0L);
      }
    } else {
      const auto& parts = reply.at("candidates").at(0).at("content").at("parts");
      for (const auto& part : parts) completion.text += part.value("text", "");
      if (reply.contains("usageMetadata")) {
        completion.prompt_tokens = reply["usageMetadata"].value("promptTokenCount", 0L);
        completion.output_tokens = reply["usageMetadata"].value("candidatesTokenCount", 0L);
      }
    }
  } catch (const nlohmann::json::exception&) {
    throw BackendError(ErrorKind::fatal, "http backend: malformed completion payload");
  }
  if (completion.prompt_tokens == 0 && completion.output_tokens == 0) {
    long prompt_chars = 0;
    for (const auto& turn : conversation.turns)
      prompt_chars += static_cast<long>(turn.text.size());
    completion.prompt_tokens = (prompt_chars + 3) / 4;
    completion.output_tokens = estimate_tokens(completion.text);
  }
  return completion;
}

}  // namespace sieve::backend
