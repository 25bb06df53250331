#pragma once

#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wmw/prompts.hpp"

namespace wmw {

struct ChatRequest {
  std::string model;
  MessageList messages;
  std::optional<double> temperature;
  std::optional<double> top_p;
  int max_tokens = 2048;
  /// Providers disagree on the name of the completion budget field.
  std::string max_tokens_field = "max_tokens";
};

struct ChatResponse {
  std::string text;
  /// Set when the endpoint rejected our sampling parameters and the request
  /// was re-sent with provider defaults.
  bool used_provider_defaults = false;
};

/// Permanent endpoint failure (bad request, auth rejected, or retries exhausted).
class EndpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Worth retrying: timeouts, connection drops, 429 and 5xx.
class TransientError : public EndpointError {
 public:
  using EndpointError::EndpointError;
};

class AuthMissing : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ChatEndpoint {
 public:
  virtual ~ChatEndpoint() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// Chat-completion request body.
Json request_body(const ChatRequest& request);
/// Text of the first choice in a chat-completion response body.
std::string response_text(const Json& body);

/// Stable key for a request: digest of model + messages. Sampling
/// parameters are excluded so rerank samples share a key.
std::string request_key(const ChatRequest& request);

/// OpenAI-compatible HTTP endpoint.
class HttpEndpoint : public ChatEndpoint {
 public:
  /// `url` is the full chat-completions URL. An empty `api_key` sends no
  /// Authorization header.
  HttpEndpoint(std::string url, std::string api_key, std::map<std::string, std::string> extra_headers = {},
               int timeout_s = 120);
  ChatResponse complete(const ChatRequest& request) override;

 private:
  std::string url_;
  std::string api_key_;
  std::map<std::string, std::string> headers_;
  int timeout_s_;
};

/// Resolves the key from the named environment variable. An empty name
/// means no auth; a named but unset variable throws AuthMissing.
std::string api_key_from_env(const std::string& env_name);

/// Canned responses. Keyed entries serve every request with that key, in
/// order, cycling on the last one; unkeyed entries are consumed FIFO.
class ReplayEndpoint : public ChatEndpoint {
 public:
  ReplayEndpoint() = default;
  /// Adds JSONL rows of {"key": optional, "text": ...}.
  void load(const std::vector<Json>& rows);

  void add(std::string text);
  void add_keyed(const std::string& key, std::string text);
  ChatResponse complete(const ChatRequest& request) override;
  int calls() const;

 private:
  mutable std::mutex mu_;
  std::deque<std::string> queue_;
  std::map<std::string, std::vector<std::string>> keyed_;
  std::map<std::string, std::size_t> served_;
  int calls_ = 0;
};

/// Adapter for tests and in-process models.
class FunctionEndpoint : public ChatEndpoint {
 public:
  explicit FunctionEndpoint(std::function<ChatResponse(const ChatRequest&)> fn) : fn_(std::move(fn)) {}
  ChatResponse complete(const ChatRequest& request) override {
    std::lock_guard lock(mu_);
    ++calls_;
    return fn_(request);
  }
  int calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }

 private:
  mutable std::mutex mu_;
  std::function<ChatResponse(const ChatRequest&)> fn_;
  int calls_ = 0;
};

}  // namespace wmw
