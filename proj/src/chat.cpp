#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "wmw/chat.hpp"

#include <cstdlib>

#include <httplib.h>

#include "wmw/io.hpp"

namespace wmw {

namespace {

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

UrlParts split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw EndpointError("endpoint URL has no scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool mentions_sampling(const std::string& body) {
  return body.find("temperature") != std::string::npos || body.find("top_p") != std::string::npos;
}

}  // namespace

Json request_body(const ChatRequest& r) {
  Json body{{"model", r.model}, {"messages", to_json(r.messages)}};
  body[r.max_tokens_field] = r.max_tokens;
  if (r.temperature) body["temperature"] = *r.temperature;
  if (r.top_p) body["top_p"] = *r.top_p;
  return body;
}

std::string response_text(const Json& body) {
  if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty())
    throw EndpointError("response has no choices");
  const Json& msg = body["choices"][0].value("message", Json::object());
  const Json& content = msg.value("content", Json());
  if (content.is_string()) return content.get<std::string>();
  // Some providers return content parts.
  std::string text;
  if (content.is_array())
    for (const auto& part : content)
      if (part.value("type", "") == "text") text += part.value("text", "");
  return text;
}

std::string request_key(const ChatRequest& r) {
  return sha256_hex(Json{{"model", r.model}, {"messages", to_json(r.messages)}}.dump());
}

HttpEndpoint::HttpEndpoint(std::string url, std::string api_key, std::map<std::string, std::string> extra_headers,
                           int timeout_s)
    : url_(std::move(url)), api_key_(std::move(api_key)), headers_(std::move(extra_headers)), timeout_s_(timeout_s) {}

ChatResponse HttpEndpoint::complete(const ChatRequest& request) {
  const UrlParts parts = split_url(url_);
  httplib::Client client(parts.origin);
  client.set_connection_timeout(timeout_s_);
  client.set_read_timeout(timeout_s_);
  httplib::Headers headers(headers_.begin(), headers_.end());
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  auto send = [&](const ChatRequest& req) {
    auto res = client.Post(parts.path, headers, request_body(req).dump(), "application/json");
    if (!res) throw TransientError("request failed: " + httplib::to_string(res.error()));
    return res;
  };

  ChatResponse out;
  auto res = send(request);
  if (res->status == 400 && (request.temperature || request.top_p) && mentions_sampling(res->body)) {
    ChatRequest plain = request;
    plain.temperature.reset();
    plain.top_p.reset();
    res = send(plain);
    out.used_provider_defaults = true;
  }
  if (res->status == 429 || res->status >= 500)
    throw TransientError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  if (res->status != 200) throw EndpointError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));

  Json body = Json::parse(res->body, nullptr, false);
  if (body.is_discarded()) throw EndpointError("response body is not JSON");
  out.text = response_text(body);
  return out;
}

std::string api_key_from_env(const std::string& env_name) {
  if (env_name.empty()) return {};
  const char* v = std::getenv(env_name.c_str());
  if (!v || !*v) throw AuthMissing("environment variable " + env_name + " is not set");
  return v;
}

void ReplayEndpoint::load(const std::vector<Json>& rows) {
  for (const auto& row : rows) {
    std::string text = row.at("text").get<std::string>();
    if (row.contains("key") && row["key"].is_string())
      add_keyed(row["key"].get<std::string>(), std::move(text));
    else
      add(std::move(text));
  }
}

void ReplayEndpoint::add(std::string text) {
  std::lock_guard lock(mu_);
  queue_.push_back(std::move(text));
}

void ReplayEndpoint::add_keyed(const std::string& key, std::string text) {
  std::lock_guard lock(mu_);
  keyed_[key].push_back(std::move(text));
}

ChatResponse ReplayEndpoint::complete(const ChatRequest& request) {
  std::lock_guard lock(mu_);
  ++calls_;
  if (auto it = keyed_.find(request_key(request)); it != keyed_.end()) {
    std::size_t& i = served_[it->first];
    const std::string& text = it->second[std::min(i, it->second.size() - 1)];
    ++i;
    return {text, false};
  }
  if (queue_.empty()) throw EndpointError("replay endpoint has no response for this request");
  ChatResponse r{queue_.front(), false};
  queue_.pop_front();
  return r;
}

int ReplayEndpoint::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

}  // namespace wmw
