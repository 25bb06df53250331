#pragma once

#include <optional>
#include <string>

#include "wmw/chat.hpp"
#include "wmw/clock.hpp"
#include "wmw/verifier.hpp"

namespace wmw {

/// Judge prompt: the trace, the question and (optionally) the gold answer,
/// asking for a JSON verdict over the nine labels.
MessageList judge_prompt(const Trace& trace, const std::string& question, const std::optional<Answer>& gold_answer);

/// Parses a judge reply. Throws ParseError when no JSON object is present.
JudgeVerdict parse_judge_reply(std::string_view text);

/// Remote judge behind a chat endpoint. Unreachable or unparseable replies
/// yield nullopt, which the ensemble treats like a low-confidence verdict.
class Judge {
 public:
  Judge(ChatEndpoint& endpoint, std::string model, RateLimiter* limiter = nullptr)
      : endpoint_(endpoint), model_(std::move(model)), limiter_(limiter) {}

  std::optional<JudgeVerdict> assess(const Trace& trace, const Metadata* gold);

 private:
  ChatEndpoint& endpoint_;
  std::string model_;
  RateLimiter* limiter_;
};

}  // namespace wmw
