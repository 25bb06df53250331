#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wmw/trace.hpp"
#include "wmw/verifier.hpp"

namespace wmw {

enum class Condition { answer_only, full_trace, gold_state_answer, gold_trans_answer, revise, rerank };

std::string_view to_string(Condition c);
std::optional<Condition> condition_from_string(std::string_view s);

struct ChatMessage {
  std::string role;
  std::string content;
  /// Base64 image attached to a user turn; sent as an image_url part.
  std::optional<std::string> image_base64;
  std::string image_mime = "image/png";

  bool operator==(const ChatMessage&) const = default;
};

using MessageList = std::vector<ChatMessage>;

/// Chat-completion wire form (content string, or parts when an image rides along).
Json to_json(const MessageList& messages);
MessageList messages_from_json(const Json& j);

class MissingFeedback : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string_view system_prompt();
/// The compact output schema the full-trace prompt asks for.
std::string_view trace_schema_block();
std::string_view answer_only_instruction();

/// Renders the prompt for one example. Only the question, options and scene
/// are taken from the metadata; gold fields are serialized only for the
/// gold-injection conditions. `feedback` is required for revise.
MessageList build_prompt(const Trace& example, Condition condition, const VerifierReport* feedback = nullptr,
                         const std::optional<std::string>& image_base64 = std::nullopt);

/// The bullet list placed in front of the template for revise.
std::string feedback_block(const VerifierReport& report);

}  // namespace wmw
