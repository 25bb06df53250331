#include "wmw/prompts.hpp"

#include <array>

namespace wmw {

namespace {

constexpr std::string_view kSystem =
    "You are a physics expert. Work through the scene in order: the initial state, the transition "
    "(governing law and its effect), the resulting state, a brief derivation, and the final answer. "
    "Respond only with valid JSON.";

constexpr std::string_view kSchemaBlock = R"(Respond ONLY with a JSON object in this exact format (no markdown fences, no preamble):
{
  "state_0": {
    "objects": [{"name": "...", "attributes": {"mass": ...}}],
    "relations": [{"type": "on|under|above|below|contact|separated|left_of|right_of|inside|contains|attached|aligned|before|after", "args": ["o1", "o2"]}],
    "forces": [{"name": "...", "target": "...", "direction": "...", "magnitude": ..., "unit": "N"}],
    "variables": {"key": value},
    "assumptions": ["..."]
  },
  "transition": {
    "rule": "Name of the physical law",
    "effect": "Qualitative or symbolic predicted change",
    "equation": "Optional symbolic equation",
    "evidence": ["fact or rule supporting the transition"]
  },
  "state_1": {
    "predicted_change": "What changes from state_0",
    "new_variables": {"key": value}
  },
  "derivation": "One to three sentences of reasoning.",
  "answer": {
    "value": "final answer",
    "unit": "unit if numeric, else null",
    "explanation": "one-sentence justification"
  }
})";

constexpr std::string_view kAnswerOnly =
    "Provide ONLY the final answer. Respond with a JSON object: {\"answer\": {\"value\": \"...\", \"unit\": \"...\"}}";

constexpr std::array<std::pair<Condition, std::string_view>, 6> kConditionNames = {{
    {Condition::answer_only, "answer_only"},
    {Condition::full_trace, "full_trace"},
    {Condition::gold_state_answer, "gold_state_answer"},
    {Condition::gold_trans_answer, "gold_trans_answer"},
    {Condition::revise, "revise"},
    {Condition::rerank, "rerank"},
}};

std::string question_block(const Metadata& m) {
  std::string s = "Question: " + m.question + "\n";
  if (!m.options.empty()) {
    s += "Options:";
    char letter = 'A';
    for (const auto& o : m.options) s += std::string(" (") + letter++ + ") " + o;
    s += "\n";
  }
  return s;
}

}  // namespace

std::string_view to_string(Condition c) {
  for (const auto& [k, v] : kConditionNames)
    if (k == c) return v;
  return "full_trace";
}

std::optional<Condition> condition_from_string(std::string_view s) {
  for (const auto& [k, v] : kConditionNames)
    if (v == s) return k;
  return std::nullopt;
}

std::string_view system_prompt() { return kSystem; }
std::string_view trace_schema_block() { return kSchemaBlock; }
std::string_view answer_only_instruction() { return kAnswerOnly; }

Json to_json(const MessageList& messages) {
  Json arr = Json::array();
  for (const auto& m : messages) {
    if (m.image_base64) {
      Json parts = Json::array();
      parts.push_back({{"type", "text"}, {"text", m.content}});
      parts.push_back({{"type", "image_url"},
                       {"image_url", {{"url", "data:" + m.image_mime + ";base64," + *m.image_base64}}}});
      arr.push_back({{"role", m.role}, {"content", parts}});
    } else {
      arr.push_back({{"role", m.role}, {"content", m.content}});
    }
  }
  return arr;
}

MessageList messages_from_json(const Json& j) {
  MessageList out;
  for (const auto& m : j) {
    ChatMessage msg;
    msg.role = m.value("role", "");
    const Json& c = m["content"];
    if (c.is_string()) {
      msg.content = c.get<std::string>();
    } else if (c.is_array()) {
      for (const auto& part : c) {
        if (part.value("type", "") == "text") msg.content += part.value("text", "");
        if (part.value("type", "") == "image_url") {
          std::string url = part["image_url"].value("url", "");
          const auto comma = url.find(',');
          const auto semi = url.find(';');
          if (url.rfind("data:", 0) == 0 && semi != std::string::npos) msg.image_mime = url.substr(5, semi - 5);
          msg.image_base64 = comma == std::string::npos ? url : url.substr(comma + 1);
        }
      }
    }
    out.push_back(std::move(msg));
  }
  return out;
}

std::string feedback_block(const VerifierReport& report) {
  std::string s = "Your previous trace had the following issues:\n";
  for (const auto& m : report.messages) s += "- " + m + "\n";
  if (!report.labels.empty()) {
    s += "Error types detected: ";
    bool first = true;
    for (Label l : report.labels) {
      if (!first) s += ", ";
      s += to_string(l);
      first = false;
    }
    s += "\n";
  }
  s += "\nPlease produce a corrected trace.\n\n";
  return s;
}

MessageList build_prompt(const Trace& example, Condition condition, const VerifierReport* feedback,
                         const std::optional<std::string>& image_base64) {
  if (condition == Condition::revise && !feedback)
    throw MissingFeedback("the revise condition needs verifier feedback");
  const Metadata meta = example.metadata.value_or(Metadata{});

  std::string user;
  if (condition == Condition::revise) user += feedback_block(*feedback);
  user += question_block(meta);
  if (!image_base64 && !meta.scene_description.empty()) user += "Scene: " + meta.scene_description + "\n";
  user += "\n";

  switch (condition) {
    case Condition::answer_only:
      user += kAnswerOnly;
      break;
    case Condition::gold_state_answer:
    case Condition::gold_trans_answer: {
      Json given = Json::object();
      if (example.state_0) given["state_0"] = to_json(*example.state_0);
      if (condition == Condition::gold_trans_answer && example.transition)
        given["transition"] = to_json(*example.transition);
      user += "Use the following verified description of the scene to determine the answer:\n";
      user += given.dump() + "\n\n";
      user += kAnswerOnly;
      break;
    }
    case Condition::full_trace:
    case Condition::revise:
    case Condition::rerank:
      user += "Reason step by step through the physics.\n\n";
      user += kSchemaBlock;
      break;
  }

  MessageList msgs;
  msgs.push_back({"system", std::string(kSystem), std::nullopt, "image/png"});
  msgs.push_back({"user", user, image_base64, "image/png"});
  return msgs;
}

}  // namespace wmw
