#include "wmw/judge.hpp"

#include "wmw/parse.hpp"

namespace wmw {

namespace {

constexpr std::string_view kJudgeSystem =
    "You audit physics reasoning traces. Check whether the initial state, the transition and the resulting "
    "state describe a physically coherent world and whether the answer follows from them. Respond only with "
    "valid JSON.";

constexpr std::string_view kJudgeFormat = R"(Return a JSON object with exactly these keys:
{
  "field_errors": {"state_0": "...", "transition": "...", "state_1": "...", "answer": "..."},
  "labels": ["object|state|relation|force|transition|intervention|temporal|unit_scale|faithfulness"],
  "answer_trace_consistent": true,
  "confidence": "high|medium|low",
  "rationale": "one sentence"
}
Leave a field_errors entry empty when that field is correct. Use an empty labels list for a correct trace.)";

}  // namespace

MessageList judge_prompt(const Trace& trace, const std::string& question, const std::optional<Answer>& gold_answer) {
  std::string user = "Question: " + question + "\n";
  if (gold_answer) user += "Reference answer: " + to_json(*gold_answer).dump() + "\n";
  user += "Trace:\n" + completion_json(trace).dump(2) + "\n\n";
  user += kJudgeFormat;
  MessageList m;
  m.push_back({"system", std::string(kJudgeSystem), std::nullopt, "image/png"});
  m.push_back({"user", user, std::nullopt, "image/png"});
  return m;
}

JudgeVerdict parse_judge_reply(std::string_view text) { return judge_verdict_from_json(extract_json_object(text)); }

std::optional<JudgeVerdict> Judge::assess(const Trace& trace, const Metadata* gold) {
  ChatRequest req;
  req.model = model_;
  req.messages = judge_prompt(trace, gold ? gold->question : std::string(),
                              gold ? gold->gold_answer : std::optional<Answer>());
  req.temperature = 0.0;
  try {
    if (limiter_) limiter_->acquire();
    return parse_judge_reply(endpoint_.complete(req).text);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace wmw
