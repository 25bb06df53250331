#include "wmw/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <mutex>
#include <thread>

#include "wmw/answer.hpp"
#include "wmw/io.hpp"
#include "wmw/parse.hpp"

namespace wmw {

namespace {

bool wants_trace(Condition c) {
  return c == Condition::full_trace || c == Condition::revise || c == Condition::rerank;
}

std::string prompt_id(Condition c) { return std::string(to_string(c)) + "@" + std::string(kPromptVersion); }

Json normalized_json(const NormalizedAnswer& n) {
  return Json{{"type", to_string(n.type)}, {"text", n.text}, {"value", n.value}, {"unit", n.unit}};
}

/// Report for outputs that carried no trace to check.
VerifierReport no_trace_report(const std::string& why) {
  VerifierReport r;
  r.z_state = r.z_trans = r.z_faith = Verdict::abstain;
  r.abstain_reasons.push_back(why);
  return r;
}

ChatRequest make_request(const RunConfig& cfg, MessageList messages, double temperature) {
  ChatRequest req;
  req.model = cfg.api_model();
  req.messages = std::move(messages);
  req.temperature = temperature;
  req.top_p = cfg.top_p;
  req.max_tokens = cfg.max_completion_tokens;
  req.max_tokens_field = cfg.max_tokens_field;
  return req;
}

std::optional<std::string> load_image(const RunConfig& cfg, const std::string& id) {
  if (cfg.image_dir.empty()) return std::nullopt;
  const auto path = cfg.image_dir / (id + ".png");
  if (!std::filesystem::exists(path)) return std::nullopt;
  return base64_encode(read_file(path));
}

/// Majority-vote key from a stored normalized answer: choices and symbols
/// by text, numbers to three significant figures plus unit.
std::string vote_key(const std::optional<Json>& n) {
  if (!n) return {};
  const std::string type = n->value("type", "");
  if (type == "multiple_choice" || type == "symbolic") return n->value("text", "");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g %s", n->value("value", 0.0), n->value("unit", "").c_str());
  return buf;
}

const Metadata& meta_of(const Trace& example) {
  static const Metadata empty;
  return example.metadata ? *example.metadata : empty;
}

}  // namespace

double RunConfig::effective_temperature() const {
  if (temperature) return *temperature;
  return condition == Condition::rerank ? 0.7 : 0.0;
}

Json to_json(const RunRecord& r) {
  Json j{{"example_id", r.example_id},
         {"model_key", r.model_key},
         {"condition", to_string(r.condition)},
         {"prompt_id", r.prompt_id},
         {"sample_index", r.sample_index},
         {"raw_text", r.raw_text},
         {"trace", r.parsed ? completion_json(*r.parsed) : Json(nullptr)},
         {"parse_error", r.parse_error},
         {"answer", r.answer ? to_json(*r.answer) : Json(nullptr)},
         {"normalized_answer", r.normalized_answer ? *r.normalized_answer : Json(nullptr)},
         {"answer_correct", r.answer_correct},
         {"verifier", to_json(r.report)},
         {"labels", Json::array()},
         {"abstained", r.report.any_abstain()},
         {"latency_ms", r.latency_ms},
         {"attempts", r.attempts},
         {"rerank_score", r.rerank_score ? Json(*r.rerank_score) : Json(nullptr)},
         {"selected", r.selected},
         {"revised", r.revised},
         {"used_provider_defaults", r.used_provider_defaults}};
  for (Label l : r.report.labels) j["labels"].push_back(to_string(l));
  if (r.initial_raw_text) j["initial_raw_text"] = *r.initial_raw_text;
  if (r.judge) j["judge"] = to_json(*r.judge);
  return j;
}

RunRecord run_record_from_json(const Json& j) {
  RunRecord r;
  r.example_id = j.at("example_id").get<std::string>();
  r.model_key = j.value("model_key", "");
  r.condition = condition_from_string(j.value("condition", "full_trace")).value_or(Condition::full_trace);
  r.prompt_id = j.value("prompt_id", "");
  r.sample_index = j.value("sample_index", 0);
  r.raw_text = j.value("raw_text", "");
  if (j.contains("trace") && j["trace"].is_object()) r.parsed = trace_from_json(j["trace"]);
  r.parse_error = j.value("parse_error", "");
  if (j.contains("answer") && !j["answer"].is_null()) r.answer = answer_from_json(j["answer"]);
  if (j.contains("normalized_answer") && !j["normalized_answer"].is_null()) r.normalized_answer = j["normalized_answer"];
  r.answer_correct = j.value("answer_correct", false);
  if (j.contains("verifier")) r.report = report_from_json(j["verifier"]);
  r.latency_ms = j.value("latency_ms", 0.0);
  r.attempts = j.value("attempts", 1);
  if (j.contains("rerank_score") && j["rerank_score"].is_number()) r.rerank_score = j["rerank_score"].get<double>();
  r.selected = j.value("selected", true);
  r.revised = j.value("revised", false);
  r.used_provider_defaults = j.value("used_provider_defaults", false);
  if (j.contains("initial_raw_text")) r.initial_raw_text = j["initial_raw_text"].get<std::string>();
  if (j.contains("judge") && j["judge"].is_object()) r.judge = judge_verdict_from_json(j["judge"]);
  return r;
}

CallOutcome call_with_retry(ChatEndpoint& endpoint, const ChatRequest& request, RateLimiter& limiter, Clock& clock,
                            std::span<const double> backoff_s) {
  CallOutcome out;
  for (std::size_t attempt = 0;; ++attempt) {
    ++out.attempts;
    const double start = limiter.acquire();
    try {
      out.response = endpoint.complete(request);
      out.latency_ms = (clock.now() - start) * 1000.0;
      return out;
    } catch (const TransientError& e) {
      if (attempt >= backoff_s.size())
        throw EndpointError("gave up after " + std::to_string(out.attempts) + " attempts: " + e.what());
      clock.sleep(backoff_s[attempt]);
    }
  }
}

RunRecord score_response(const Trace& example, Condition condition, const std::string& raw_text,
                         const VerifierConfig& config) {
  const Metadata& meta = meta_of(example);
  RunRecord r;
  r.example_id = example.id;
  r.condition = condition;
  r.prompt_id = prompt_id(condition);
  r.raw_text = raw_text;

  if (wants_trace(condition)) {
    try {
      Json doc = canonicalize(extract_json_object(raw_text));
      // Model output carries only the reasoning fields; bookkeeping comes
      // from the example so the schema sees a complete document.
      if (!doc.contains("id")) doc["id"] = example.id;
      if (!doc.contains("scenario_family")) doc["scenario_family"] = example.scenario_family;
      if (!doc.contains("metadata") && example.metadata) doc["metadata"] = to_json(*example.metadata);
      Trace t = trace_from_json(doc);
      t.document = doc;
      r.parsed = std::move(t);
    } catch (const ParseError& e) {
      r.parse_error = e.what();
    }
    if (r.parsed) {
      r.report = verify(*r.parsed, example.metadata ? &*example.metadata : nullptr, config);
      r.answer = r.parsed->answer;
    } else {
      r.report.z_schema = Verdict::invalid;
      r.report.z_state = r.report.z_trans = r.report.z_ans = r.report.z_faith = Verdict::abstain;
      r.report.messages.push_back("output is not a parseable JSON trace: " + r.parse_error);
      r.report.abstain_reasons.push_back("schema invalid: deeper checks skipped");
    }
  } else {
    r.report = no_trace_report("condition requests no trace");
  }
  if (!r.answer) {
    try {
      r.answer = parse_answer_reply(raw_text);
    } catch (const ParseError& e) {
      if (r.parse_error.empty()) r.parse_error = e.what();
    }
  }
  if (r.answer) {
    try {
      r.normalized_answer = normalized_json(normalize_answer(*r.answer, meta.answer_type, meta.canonical_unit));
    } catch (const std::exception&) {
    }
  }
  r.answer_correct = score_answer(r.answer, meta.gold_answer, meta.answer_type, meta.canonical_unit);
  return r;
}

std::vector<RunRecord> rescore(std::span<const RunRecord> records, std::span<const Trace> examples,
                               const VerifierConfig& config) {
  std::map<std::string, const Trace*> by_id;
  for (const auto& e : examples) by_id[e.id] = &e;
  std::vector<RunRecord> out;
  for (const auto& old : records) {
    auto it = by_id.find(old.example_id);
    if (it == by_id.end()) continue;
    RunRecord r = score_response(*it->second, old.condition, old.raw_text, config);
    r.model_key = old.model_key;
    r.sample_index = old.sample_index;
    r.latency_ms = old.latency_ms;
    r.attempts = old.attempts;
    r.selected = old.selected;
    r.rerank_score = old.rerank_score;
    r.revised = old.revised;
    r.initial_raw_text = old.initial_raw_text;
    r.used_provider_defaults = old.used_provider_defaults;
    r.judge = old.judge;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RunRecord> rerank_records(std::span<const RunRecord> records, RerankMode mode, int k) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<RunRecord>> groups;
  for (const auto& r : records) {
    if (!groups.contains(r.example_id)) order.push_back(r.example_id);
    groups[r.example_id].push_back(r);
  }
  std::vector<RunRecord> out;
  for (const auto& id : order) {
    auto& g = groups[id];
    std::stable_sort(g.begin(), g.end(), [](const auto& a, const auto& b) { return a.sample_index < b.sample_index; });
    if (k > 0 && static_cast<int>(g.size()) > k) g.resize(static_cast<std::size_t>(k));
    std::vector<Candidate> cands;
    for (const auto& r : g) {
      Candidate c;
      if (r.parsed) c.trace = *r.parsed;
      c.report = r.report;
      c.judge = r.judge;
      c.answer_key = vote_key(r.normalized_answer);
      cands.push_back(std::move(c));
    }
    const Selection sel = select(cands, mode);
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i].rerank_score = sel.scores[i].total;
      g[i].selected = i == sel.index;
      out.push_back(std::move(g[i]));
    }
  }
  return out;
}

RunResult run_condition(std::span<const Trace> examples, const RunConfig& cfg, RunContext& ctx) {
  RateLimiter limiter(cfg.rate_limit_rpm, ctx.clock);
  const int samples = cfg.condition == Condition::rerank ? std::max(1, cfg.k) : 1;
  const double temperature = cfg.effective_temperature();

  std::map<std::string, const RunRecord*> prior;
  if (ctx.prior)
    for (const auto& r : *ctx.prior) prior[r.example_id] = &r;

  std::mutex sink_mu;
  auto emit_raw = [&](const std::string& id, int sample, const std::string& text) {
    if (!ctx.sinks.raw) return;
    std::lock_guard lock(sink_mu);
    ctx.sinks.raw(Json{{"example_id", id}, {"sample_index", sample}, {"condition", to_string(cfg.condition)},
                       {"raw_text", text}});
  };

  // Slot per (example, sample) keeps output order independent of threads.
  const std::size_t jobs = examples.size() * static_cast<std::size_t>(samples);
  std::vector<std::optional<RunRecord>> slots(jobs);
  std::vector<std::optional<HardFailure>> failures(jobs);
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      const Trace& ex = examples[j / static_cast<std::size_t>(samples)];
      const int sample = static_cast<int>(j % static_cast<std::size_t>(samples));
      const auto image = load_image(cfg, ex.id);
      try {
        RunRecord rec;
        if (cfg.condition == Condition::revise) {
          // Round one: reuse a stored full_trace output when available.
          RunRecord first;
          if (auto it = prior.find(ex.id); it != prior.end()) {
            first = score_response(ex, Condition::full_trace, it->second->raw_text);
          } else {
            auto out = call_with_retry(ctx.endpoint,
                                       make_request(cfg, build_prompt(ex, Condition::full_trace, nullptr, image),
                                                    temperature),
                                       limiter, ctx.clock, cfg.backoff_s);
            emit_raw(ex.id, sample, out.response.text);
            first = score_response(ex, Condition::full_trace, out.response.text);
            first.latency_ms = out.latency_ms;
            first.attempts = out.attempts;
          }
          if (first.parsed && trace_verdict(first.report) == Verdict::valid) {
            rec = first;
            rec.condition = Condition::revise;
            rec.prompt_id = prompt_id(Condition::revise);
          } else {
            auto out = call_with_retry(ctx.endpoint,
                                       make_request(cfg, build_prompt(ex, Condition::revise, &first.report, image),
                                                    temperature),
                                       limiter, ctx.clock, cfg.backoff_s);
            emit_raw(ex.id, sample, out.response.text);
            rec = score_response(ex, Condition::revise, out.response.text);
            rec.latency_ms = first.latency_ms + out.latency_ms;
            rec.attempts = first.attempts + out.attempts;
            rec.used_provider_defaults = out.response.used_provider_defaults;
            rec.revised = true;
          }
          rec.initial_raw_text = first.raw_text;
        } else {
          auto out = call_with_retry(
              ctx.endpoint, make_request(cfg, build_prompt(ex, cfg.condition, nullptr, image), temperature), limiter,
              ctx.clock, cfg.backoff_s);
          emit_raw(ex.id, sample, out.response.text);
          rec = score_response(ex, cfg.condition, out.response.text);
          rec.latency_ms = out.latency_ms;
          rec.attempts = out.attempts;
          rec.used_provider_defaults = out.response.used_provider_defaults;
        }
        if (ctx.judge && rec.parsed) rec.judge = ctx.judge->assess(*rec.parsed, ex.metadata ? &*ex.metadata : nullptr);
        rec.model_key = cfg.model_key;
        rec.sample_index = sample;
        if (ctx.sinks.record) {
          std::lock_guard lock(sink_mu);
          ctx.sinks.record(rec);
        }
        slots[j] = std::move(rec);
      } catch (const EndpointError& e) {
        failures[j] = HardFailure{ex.id, sample, e.what()};
      }
    }
  };

  const int threads = std::max(1, cfg.concurrency);
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  RunResult result;
  bool provider_defaults = false;
  for (std::size_t j = 0; j < jobs; ++j) {
    if (slots[j]) {
      provider_defaults = provider_defaults || slots[j]->used_provider_defaults;
      result.records.push_back(std::move(*slots[j]));
    }
    if (failures[j]) result.hard_failures.push_back(*failures[j]);
  }
  if (cfg.condition == Condition::rerank) result.records = rerank_records(result.records, cfg.rerank_mode, samples);

  Json fails = Json::array();
  for (const auto& f : result.hard_failures)
    fails.push_back({{"example_id", f.example_id}, {"sample_index", f.sample_index}, {"error", f.error}});
  result.metadata = Json{{"model_key", cfg.model_key},
                         {"model", cfg.api_model()},
                         {"condition", to_string(cfg.condition)},
                         {"prompt_version", kPromptVersion},
                         {"n_examples", examples.size()},
                         {"samples_per_example", samples},
                         {"temperature", temperature},
                         {"top_p", cfg.top_p},
                         {"max_tokens_field", cfg.max_tokens_field},
                         {"max_completion_tokens", cfg.max_completion_tokens},
                         {"rate_limit_rpm", cfg.rate_limit_rpm},
                         {"seed", cfg.seed},
                         {"rerank_mode", to_string(cfg.rerank_mode)},
                         {"used_provider_defaults", provider_defaults},
                         {"judge", ctx.judge != nullptr},
                         {"hard_failures", fails}};
  return result;
}

std::vector<EvalRecord> eval_records(std::span<const RunRecord> records, std::span<const Trace> examples) {
  std::map<std::string, const Trace*> by_id;
  for (const auto& e : examples) by_id[e.id] = &e;
  std::vector<EvalRecord> out;
  for (const auto& r : records) {
    if (!r.selected) continue;
    EvalRecord e;
    e.example_id = r.example_id;
    e.model = r.model_key;
    e.condition = r.condition;
    e.parsed = wants_trace(r.condition) ? r.parsed.has_value() : r.answer.has_value();
    e.model_answer = r.answer;
    e.answer_correct = r.answer_correct;
    e.report = ensemble(r.report, r.judge);
    e.latency_ms = r.latency_ms;
    if (auto it = by_id.find(r.example_id); it != by_id.end()) {
      const Trace& ex = *it->second;
      e.family = ex.scenario_family;
      if (ex.metadata) {
        e.source = ex.metadata->source;
        e.gold_answer = ex.metadata->gold_answer;
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::string run_stem(const std::string& model_key, Condition condition) {
  std::string key = model_key;
  for (char& c : key)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') c = '_';
  return key + "__" + std::string(to_string(condition));
}

void write_run(const std::filesystem::path& dir, const RunResult& result, const MetricsSummary& summary) {
  std::filesystem::create_directories(dir);
  const std::string stem =
      run_stem(result.metadata.value("model_key", "model"),
               condition_from_string(result.metadata.value("condition", "full_trace")).value_or(Condition::full_trace));
  std::vector<Json> rows;
  for (const auto& r : result.records) rows.push_back(to_json(r));
  write_file(dir / (stem + ".jsonl"), to_jsonl(rows));
  Json s = to_json(summary);
  s["run"] = result.metadata;
  write_file(dir / (stem + ".summary.json"), s.dump(2) + "\n");
}

}  // namespace wmw
