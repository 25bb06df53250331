#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wmw/chat.hpp"
#include "wmw/clock.hpp"
#include "wmw/judge.hpp"
#include "wmw/metrics.hpp"
#include "wmw/prompts.hpp"
#include "wmw/rerank.hpp"

namespace wmw {

inline constexpr std::string_view kPromptVersion = "v1";

struct RunConfig {
  std::string model_key;
  /// API model string; defaults to model_key.
  std::string model;
  std::string endpoint_url;
  /// Environment variable holding the API key; empty for no auth.
  std::string auth_env;
  Condition condition = Condition::full_trace;
  /// Defaults to 0.0, or 0.7 for rerank sampling.
  std::optional<double> temperature;
  double top_p = 1.0;
  int max_completion_tokens = 2048;
  std::string max_tokens_field = "max_tokens";
  int rate_limit_rpm = 30;
  int k = 8;
  std::uint64_t seed = 2026;
  /// Retries after the first attempt, with these waits before each.
  std::vector<double> backoff_s{2.0, 4.0, 8.0};
  int concurrency = 1;
  RerankMode rerank_mode = RerankMode::rules;
  /// Directory of <example_id>.png images; empty sends the scene text.
  std::filesystem::path image_dir;

  double effective_temperature() const;
  std::string api_model() const { return model.empty() ? model_key : model; }
};

struct RunRecord {
  std::string example_id;
  std::string model_key;
  Condition condition = Condition::full_trace;
  std::string prompt_id;
  int sample_index = 0;
  std::string raw_text;
  std::optional<Trace> parsed;
  std::string parse_error;
  std::optional<Answer> answer;
  std::optional<Json> normalized_answer;
  bool answer_correct = false;
  /// Rule-verifier report; the judge verdict is kept apart so rerank can
  /// score both and metrics can take the ensemble.
  VerifierReport report;
  std::optional<JudgeVerdict> judge;
  double latency_ms = 0.0;
  int attempts = 1;
  std::optional<double> rerank_score;
  bool selected = true;
  /// revise: the first-round output and whether a revision was requested.
  std::optional<std::string> initial_raw_text;
  bool revised = false;
  bool used_provider_defaults = false;
};

Json to_json(const RunRecord& r);
RunRecord run_record_from_json(const Json& j);

struct HardFailure {
  std::string example_id;
  int sample_index = 0;
  std::string error;
};

struct RunResult {
  std::vector<RunRecord> records;
  std::vector<HardFailure> hard_failures;
  Json metadata;
};

/// Optional hooks, called under one lock. `raw` fires with the unparsed
/// response before any parsing so raw text survives parser failures.
struct RunSinks {
  std::function<void(const Json&)> raw;
  std::function<void(const RunRecord&)> record;
};

struct RunContext {
  ChatEndpoint& endpoint;
  Clock& clock;
  Judge* judge = nullptr;
  /// Earlier full_trace records; revise reuses them as the first round.
  const std::vector<RunRecord>* prior = nullptr;
  RunSinks sinks;
};

/// One request with throttling and bounded retries. Throws EndpointError
/// once retries are exhausted or on a non-transient failure.
struct CallOutcome {
  ChatResponse response;
  int attempts = 0;
  double latency_ms = 0.0;
};
CallOutcome call_with_retry(ChatEndpoint& endpoint, const ChatRequest& request, RateLimiter& limiter, Clock& clock,
                            std::span<const double> backoff_s);

/// Parses and verifies a raw completion for `example` under `condition`.
/// Pure: the replay path and the live path share it.
RunRecord score_response(const Trace& example, Condition condition, const std::string& raw_text,
                         const VerifierConfig& config = {});

/// One record per example (k for rerank), minus logged hard failures.
RunResult run_condition(std::span<const Trace> examples, const RunConfig& config, RunContext& ctx);

/// Re-scores stored records from their raw text: no endpoint involved.
std::vector<RunRecord> rescore(std::span<const RunRecord> records, std::span<const Trace> examples,
                               const VerifierConfig& config = {});

/// Re-runs selection over stored rerank samples, keeping the first `k` of
/// each example's samples.
std::vector<RunRecord> rerank_records(std::span<const RunRecord> records, RerankMode mode, int k);

/// Selected records as metric inputs, with judge verdicts ensembled in.
std::vector<EvalRecord> eval_records(std::span<const RunRecord> records, std::span<const Trace> examples);

/// "<model_key>__<condition>" file stem.
std::string run_stem(const std::string& model_key, Condition condition);

/// Writes <stem>.jsonl (raw records) and <stem>.summary.json.
void write_run(const std::filesystem::path& dir, const RunResult& result, const MetricsSummary& summary);

// ---- stress tests ----

class MissingRuns : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct StressReport {
  int ablation_n = 0;
  std::optional<double> trace_acc;
  std::optional<double> answer_only_acc;
  std::optional<double> ablation_change_rate;
  int counterfactual_n = 0;
  int counterfactual_excluded = 0;
  std::optional<double> counterfactual_change_rate;
  std::optional<double> seen_detection;
  std::optional<double> heldout_detection;
  int natural_pairs = 0;
  std::optional<double> natural_consistency;
};

Json to_json(const StressReport& r);

/// The four behavioral stress tests. The counterfactual test needs `ctx`
/// (it re-asks the model); without it that part is skipped.
StressReport stress_tests(std::span<const Trace> bank, std::span<const RunRecord> full_trace,
                          std::span<const RunRecord> answer_only, std::span<const PreferencePair> pairs,
                          const RunConfig& config, RunContext* ctx);

}  // namespace wmw
