#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "wmw/dataset.hpp"
#include "wmw/io.hpp"
#include "wmw/runner.hpp"
#include "wmw/schema.hpp"

namespace fs = std::filesystem;
using namespace wmw;

namespace {

std::map<std::string, std::vector<std::string>> load_keywords(const std::string& path) {
  auto j = Json::parse(read_file(path));
  std::map<std::string, std::vector<std::string>> out;
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = it->get<std::vector<std::string>>();
  return out;
}

std::vector<RunRecord> read_records(const std::vector<std::string>& paths) {
  std::vector<RunRecord> out;
  for (const auto& p : paths)
    for (const auto& row : read_jsonl(p)) out.push_back(run_record_from_json(row));
  return out;
}

std::vector<Trace> select_split(std::vector<Trace> traces, const std::string& split, int limit) {
  if (!split.empty() && split != "all") {
    const auto s = split_from_string(split);
    if (!s) throw CLI::ValidationError("--split", "unknown split " + split);
    std::erase_if(traces, [&](const Trace& t) { return !t.metadata || t.metadata->split != s; });
  }
  if (limit > 0 && static_cast<int>(traces.size()) > limit) traces.resize(static_cast<std::size_t>(limit));
  return traces;
}

struct JudgeOptions {
  std::string endpoint;
  std::string model = "judge";
  std::string auth_env;
};

void add_judge_options(CLI::App* cmd, JudgeOptions& o) {
  cmd->add_option("--judge-endpoint", o.endpoint, "Chat-completions URL of the judge model");
  cmd->add_option("--judge-model", o.model, "Judge model string");
  cmd->add_option("--judge-auth-env", o.auth_env, "Environment variable holding the judge API key");
}

std::unique_ptr<HttpEndpoint> make_judge_endpoint(const JudgeOptions& o) {
  if (o.endpoint.empty()) return nullptr;
  return std::make_unique<HttpEndpoint>(o.endpoint, api_key_from_env(o.auth_env));
}

int cmd_generate(std::uint64_t seed, int n, int per_trace, const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const Release r = build_release(seed, n, per_trace);
  write_release(r, out);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "wrote " << r.traces.size() << " traces and " << r.pairs.size() << " pairs to " << out << " in "
            << secs << " s\n";
  for (const auto& [name, digest] : r.stats.checksums) std::cout << "  " << digest << "  " << name << "\n";
  return 0;
}

int cmd_perturb(const std::string& traces, int per_trace, std::uint64_t seed, const std::string& out) {
  const Release r = build_pair_release(read_traces(traces), per_trace, seed);
  write_release(r, out);
  std::cout << "wrote " << r.pairs.size() << " pairs to " << out << "\n";
  return 0;
}

int cmd_verify(const std::string& traces_path, bool gold, bool strict, const std::string& keywords,
               const JudgeOptions& jo, const std::string& out) {
  VerifierConfig cfg;
  cfg.strict_schema = strict;
  if (!keywords.empty()) cfg.rule_keywords = load_keywords(keywords);
  const auto traces = read_traces(traces_path);
  auto reports = verify_batch(traces, gold, cfg);

  auto judge_ep = make_judge_endpoint(jo);
  SystemClock clock;
  RateLimiter limiter(30, clock);
  std::optional<Judge> judge;
  if (judge_ep) judge.emplace(*judge_ep, jo.model, &limiter);

  std::vector<Json> rows;
  int valid = 0, abstain = 0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    if (judge)
      reports[i] = ensemble(reports[i], judge->assess(traces[i], gold && traces[i].metadata ? &*traces[i].metadata
                                                                                            : nullptr));
    Json row = to_json(reports[i]);
    row["id"] = traces[i].id;
    rows.push_back(std::move(row));
    valid += trace_verdict(reports[i]) == Verdict::valid;
    abstain += reports[i].any_abstain();
  }
  const std::string text = to_jsonl(rows);
  if (out.empty())
    std::cout << text;
  else
    write_file(out, text);
  std::cerr << traces.size() << " traces: " << valid << " valid, " << abstain << " with abstentions\n";
  return 0;
}

int cmd_metrics(const std::vector<std::string>& records_paths, const std::string& traces_path, int B,
                std::uint64_t seed, const std::string& out) {
  const auto records = read_records(records_paths);
  std::vector<Trace> examples;
  if (!traces_path.empty()) examples = read_traces(traces_path);

  std::map<std::pair<std::string, Condition>, std::vector<RunRecord>> groups;
  for (const auto& r : records) groups[{r.model_key, r.condition}].push_back(r);

  Json summaries = Json::object();
  Json intervals = Json::object();
  std::map<std::string, std::map<Condition, double>> acc;
  for (const auto& [key, recs] : groups) {
    const auto evals = eval_records(recs, examples);
    if (evals.empty()) continue;
    MetricsSummary m = compute_metrics(evals);
    for (Metric metric : all_metrics())
      if (auto ci = bootstrap_ci(evals, metric, B, seed)) m.ci[std::string(to_string(metric))] = {ci->lo, ci->hi};
    const std::string model = key.first;
    const std::string cond(to_string(key.second));
    summaries[model][cond] = to_json(m);
    intervals[model][cond] = to_json(m)["ci"];
    acc[model][key.second] = m.answer_acc;
  }
  for (const auto& [model, by_cond] : acc) {
    try {
      const Gaps g = compute_gaps(by_cond);
      summaries[model]["gaps"] = {{"vsg_pp", g.vsg}, {"tg_pp", g.tg}};
    } catch (const MissingCondition&) {
    }
  }
  const Json doc{{"summaries", summaries}, {"bootstrap", {{"B", B}, {"seed", seed}}}};
  if (out.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    fs::create_directories(out);
    write_file(fs::path(out) / "results_summary.json", doc.dump(2) + "\n");
    write_file(fs::path(out) / "confidence_intervals.json", intervals.dump(2) + "\n");
    std::cout << "wrote results_summary.json and confidence_intervals.json to " << out << "\n";
  }
  return 0;
}

int cmd_rerank(const std::string& samples, const std::string& mode_name, int k, const std::string& out) {
  const auto mode = rerank_mode_from_string(mode_name);
  if (!mode) throw CLI::ValidationError("--mode", "expected rules, learned or majority");
  auto records = read_records({samples});
  std::erase_if(records, [](const RunRecord& r) { return r.condition != Condition::rerank; });
  const auto ranked = rerank_records(records, *mode, k);
  std::vector<Json> rows;
  int n = 0, valid = 0;
  for (const auto& r : ranked) {
    rows.push_back(to_json(r));
    if (r.selected) {
      ++n;
      valid += trace_verdict(ensemble(r.report, r.judge)) == Verdict::valid;
    }
  }
  const std::string text = to_jsonl(rows);
  if (out.empty())
    std::cout << text;
  else
    write_file(out, text);
  std::cerr << n << " examples reranked at k=" << k << "; selected valid: " << valid << "\n";
  return 0;
}

struct RunOptions {
  RunConfig cfg;
  std::string condition = "full_trace";
  std::string mode = "rules";
  std::string traces;
  std::string out;
  std::string replay;
  std::string prior;
  std::string split;
  int limit = 0;
  JudgeOptions judge;
};

int cmd_run(RunOptions& o) {
  const auto cond = condition_from_string(o.condition);
  if (!cond) throw CLI::ValidationError("--condition", "unknown condition " + o.condition);
  o.cfg.condition = *cond;
  const auto mode = rerank_mode_from_string(o.mode);
  if (!mode) throw CLI::ValidationError("--mode", "expected rules, learned or majority");
  o.cfg.rerank_mode = *mode;

  const auto examples = select_split(read_traces(o.traces), o.split, o.limit);

  std::unique_ptr<ChatEndpoint> endpoint;
  if (!o.replay.empty()) {
    auto replay = std::make_unique<ReplayEndpoint>();
    replay->load(read_jsonl(o.replay));
    endpoint = std::move(replay);
  } else {
    if (o.cfg.endpoint_url.empty()) throw CLI::ValidationError("--endpoint", "required unless --replay is given");
    endpoint = std::make_unique<HttpEndpoint>(o.cfg.endpoint_url, api_key_from_env(o.cfg.auth_env));
  }
  auto judge_ep = make_judge_endpoint(o.judge);
  SystemClock clock;
  RateLimiter judge_limiter(o.cfg.rate_limit_rpm, clock);
  std::optional<Judge> judge;
  if (judge_ep) judge.emplace(*judge_ep, o.judge.model, &judge_limiter);

  std::vector<RunRecord> prior;
  if (!o.prior.empty()) prior = read_records({o.prior});

  fs::create_directories(o.out);
  std::ofstream raw_log(fs::path(o.out) / (run_stem(o.cfg.model_key, o.cfg.condition) + ".raw.jsonl"));
  RunContext ctx{*endpoint, clock, judge ? &*judge : nullptr, o.prior.empty() ? nullptr : &prior, {}};
  ctx.sinks.raw = [&](const Json& row) { raw_log << row.dump() << "\n" << std::flush; };

  const RunResult result = run_condition(examples, o.cfg, ctx);
  const auto evals = eval_records(result.records, examples);
  MetricsSummary summary;
  if (!evals.empty()) {
    summary = compute_metrics(evals);
    for (Metric metric : all_metrics())
      if (auto ci = bootstrap_ci(evals, metric, 1000, o.cfg.seed))
        summary.ci[std::string(to_string(metric))] = {ci->lo, ci->hi};
  }
  write_run(o.out, result, summary);
  std::cout << result.records.size() << " records, " << result.hard_failures.size() << " hard failures; answer acc "
            << summary.answer_acc << "\n";
  return result.hard_failures.empty() ? 0 : 3;
}

int cmd_audit(const std::string& traces, const std::string& pairs, const std::string& records_path, int n,
              int gold_checks, std::uint64_t seed, const std::string& out) {
  fs::create_directories(out);
  const auto gold = read_traces(traces);
  const auto rejected = pairs.empty() ? std::vector<PreferencePair>{} : read_pairs(pairs);
  const PrescreenReport pre = prescreen(gold, rejected);
  write_file(fs::path(out) / "prescreen.json", to_json(pre).dump(2) + "\n");
  std::cout << "false-positive target " << (pre.fp_pass ? "met" : "missed") << ", detection target "
            << (pre.detection_pass ? "met" : "missed") << "\n";

  if (!records_path.empty()) {
    std::map<std::string, std::string> family;
    for (const auto& t : gold) family[t.id] = t.scenario_family;
    std::vector<AuditCandidate> pool;
    for (const auto& r : read_records({records_path})) {
      if (!r.selected || !r.parsed) continue;
      AuditCandidate c;
      c.id = r.example_id + "/" + r.model_key + "/" + std::string(to_string(r.condition));
      c.family = family.contains(r.example_id) ? family[r.example_id] : "unknown";
      c.model = r.model_key;
      if (!r.report.labels.empty()) c.predicted_label = *r.report.labels.begin();
      c.gold = r.answer_correct && trace_verdict(r.report) == Verdict::valid;
      pool.push_back(std::move(c));
    }
    std::vector<Json> rows;
    for (const auto& item : audit_sample(pool, n, gold_checks, seed)) rows.push_back(to_json(item));
    write_file(fs::path(out) / "audit_sample.jsonl", to_jsonl(rows));
    std::cout << "sampled " << rows.size() << " traces for annotation\n";
  }
  return 0;
}

int cmd_stress(const std::string& traces, const std::string& full, const std::string& direct,
               const std::string& pairs, const std::string& out) {
  const auto bank = read_traces(traces);
  const auto ft = read_records({full});
  const auto ao = read_records({direct});
  const auto pp = pairs.empty() ? std::vector<PreferencePair>{} : read_pairs(pairs);
  RunConfig cfg;
  const StressReport r = stress_tests(bank, ft, ao, pp, cfg, nullptr);
  const std::string text = to_json(r).dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    write_file(out, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"World-model trace generation, verification and evaluation"};
  app.require_subcommand(1);

  std::uint64_t seed = 2026;
  int n = 200, per_trace = kDefaultPairsPerTrace;
  std::string out = ".";
  auto* gen = app.add_subcommand("generate", "Generate the seeded trace bank, pairs, splits and DPO files");
  gen->add_option("--seed", seed, "Random seed")->capture_default_str();
  gen->add_option("--n", n, "Number of traces (at least 17)")->capture_default_str();
  gen->add_option("--per-trace", per_trace, "Preference pairs per trace")->capture_default_str();
  gen->add_option("--out", out, "Output directory")->capture_default_str();

  std::string traces;
  auto* pert = app.add_subcommand("perturb", "Build preference pairs for an existing trace file");
  pert->add_option("--traces", traces, "Trace JSONL")->required();
  pert->add_option("--per-trace", per_trace, "Pairs per trace")->capture_default_str();
  pert->add_option("--seed", seed, "Random seed")->capture_default_str();
  pert->add_option("--out", out, "Output directory")->capture_default_str();

  bool gold = false, strict = false;
  std::string keywords, out_file;
  JudgeOptions vjudge;
  auto* ver = app.add_subcommand("verify", "Run the verifier over a trace file");
  ver->add_option("--traces", traces, "Trace JSONL")->required();
  ver->add_flag("--gold", gold, "Use each trace's metadata as gold");
  ver->add_flag("--strict", strict, "Strict schema validation");
  ver->add_option("--rule-keywords", keywords, "JSON map of family to rule keywords");
  ver->add_option("--out", out_file, "Report JSONL (stdout when omitted)");
  add_judge_options(ver, vjudge);

  std::vector<std::string> records;
  int B = 1000;
  std::string out_dir;
  auto* met = app.add_subcommand("metrics", "Summaries and bootstrap intervals from run records");
  met->add_option("--records", records, "Run record JSONL files")->required();
  met->add_option("--traces", traces, "Example traces (for gold and source breakdowns)");
  met->add_option("--bootstrap", B, "Bootstrap resamples")->capture_default_str();
  met->add_option("--seed", seed, "Bootstrap seed")->capture_default_str();
  met->add_option("--out", out_dir, "Output directory (stdout when omitted)");

  std::string samples, mode = "rules";
  int k = 8;
  auto* rr = app.add_subcommand("rerank", "Select among stored rerank samples");
  rr->add_option("--samples", samples, "Rerank run records")->required();
  rr->add_option("--mode", mode, "rules, learned or majority")->capture_default_str();
  rr->add_option("--k", k, "Samples considered per example")->capture_default_str();
  rr->add_option("--out", out_file, "Output JSONL (stdout when omitted)");

  RunOptions ro;
  auto* run = app.add_subcommand("run", "Query a model endpoint under one prompting condition");
  run->add_option("--model", ro.cfg.model_key, "Model key")->required();
  run->add_option("--api-model", ro.cfg.model, "API model string (defaults to the key)");
  run->add_option("--endpoint", ro.cfg.endpoint_url, "Chat-completions URL");
  run->add_option("--auth-env", ro.cfg.auth_env, "Environment variable holding the API key");
  run->add_option("--condition", ro.condition, "Prompting condition")->capture_default_str();
  run->add_option("--traces", ro.traces, "Example traces")->required();
  run->add_option("--out", ro.out, "Output directory")->required();
  run->add_option("--k", ro.cfg.k, "Samples per example for rerank")->capture_default_str();
  run->add_option("--mode", ro.mode, "Rerank mode")->capture_default_str();
  run->add_option("--rpm", ro.cfg.rate_limit_rpm, "Requests per minute")->capture_default_str();
  run->add_option("--max-tokens", ro.cfg.max_completion_tokens, "Completion budget")->capture_default_str();
  run->add_option("--max-tokens-field", ro.cfg.max_tokens_field, "Budget field name")->capture_default_str();
  run->add_option("--concurrency", ro.cfg.concurrency, "Requests in flight")->capture_default_str();
  run->add_option("--seed", ro.cfg.seed, "Seed")->capture_default_str();
  run->add_option("--image-dir", ro.cfg.image_dir, "Directory of <id>.png scene images");
  run->add_option("--split", ro.split, "Restrict to train, val or test");
  run->add_option("--limit", ro.limit, "Use at most this many examples");
  run->add_option("--replay", ro.replay, "Serve canned responses from this JSONL instead of an endpoint");
  run->add_option("--prior", ro.prior, "Earlier full_trace records reused as the first revise round");
  add_judge_options(run, ro.judge);

  std::string pairs, rec_path;
  int audit_n = 400, gold_checks = 50;
  auto* aud = app.add_subcommand("audit", "Verifier pre-screen and stratified audit sample");
  aud->add_option("--traces", traces, "Gold traces")->required();
  aud->add_option("--pairs", pairs, "Preference pairs");
  aud->add_option("--records", rec_path, "Run records to sample from");
  aud->add_option("--n", audit_n, "Sample size")->capture_default_str();
  aud->add_option("--gold-checks", gold_checks, "Embedded gold checks")->capture_default_str();
  aud->add_option("--seed", seed, "Seed")->capture_default_str();
  aud->add_option("--out", out, "Output directory")->capture_default_str();

  std::string full, direct;
  auto* st = app.add_subcommand("stress", "Offline stress tests from stored runs");
  st->add_option("--traces", traces, "Gold traces")->required();
  st->add_option("--full-trace", full, "full_trace run records")->required();
  st->add_option("--answer-only", direct, "answer_only run records")->required();
  st->add_option("--pairs", pairs, "Preference pairs");
  st->add_option("--out", out_file, "Report JSON (stdout when omitted)");

  auto* sch = app.add_subcommand("schema", "Print the Draft-7 trace schema");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return cmd_generate(seed, n, per_trace, out);
    if (*pert) return cmd_perturb(traces, per_trace, seed, out);
    if (*ver) return cmd_verify(traces, gold, strict, keywords, vjudge, out_file);
    if (*met) return cmd_metrics(records, traces, B, seed, out_dir);
    if (*rr) return cmd_rerank(samples, mode, k, out_file);
    if (*run) return cmd_run(ro);
    if (*aud) return cmd_audit(traces, pairs, rec_path, audit_n, gold_checks, seed, out);
    if (*st) return cmd_stress(traces, full, direct, pairs, out_file);
    if (*sch) {
      std::cout << trace_schema_document().dump(2) << "\n";
      return 0;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
