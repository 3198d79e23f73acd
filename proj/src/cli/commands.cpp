#include "partnerlab/cli/commands.hpp"

#include <cstdlib>
#include <iostream>

#include "partnerlab/core/checkpoint.hpp"
#include "partnerlab/core/errors.hpp"
#include "partnerlab/core/hashing.hpp"
#include "partnerlab/corpus/datasets.hpp"
#include "partnerlab/corpus/ingest.hpp"
#include "partnerlab/corpus/synthetic.hpp"
#include "partnerlab/training/scorer_bundle.hpp"
#include "partnerlab/training/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace partnerlab::cli {

namespace {

constexpr const char* kDefaults = R"(
seed = 0

[synth]
templates.seekers = data/templates/seekers.txt
templates.responses = data/templates/responses.txt

[scorers]
empathy.impl = lexicon_oracle
empathy.lexicon_dir = data/lexicon
safety.patterns = data/safety_patterns.txt

[rl]
profile = paper

[serve]
host = 127.0.0.1
port = 8080
max_request_bytes = 65536
)";

json config_json(const CliContext& ctx, const std::string& command) {
  return {{"command", command}, {"config", ctx.config.values()}, {"config_hash", ctx.config.hash()}};
}

std::vector<ConversationPair> load_corpus(const CliContext& ctx, const fs::path& path) {
  IngestOptions opts;
  opts.strict = ctx.strict;
  IngestResult r = ingest_jsonl(path, opts);
  for (const auto& e : r.errors) ctx.info("skipped line " + std::to_string(e.line) + ": " + e.message);
  return r.pairs;
}

std::vector<std::string> corpus_texts(const std::vector<ConversationPair>& corpus) {
  std::vector<std::string> texts;
  for (const auto& p : corpus) {
    texts.push_back(p.seeker.text);
    texts.push_back(p.response.text);
  }
  return texts;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::vector<std::string> out;
  std::string content = read_text_file(path);
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    if (end > start) out.push_back(content.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::string dump_jsonl(const std::vector<json>& rows) {
  std::string out;
  for (const auto& r : rows) out += r.dump() + "\n";
  return out;
}

}  // namespace

fs::path home_from_env() {
  const char* h = std::getenv("PARTNERLAB_HOME");
  return h && *h ? fs::path(h) : fs::path();
}

fs::path CliContext::resolve(const fs::path& p) const {
  if (p.empty() || p.is_absolute()) return p;
  return base_dir / p;
}

std::uint64_t CliContext::seed() const { return static_cast<std::uint64_t>(config.get_int("seed", 0)); }

void CliContext::info(const std::string& line) const {
  if (log) *log << line << "\n";
}

CliContext make_context(const CliOptions& options, std::ostream* log) {
  CliContext ctx;
  ctx.log = log;
  ctx.strict = options.strict;
  ctx.home = home_from_env();
  ctx.base_dir = ctx.home.empty() ? fs::current_path() : ctx.home;
  ctx.config = KeyValueConfig::parse(kDefaults, "<defaults>");
  if (!options.config_path.empty()) {
    KeyValueConfig file = KeyValueConfig::load(options.config_path);
    for (const auto& [k, v] : file.values()) ctx.config.set(k, v);
  }
  for (const auto& o : options.overrides) ctx.config.apply_override(o);
  if (options.seed) ctx.config.set("seed", std::to_string(*options.seed));
  if (options.verbosity > 1) ctx.info("effective config (" + ctx.config.hash().substr(0, 12) + "):\n" + ctx.config.dump());
  return ctx;
}

KeyValueConfig section(const CliContext& ctx, const std::string& name) {
  KeyValueConfig s = ctx.config.subtree(name);
  if (!s.contains("seed")) s.set("seed", std::to_string(ctx.seed()));
  return s;
}

RewriteConfig rewrite_config(const CliContext& ctx) {
  KeyValueConfig s = section(ctx, "rewrite");
  RewriteConfig c;
  c.k = static_cast<int>(s.get_int("k", c.k));
  c.nucleus_p = s.get_double("nucleus_p", c.nucleus_p);
  c.max_steps = static_cast<int>(s.get_int("max_steps", c.max_steps));
  c.candidate_cap = static_cast<int>(s.get_int("candidate_cap", c.candidate_cap));
  c.sample_positions = s.get_bool("sample_positions", c.sample_positions);
  c.max_post_tokens = static_cast<int>(s.get_int("max_post_tokens", c.max_post_tokens));
  c.seed = static_cast<std::uint64_t>(s.get_int("seed", 0));
  c.validate();
  return c;
}

TrainConfig rl_config(const CliContext& ctx) {
  KeyValueConfig s = section(ctx, "rl");
  const std::string profile = s.get_string("profile", "paper");
  TrainConfig base;
  if (profile == "desk") {
    base = TrainConfig::desk_profile();
  } else if (profile != "paper") {
    throw ConfigError("train", "rl.profile must be desk or paper, got '" + profile + "'");
  }
  return TrainConfig::from_config(s, base);
}

void cmd_synth(const CliContext& ctx, const fs::path& out_dir) {
  KeyValueConfig s = section(ctx, "synth");
  SyntheticSpec spec = SyntheticSpec::from_config(s, ctx.base_dir);
  SyntheticTemplates templates = SyntheticTemplates::load(spec.seekers_path, spec.responses_path);
  auto corpus = generate_synthetic_corpus(spec, templates, spec.seed);
  write_text_file(out_dir / "corpus.jsonl", to_jsonl(corpus));
  write_manifest(out_dir, "corpus", config_json(ctx, "synth"), {{"pairs", corpus.size()}});
  ctx.info("wrote " + std::to_string(corpus.size()) + " pairs to " + (out_dir / "corpus.jsonl").string());
}

void cmd_build_data(const CliContext& ctx, const fs::path& corpus_path, const std::optional<fs::path>& scorers,
                    const fs::path& out_dir) {
  auto corpus = load_corpus(ctx, corpus_path);
  KeyValueConfig s = section(ctx, "scorers");

  std::unique_ptr<EmpathyScorer> empathy;
  if (scorers) {
    empathy = load_empathy_scorer(*scorers / "empathy");
  } else if (s.get_string("empathy.impl", "lexicon_oracle") == "lexicon_oracle") {
    auto dir = s.find("empathy.lexicon_dir");
    if (!dir) throw ConfigError("build-data", "no empathy scorer: pass --scorers or set scorers.empathy.lexicon_dir");
    empathy = std::make_unique<LexiconOracle>(LexiconOracle::load(ctx.resolve(*dir)));
  } else {
    throw ConfigError("build-data", "the trained empathy scorer needs --scorers");
  }

  auto warm = build_warmstart_dataset(corpus, *empathy);
  std::vector<CoherencePairExample> coherence;
  if (!corpus.empty()) {
    coherence = build_coherence_dataset(corpus, s.get_double("coherence.negative_ratio", 1.0),
                                        static_cast<std::uint64_t>(s.get_int("seed", 0)));
  }
  std::vector<json> warm_rows, coh_rows;
  std::size_t positives = 0;
  for (const auto& e : warm) warm_rows.push_back(to_json(e));
  for (const auto& e : coherence) {
    coh_rows.push_back(to_json(e));
    positives += e.label == CoherenceLabel::kCoherent ? 1 : 0;
  }
  write_text_file(out_dir / "warmstart.jsonl", dump_jsonl(warm_rows));
  write_text_file(out_dir / "coherence.jsonl", dump_jsonl(coh_rows));
  json counts = {{"pairs", corpus.size()},
                 {"warmstart_examples", warm.size()},
                 {"coherence_positive", positives},
                 {"coherence_negative", coherence.size() - positives},
                 {"empathy_scorer", empathy->kind()}};
  write_manifest(out_dir, "datasets", config_json(ctx, "build-data"), counts);
  ctx.info("datasets: " + counts.dump());
}

void cmd_train_scorers(const CliContext& ctx, const fs::path& corpus_path, const fs::path& out_dir) {
  auto corpus = load_corpus(ctx, corpus_path);
  ScorerBundleConfig cfg = ScorerBundleConfig::from_config(section(ctx, "scorers"), ctx.base_dir);
  ScorerBundle bundle = train_scorer_bundle(corpus, cfg);
  bundle.save(out_dir);
  ctx.info("scorers: " + bundle.metrics.dump());
  ctx.info(out_dir.string());
}

void cmd_train_warm(const CliContext& ctx, const fs::path& corpus_path, const fs::path& data_dir,
                    const fs::path& out_dir) {
  auto corpus = load_corpus(ctx, corpus_path);
  if (corpus.empty()) throw DataError("train", "cannot build a policy vocabulary from an empty corpus");
  KeyValueConfig ps = section(ctx, "policy");
  PolicyArch arch = policy_arch_from_config(ps, PolicyArch{});
  Vocabulary vocab = Vocabulary::build(corpus_texts(corpus), static_cast<std::size_t>(ps.get_int("vocab_size", 8000)));
  NeuralPolicy policy(std::move(vocab), arch, static_cast<std::uint64_t>(ps.get_int("seed", 0)));

  WarmStartConfig wc = WarmStartConfig::from_config(section(ctx, "warm"), WarmStartConfig{});
  json report = {{"steps", 0}};
  if (wc.steps > 0) {
    std::vector<WarmStartExample> examples;
    const fs::path path = data_dir / "warmstart.jsonl";
    for (const auto& line : read_lines(path)) {
      try {
        examples.push_back(warmstart_from_json(json::parse(line)));
      } catch (const json::exception& e) {
        throw DataError("train", path.string() + ": " + e.what());
      }
    }
    report = warm_start_finetune(policy, examples, wc).to_json();
  }
  fs::create_directories(out_dir);
  write_text_file(out_dir / "warm_report.json", report.dump(2) + "\n");
  policy.save(out_dir);
  ctx.info("warm start: " + report.dump());
  ctx.info(out_dir.string());
}

void cmd_train_rl(const CliContext& ctx, const fs::path& corpus_path, const fs::path& scorers,
                  const std::optional<fs::path>& warm, bool from_scratch, const fs::path& out_dir) {
  if (!warm && !from_scratch) {
    throw ConfigError("train", "rl training needs a warm-start checkpoint (--warm DIR) or --from-scratch");
  }
  TrainConfig tc = rl_config(ctx);
  auto corpus = load_corpus(ctx, corpus_path);
  if (corpus.empty()) throw DataError("train", "rl training needs a non-empty corpus");

  std::unique_ptr<NeuralPolicy> policy;
  if (warm) {
    const fs::path dir = *warm;
    if (!fs::exists(dir / "manifest.json")) {
      throw ConfigError("train", "warm-start checkpoint not found at " + dir.string());
    }
    policy = std::make_unique<NeuralPolicy>(NeuralPolicy::load(dir));
  } else {
    KeyValueConfig ps = section(ctx, "policy");
    PolicyArch arch = policy_arch_from_config(ps, PolicyArch{});
    Vocabulary vocab =
        Vocabulary::build(corpus_texts(corpus), static_cast<std::size_t>(ps.get_int("vocab_size", 8000)));
    policy = std::make_unique<NeuralPolicy>(std::move(vocab), arch, static_cast<std::uint64_t>(ps.get_int("seed", 0)));
  }

  ScorerBundle bundle = ScorerBundle::load(scorers);
  RewardModel rewards = bundle.reward_model(tc.weights);
  std::string log;
  auto on_step = [&](const RlLogRecord& r) {
    log += r.to_json().dump() + "\n";
    if (r.step % 50 == 0) ctx.info("step " + std::to_string(r.step) + " reward " + std::to_string(r.reward_mean));
  };
  auto on_checkpoint = [&](int step, const NeuralPolicy& p) { p.save(out_dir / ("step_" + std::to_string(step))); };
  RlReport report = train_rl(*policy, corpus, rewards, tc, &bundle.safety, on_step, on_checkpoint);

  fs::create_directories(out_dir);
  write_text_file(out_dir / "train_log.jsonl", log);
  json summary = report.to_json();
  summary["config"] = tc.to_json();
  write_text_file(out_dir / "train_report.json", summary.dump(2) + "\n");
  policy->save(out_dir);
  ctx.info("rl: " + report.to_json().dump());
  ctx.info(out_dir.string());
}

void cmd_rewrite(const CliContext& ctx, const fs::path& input, const fs::path& policy_dir,
                 const std::optional<fs::path>& scorers, const fs::path& out_dir) {
  auto corpus = load_corpus(ctx, input);
  auto policy = load_policy(policy_dir);
  RewriteConfig rc = rewrite_config(ctx);
  rc.k = policy->window_size();

  std::optional<ScorerBundle> bundle;
  std::optional<RewardModel> rewards;
  SafetyFilter safety;
  if (scorers) {
    bundle = ScorerBundle::load(*scorers);
    rewards.emplace(bundle->reward_model(rl_config(ctx).weights));
    safety = bundle->safety;
  } else if (auto p = section(ctx, "scorers").find("safety.patterns")) {
    safety = SafetyFilter::load(ctx.resolve(*p));
  }

  std::vector<EvalRecord> records;
  std::vector<json> traces;
  std::size_t flagged = 0, edits = 0;
  for (const auto& pair : corpus) {
    RewriteConfig pc = rc;
    pc.seed = hashing::fnv1a(pair.response.id, rc.seed);
    RewriteTrace trace = rewrite(pair.seeker, pair.response, *policy, pc, rewards ? &*rewards : nullptr, &safety);
    flagged += trace.flagged_unsafe() ? 1 : 0;
    for (const auto& a : trace.actions()) edits += a.position.kind == PositionKind::kStop ? 0 : 1;
    records.push_back({pair.response.id, pair.seeker.text, pair.response.text, trace.final.text, std::nullopt});
    json t = to_json(trace);
    t["id"] = pair.response.id;
    traces.push_back(std::move(t));
  }
  write_text_file(out_dir / "rewritten.jsonl", to_jsonl(records));
  write_text_file(out_dir / "traces.jsonl", dump_jsonl(traces));
  json metrics = {{"records", records.size()}, {"edits", edits}, {"flagged_unsafe", flagged}};
  write_manifest(out_dir, "rewrites", config_json(ctx, "rewrite"), metrics);
  ctx.info("rewrite: " + metrics.dump());
}

MetricReport cmd_eval(const CliContext& ctx, const fs::path& records_path, const fs::path& scorers,
                      const std::optional<fs::path>& references, BleuMode bleu, const fs::path& out_dir) {
  auto records = read_records(records_path);
  if (references) attach_references(records, read_records(*references));
  if (bleu == BleuMode::kRequired) {
    bool any = false;
    for (const auto& r : records) any = any || r.reference_text.has_value();
    if (!any) throw DataError("eval", "--bleu needs reference rewritings (--references FILE)");
  }
  ScorerBundle bundle = ScorerBundle::load(scorers);
  KeyValueConfig es = section(ctx, "eval");
  HashEmbedder embedder(static_cast<int>(es.get_int("embed_dim", 64)),
                        static_cast<std::uint64_t>(es.get_int("embed_seed", 0x5eed)));
  EvalModels models{*bundle.empathy, *bundle.fluency_lm, *bundle.coherence, embedder};
  MetricReport report = evaluate_suite(records, models, bleu);
  write_report(out_dir, report, records, models, config_json(ctx, "eval"));
  ctx.info(format_report_table(report));
  return report;
}

}  // namespace partnerlab::cli
