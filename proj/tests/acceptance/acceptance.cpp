// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "partnerlab/cli/commands.hpp"
#include "partnerlab/core/random.hpp"
#include "partnerlab/core/text.hpp"
#include "partnerlab/corpus/datasets.hpp"
#include "partnerlab/corpus/ingest.hpp"
#include "partnerlab/corpus/segment.hpp"
#include "partnerlab/eval/metrics.hpp"
#include "partnerlab/policy/actions.hpp"
#include "partnerlab/policy/policy.hpp"
#include "partnerlab/policy/state.hpp"
#include "partnerlab/scorers/coherence.hpp"
#include "partnerlab/scorers/reward.hpp"
#include "partnerlab/training/reinforce.hpp"
#include "test_support.hpp"

using namespace partnerlab;
namespace fs = std::filesystem;
namespace pt = partnerlab::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> ws_split(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// ---- action space -------------------------------------------------------

Outcome action_space() {
  auto start = std::chrono::steady_clock::now();
  Outcome o;
  std::vector<std::string> texts;
  for (const auto& p : pt::synthetic(20, 0.5, 1)) {
    texts.push_back(p.seeker.text);
    texts.push_back(p.response.text);
  }
  Vocabulary vocab = Vocabulary::build(texts);
  for (int k = 1; k <= 4; ++k) {
    const auto acts = enumerate_actions(k);
    std::set<std::pair<int, int>> distinct;
    for (const auto& a : acts) distinct.insert({static_cast<int>(a.kind), a.slot});
    PolicyArch arch;
    arch.k = k;
    arch.embed_dim = 4;
    arch.hidden_dim = 4;
    arch.decoder_hidden = 4;
    NeuralPolicy policy(vocab, arch, 3);
    auto state = encode_state(pt::seeker("I feel alone."), {"A.", "B.", "C.", "D.", "E."}, 0, k, vocab);
    auto probs = policy.position_probs(state);
    const auto expected = static_cast<std::size_t>(2 * k + 2);
    bool ok = acts.size() == expected && distinct.size() == expected &&
              static_cast<std::size_t>(probs.size()) == expected && std::abs(probs.sum() - 1.0) < 1e-12;
    o.pass = o.pass && ok;
    o.detail += "k=" + std::to_string(k) + ":" + std::to_string(acts.size()) + " ";
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.pass = o.pass && secs < 1.0;
  o.detail += fmt("in %.3fs", secs);
  return o;
}

// ---- edit semantics -----------------------------------------------------

using Sentences = std::vector<std::string>;

Sentences oracle_edit(const Sentences& s, const PositionAction& a, const std::string& cand) {
  if (a.kind == PositionKind::kStop) return s;
  Sentences out;
  const auto at = static_cast<std::size_t>(a.slot);
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (a.kind == PositionKind::kInsert && i == at && !cand.empty()) out.push_back(cand);
    if (i == s.size()) break;
    if (a.kind == PositionKind::kReplace && i == at) {
      if (!cand.empty()) out.push_back(cand);
      continue;
    }
    out.push_back(s[i]);
  }
  return out;
}

Outcome edit_semantics() {
  Outcome o;
  int cases = 0, bad = 0;
  for (std::size_t n : {2u, 3u}) {
    Sentences s;
    for (std::size_t i = 0; i < n; ++i) s.push_back("S" + std::to_string(i) + ".");
    for (const auto& a : enumerate_actions(2)) {
      for (const std::string cand : {"X.", ""}) {
        ++cases;
        auto got = apply_edit(s, 0, {a, cand});
        if (got != oracle_edit(s, a, cand)) ++bad;
        if (a.kind == PositionKind::kReplace && cand.empty()) {
          Sentences deleted = s;
          deleted.erase(deleted.begin() + a.slot);
          if (got != deleted) ++bad;
        }
      }
    }
  }
  o.pass = bad == 0 && cases <= 30;
  o.detail = std::to_string(cases) + " cases, " + std::to_string(bad) + " mismatches";
  return o;
}

// ---- reward correctness -------------------------------------------------

// Deterministic pseudo-probabilities that differ for every pair.
class HashCoherence final : public CoherenceModel {
 public:
  double coherence_prob(std::string_view a, std::string_view b) const override {
    std::string key = std::string(a) + "|" + std::string(b);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : key) h = (h ^ c) * 1099511628211ULL;
    return static_cast<double>(h % 10007) / 10007.0;
  }
  std::string kind() const override { return "hash"; }
  void save(const std::filesystem::path&) const override {}
};

Outcome reward_correctness() {
  Outcome o;
  // Bigram toy LM against hand-counted interpolated probabilities.
  std::vector<std::string> train = {"the cat sat", "the dog sat down", "a cat ran"};
  BigramLmConfig cfg;
  BigramLm lm = BigramLm::train(train, cfg);
  std::map<std::string, double> uni, ctx;
  std::map<std::pair<std::string, std::string>, double> bi;
  double total = 0;
  for (const auto& s : train) {
    std::string prev = "<s>";
    for (const auto& w : ws_split(s)) {
      uni[w] += 1;
      total += 1;
      ctx[prev] += 1;
      bi[{prev, w}] += 1;
      prev = w;
    }
  }
  const double V = static_cast<double>(uni.size());
  auto prob = [&](const std::string& u, const std::string& w) {
    double pu = uni.count(w) ? uni[w] / total : 0.0;
    double pg = 1.0 / (V + 1.0);
    if (!ctx.count(u)) {
      double s = cfg.unigram_weight + cfg.uniform_weight;
      return (cfg.unigram_weight + cfg.bigram_weight * cfg.unigram_weight / s) * pu +
             (cfg.uniform_weight + cfg.bigram_weight * cfg.uniform_weight / s) * pg;
    }
    double pb = bi.count({u, w}) ? bi[{u, w}] / ctx[u] : 0.0;
    return cfg.bigram_weight * pb + cfg.unigram_weight * pu + cfg.uniform_weight * pg;
  };
  Rng rng(12);
  const std::vector<std::string> words = {"the", "cat", "sat", "dog", "down", "a", "ran", "zebra"};
  double fluency_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> w;
    for (std::size_t i = 1 + rng.index(6); i > 0; --i) w.push_back(rng.pick(words));
    double nll = 0.0;
    std::string prev = "<s>";
    for (const auto& x : w) {
      nll -= std::log(prob(prev, x));
      prev = x;
    }
    double expected = std::exp(-nll / static_cast<double>(w.size()));
    fluency_err = std::max(fluency_err, std::abs(fluency_reward(text::join(w, " "), lm) - expected));
  }

  std::vector<EvalRecord> recs;
  for (const auto& p : pt::synthetic(15, 0.5, 1)) recs.push_back({p.response.id, p.seeker.text, p.response.text, p.response.text, {}});
  int ppl_bad = 0;
  for (std::size_t vocab : {2u, 7u, 37u, 50u, 406u, 1000u, 4097u, 65521u}) {
    ppl_bad += metric_perplexity(recs, UniformLm(vocab)) == static_cast<double>(vocab) ? 0 : 1;
  }

  HashCoherence coherence;
  std::vector<std::string> sents;
  for (const auto& p : pt::synthetic(20, 0.5, 8)) sents.insert(sents.end(), p.response.sentences.begin(), p.response.sentences.end());
  double coherence_err = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> window;
    for (std::size_t i = 1 + rng.index(4); i > 0; --i) window.push_back(rng.pick(sents));
    const std::string& cand = rng.pick(sents);
    double sum = 0.0;
    for (const auto& s : window) sum += coherence.coherence_prob(cand, s);
    coherence_err = std::max(coherence_err, std::abs(coherence_reward(cand, window, coherence) - sum / static_cast<double>(window.size())));
  }

  int linear_bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    RewardWeights rw{rng.uniform(0, 5), rng.uniform(0, 20), rng.uniform(0, 1), rng.uniform(0, 1), 0.5};
    double a[4], b[4];
    for (int i = 0; i < 4; ++i) {
      a[i] = rng.uniform(-10, 10);
      b[i] = rng.uniform(-10, 10);
    }
    auto ra = total_reward(a[0], a[1], a[2], a[3], rw);
    auto rb = total_reward(b[0], b[1], b[2], b[3], rw);
    auto rs = total_reward(a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3], rw);
    double direct = rw.w_e * a[0] + rw.w_f * a[1] + rw.w_c * a[2] + rw.w_m * a[3];
    if (std::abs(ra.total - direct) > 1e-12 * (1 + std::abs(direct)) || std::abs(rs.total - (ra.total + rb.total)) > 1e-9)
      ++linear_bad;
  }
  o.pass = fluency_err <= 1e-9 && ppl_bad == 0 && coherence_err <= 1e-12 && linear_bad == 0;
  o.detail = fmt("fluency err %.2e", fluency_err) + ", uniform ppl != V for " + std::to_string(ppl_bad) + "/8 sizes" +
             fmt(", coherence err %.2e", coherence_err) + ", linearity failures " + std::to_string(linear_bad) + "/1000";
  return o;
}

// ---- gradient check -----------------------------------------------------

Outcome gradient_check() {
  auto start = std::chrono::steady_clock::now();
  Outcome o;
  PolicyArch arch;
  arch.k = 1;
  arch.embed_dim = 2;
  arch.hidden_dim = 2;
  arch.decoder_hidden = 2;
  NeuralPolicy p(Vocabulary::from_words({"ok"}), arch, 17);
  const auto& v = p.vocab();
  auto s0 = encode_state(pt::seeker("ok ok"), {"ok."}, 0, 1, v);
  auto s1 = encode_state(pt::seeker("ok"), {}, 0, 1, v);
  TokenId ok = v.id("ok");
  std::vector<PolicySample> batch = {{s0, 0, {ok, Vocabulary::kEos}, 1.5},
                                     {s0, 2, {ok, ok, Vocabulary::kEos}, -0.7},
                                     {s0, 3, {}, 0.3},
                                     {s1, 0, {ok, Vocabulary::kUnk, Vocabulary::kEos}, 2.0}};
  const double b = 0.4;
  const nn::Vector theta = p.params();
  auto lg = reinforce_loss_and_grad(p, theta, batch, b);
  const double eps = 1e-6;
  double worst = 0.0;
  std::size_t bad = 0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    nn::Vector tp = theta, tm = theta;
    tp[i] += eps;
    tm[i] -= eps;
    double fd = (reinforce_objective(p, tp, batch, b) - reinforce_objective(p, tm, batch, b)) / (2 * eps);
    double err = std::abs(fd - lg.grad[i]);
    worst = std::max(worst, err / std::max(1e-2, std::abs(fd)));
    bad += err > std::max(1e-6, 1e-4 * std::abs(fd)) ? 1 : 0;
  }
  auto same = batch;
  for (auto& s : same) s.reward = b;
  auto zero = reinforce_loss_and_grad(p, theta, same, b);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.pass = p.num_params() <= 100 && bad == 0 && zero.grad.norm() == 0.0 && secs < 60.0;
  o.detail = std::to_string(p.num_params()) + " params, " + std::to_string(bad) + " mismatches" +
             fmt(", worst rel err %.2e", worst) + fmt(", |grad| at r=b %.1e", zero.grad.norm()) + fmt(", %.2fs", secs);
  return o;
}

// ---- baseline -----------------------------------------------------------

Outcome baseline() {
  Outcome o;
  Rng rng(5);
  std::size_t mismatches = 0, checked = 0;
  for (int stream = 0; stream < 3; ++stream) {
    BaselineEstimator est(100);
    std::deque<double> window;
    for (int i = 0; i < 1000; ++i) {
      double r = rng.uniform(-50, 50);
      est.update(r);
      window.push_back(r);
      if (window.size() > 100) window.pop_front();
      double sum = 0.0;
      for (double x : window) sum += x;
      mismatches += est.value() == sum / static_cast<double>(window.size()) ? 0 : 1;
      ++checked;
    }
  }
  o.pass = mismatches == 0;
  o.detail = std::to_string(checked) + " prefixes, " + std::to_string(mismatches) + " inexact";
  return o;
}

// ---- metric oracles -----------------------------------------------------

std::size_t levenshtein(const std::vector<std::string>& a, std::size_t i, const std::vector<std::string>& b, std::size_t j) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  if (a[i] == b[j]) return levenshtein(a, i + 1, b, j + 1);
  return 1 + std::min({levenshtein(a, i + 1, b, j), levenshtein(a, i, b, j + 1), levenshtein(a, i + 1, b, j + 1)});
}

Outcome metric_oracles() {
  Outcome o;
  Rng rng(7);
  const std::vector<std::string> alphabet = {"a", "b", "c", "d"};
  std::vector<EvalRecord> edits;
  double rate_sum = 0.0;
  for (int i = 0; i < 60; ++i) {
    std::vector<std::string> x, y;
    for (std::size_t n = 1 + rng.index(6); n > 0; --n) x.push_back(rng.pick(alphabet));
    for (std::size_t n = rng.index(7); n > 0; --n) y.push_back(rng.pick(alphabet));
    edits.push_back({"e" + std::to_string(i), "s", text::join(x, " "), text::join(y, " "), {}});
    rate_sum += static_cast<double>(levenshtein(x, 0, y, 0)) / static_cast<double>(x.size());
  }
  double edit_err = std::abs(metric_edit_rate(edits) - rate_sum / 60.0);

  std::vector<EvalRecord> corpus;
  for (const auto& p : pt::synthetic(40, 0.5, 3)) corpus.push_back({p.response.id, p.seeker.text, p.response.text, p.response.text, p.response.text});
  double distinct_err = 0.0;
  for (std::size_t n : {1u, 2u}) {
    std::set<std::vector<std::string>> seen;
    std::size_t tokens = 0;
    for (const auto& r : corpus) {
      auto t = ws_split(r.rewritten_text);
      tokens += t.size();
      for (std::size_t i = 0; i + n <= t.size(); ++i) seen.insert({t.begin() + static_cast<long>(i), t.begin() + static_cast<long>(i + n)});
    }
    double expected = static_cast<double>(seen.size()) / static_cast<double>(tokens);
    distinct_err = std::max(distinct_err, std::abs(metric_distinct_n(corpus, static_cast<int>(n)) - expected));
  }

  double bleu = metric_bleu(corpus);

  HashEmbedder embedder(32, 5);
  double cos_sum = 0.0;
  for (const auto& r : corpus) {
    nn::Vector u = embedder.embed(r.seeker_text), v = embedder.embed(r.rewritten_text);
    double dot = 0, nu = 0, nv = 0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      dot += u[i] * v[i];
      nu += u[i] * u[i];
      nv += v[i] * v[i];
    }
    cos_sum += dot / std::sqrt(nu * nv);
  }
  double spec_err = std::abs(metric_specificity(corpus, embedder) - cos_sum / static_cast<double>(corpus.size()));

  o.pass = edit_err <= 1e-9 && distinct_err <= 1e-9 && std::abs(bleu - 1.0) <= 1e-9 && spec_err <= 1e-9;
  o.detail = fmt("edit rate err %.1e", edit_err) + fmt(", distinct err %.1e", distinct_err) + fmt(", BLEU(x,x) %.12f", bleu) +
             fmt(", specificity err %.1e", spec_err);
  return o;
}

// ---- dataset invariants -------------------------------------------------

Outcome dataset_invariants() {
  Outcome o;
  auto corpus = pt::synthetic(100, 0.3, 21);
  auto examples = build_warmstart_dataset(corpus, pt::oracle());
  std::size_t bad = 0;
  for (const auto& ex : examples) {
    auto rest = segment_sentences(ex.target);
    bool one_removed = rest.size() + 1 == ex.response_sentences.size();
    rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(std::min(ex.removed_index, rest.size())), ex.removed_sentence);
    bool high = pt::oracle().score(pt::seeker(ex.seeker_text), ex.removed_sentence).total() >= 2;
    bad += one_removed && rest == ex.response_sentences && high ? 0 : 1;
  }
  auto coherence = build_coherence_dataset(corpus, 1.0, 4);
  std::size_t negatives = 0, shared = 0;
  for (const auto& e : coherence) {
    if (e.label != CoherenceLabel::kIncoherent) continue;
    ++negatives;
    shared += e.thread_a == e.thread_b ? 1 : 0;
  }
  o.pass = !examples.empty() && bad == 0 && negatives > 0 && shared == 0;
  o.detail = std::to_string(examples.size()) + " warm-start examples from 100 responses, " + std::to_string(bad) +
             " violations; " + std::to_string(negatives) + " negatives, " + std::to_string(shared) + " share a thread";
  return o;
}

// ---- desk pipeline ------------------------------------------------------

struct RunResult {
  std::vector<double> rewards;
  MetricReport report;
  std::vector<EvalRecord> records;
};

cli::CliContext desk_context(std::uint64_t seed) {
  cli::CliOptions opts;
  opts.config_path = pt::source_dir() / "configs/desk.conf";
  opts.seed = seed;
  return cli::make_context(opts, nullptr);
}

// synth, build-data, train (scorers, warm, rl), rewrite and eval on a
// held-out synthetic corpus whose responses never occur in training.
RunResult run_pipeline(std::uint64_t seed, const fs::path& dir) {
  auto ctx = desk_context(seed);
  cli::cmd_synth(ctx, dir / "corpus");
  const fs::path corpus = dir / "corpus/corpus.jsonl";
  cli::cmd_build_data(ctx, corpus, std::nullopt, dir / "data");
  cli::cmd_train_scorers(ctx, corpus, dir / "scorers");
  cli::cmd_train_warm(ctx, corpus, dir / "data", dir / "warm");
  cli::cmd_train_rl(ctx, corpus, dir / "scorers", dir / "warm", false, dir / "rl");

  std::set<std::string> seen;
  for (const auto& p : ingest_jsonl(corpus).pairs) seen.insert(p.response.text);
  SyntheticSpec spec = SyntheticSpec::from_config(cli::section(ctx, "synth"), ctx.base_dir);
  spec.low_fraction = 0.5;
  std::vector<ConversationPair> heldout;
  for (auto& p : generate_synthetic_corpus(spec, pt::templates(), seed + 7919)) {
    if (!seen.count(p.response.text)) heldout.push_back(std::move(p));
  }
  fs::create_directories(dir / "heldout");
  std::ofstream(dir / "heldout/corpus.jsonl", std::ios::binary) << to_jsonl(heldout);
  cli::cmd_rewrite(ctx, dir / "heldout/corpus.jsonl", dir / "rl", dir / "scorers", dir / "rewrites");

  RunResult r;
  r.report = cli::cmd_eval(ctx, dir / "rewrites/rewritten.jsonl", dir / "scorers", std::nullopt, BleuMode::kOff, dir / "eval");
  r.records = read_records(dir / "rewrites/rewritten.jsonl");
  std::ifstream log(dir / "rl/train_log.jsonl");
  for (std::string line; std::getline(log, line);) {
    if (!line.empty()) r.rewards.push_back(nlohmann::json::parse(line).at("reward_mean").get<double>());
  }
  return r;
}

double mean_of(const std::vector<double>& v, std::size_t from, std::size_t to) {
  double s = 0.0;
  for (std::size_t i = from; i < to; ++i) s += v[i];
  return s / static_cast<double>(to - from);
}

struct DeskRuns {
  std::map<std::uint64_t, RunResult> runs;
  double seconds = 0.0;
};

Outcome learning_trend(const DeskRuns& desk) {
  Outcome o;
  int good = 0;
  for (const auto& [seed, r] : desk.runs) {
    const std::size_t n = r.rewards.size();
    bool trend = n >= 100 && n <= 500 && mean_of(r.rewards, n - 50, n) > mean_of(r.rewards, 0, 50);
    bool heldout = r.report.change_in_empathy > 0.0 && r.report.edit_rate < 2.0;
    good += trend && heldout ? 1 : 0;
    o.detail += "seed " + std::to_string(seed) + ": " + fmt("%.3f", n >= 50 ? mean_of(r.rewards, 0, 50) : 0.0) + "->" +
                fmt("%.3f", n >= 50 ? mean_of(r.rewards, n - 50, n) : 0.0) + fmt(" change %+.3f", r.report.change_in_empathy) +
                fmt(" edit %.3f", r.report.edit_rate) + (trend && heldout ? " ok; " : " no; ");
  }
  o.pass = good >= 4 && desk.seconds < 15 * 60;
  o.detail += std::to_string(good) + "/5 seeds" + fmt(", %.0fs", desk.seconds);
  return o;
}

Outcome adaptive_behavior(const DeskRuns& desk) {
  Outcome o;
  double high_sum = 0, low_sum = 0;
  std::size_t high_n = 0, low_n = 0;
  for (const auto& [seed, r] : desk.runs) {
    for (const auto& rec : r.records) {
      auto seeker = pt::seeker(rec.seeker_text);
      int before = pt::oracle().score(seeker, rec.original_text).total();
      int after = pt::oracle().score(seeker, rec.rewritten_text).total();
      if (before >= 5) {
        high_sum += after - before;
        ++high_n;
      } else if (before <= 1) {
        low_sum += after - before;
        ++low_n;
      }
    }
  }
  double high = high_n ? high_sum / static_cast<double>(high_n) : 0.0;
  double low = low_n ? low_sum / static_cast<double>(low_n) : 0.0;
  o.pass = high_n > 0 && low_n > 0 && high >= -0.25 && low > 0.0;
  o.detail = fmt("high (total>=5) mean change %+.3f", high) + " over " + std::to_string(high_n) +
             fmt(", low (total<=1) %+.3f", low) + " over " + std::to_string(low_n) + " held-out responses";
  return o;
}

std::vector<fs::path> files_under(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome reproducibility(const DeskRuns& desk, const fs::path& first, const fs::path& second_root) {
  Outcome o;
  RunResult again = run_pipeline(1, second_root);
  const RunResult& base = desk.runs.at(1);
  auto a = files_under(first), b = files_under(second_root);
  std::size_t differing = 0;
  for (const auto& rel : a) {
    if (slurp(first / rel) != slurp(second_root / rel)) ++differing;
  }
  double curve = base.rewards.size() == again.rewards.size() ? 0.0 : INFINITY;
  for (std::size_t i = 0; i < std::min(base.rewards.size(), again.rewards.size()); ++i)
    curve = std::max(curve, std::abs(base.rewards[i] - again.rewards[i]));
  o.pass = a == b && !a.empty() && differing == 0 && curve <= 1e-6;
  o.detail = std::to_string(a.size()) + " output files, " + std::to_string(differing) + " differ" +
             fmt(", max curve gap %.1e", curve);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  ::setenv("PARTNERLAB_HOME", pt::source_dir().c_str(), 1);
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "partnerlab_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  int failures = 0;
  auto report = [&](const std::string& name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s  %-28s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  };

  report("action_space", action_space);
  report("edit_semantics", edit_semantics);
  report("reward_correctness", reward_correctness);
  report("gradient_check", gradient_check);
  report("baseline_estimator", baseline);
  report("metric_oracles", metric_oracles);
  report("dataset_invariants", dataset_invariants);

  DeskRuns desk;
  std::string desk_error;
  auto start = std::chrono::steady_clock::now();
  try {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) desk.runs[seed] = run_pipeline(seed, work / ("seed_" + std::to_string(seed)));
  } catch (const std::exception& e) {
    desk_error = e.what();
  }
  desk.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  auto guarded = [&](const std::function<Outcome()>& fn) {
    return [&, fn] { return desk_error.empty() ? fn() : Outcome{false, "pipeline failed: " + desk_error}; };
  };
  report("desk_learning_trend", guarded([&] { return learning_trend(desk); }));
  report("adaptive_behavior", guarded([&] { return adaptive_behavior(desk); }));
  report("end_to_end_reproducibility",
         guarded([&] { return reproducibility(desk, work / "seed_1", work / "seed_1_again"); }));

  std::printf("%d failed\n", failures);
  return failures == 0 ? 0 : 1;
}
