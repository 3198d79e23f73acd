#include "partnerlab/training/scorer_bundle.hpp"

#include "partnerlab/core/checkpoint.hpp"
#include "partnerlab/core/errors.hpp"
#include "partnerlab/core/tokenizer.hpp"
#include "partnerlab/corpus/datasets.hpp"

namespace fs = std::filesystem;

namespace partnerlab {

namespace {

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p = value;
  return p.is_absolute() ? p : base / p;
}

nlohmann::json metrics_json(const ClassifierMetrics& m) {
  return {{"train_accuracy", m.train_accuracy},
          {"heldout_accuracy", m.heldout_accuracy},
          {"train_size", m.train_size},
          {"heldout_size", m.heldout_size}};
}

}  // namespace

ScorerBundleConfig ScorerBundleConfig::from_config(const KeyValueConfig& cfg, const fs::path& base_dir) {
  ScorerBundleConfig c;
  c.empathy_impl = cfg.get_string("empathy.impl", c.empathy_impl);
  if (c.empathy_impl != "lexicon_oracle" && c.empathy_impl != "trained") {
    throw ConfigError("scorers", "empathy.impl must be lexicon_oracle or trained, got '" + c.empathy_impl + "'");
  }
  if (auto v = cfg.find("empathy.lexicon_dir")) c.lexicon_dir = resolve(base_dir, *v);
  if (auto v = cfg.find("safety.patterns")) c.safety_patterns = resolve(base_dir, *v);
  c.empathy.min_examples = static_cast<std::size_t>(cfg.get_int("empathy.min_examples", 20));
  c.empathy.accuracy_floor = cfg.get_double("empathy.accuracy_floor", c.empathy.accuracy_floor);
  c.coherence_negative_ratio = cfg.get_double("coherence.negative_ratio", c.coherence_negative_ratio);
  c.coherence.accuracy_floor = cfg.get_double("coherence.accuracy_floor", c.coherence.accuracy_floor);
  c.mutual_information.embed_dim = static_cast<int>(cfg.get_int("mi.embed_dim", c.mutual_information.embed_dim));
  c.mutual_information.hidden_dim = static_cast<int>(cfg.get_int("mi.hidden_dim", c.mutual_information.hidden_dim));
  c.mutual_information.epochs = static_cast<int>(cfg.get_int("mi.epochs", c.mutual_information.epochs));
  c.mutual_information.learning_rate = cfg.get_double("mi.learning_rate", c.mutual_information.learning_rate);
  c.vocab_size = static_cast<std::size_t>(cfg.get_int("vocab_size", static_cast<long long>(c.vocab_size)));
  c.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<long long>(c.seed)));
  return c;
}

RewardModel ScorerBundle::reward_model(const RewardWeights& weights) const {
  if (!empathy || !fluency_lm || !coherence || !mi_forward || !mi_backward) {
    throw ModelError("scorers", "scorer bundle is incomplete");
  }
  return RewardModel(*empathy, *fluency_lm, *coherence, *mi_forward, *mi_backward, weights);
}

void ScorerBundle::save(const fs::path& dir) const {
  if (!empathy || !fluency_lm || !coherence || !mi_forward || !mi_backward) {
    throw ModelError("scorers", "cannot save an incomplete scorer bundle");
  }
  fs::create_directories(dir);
  empathy->save(dir / "empathy");
  fluency_lm->save(dir / "fluency_lm");
  coherence->save(dir / "coherence");
  mi_forward->save(dir / "mi_forward");
  mi_backward->save(dir / "mi_backward");
  write_text_file(dir / "safety_patterns.txt", safety_source);
  write_manifest(dir, "scorer_bundle",
                 {{"empathy", empathy->kind()}, {"fluency_lm", fluency_lm->kind()}, {"coherence", coherence->kind()}},
                 metrics);
}

ScorerBundle ScorerBundle::load(const fs::path& dir) {
  Manifest m = read_manifest(dir, "scorer_bundle");
  ScorerBundle b;
  b.empathy = load_empathy_scorer(dir / "empathy");
  b.fluency_lm = load_language_model(dir / "fluency_lm");
  b.coherence = load_coherence_model(dir / "coherence");
  b.mi_forward = std::make_unique<ConditionalLm>(ConditionalLm::load(dir / "mi_forward"));
  b.mi_backward = std::make_unique<ConditionalLm>(ConditionalLm::load(dir / "mi_backward"));
  b.safety_source = read_text_file(dir / "safety_patterns.txt");
  b.safety = SafetyFilter::parse(b.safety_source, (dir / "safety_patterns.txt").string());
  b.metrics = m.metrics;
  return b;
}

ScorerBundle train_scorer_bundle(const std::vector<ConversationPair>& corpus, const ScorerBundleConfig& config) {
  if (corpus.empty()) throw DataError("scorers", "cannot train scorers on an empty corpus");
  ScorerBundle b;

  if (config.empathy_impl == "lexicon_oracle") {
    if (config.lexicon_dir.empty()) throw ConfigError("scorers", "empathy.lexicon_dir is required for the lexicon oracle");
    b.empathy = std::make_unique<LexiconOracle>(LexiconOracle::load(config.lexicon_dir));
  } else {
    auto trained = train_empathy_classifier(corpus, config.empathy);
    b.metrics["empathy"] = metrics_json(trained.metrics());
    b.empathy = std::make_unique<TrainedEmpathyScorer>(std::move(trained));
  }

  std::vector<std::string> texts;
  std::vector<std::pair<std::string, std::string>> forward, backward;
  for (const auto& p : corpus) {
    texts.push_back(p.seeker.text);
    texts.push_back(p.response.text);
    forward.emplace_back(p.seeker.text, p.response.text);
    backward.emplace_back(p.response.text, p.seeker.text);
  }
  b.fluency_lm = std::make_unique<BigramLm>(BigramLm::train(texts, config.fluency));

  auto coherence_data = build_coherence_dataset(corpus, config.coherence_negative_ratio, config.seed);
  CoherenceTrainConfig cc = config.coherence;
  cc.linear.seed = config.seed + 3;
  auto classifier = train_coherence_classifier(coherence_data, cc);
  b.metrics["coherence"] = metrics_json(classifier.metrics());
  b.coherence = std::make_unique<CoherenceClassifier>(std::move(classifier));

  Vocabulary vocab = Vocabulary::build(texts, config.vocab_size);
  ConditionalLmConfig mc = config.mutual_information;
  mc.seed = config.seed + 11;
  b.mi_forward = std::make_unique<ConditionalLm>(ConditionalLm::train(forward, vocab, mc));
  mc.seed = config.seed + 12;
  b.mi_backward = std::make_unique<ConditionalLm>(ConditionalLm::train(backward, vocab, mc));
  b.metrics["mi_forward_nll"] = b.mi_forward->mean_nll(forward);
  b.metrics["mi_backward_nll"] = b.mi_backward->mean_nll(backward);

  if (!config.safety_patterns.empty()) {
    b.safety_source = read_text_file(config.safety_patterns);
    b.safety = SafetyFilter::parse(b.safety_source, config.safety_patterns.string());
  }
  return b;
}

}  // namespace partnerlab
