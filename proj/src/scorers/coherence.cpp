#include "partnerlab/scorers/coherence.hpp"

#include <cctype>
#include <numeric>

#include "partnerlab/core/checkpoint.hpp"
#include "partnerlab/core/errors.hpp"
#include "partnerlab/core/tokenizer.hpp"

namespace fs = std::filesystem;

namespace partnerlab {

namespace {
bool is_word(const std::string& tok) { return !tok.empty() && std::isalnum(static_cast<unsigned char>(tok[0])); }
}  // namespace

void ConstantCoherenceModel::save(const fs::path& dir) const {
  fs::create_directories(dir);
  write_manifest(dir, "coherence_model", {{"impl", kind()}, {"p", p_}});
}

FeatureVector CoherenceClassifier::features(std::string_view a, std::string_view b) const {
  auto ta = tokenize(a);
  auto tb = tokenize(b);
  FeatureVector f;
  add_ngram_features(f, ta, "a", bits_);
  add_ngram_features(f, tb, "b", bits_);
  for (const auto& wa : ta) {
    if (!is_word(wa)) continue;
    for (const auto& wb : tb) {
      if (!is_word(wb)) continue;
      f.push_back(hash_feature("x|" + wa + "|" + wb, bits_));
      if (wa == wb) f.push_back(hash_feature("shared|" + wa, bits_));
    }
  }
  return f;
}

double CoherenceClassifier::coherence_prob(std::string_view a, std::string_view b) const {
  if (!trained_) throw ModelError("coherence", "coherence classifier is untrained");
  return model_.predict_proba(features(a, b), 0)[static_cast<int>(CoherenceLabel::kCoherent)];
}

void CoherenceClassifier::save(const fs::path& dir) const {
  if (!trained_) throw ModelError("coherence", "refusing to save an untrained coherence classifier");
  fs::create_directories(dir);
  model_.save(dir / "weights.bin");
  write_manifest(dir, "coherence_model", {{"impl", kind()}, {"hash_bits", bits_}},
                 {{"train_accuracy", metrics_.train_accuracy},
                  {"heldout_accuracy", metrics_.heldout_accuracy},
                  {"train_size", metrics_.train_size},
                  {"heldout_size", metrics_.heldout_size}});
}

CoherenceClassifier CoherenceClassifier::load(const fs::path& dir) {
  Manifest m = read_manifest(dir, "coherence_model");
  CoherenceClassifier c;
  c.bits_ = m.config.value("hash_bits", 18);
  c.model_ = LinearClassifier(1, 2, c.bits_);
  c.model_.load(dir / "weights.bin");
  c.metrics_.train_accuracy = m.metrics.value("train_accuracy", 0.0);
  c.metrics_.heldout_accuracy = m.metrics.value("heldout_accuracy", 0.0);
  c.trained_ = true;
  return c;
}

CoherenceClassifier train_coherence_classifier(const std::vector<CoherencePairExample>& data,
                                               const CoherenceTrainConfig& config) {
  if (data.size() < std::max<std::size_t>(config.min_examples, 2)) {
    throw DataError("coherence", "insufficient data: " + std::to_string(data.size()) + " pairs");
  }
  std::size_t positives = 0;
  for (const auto& ex : data) positives += ex.label == CoherenceLabel::kCoherent;
  if (positives == 0 || positives == data.size()) {
    throw DataError("coherence", "training data contains a single class");
  }
  CoherenceClassifier c;
  c.bits_ = config.hash_bits;
  c.model_ = LinearClassifier(1, 2, c.bits_);

  Rng rng(config.linear.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  auto n_holdout = static_cast<std::size_t>(config.holdout_fraction * static_cast<double>(data.size()));
  n_holdout = std::min(n_holdout, data.size() - 1);
  std::vector<LabeledFeatures> train, held;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& ex = data[order[i]];
    (i < n_holdout ? held : train).push_back({c.features(ex.sentence_a, ex.sentence_b), {static_cast<int>(ex.label)}});
  }
  c.model_.fit(train, config.linear);
  c.trained_ = true;
  auto accuracy = [&](const std::vector<LabeledFeatures>& set) {
    if (set.empty()) return 0.0;
    double hits = 0.0;
    for (const auto& ex : set) hits += c.model_.predict(ex.features, 0) == ex.labels[0];
    return hits / static_cast<double>(set.size());
  };
  c.metrics_.train_accuracy = accuracy(train);
  c.metrics_.heldout_accuracy = accuracy(held);
  c.metrics_.train_size = train.size();
  c.metrics_.heldout_size = held.size();
  if (!held.empty() && c.metrics_.heldout_accuracy < config.accuracy_floor) {
    throw ModelError("coherence", "held-out accuracy " + std::to_string(c.metrics_.heldout_accuracy) +
                                      " is below the configured floor " + std::to_string(config.accuracy_floor));
  }
  return c;
}

std::unique_ptr<CoherenceModel> load_coherence_model(const fs::path& dir) {
  Manifest m = read_manifest(dir, "coherence_model");
  std::string impl = m.config.value("impl", "");
  if (impl == "classifier") return std::make_unique<CoherenceClassifier>(CoherenceClassifier::load(dir));
  if (impl == "constant") return std::make_unique<ConstantCoherenceModel>(m.config.value("p", 0.5));
  throw ConfigError("coherence", "unknown coherence model '" + impl + "' in " + dir.string());
}

double coherence_reward(std::string_view candidate, const std::vector<std::string>& window,
                        const CoherenceModel& model) {
  if (window.empty()) return 1.0;
  double sum = 0.0;
  for (const auto& s : window) sum += model.coherence_prob(candidate, s);
  return sum / static_cast<double>(window.size());
}

}  // namespace partnerlab
