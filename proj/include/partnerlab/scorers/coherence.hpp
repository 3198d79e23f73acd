#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "partnerlab/core/linear_classifier.hpp"
#include "partnerlab/corpus/types.hpp"
#include "partnerlab/scorers/empathy.hpp"

namespace partnerlab {

// Sentence-pair classifier giving p_coherent(a, b). Order matters: `a` is the
// candidate, `b` the existing sentence.
class CoherenceModel {
 public:
  virtual ~CoherenceModel() = default;
  virtual double coherence_prob(std::string_view sentence_a, std::string_view sentence_b) const = 0;
  virtual std::string kind() const = 0;
  virtual void save(const std::filesystem::path& dir) const = 0;
};

// Returns a fixed probability for every pair.
class ConstantCoherenceModel final : public CoherenceModel {
 public:
  explicit ConstantCoherenceModel(double p = 0.5) : p_(p) {}
  double coherence_prob(std::string_view, std::string_view) const override { return p_; }
  std::string kind() const override { return "constant"; }
  void save(const std::filesystem::path& dir) const override;

 private:
  double p_;
};

struct CoherenceTrainConfig {
  std::size_t min_examples = 10;
  double holdout_fraction = 0.2;
  double accuracy_floor = 0.0;
  int hash_bits = 18;
  LinearTrainConfig linear;
};

// Logistic regression over hashed n-grams of each sentence plus hashed
// cross-sentence word pairs. A default-constructed classifier is untrained
// and refuses to score.
class CoherenceClassifier final : public CoherenceModel {
 public:
  CoherenceClassifier() = default;

  double coherence_prob(std::string_view sentence_a, std::string_view sentence_b) const override;
  std::string kind() const override { return "classifier"; }
  void save(const std::filesystem::path& dir) const override;
  static CoherenceClassifier load(const std::filesystem::path& dir);

  bool trained() const { return trained_; }
  const ClassifierMetrics& metrics() const { return metrics_; }

  friend CoherenceClassifier train_coherence_classifier(const std::vector<CoherencePairExample>&,
                                                        const CoherenceTrainConfig&);

 private:
  FeatureVector features(std::string_view a, std::string_view b) const;

  int bits_ = 18;
  bool trained_ = false;
  LinearClassifier model_;
  ClassifierMetrics metrics_;
};

// Throws DataError when data is too small or holds one class only;
// ModelError if held-out accuracy falls below the floor.
CoherenceClassifier train_coherence_classifier(const std::vector<CoherencePairExample>& data,
                                               const CoherenceTrainConfig& config = {});

std::unique_ptr<CoherenceModel> load_coherence_model(const std::filesystem::path& dir);

// r_c: mean of p_coherent(candidate, s) over the window sentences. An empty
// window imposes no constraint and yields 1.0.
double coherence_reward(std::string_view candidate, const std::vector<std::string>& window,
                        const CoherenceModel& model);

}  // namespace partnerlab
