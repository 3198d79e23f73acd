#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "partnerlab/core/nn.hpp"

namespace partnerlab {

// Hashed sparse feature set (bucket indices, binary values).
using FeatureVector = std::vector<std::uint32_t>;

struct LabeledFeatures {
  FeatureVector features;
  std::vector<int> labels;  // one label per head
};

struct LinearTrainConfig {
  int epochs = 12;
  double learning_rate = 0.5;
  double l2 = 1e-5;
  std::uint64_t seed = 7;
};

// Multi-head multinomial logistic regression over hashed binary features.
// Each head predicts one categorical label from the same feature vector.
class LinearClassifier {
 public:
  LinearClassifier() = default;
  LinearClassifier(int num_heads, int num_classes, int hash_bits);

  int num_heads() const { return heads_; }
  int num_classes() const { return classes_; }
  int hash_bits() const { return bits_; }
  std::uint32_t bucket_mask() const { return (1u << bits_) - 1u; }

  std::vector<double> predict_proba(const FeatureVector& x, int head) const;
  int predict(const FeatureVector& x, int head) const;

  // Plain SGD on the summed per-head cross-entropy, shuffled each epoch.
  void fit(const std::vector<LabeledFeatures>& data, const LinearTrainConfig& cfg);

  void save(const std::filesystem::path& weights_path) const;
  void load(const std::filesystem::path& weights_path);

 private:
  double& weight(int head, int cls, std::uint32_t bucket) {
    return w_[static_cast<Eigen::Index>((static_cast<std::size_t>(head) * classes_ + cls) * (1u << bits_) + bucket)];
  }
  double weight(int head, int cls, std::uint32_t bucket) const {
    return w_[static_cast<Eigen::Index>((static_cast<std::size_t>(head) * classes_ + cls) * (1u << bits_) + bucket)];
  }
  std::size_t bias_offset() const { return static_cast<std::size_t>(heads_) * classes_ * (1u << bits_); }

  int heads_ = 0;
  int classes_ = 0;
  int bits_ = 0;
  nn::Vector w_;  // [head][class][bucket] followed by [head][class] biases
};

// Hashes a string feature into the bucket range of `bits` bits.
std::uint32_t hash_feature(std::string_view name, int bits);

// Appends hashed unigram and bigram features of `tokens`, namespaced by
// `prefix` so different fields of one example do not collide.
void add_ngram_features(FeatureVector& out, const std::vector<std::string>& tokens, std::string_view prefix, int bits);

}  // namespace partnerlab
