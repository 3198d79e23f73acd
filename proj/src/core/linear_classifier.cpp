#include "partnerlab/core/linear_classifier.hpp"

#include <cmath>
#include <numeric>

#include "partnerlab/core/errors.hpp"
#include "partnerlab/core/hashing.hpp"

namespace partnerlab {

LinearClassifier::LinearClassifier(int num_heads, int num_classes, int hash_bits)
    : heads_(num_heads), classes_(num_classes), bits_(hash_bits) {
  if (num_heads < 1 || num_classes < 2 || hash_bits < 4 || hash_bits > 24) {
    throw ConfigError("classifier", "invalid shape");
  }
  w_ = nn::Vector::Zero(static_cast<Eigen::Index>(bias_offset() + static_cast<std::size_t>(heads_) * classes_));
}

std::vector<double> LinearClassifier::predict_proba(const FeatureVector& x, int head) const {
  nn::Vector logits(classes_);
  for (int c = 0; c < classes_; ++c) {
    double s = w_[static_cast<Eigen::Index>(bias_offset() + static_cast<std::size_t>(head) * classes_ + c)];
    for (auto b : x) s += weight(head, c, b);
    logits[c] = s;
  }
  nn::Vector p = nn::softmax(logits);
  return {p.data(), p.data() + p.size()};
}

int LinearClassifier::predict(const FeatureVector& x, int head) const {
  auto p = predict_proba(x, head);
  int best = 0;
  for (int c = 1; c < classes_; ++c) {
    if (p[static_cast<size_t>(c)] > p[static_cast<size_t>(best)]) best = c;
  }
  return best;
}

void LinearClassifier::fit(const std::vector<LabeledFeatures>& data, const LinearTrainConfig& cfg) {
  if (w_.size() == 0) throw ModelError("classifier", "fit called on an unshaped classifier");
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double lr = cfg.learning_rate / (1.0 + 0.5 * epoch);
    for (auto idx : order) {
      const auto& ex = data[idx];
      for (int h = 0; h < heads_; ++h) {
        auto p = predict_proba(ex.features, h);
        for (int c = 0; c < classes_; ++c) {
          double g = p[static_cast<size_t>(c)] - (ex.labels[static_cast<size_t>(h)] == c ? 1.0 : 0.0);
          if (g == 0.0) continue;
          for (auto b : ex.features) {
            double& w = weight(h, c, b);
            w -= lr * (g + cfg.l2 * w);
          }
          w_[static_cast<Eigen::Index>(bias_offset() + static_cast<std::size_t>(h) * classes_ + c)] -= lr * g;
        }
      }
    }
  }
}

void LinearClassifier::save(const std::filesystem::path& weights_path) const { nn::save_params(weights_path, w_); }

void LinearClassifier::load(const std::filesystem::path& weights_path) {
  w_ = nn::load_params(weights_path, bias_offset() + static_cast<std::size_t>(heads_) * classes_);
}

std::uint32_t hash_feature(std::string_view name, int bits) {
  return static_cast<std::uint32_t>(hashing::fnv1a(name) & ((1ULL << bits) - 1ULL));
}

void add_ngram_features(FeatureVector& out, const std::vector<std::string>& tokens, std::string_view prefix,
                        int bits) {
  std::string p(prefix);
  out.push_back(hash_feature(p + "|bias", bits));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out.push_back(hash_feature(p + "|u|" + tokens[i], bits));
    const std::string& prev = i == 0 ? std::string("<s>") : tokens[i - 1];
    out.push_back(hash_feature(p + "|b|" + prev + " " + tokens[i], bits));
  }
}

}  // namespace partnerlab
