#include "partnerlab/scorers/mutual_information.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "partnerlab/core/checkpoint.hpp"
#include "partnerlab/core/errors.hpp"

namespace fs = std::filesystem;

namespace partnerlab {

ConditionalLm::ConditionalLm(Vocabulary vocab, const ConditionalLmConfig& config)
    : vocab_(std::move(vocab)), config_(config) {
  const int v = vocab_.size();
  embed_ = layout_.add("embed", config_.embed_dim, v);
  enc_ = layout_.add("encoder", config_.hidden_dim, config_.embed_dim);
  enc_bias_ = layout_.add("encoder.bias", config_.hidden_dim, 1);
  decoder_ = nn::TokenDecoder(layout_, "decoder", config_.hidden_dim, config_.hidden_dim, v);
  Rng rng(config_.seed);
  theta_ = nn::init_params(layout_, rng);
}

std::vector<TokenId> ConditionalLm::source_ids(std::string_view source) const {
  auto ids = vocab_.encode(source);
  if (ids.size() > static_cast<std::size_t>(config_.max_tokens)) ids.resize(static_cast<std::size_t>(config_.max_tokens));
  return ids;
}

std::vector<TokenId> ConditionalLm::target_ids(std::string_view target) const {
  auto ids = source_ids(target);
  ids.push_back(Vocabulary::kEos);
  return ids;
}

nn::Vector ConditionalLm::encode(const std::vector<TokenId>& source) const {
  nn::Vector pooled = nn::Vector::Zero(config_.embed_dim);
  auto emb = nn::view(theta_, embed_);
  for (TokenId t : source) pooled += emb.col(t);
  if (!source.empty()) pooled /= static_cast<double>(source.size());
  return (nn::view(theta_, enc_) * pooled + nn::view(theta_, enc_bias_).col(0)).array().tanh();
}

double ConditionalLm::log_prob(std::string_view source, std::string_view target) const {
  nn::Vector h = encode(source_ids(source));
  auto tgt = target_ids(target);
  // Per-token floor: score prefixes one token at a time.
  double total = 0.0;
  TokenId p1 = Vocabulary::kBos, p2 = Vocabulary::kBos;
  for (TokenId y : tgt) {
    nn::Vector probs = decoder_.next_probs(theta_, h, p1, p2);
    total += std::max(kLogProbFloor, std::log(probs[y]));
    p2 = p1;
    p1 = y;
  }
  return total;
}

double ConditionalLm::mean_nll(const std::vector<std::pair<std::string, std::string>>& pairs) const {
  double nll = 0.0;
  std::size_t n = 0;
  for (const auto& [s, t] : pairs) {
    auto tgt = target_ids(t);
    nll -= decoder_.log_prob(theta_, encode(source_ids(s)), tgt);
    n += tgt.size();
  }
  return n ? nll / static_cast<double>(n) : 0.0;
}

ConditionalLm ConditionalLm::train(const std::vector<std::pair<std::string, std::string>>& pairs, Vocabulary vocab,
                                   const ConditionalLmConfig& config) {
  if (pairs.empty()) throw DataError("mutual_information", "no training pairs for the conditional LM");
  ConditionalLm lm(std::move(vocab), config);
  nn::Adam opt(config.learning_rate);
  Rng rng(config.seed + 1);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  nn::Vector grad = nn::Vector::Zero(lm.theta_.size());
  const std::size_t batch = 8;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t b = 0; b < order.size(); b += batch) {
      grad.setZero();
      std::size_t end = std::min(order.size(), b + batch);
      for (std::size_t i = b; i < end; ++i) {
        const auto& [s, t] = pairs[order[i]];
        auto src = lm.source_ids(s);
        auto tgt = lm.target_ids(t);
        nn::Vector pooled = nn::Vector::Zero(config.embed_dim);
        auto emb = nn::view(lm.theta_, lm.embed_);
        for (TokenId id : src) pooled += emb.col(id);
        if (!src.empty()) pooled /= static_cast<double>(src.size());
        nn::Vector h = (nn::view(lm.theta_, lm.enc_) * pooled + nn::view(lm.theta_, lm.enc_bias_).col(0)).array().tanh();
        nn::Vector dh = nn::Vector::Zero(config.hidden_dim);
        // Minimizing NLL: accumulate the gradient of -log p.
        double scale = -1.0 / static_cast<double>(tgt.size() * (end - b));
        lm.decoder_.accumulate_grad(lm.theta_, h, tgt, scale, grad, dh);
        nn::Vector dpre = dh.array() * (1.0 - h.array().square());
        nn::view(grad, lm.enc_).noalias() += dpre * pooled.transpose();
        nn::view(grad, lm.enc_bias_).col(0) += dpre;
        if (!src.empty()) {
          nn::Vector dpooled = nn::view(lm.theta_, lm.enc_).transpose() * dpre / static_cast<double>(src.size());
          auto gemb = nn::view(grad, lm.embed_);
          for (TokenId id : src) gemb.col(id) += dpooled;
        }
      }
      nn::clip_global_norm(grad, 1.0);
      opt.step(lm.theta_, grad);
    }
  }
  return lm;
}

void ConditionalLm::save(const fs::path& dir) const {
  fs::create_directories(dir);
  vocab_.save(dir / "vocab.txt");
  nn::save_params(dir / "weights.bin", theta_);
  write_manifest(dir, "conditional_lm",
                 {{"embed_dim", config_.embed_dim},
                  {"hidden_dim", config_.hidden_dim},
                  {"max_tokens", config_.max_tokens},
                  {"vocab_size", vocab_.size()}});
}

ConditionalLm ConditionalLm::load(const fs::path& dir) {
  Manifest m = read_manifest(dir, "conditional_lm");
  ConditionalLmConfig cfg;
  cfg.embed_dim = m.config.value("embed_dim", cfg.embed_dim);
  cfg.hidden_dim = m.config.value("hidden_dim", cfg.hidden_dim);
  cfg.max_tokens = m.config.value("max_tokens", cfg.max_tokens);
  ConditionalLm lm(Vocabulary::load(dir / "vocab.txt"), cfg);
  lm.theta_ = nn::load_params(dir / "weights.bin", lm.layout_.size());
  return lm;
}

double mutual_information_reward(std::string_view seeker, std::string_view rewritten, const SequenceScorer& forward,
                                 const SequenceScorer& backward, double lambda_mi) {
  if (lambda_mi < 0.0 || lambda_mi > 1.0) throw ConfigError("mutual_information", "lambda_mi must lie in [0, 1]");
  double fwd = lambda_mi > 0.0 ? forward.log_prob(seeker, rewritten) : 0.0;
  double bwd = lambda_mi < 1.0 ? backward.log_prob(rewritten, seeker) : 0.0;
  return lambda_mi * fwd + (1.0 - lambda_mi) * bwd;
}

}  // namespace partnerlab
