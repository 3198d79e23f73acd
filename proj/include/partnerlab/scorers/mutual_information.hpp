#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "partnerlab/core/nn.hpp"
#include "partnerlab/core/tokenizer.hpp"

namespace partnerlab {

inline constexpr double kLogProbFloor = -20.0;

// Total log-probability of a target text given a source text.
class SequenceScorer {
 public:
  virtual ~SequenceScorer() = default;
  virtual double log_prob(std::string_view source, std::string_view target) const = 0;
};

struct ConditionalLmConfig {
  int embed_dim = 32;
  int hidden_dim = 64;
  int max_tokens = 64;
  int epochs = 4;
  double learning_rate = 5e-3;
  std::uint64_t seed = 11;
};

// Small encoder-decoder: the source is mean-pooled into a context vector,
// which conditions a TokenDecoder over the target. Each per-token log
// probability (target tokens then <eos>) is clamped at kLogProbFloor.
class ConditionalLm final : public SequenceScorer {
 public:
  ConditionalLm(Vocabulary vocab, const ConditionalLmConfig& config);

  // Fits on (source, target) pairs. Throws DataError on an empty set.
  static ConditionalLm train(const std::vector<std::pair<std::string, std::string>>& pairs, Vocabulary vocab,
                             const ConditionalLmConfig& config = {});

  double log_prob(std::string_view source, std::string_view target) const override;
  // Unclamped mean negative log-likelihood per target token.
  double mean_nll(const std::vector<std::pair<std::string, std::string>>& pairs) const;

  void save(const std::filesystem::path& dir) const;
  static ConditionalLm load(const std::filesystem::path& dir);

 private:
  nn::Vector encode(const std::vector<TokenId>& source) const;
  std::vector<TokenId> source_ids(std::string_view source) const;
  std::vector<TokenId> target_ids(std::string_view target) const;

  Vocabulary vocab_;
  ConditionalLmConfig config_;
  nn::ParamLayout layout_;
  nn::Tensor embed_, enc_, enc_bias_;
  nn::TokenDecoder decoder_;
  nn::Vector theta_;
};

// r_m = lambda * log p_fwd(rewritten | seeker) + (1 - lambda) * log p_bwd(seeker | rewritten).
double mutual_information_reward(std::string_view seeker, std::string_view rewritten, const SequenceScorer& forward,
                                 const SequenceScorer& backward, double lambda_mi);

}  // namespace partnerlab
