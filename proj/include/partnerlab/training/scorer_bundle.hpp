#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "partnerlab/core/config.hpp"
#include "partnerlab/corpus/safety.hpp"
#include "partnerlab/corpus/types.hpp"
#include "partnerlab/scorers/coherence.hpp"
#include "partnerlab/scorers/empathy.hpp"
#include "partnerlab/scorers/language_model.hpp"
#include "partnerlab/scorers/mutual_information.hpp"
#include "partnerlab/scorers/reward.hpp"

namespace partnerlab {

struct ScorerBundleConfig {
  std::string empathy_impl = "lexicon_oracle";  // or "trained"
  std::filesystem::path lexicon_dir;
  std::filesystem::path safety_patterns;
  EmpathyTrainConfig empathy;
  BigramLmConfig fluency;
  double coherence_negative_ratio = 1.0;
  CoherenceTrainConfig coherence;
  ConditionalLmConfig mutual_information;
  std::size_t vocab_size = 8000;
  std::uint64_t seed = 0;

  // Keys: empathy.impl, empathy.lexicon_dir, empathy.min_examples,
  // empathy.accuracy_floor, safety.patterns, coherence.negative_ratio,
  // coherence.accuracy_floor, mi.embed_dim, mi.hidden_dim, mi.epochs,
  // mi.learning_rate, vocab_size, seed. Relative paths resolve against
  // base_dir.
  static ScorerBundleConfig from_config(const KeyValueConfig& cfg, const std::filesystem::path& base_dir);
};

// Every model the reward and the metrics need, loaded or trained together.
// Layout on disk: empathy/, fluency_lm/, coherence/, mi_forward/,
// mi_backward/, safety_patterns.txt and a bundle manifest.
struct ScorerBundle {
  std::unique_ptr<EmpathyScorer> empathy;
  std::unique_ptr<LanguageModel> fluency_lm;
  std::unique_ptr<CoherenceModel> coherence;
  std::unique_ptr<ConditionalLm> mi_forward;   // log p(response | seeker)
  std::unique_ptr<ConditionalLm> mi_backward;  // log p(seeker | response)
  SafetyFilter safety;
  std::string safety_source;
  nlohmann::json metrics = nlohmann::json::object();

  RewardModel reward_model(const RewardWeights& weights) const;

  void save(const std::filesystem::path& dir) const;
  static ScorerBundle load(const std::filesystem::path& dir);
};

// Trains the fluency LM, the coherence classifier (on the corpus's coherence
// dataset), both mutual-information models and, for the "trained" empathy
// implementation, the empathy classifier.
ScorerBundle train_scorer_bundle(const std::vector<ConversationPair>& corpus, const ScorerBundleConfig& config);

}  // namespace partnerlab
